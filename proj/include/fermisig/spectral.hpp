#pragma once

// Eigenanalysis and trace functionals of the fermionic signature operator:
// spectrum reports with +- pairing, trace identities (volume, tr S^4), the
// Theta-constrained Monte Carlo trace integrals, positive-part traces, the
// chiral index and the 1/n eigenvalue decay bound.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "fermisig/constants.hpp"
#include "fermisig/geometry.hpp"
#include "fermisig/rng.hpp"
#include "fermisig/sigop.hpp"

namespace fermisig {

struct SpectrumReport {
  std::vector<double> eigenvalues;  // ordered |l1| >= |l2| >= ..., ties by signed value descending
  double pairing_defect = 0.0;
  std::map<int, double> traces;  // power -> eigenvalue-sum trace, powers 2,4,6
  double positive_trace = 0.0;
  long long index = 0;
  double sym_defect = 0.0;  // assembly Hermiticity defect (0 for exact operators)

  // optional spectral factors for eigenvector-level checks: for chiral
  // operators the SVD of the weighted LR block, otherwise eigenvectors
  std::optional<Eigen::MatrixXcd> svd_u, svd_v;
  std::optional<Eigen::MatrixXcd> vectors;

  double lambda_max() const { return eigenvalues.empty() ? 0.0 : std::fabs(eigenvalues.front()); }
};

namespace detail {

inline void sort_eigenvalues(std::vector<double>& ev) {
  std::sort(ev.begin(), ev.end(), [](double a, double b) {
    const double fa = std::fabs(a), fb = std::fabs(b);
    if (fa != fb) return fa > fb;
    return a > b;
  });
}

// greedy +- matching on the sorted-by-|.| list; robust under multiplicity
// clusters. Returns the max residual |l+ + l-| over matched pairs.
inline double greedy_pairing_defect(const std::vector<double>& sorted) {
  if (sorted.size() % 2 != 0) throw OddUnpairedEigenvalue("odd spectrum size");
  std::vector<double> pool = sorted;
  double defect = 0.0;
  std::vector<bool> used(pool.size(), false);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    std::size_t best = pool.size();
    double best_res = std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      if (used[j]) continue;
      const double res = std::fabs(pool[i] + pool[j]);
      if (res < best_res) {
        best_res = res;
        best = j;
      }
      // list is |.|-sorted; once magnitudes drift below the best residual we can stop
      if (std::fabs(pool[i]) - std::fabs(pool[j]) > best_res) break;
    }
    if (best == pool.size()) throw OddUnpairedEigenvalue("unpaired eigenvalue");
    used[best] = true;
    defect = std::max(defect, best_res);
  }
  return defect;
}

inline void finalize_report(SpectrumReport& rep) {
  sort_eigenvalues(rep.eigenvalues);
  rep.pairing_defect = greedy_pairing_defect(rep.eigenvalues);
  for (int q = 1; q <= 3; ++q) {
    double sum = 0.0;
    for (double l : rep.eigenvalues) sum += std::pow(l, 2 * q);
    rep.traces[2 * q] = sum;
  }
  rep.positive_trace = 0.0;
  for (double l : rep.eigenvalues)
    if (l > 0.0) rep.positive_trace += l;
}

}  // namespace detail

inline SpectrumReport spectrum(const SimpleOperator& op, bool want_vectors = false) {
  SpectrumReport rep;
  const double pref = 1.0 / (kTwoPi * std::sqrt(2.0));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(op.T, want_vectors ? (Eigen::ComputeFullU | Eigen::ComputeFullV) : 0);
  for (int i = 0; i < op.K; ++i) {
    const double s = pref * svd.singularValues()(i);
    rep.eigenvalues.push_back(s);
    rep.eigenvalues.push_back(-s);
  }
  if (want_vectors) {
    rep.svd_u = svd.matrixU().cast<cplx>();
    rep.svd_v = svd.matrixV().cast<cplx>();
  }
  detail::finalize_report(rep);
  return rep;
}

namespace detail {

// Singular values of the weighted chiral block through the Hermitian
// eigendecomposition of A^dag A. More robust than bidiagonalization on the
// highly degenerate kernels that arise here (constant blocks on diamonds),
// and the sigma of interest are far above the sqrt(eps)|A| resolution floor.
struct ChiralSvd {
  Eigen::VectorXd sigma;  // descending
  Eigen::MatrixXcd u, v;
};

inline ChiralSvd chiral_svd(const Eigen::MatrixXcd& a, bool want_vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.adjoint() * a,
                                                     want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw EigensolverFailure("eigendecomposition of the chiral block failed");
  const int n = static_cast<int>(a.cols());
  ChiralSvd out;
  out.sigma.resize(n);
  for (int i = 0; i < n; ++i) out.sigma(i) = std::sqrt(std::max(0.0, es.eigenvalues()(n - 1 - i)));
  if (want_vectors) {
    out.v.resize(n, n);
    out.u.resize(a.rows(), n);
    for (int i = 0; i < n; ++i) {
      out.v.col(i) = es.eigenvectors().col(n - 1 - i);
      out.u.col(i) = out.sigma(i) > 1e-14 * out.sigma(0) ? Eigen::MatrixXcd(a * out.v.col(i) / out.sigma(i))
                                                         : Eigen::MatrixXcd(Eigen::MatrixXcd::Zero(a.rows(), 1));
    }
  }
  return out;
}

}  // namespace detail

inline SpectrumReport spectrum(const OperatorMatrix& op, bool want_vectors = false) {
  SpectrumReport rep;
  rep.sym_defect = op.sym_defect;
  if (op.chiral) {
    const Eigen::MatrixXcd a = op.weighted_block(op.lr);
    const detail::ChiralSvd svd = detail::chiral_svd(a, want_vectors);
    for (int i = 0; i < svd.sigma.size(); ++i) {
      rep.eigenvalues.push_back(svd.sigma(i));
      rep.eigenvalues.push_back(-svd.sigma(i));
    }
    if (want_vectors) {
      rep.svd_u = svd.u;
      rep.svd_v = svd.v;
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op.hermitian(),
                                                       want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw EigensolverFailure("Hermitian eigendecomposition failed");
    rep.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    if (want_vectors) rep.vectors = es.eigenvectors();
  }
  detail::finalize_report(rep);
  return rep;
}

inline SpectrumReport spectrum(const GalerkinOperator& op) {
  SpectrumReport rep;
  rep.sym_defect = op.herm_defect;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op.matrix, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw EigensolverFailure("Galerkin eigendecomposition failed");
  rep.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  detail::finalize_report(rep);
  return rep;
}

inline double symmetry_defect(const SpectrumReport& rep) { return rep.pairing_defect; }

// tr(S^{2q}) via both routes: the eigenvalue sum and an independent weighted
// matrix power.
struct TracePair {
  double eigen_sum = 0.0;
  double matrix_power = 0.0;
};

inline double trace_power_matrix(const OperatorMatrix& op, int q) {
  if (q < 1) throw InvariantViolation("trace power q must be >= 1");
  if (op.chiral) {
    const Eigen::MatrixXcd a = op.weighted_block(op.lr);
    Eigen::MatrixXcd m = a.adjoint() * a;
    Eigen::MatrixXcd p = m;
    for (int i = 1; i < q; ++i) p = p * m;
    return 2.0 * p.trace().real();
  }
  const Eigen::MatrixXcd h = op.hermitian();
  Eigen::MatrixXcd h2 = h * h;
  Eigen::MatrixXcd p = h2;
  for (int i = 1; i < q; ++i) p = p * h2;
  return p.trace().real();
}

inline TracePair trace_power(const OperatorMatrix& op, const SpectrumReport& rep, int q) {
  double es = 0.0;
  for (double l : rep.eigenvalues) es += std::pow(l, 2 * q);
  return {es, trace_power_matrix(op, q)};
}

inline double trace_odd_eigen(const SpectrumReport& rep, int p) {
  double sum = 0.0;
  for (double l : rep.eigenvalues) sum += std::pow(l, p);
  return sum;
}

// ---------------------------------------------------------------------------
// Theta-constrained Monte Carlo traces. Points are drawn uniformly over the
// bounding diamond in light-cone coordinates; the corner points eta_j =
// (u_j, w_{j+1}) must lie in M. Coefficient 2 (2pi)^{-2q} 2^{-q}; conformal
// factors enter as prod f(zeta_j) f(eta_j).

struct ThetaMcResult {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
  std::int64_t accepted = 0;
};

namespace detail {

template <typename Weight>
ThetaMcResult theta_mc(const ValidatedDomain& d, int q, std::int64_t samples, std::uint64_t seed, Weight&& weight) {
  CounterRng rng(seed, /*stream=*/23);
  const double box = d.b * d.b / 2.0;
  double sum = 0.0, sumsq = 0.0;
  std::int64_t accepted = 0;
  std::vector<double> us(q), ws(q);
  for (std::int64_t s = 0; s < samples; ++s) {
    for (int i = 0; i < q; ++i) {
      us[i] = rng.uniform() * d.b;
      ws[i] = rng.uniform() * d.b;
    }
    const double val = weight(us, ws);
    if (val != 0.0) ++accepted;
    sum += val;
    sumsq += val * val;
  }
  if (accepted == 0) throw ZeroAcceptance("no Monte Carlo sample satisfied the Theta constraint");
  const double mean = sum / samples;
  const double var = std::max(0.0, sumsq / samples - mean * mean);
  const double scale = std::pow(box, q);
  return {scale * mean, scale * std::sqrt(var / samples), samples, accepted};
}

}  // namespace detail

inline ThetaMcResult trace_theta_mc(const ValidatedDomain& d, int q, std::int64_t samples, std::uint64_t seed) {
  if (q < 1) throw InvariantViolation("q must be >= 1");
  const double coef = 2.0 / std::pow(kTwoPi, 2 * q) / std::pow(2.0, q);
  auto weight = [&](const std::vector<double>& us, const std::vector<double>& ws) -> double {
    double prod = 1.0;
    for (int i = 0; i < q; ++i) {
      const double fz = detail::chi_f(d, point_from_uw(us[i], ws[i]));
      if (fz == 0.0) return 0.0;
      const double fe = detail::chi_f(d, point_from_uw(us[i], ws[(i + 1) % q]));
      if (fe == 0.0) return 0.0;
      prod *= fz * fe;
    }
    return prod;
  };
  ThetaMcResult r = detail::theta_mc(d, q, samples, seed, weight);
  r.value *= coef;
  r.std_error *= coef;
  return r;
}

enum class S4Region { ThetaRectangle, CausalOnly };

// tr(S^4) for conformal domains via the curvature form of the integrand,
// exp(1/4 int_D R dmu) evaluated through the corner formula. With region =
// ThetaRectangle this is the same estimator as trace_theta_mc(q = 2).
inline ThetaMcResult trace_s4_curvature(const ValidatedDomain& d, std::int64_t samples, std::uint64_t seed,
                                        S4Region region) {
  const double coef = 2.0 / std::pow(kTwoPi, 4) / 4.0;  // 1/(32 pi^4)
  auto weight = [&](const std::vector<double>& us, const std::vector<double>& ws) -> double {
    const Point z1 = point_from_uw(us[0], ws[0]);
    const Point z2 = point_from_uw(us[1], ws[1]);
    const double f1 = detail::chi_f(d, z1);
    if (f1 == 0.0) return 0.0;
    const double f2 = detail::chi_f(d, z2);
    if (f2 == 0.0) return 0.0;
    if (region == S4Region::CausalOnly && (us[0] - us[1]) * (ws[0] - ws[1]) < 0.0) return 0.0;
    const double fe1 = detail::chi_f(d, point_from_uw(us[0], ws[1]));
    if (fe1 == 0.0) return 0.0;  // corner outside: Theta = 0
    const double fe2 = detail::chi_f(d, point_from_uw(us[1], ws[0]));
    if (fe2 == 0.0) return 0.0;
    const double curv = -4.0 * (std::log(f1) + std::log(f2) - std::log(fe1) - std::log(fe2));
    return f1 * f1 * f2 * f2 * std::exp(0.25 * curv);
  };
  ThetaMcResult r = detail::theta_mc(d, 2, samples, seed, weight);
  r.value *= coef;
  r.std_error *= coef;
  return r;
}

// tr(S^2) in the massive case: mu/4pi^2 plus the (J0^2+J1^2) pair integral,
// with the small-m expansion pieces and the large-m asymptote reported.
struct MassiveS2Result {
  double value = 0.0;
  double std_error = 0.0;
  double mu = 0.0;             // space-time volume
  double theta_volume = 0.0;   // iint Theta((z-z')^2)
  double s_weighted = 0.0;     // iint (z-z')^2 Theta
  double inv_sqrt_s = 0.0;     // iint Theta / sqrt((z-z')^2)
  double expansion_m2 = 0.0;   // mu/4pi^2 + m^2/8pi^2 iint Theta
  double expansion_m4_term = 0.0;
  double large_m_asymptote = 0.0;
  std::int64_t samples = 0;
};

inline MassiveS2Result trace_s2_massive_mc(const ValidatedDomain& d, double m, std::int64_t samples,
                                           std::uint64_t seed) {
  if (m < 0.0) throw InvariantViolation("mass must be non-negative");
  MassiveS2Result out;
  out.samples = samples;
  out.mu = volume(d, RegionSelector::whole(), VolumeMethod::Exact);
  CounterRng rng(seed, /*stream=*/29);
  const double box = d.b * d.b / 2.0;
  double sj = 0.0, sj2 = 0.0, s0 = 0.0, ss = 0.0, si = 0.0;
  for (std::int64_t k = 0; k < samples; ++k) {
    const Point z1 = point_from_uw(rng.uniform() * d.b, rng.uniform() * d.b);
    const Point z2 = point_from_uw(rng.uniform() * d.b, rng.uniform() * d.b);
    if (!d.contains(z1) || !d.contains(z2)) continue;
    const double s = (z1.t - z2.t) * (z1.t - z2.t) - (z1.x - z2.x) * (z1.x - z2.x);
    if (s < 0.0) continue;
    const double j0 = bessel::j0(m * std::sqrt(s));
    const double j1 = bessel::j1(m * std::sqrt(s));
    const double val = j0 * j0 + j1 * j1;
    sj += val;
    sj2 += val * val;
    s0 += 1.0;
    ss += s;
    if (s > 0.0) si += 1.0 / std::sqrt(s);
  }
  const double scale = box * box;
  const double mean = sj / samples;
  const double var = std::max(0.0, sj2 / samples - mean * mean);
  const double pair_integral = scale * mean;
  out.theta_volume = scale * s0 / samples;
  out.s_weighted = scale * ss / samples;
  out.inv_sqrt_s = scale * si / samples;
  out.value = out.mu * kInvFourPiSq + m * m * kInvEightPiSq * pair_integral;
  out.std_error = m * m * kInvEightPiSq * scale * std::sqrt(var / samples);
  out.expansion_m2 = out.mu * kInvFourPiSq + m * m * kInvEightPiSq * out.theta_volume;
  out.expansion_m4_term = std::pow(m, 4) / (32.0 * kPi * kPi) * out.s_weighted;
  out.large_m_asymptote = m / (4.0 * kPi * kPi * kPi) * out.inv_sqrt_s;
  return out;
}

// ---------------------------------------------------------------------------
// Positive-part trace and chiral index

inline double positive_trace(const SpectrumReport& rep) { return rep.positive_trace; }

// nuclear-norm route for the exact simple operator: tr S_+ = |T|_1 / (2 pi sqrt 2)
inline double positive_trace_nuclear(const SimpleOperator& op) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(op.T);
  return svd.singularValues().sum() / (kTwoPi * std::sqrt(2.0));
}

inline long long chiral_index(const OperatorMatrix& op, double rel_threshold = 1e-10) {
  if (!op.chiral) {
    const double off = op.weighted_block(op.lr).norm();
    const double diag = op.weighted_block(op.ll).norm() + op.weighted_block(op.rr).norm();
    if (diag > 1e-10 * std::max(1.0, off)) throw NotChiral("operator has diagonal chirality blocks");
  }
  const Eigen::MatrixXcd a = op.weighted_block(op.lr);
  const detail::ChiralSvd svd = detail::chiral_svd(a, false);
  const double thresh = svd.sigma.size() ? rel_threshold * svd.sigma(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < svd.sigma.size(); ++i)
    if (svd.sigma(i) > thresh) ++rank;
  const long long ker = a.cols() - rank;
  const long long coker = a.rows() - rank;
  return ker - coker;
}

inline long long chiral_index(const SimpleOperator& op, double rel_threshold = 1e-10) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(op.T);
  const auto& sv = svd.singularValues();
  const double thresh = sv.size() ? rel_threshold * sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++rank;
  return (op.T.cols() - rank) - (op.T.rows() - rank);
}

// ---------------------------------------------------------------------------
// Eigenvalue decay bound |l_n| <= c b / n with
// c = (1 + m b)(1 + 4 sum_pm TV T'_pm).

struct BoundReport {
  double c = 0.0;
  double b = 0.0;
  double min_margin = 0.0;
  int violations = 0;
  std::vector<double> margins;  // c b / n - |l_n|
};

inline BoundReport decay_bound_report(const SpectrumReport& rep, const GraphDomain& g, double m,
                                      double tolerance = 1e-12) {
  BoundReport out;
  out.b = g.b;
  const double tv = g.t_plus.tv_of_slope() + g.t_minus.tv_of_slope();
  out.c = (1.0 + m * g.b) * (1.0 + 4.0 * tv);
  out.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) {
    const double margin = out.c * g.b / static_cast<double>(i + 1) - std::fabs(rep.eigenvalues[i]);
    out.margins.push_back(margin);
    out.min_margin = std::min(out.min_margin, margin);
    if (margin < -tolerance) ++out.violations;
  }
  return out;
}

}  // namespace fermisig
