#pragma once

// Geometry-from-spectrum procedures: curve-length bounds against the largest
// eigenvalue and tr(S_+), the isospectral-but-not-isometric pair of simple
// domains, localized Hilbert-Schmidt norms, and reconstruction of the volume
// density from windowed HS norms.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "fermisig/geometry.hpp"
#include "fermisig/spectral.hpp"

namespace fermisig {

struct BoundCheck {
  double operator_side = 0.0;  // lambda_1 or tr S_+
  double curve_side = 0.0;     // l / 4 pi
  double margin = 0.0;         // operator_side - curve_side
};

namespace detail {

inline void require_curve_inside(const ValidatedDomain& d, const CurveSample& c) {
  if (c.vertices.size() < 2) throw CurveLeavesDomain("curve needs at least two vertices");
  // vertices may sit on the closure (cell corners of staircase polylines);
  // each segment must run through the interior
  auto nudged_inside = [&](const Point& p, const Point& toward) {
    const Point q{p.t + 1e-9 * (toward.t - p.t), p.x + 1e-9 * (toward.x - p.x)};
    return d.contains(q);
  };
  for (std::size_t i = 1; i < c.vertices.size(); ++i) {
    const Point &a = c.vertices[i - 1], &b = c.vertices[i];
    const Point mid{0.5 * (a.t + b.t), 0.5 * (a.x + b.x)};
    if (!nudged_inside(a, b) || !nudged_inside(b, a) || !d.contains(mid))
      throw CurveLeavesDomain("curve segment leaves the domain");
  }
}

}  // namespace detail

inline BoundCheck bound_timelike(const SpectrumReport& rep, const CurveSample& c, const ValidatedDomain& d) {
  if (c.kind != CurveSample::Kind::Timelike) throw MixedCausalType("bound_timelike expects a timelike curve");
  detail::require_curve_inside(d, c);
  const double len = curve_length(c, d.conformal() ? &d.factor() : nullptr);
  BoundCheck out;
  out.operator_side = rep.lambda_max();
  out.curve_side = len * kInvFourPi;
  out.margin = out.operator_side - out.curve_side;
  return out;
}

inline BoundCheck bound_spacelike(const SpectrumReport& rep, const CurveSample& c, const ValidatedDomain& d) {
  if (c.kind != CurveSample::Kind::Spacelike) throw MixedCausalType("bound_spacelike expects a spacelike curve");
  detail::require_curve_inside(d, c);
  const double len = curve_length(c, d.conformal() ? &d.factor() : nullptr);
  BoundCheck out;
  out.operator_side = rep.positive_trace;
  out.curve_side = len * kInvFourPi;
  out.margin = out.operator_side - out.curve_side;
  return out;
}

// ---------------------------------------------------------------------------
// Isospectral simple domains: T = [[a, sqrt(ab), 0],[0, b, sqrt(bc)],[0, 0, c]]
// against Ttilde with (d,e,f) = (1,1,delta), c = delta/(ab). The pair is
// isospectral for T*T but the maximal spacelike lengths differ.

struct IsospectralPair {
  double delta = 0.0;
  double a = 0.0, b = 0.0, c = 0.0;
  std::array<double, 3> params_ttilde{1.0, 1.0, 0.0};
  std::vector<double> spectrum_T, spectrum_Ttilde;  // eigenvalues of T^T T, ascending
  double spec_agreement = 0.0;                      // max |difference|
  double charpoly_agreement = 0.0;                  // max |coefficient difference|
  SimpleDomain domain_T, domain_Ttilde;
  double length_T = 0.0, length_Ttilde = 0.0;  // maximal spacelike lengths / sqrt(2): a+b+c vs 2+delta
  double asymptote_a = 0.0;                    // 1 + sqrt(5 delta / 8)
};

namespace detail {

inline double iso_b_of(double a, double d) {
  // quadratic for b obtained from a^2 * eq2 + eq1, branch with b -> 1 at (delta,a) -> (0,1)
  const double A = d - a * a * a;
  const double B = 3 * a * a - a * a * a * a + 2 * a * a * d - d + a * a * d * d - 3 * d * d + d * d / (a * a) - 1;
  const double C = d * d / a;
  const double disc = B * B - 4 * A * C;
  if (disc < 0) throw RootNotFound("negative discriminant in the isospectral quadratic");
  return (-B - std::sqrt(disc)) / (2 * A);
}

inline double iso_eq1(double a, double d) {
  const double b = iso_b_of(a, d);
  return -1 + a * a * b * b - d + a * d + b * d - 3 * d * d + d * d / (a * a) + d * d / (b * b) + d * d / (a * b);
}

inline std::array<double, 3> charpoly_sym3(const Eigen::Matrix3d& m) {
  // coefficients (c2, c1, c0) of l^3 - c2 l^2 + c1 l - c0
  const double c2 = m.trace();
  const double c1 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0) +
                    m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  return {c2, c1, m.determinant()};
}

}  // namespace detail

inline IsospectralPair isospectral_pair(double delta) {
  if (!(delta > 0.0) || delta > 0.05) throw InvariantViolation("delta must lie in (0, 0.05]");
  IsospectralPair out;
  out.delta = delta;
  out.params_ttilde = {1.0, 1.0, delta};
  out.asymptote_a = 1.0 + std::sqrt(5.0 * delta / 8.0);

  // bracketed root of eq1(a) in (1, 1 + 2 sqrt(delta)), then bisection
  const double lo0 = 1.0 + 1e-12, hi0 = 1.0 + 2.0 * std::sqrt(delta);
  const int scan = 512;
  double lo = lo0, hi = hi0, flo = detail::iso_eq1(lo0, delta);
  bool bracketed = false;
  for (int i = 1; i <= scan; ++i) {
    const double a = lo0 + (hi0 - lo0) * i / scan;
    const double fa = detail::iso_eq1(a, delta);
    if (flo * fa <= 0.0) {
      hi = a;
      lo = lo0 + (hi0 - lo0) * (i - 1) / scan;
      bracketed = true;
      break;
    }
    flo = fa;
    lo = a;
  }
  if (!bracketed) throw RootNotFound("no sign change for the isospectral parameter a");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = detail::iso_eq1(mid, delta);
    if (fm == 0.0 || hi - lo < 1e-16) {
      lo = hi = mid;
      break;
    }
    if (detail::iso_eq1(lo, delta) * fm <= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  out.a = 0.5 * (lo + hi);
  out.b = detail::iso_b_of(out.a, delta);
  out.c = delta / (out.a * out.b);
  if (!(out.b > 0.0) || !(out.c > 0.0)) throw RootNotFound("isospectral parameters not strictly positive");

  Eigen::Matrix3d T = Eigen::Matrix3d::Zero(), Tt = Eigen::Matrix3d::Zero();
  T << out.a, std::sqrt(out.a * out.b), 0, 0, out.b, std::sqrt(out.b * out.c), 0, 0, out.c;
  Tt << 1, 1, std::sqrt(delta), 0, 1, std::sqrt(delta), 0, 0, delta;

  const Eigen::Matrix3d M = T.transpose() * T, Mt = Tt.transpose() * Tt;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> e1(M), e2(Mt);
  out.spectrum_T.assign(e1.eigenvalues().data(), e1.eigenvalues().data() + 3);
  out.spectrum_Ttilde.assign(e2.eigenvalues().data(), e2.eigenvalues().data() + 3);
  out.spec_agreement = 0.0;
  for (int i = 0; i < 3; ++i)
    out.spec_agreement = std::max(out.spec_agreement, std::fabs(out.spectrum_T[i] - out.spectrum_Ttilde[i]));
  const auto p1 = detail::charpoly_sym3(M), p2 = detail::charpoly_sym3(Mt);
  out.charpoly_agreement = 0.0;
  for (int i = 0; i < 3; ++i) out.charpoly_agreement = std::max(out.charpoly_agreement, std::fabs(p1[i] - p2[i]));

  auto make_domain = [](std::array<double, 3> widths_over_sqrt2, bool with_top) {
    SimpleDomain d;
    const double s2 = std::sqrt(2.0);
    d.breakpoints = {0.0, s2 * widths_over_sqrt2[0], s2 * (widths_over_sqrt2[0] + widths_over_sqrt2[1]),
                     s2 * (widths_over_sqrt2[0] + widths_over_sqrt2[1] + widths_over_sqrt2[2])};
    d.incidence.assign(3, std::vector<bool>(3, false));
    for (int k = 0; k < 3; ++k) d.incidence[k][k] = true;
    d.incidence[0][1] = true;  // cell (1,2)
    d.incidence[1][2] = true;  // cell (2,3)
    if (with_top) d.incidence[0][2] = true;
    return d;
  };
  out.domain_T = make_domain({out.a, out.b, out.c}, false);
  out.domain_Ttilde = make_domain({1.0, 1.0, delta}, true);
  out.length_T = out.a + out.b + out.c;
  out.length_Ttilde = 2.0 + delta;
  return out;
}

// ---------------------------------------------------------------------------
// Localized Hilbert-Schmidt norms: |pi_{L,I} S pi_{R,J}|_HS^2. Projections
// act on grid cells whose centers lie in the half-open interval [lo, hi).

namespace detail {

inline std::vector<int> cells_in_interval(const OperatorMatrix& op, const Interval& iv) {
  std::vector<int> out;
  for (int i = 0; i < op.n; ++i)
    if (op.centers[i] >= iv.lo && op.centers[i] < iv.hi) out.push_back(i);
  return out;
}

}  // namespace detail

inline double localized_hs_norm(const OperatorMatrix& op, const Interval& I, const Interval& J) {
  if (!op.chiral) throw NotChiral("localized HS norm is defined for the massless operator");
  const auto rows = detail::cells_in_interval(op, I);
  const auto cols = detail::cells_in_interval(op, J);
  if (rows.empty() || cols.empty()) throw EmptyInterval("projection interval selects no grid cells");
  double sum = 0.0;
  for (int i : rows)
    for (int j : cols) sum += std::norm(op.lr(i, j)) * op.weights(i) * op.weights(j);
  return sum;
}

// interval actually covered by the selected cells (cell edges)
inline Interval snapped_interval(const OperatorMatrix& op, const Interval& iv) {
  const auto cells = detail::cells_in_interval(op, iv);
  if (cells.empty()) throw EmptyInterval("projection interval selects no grid cells");
  // cell widths are recoverable from neighbouring centers on uniform grids;
  // use half-distance edges, clamped to [0,b]
  auto edge_lo = [&](int i) { return i == 0 ? 0.0 : 0.5 * (op.centers[i - 1] + op.centers[i]); };
  auto edge_hi = [&](int i) { return i == op.n - 1 ? op.b : 0.5 * (op.centers[i] + op.centers[i + 1]); };
  return {edge_lo(cells.front()), edge_hi(cells.back())};
}

// ---------------------------------------------------------------------------
// Reconstruction of the squared volume density from windowed HS norms:
// density(u,w) = 8 pi^2 |pi_{L,I} S pi_{R,J}|_HS^2 / area(beam(I,J)).

struct ReconstructionField {
  int n = 0;        // slots per axis (one per grid cell)
  int window = 0;   // window width in cells
  double b = 0.0;
  std::vector<double> us, ws;      // slot coordinates (u along L, w along R)
  std::vector<double> cellw;       // slot cell widths
  std::vector<double> density;     // n x n, row-major in u
  std::vector<std::uint8_t> full;  // window not clipped at the boundary

  double at(int i, int j) const { return density[static_cast<std::size_t>(i) * n + j]; }
};

inline ReconstructionField reconstruct_volume_density(const OperatorMatrix& op, int window) {
  if (window < 2) throw WindowTooSmall("window must span at least 2 cells");
  if (!op.chiral) throw NotChiral("reconstruction uses the massless operator");
  const int n = op.n;
  ReconstructionField out;
  out.n = n;
  out.window = window;
  out.b = op.b;
  out.us.assign(op.centers.begin(), op.centers.end());
  out.ws.assign(op.centers.begin(), op.centers.end());
  out.density.assign(static_cast<std::size_t>(n) * n, 0.0);
  out.full.assign(static_cast<std::size_t>(n) * n, 0);

  // prefix sums of |lr|^2 w_i w_j for O(1) window sums
  Eigen::MatrixXd pref = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      pref(i + 1, j + 1) = pref(i, j + 1) + pref(i + 1, j) - pref(i, j) +
                           std::norm(op.lr(i, j)) * op.weights(i) * op.weights(j);
  // cumulative cell widths for beam areas
  std::vector<double> wsum(n + 1, 0.0);
  out.cellw.resize(n);
  for (int i = 0; i < n; ++i) {
    const double lo = i == 0 ? 0.0 : 0.5 * (op.centers[i - 1] + op.centers[i]);
    const double hi = i == n - 1 ? op.b : 0.5 * (op.centers[i] + op.centers[i + 1]);
    out.cellw[i] = hi - lo;
    wsum[i + 1] = wsum[i] + out.cellw[i];
  }

  const int half = window / 2;
  for (int a = 0; a < n; ++a) {
    int alo = std::max(0, a - half);
    const int ahi = std::min(n, alo + window);
    alo = std::max(0, ahi - window);
    for (int c = 0; c < n; ++c) {
      int clo = std::max(0, c - half);
      const int chi = std::min(n, clo + window);
      clo = std::max(0, chi - window);
      const double hs2 = pref(ahi, chi) - pref(alo, chi) - pref(ahi, clo) + pref(alo, clo);
      const double area = (wsum[ahi] - wsum[alo]) * (wsum[chi] - wsum[clo]) / 2.0;
      out.density[static_cast<std::size_t>(a) * n + c] = 8.0 * kPi * kPi * hs2 / area;
      out.full[static_cast<std::size_t>(a) * n + c] =
          (ahi - alo == window && chi - clo == window) ? 1 : 0;
    }
  }
  return out;
}

struct ReconstructionStats {
  double sup_error = 0.0;     // relative, over slots whose beam lies inside M
  double coverage = 0.0;      // fraction of slots whose thresholded indicator matches chi_M
  double total_mass = 0.0;    // integral of the density
  double true_volume = 0.0;
  int interior_slots = 0;
};

inline ReconstructionStats reconstruction_stats(const ReconstructionField& field, const ValidatedDomain& truth) {
  ReconstructionStats st;
  st.true_volume = volume(truth, RegionSelector::whole(),
                          truth.conformal() ? VolumeMethod::Grid : VolumeMethod::Exact, 0, 0, 1024);
  const int n = field.n;
  long long match = 0;
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      const double u = field.us[a], w = field.ws[c];
      const Point z = point_from_uw(u, w);
      const double dens = field.at(a, c);
      const bool inside = truth.contains(z);
      if ((dens > 0.5 * (truth.conformal() ? truth.f(z.t, z.x) * truth.f(z.t, z.x) : 1.0)) == inside) ++match;
      st.total_mass += dens * field.cellw[a] * field.cellw[c] / 2.0;
      // sup-error where the whole beam parallelogram lies inside M
      bool beam_inside = field.full[static_cast<std::size_t>(a) * n + c] != 0;
      const double hwu = field.window * field.cellw[a] / 2.0, hww = field.window * field.cellw[c] / 2.0;
      for (int ci = 0; ci < 4 && beam_inside; ++ci) {
        const Point corner = point_from_uw(u + (ci & 1 ? hwu : -hwu), w + (ci & 2 ? hww : -hww));
        beam_inside = truth.contains(corner);
      }
      if (beam_inside) {
        ++st.interior_slots;
        const double f = truth.f(z.t, z.x);
        st.sup_error = std::max(st.sup_error, std::fabs(dens - f * f) / (f * f));
      }
    }
  st.coverage = static_cast<double>(match) / (static_cast<double>(n) * n);
  return st;
}

}  // namespace fermisig
