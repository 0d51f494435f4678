#pragma once

// Builders for the fermionic signature operator: exact finite-rank form on
// simple domains, closed-form massless kernel (flat and conformally flat),
// massive kernel by light-cone-aligned quadrature, and a plane-wave Galerkin
// compression.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "fermisig/constants.hpp"
#include "fermisig/dirac.hpp"
#include "fermisig/geometry.hpp"
#include "fermisig/parallel.hpp"

namespace fermisig {

// ---------------------------------------------------------------------------
// Exact operator on a simple domain: S = (1/(2 pi sqrt 2)) [[0, T^T],[T, 0]]
// with T^k_l = sqrt(mu(Delta^k_l)).

struct SimpleOperator {
  int K = 0;
  Eigen::MatrixXd T;            // K x K, T(k,l) = sqrt(cell area)
  std::vector<double> widths;   // interval widths

  Eigen::MatrixXd full_matrix() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * K, 2 * K);
    const double pref = 1.0 / (kTwoPi * std::sqrt(2.0));
    m.topRightCorner(K, K) = pref * T.transpose();
    m.bottomLeftCorner(K, K) = pref * T;
    return m;
  }
};

inline SimpleOperator build_simple(const SimpleDomain& d) {
  SimpleOperator op;
  op.K = d.K();
  op.T = Eigen::MatrixXd::Zero(op.K, op.K);
  for (int k = 1; k <= op.K; ++k) {
    op.widths.push_back(d.width(k));
    for (int l = 1; l <= op.K; ++l) op.T(k - 1, l - 1) = std::sqrt(cell_area(d, k, l));
  }
  return op;
}

// ---------------------------------------------------------------------------
// Collocation grid on the Cauchy surface. For simple-domain bases the cell
// edges are aligned with the breakpoints, which makes the Nystroem operator
// exact there; graph bases use a uniform cell-centered grid.

struct SliceGrid {
  double b = 0.0;
  std::vector<double> centers;
  std::vector<double> cell_widths;

  int size() const { return static_cast<int>(centers.size()); }
};

inline SliceGrid make_slice_grid(const ValidatedDomain& d, int n) {
  SliceGrid g;
  g.b = d.b;
  if (const auto* s = std::get_if<SimpleDomain>(&d.flat())) {
    for (int k = 1; k <= s->K(); ++k) {
      const double w = s->width(k);
      const int nk = std::max(1, static_cast<int>(std::llround(n * w / g.b)));
      const double h = w / nk;
      for (int i = 0; i < nk; ++i) {
        g.centers.push_back(s->breakpoints[k - 1] + (i + 0.5) * h);
        g.cell_widths.push_back(h);
      }
    }
  } else {
    const double h = g.b / n;
    for (int i = 0; i < n; ++i) {
      g.centers.push_back((i + 0.5) * h);
      g.cell_widths.push_back(h);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Discretized integral operator. The kernel blocks hold S(x_i, x_j); the
// operator action folds in the measure weights, and the spectrum is that of
// the similarity-transformed Hermitian matrix W^1/2 S W^1/2.

struct OperatorMatrix {
  double b = 0.0;
  double mass = 0.0;
  int n = 0;
  std::vector<double> centers;
  Eigen::VectorXd weights;  // f(0,x_i) h_i (h_i for flat)
  Eigen::MatrixXcd lr, rl;  // chiral coupling blocks of the kernel
  Eigen::MatrixXcd ll, rr;  // present only for massive operators
  bool chiral = true;
  double sym_defect = 0.0;  // pre-symmetrization Hermiticity defect

  Eigen::MatrixXcd weighted_block(const Eigen::MatrixXcd& block) const {
    Eigen::VectorXd s = weights.cwiseSqrt();
    return s.asDiagonal() * block * s.asDiagonal();
  }

  // 2n x 2n Hermitian matrix with the operator's spectrum (L block first)
  Eigen::MatrixXcd hermitian() const {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    h.topRightCorner(n, n) = weighted_block(lr);
    h.bottomLeftCorner(n, n) = weighted_block(rl);
    if (!chiral) {
      h.topLeftCorner(n, n) = weighted_block(ll);
      h.bottomRightCorner(n, n) = weighted_block(rr);
    }
    return Eigen::MatrixXcd(0.5 * (h + h.adjoint()));
  }
};

namespace detail {

inline double chi_f(const ValidatedDomain& d, const Point& p) {
  if (!d.contains(p)) return 0.0;
  return d.conformal() ? d.f(p.t, p.x) : 1.0;
}

}  // namespace detail

// Massless kernel, flat or conformally flat:
//   S_LR(x,y) = (1/4pi) f(0,x)^-1/2 f(0,y)^-1/2 (chi_M f)(i+(x,y)),
//   S_RL likewise at i-(x,y); weights f(0,y) h.
inline OperatorMatrix build_massless(const ValidatedDomain& d, int n) {
  if (n < 8) throw InvariantViolation("grid must have at least 8 cells");
  const SliceGrid grid = make_slice_grid(d, n);
  const int N = grid.size();
  OperatorMatrix op;
  op.b = d.b;
  op.mass = 0.0;
  op.n = N;
  op.centers = grid.centers;
  op.weights.resize(N);
  const bool conf = d.conformal();
  Eigen::VectorXd f0(N);
  for (int i = 0; i < N; ++i) {
    f0(i) = conf ? d.f(0.0, grid.centers[i]) : 1.0;
    op.weights(i) = f0(i) * grid.cell_widths[i];
  }
  op.lr.resize(N, N);
  op.rl.resize(N, N);
  for (int i = 0; i < N; ++i) {
    const double x = grid.centers[i];
    for (int j = 0; j < N; ++j) {
      const double y = grid.centers[j];
      const double pref = kInvFourPi / std::sqrt(f0(i) * f0(j));
      const Point ip{(x - y) / 2.0, (x + y) / 2.0};
      const Point im{(y - x) / 2.0, (x + y) / 2.0};
      op.lr(i, j) = pref * detail::chi_f(d, ip);
      op.rl(i, j) = pref * detail::chi_f(d, im);
    }
  }
  return op;
}

inline OperatorMatrix build_flat_massless(const ValidatedDomain& d, int n) {
  if (d.conformal()) throw InvariantViolation("use build_conformal for conformal domains");
  return build_massless(d, n);
}

inline OperatorMatrix build_conformal(const ValidatedDomain& d, int n) {
  if (!d.conformal()) throw InvariantViolation("build_conformal expects a conformal domain");
  return build_massless(d, n);
}

// ---------------------------------------------------------------------------
// Massive kernel S(x,y) = 2 pi int_M k_m(-t, x-z) k_m(t, z-y) gamma0 dt dz,
// assembled as delta*delta (massless part), delta*regular cross terms reduced
// to 1d integrals along the lightlike rays through (0,x) and (0,y), and the
// regular*regular 2d integral with panels aligned to the light cones.

namespace detail {

// nodes/weights of 4-point Gauss-Legendre on [-1,1]
inline constexpr std::array<double, 4> kGx{-0.861136311594052575, -0.339981043584856265, 0.339981043584856265,
                                           0.861136311594052575};
inline constexpr std::array<double, 4> kGw{0.347854845137453857, 0.652145154862546143, 0.652145154862546143,
                                           0.347854845137453857};

template <typename F>
Mat2 gauss_panels(F&& fn, double a, double b, double max_len) {
  Mat2 sum = Mat2::Zero();
  if (b <= a) return sum;
  const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_len)));
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int g = 0; g < 4; ++g) sum += (0.5 * h * kGw[g]) * fn(mid + 0.5 * h * kGx[g]);
  }
  return sum;
}

// splits a t-interval at the given break values and integrates each smooth piece
template <typename F>
Mat2 gauss_with_breaks(F&& fn, double lo, double hi, std::vector<double> breaks, double max_len) {
  breaks.push_back(lo);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  Mat2 sum = Mat2::Zero();
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    const double a = std::max(lo, breaks[i - 1]);
    const double b = std::min(hi, breaks[i]);
    if (b - a > 1e-15) sum += gauss_panels(fn, a, b, max_len);
  }
  return sum;
}

}  // namespace detail

inline OperatorMatrix build_massive_kernel(const ValidatedDomain& d, double m, int n, const QuadratureSpec& quad) {
  if (m <= 0.0) throw InvariantViolation("massive kernel needs m > 0 (use build_flat_massless for m = 0)");
  if (d.conformal()) throw InvariantViolation("massive kernel is defined on flat domains");
  if (quad.panels < 8) throw QuadratureTooCoarse("need at least 8 quadrature panels");
  const SliceGrid grid = make_slice_grid(d, n);
  const int N = grid.size();
  const FlatDomain& flat = d.flat();
  const double max_len = d.b / quad.panels;

  OperatorMatrix op;
  op.b = d.b;
  op.mass = m;
  op.n = N;
  op.centers = grid.centers;
  op.weights.resize(N);
  for (int i = 0; i < N; ++i) op.weights(i) = grid.cell_widths[i];

  // per-column light-cone sections, shared across rows
  std::vector<std::vector<Interval>> sec_u(N), sec_w(N);
  for (int i = 0; i < N; ++i) {
    sec_u[i] = detail::lc_sections(flat, grid.centers[i], true);    // w-sections at u = x_i
    sec_w[i] = detail::lc_sections(flat, grid.centers[i], false);   // u-sections at w = x_i
  }
  const std::vector<double> dom_breaks = detail::domain_u_breaks(flat);

  std::vector<Mat2> cells(static_cast<std::size_t>(N) * N);
  parallel_for(N, [&](int i) {
    const double x = grid.centers[i];
    for (int j = 0; j < N; ++j) {
      const double y = grid.centers[j];
      const double delta = x - y;
      Mat2 s = Mat2::Zero();

      // delta*delta: the massless closed form
      s(0, 1) = kInvFourPi * detail::chi_f(d, Point{delta / 2.0, (x + y) / 2.0});
      s(1, 0) = kInvFourPi * detail::chi_f(d, Point{-delta / 2.0, (x + y) / 2.0});

      const std::vector<double> ray_breaks{0.0, delta / 2.0, -delta / 2.0};

      // rays through (0,x): u = x (t from w-sections) and w = x (t from u-sections)
      for (const auto& sec : sec_u[i]) {
        auto fn = [&](double t) -> Mat2 { return gamma::gu * km_regular(m, t, delta - t) * gamma::g0; };
        s += 0.5 * detail::gauss_with_breaks(fn, (x - sec.hi) / 2.0, (x - sec.lo) / 2.0, ray_breaks, max_len);
      }
      for (const auto& sec : sec_w[i]) {
        auto fn = [&](double t) -> Mat2 { return gamma::gv * km_regular(m, t, delta + t) * gamma::g0; };
        s += 0.5 * detail::gauss_with_breaks(fn, (sec.lo - x) / 2.0, (sec.hi - x) / 2.0, ray_breaks, max_len);
      }
      // rays through (0,y)
      for (const auto& sec : sec_u[j]) {
        auto fn = [&](double t) -> Mat2 { return km_regular(m, -t, delta + t) * gamma::gu * gamma::g0; };
        s += 0.5 * detail::gauss_with_breaks(fn, (y - sec.hi) / 2.0, (y - sec.lo) / 2.0, ray_breaks, max_len);
      }
      for (const auto& sec : sec_w[j]) {
        auto fn = [&](double t) -> Mat2 { return km_regular(m, -t, delta - t) * gamma::gv * gamma::g0; };
        s += 0.5 * detail::gauss_with_breaks(fn, (sec.lo - y) / 2.0, (sec.hi - y) / 2.0, ray_breaks, max_len);
      }

      // regular*regular over M, in light-cone coordinates (u,w) of the
      // integration point; the eps factors cancel to an overall minus sign
      auto inner = [&](double uu) -> Mat2 {
        Mat2 acc = Mat2::Zero();
        for (const auto& sec : detail::w_sections(flat, uu)) {
          auto fn = [&](double ww) -> Mat2 {
            const double t = (uu - ww) / 2.0, z = (uu + ww) / 2.0;
            const Mat2 r1 = km_regular_bare(m, -t, x - z);
            if (r1.isZero(0.0)) return Mat2::Zero();
            return -r1 * km_regular_bare(m, t, z - y) * gamma::g0;
          };
          acc += detail::gauss_with_breaks(fn, sec.lo, sec.hi, {x, y}, max_len);
        }
        return acc;
      };
      Mat2 rr = Mat2::Zero();
      {
        std::vector<double> ub = dom_breaks;
        ub.push_back(x);
        ub.push_back(y);
        std::sort(ub.begin(), ub.end());
        for (std::size_t p = 1; p < ub.size(); ++p) {
          const double a = std::max(0.0, ub[p - 1]);
          const double bb = std::min(d.b, ub[p]);
          if (bb - a > 1e-15) rr += detail::gauss_panels(inner, a, bb, max_len);
        }
      }
      s += kTwoPi * 0.5 * rr;  // dt dz = du dw / 2

      cells[static_cast<std::size_t>(i) * N + j] = s;
    }
  });

  // Hermiticity defect, then symmetrization
  double defect = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j <= i; ++j) {
      const Mat2& a = cells[static_cast<std::size_t>(i) * N + j];
      const Mat2& bmat = cells[static_cast<std::size_t>(j) * N + i];
      defect = std::max(defect, (a - bmat.adjoint()).norm());
    }
  op.sym_defect = defect;
  op.chiral = false;
  op.ll.resize(N, N);
  op.lr.resize(N, N);
  op.rl.resize(N, N);
  op.rr.resize(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const Mat2 sym = 0.5 * (cells[static_cast<std::size_t>(i) * N + j] +
                              cells[static_cast<std::size_t>(j) * N + i].adjoint());
      op.ll(i, j) = sym(0, 0);
      op.lr(i, j) = sym(0, 1);
      op.rl(i, j) = sym(1, 0);
      op.rr(i, j) = sym(1, 1);
    }
  return op;
}

// ---------------------------------------------------------------------------
// Galerkin compression in an orthonormal basis of plane-wave solutions.
// Massless: chiral waves exp(2 pi i n (x +- t)/b). Massive: positive/negative
// frequency solutions with momenta 2 pi n / b. Matrix elements are the
// space-time inner products <e_a|e_b>, exact on simple domains and by
// panel-resolved quadrature on graph domains.

struct GalerkinOperator {
  double b = 0.0;
  double mass = 0.0;
  int k_max = 0;
  Eigen::MatrixXcd matrix;  // Hermitian compression pi S pi
  double herm_defect = 0.0;

  // basis index: (n, comp) -> row; comp is L/R for m = 0, +/- for m > 0
  int index(int n, int comp) const { return 2 * (n + k_max) + comp; }
  int dim() const { return static_cast<int>(matrix.rows()); }
};

namespace detail {

inline cplx phase_integral(double g, double a, double b) {
  // int_a^b exp(i g s) ds
  if (std::fabs(g) * (b - a) < 1e-9) {
    const double mid = 0.5 * (a + b);
    return (b - a) * std::exp(cplx(0, g * mid)) * (1.0 - g * g * (b - a) * (b - a) / 24.0);
  }
  return (std::exp(cplx(0, g * b)) - std::exp(cplx(0, g * a))) / cplx(0, g);
}

// int_M exp(i (A t + B x)) dt dx, exact for simple domains, panel quadrature
// resolving the oscillation for graph domains
inline cplx spacetime_wave_integral(const FlatDomain& d, double A, double B) {
  if (const auto* s = std::get_if<SimpleDomain>(&d)) {
    // A t + B x = alpha u + beta w with alpha = (A+B)/2, beta = (B-A)/2
    const double alpha = 0.5 * (A + B), beta = 0.5 * (B - A);
    cplx sum = 0.0;
    for (int k = 1; k <= s->K(); ++k)
      for (int l = 1; l <= s->K(); ++l) {
        if (!s->cell(k, l)) continue;
        sum += 0.5 * phase_integral(alpha, s->breakpoints[l - 1], s->breakpoints[l]) *
               phase_integral(beta, s->breakpoints[k - 1], s->breakpoints[k]);
      }
    return sum;
  }
  const auto& g = std::get<GraphDomain>(d);
  std::vector<double> xs;
  xs.insert(xs.end(), g.t_plus.xs.begin(), g.t_plus.xs.end());
  xs.insert(xs.end(), g.t_minus.xs.begin(), g.t_minus.xs.end());
  std::sort(xs.begin(), xs.end());
  const double freq = std::fabs(A) + std::fabs(B);
  cplx sum = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double lo = xs[i - 1], hi = xs[i];
    if (hi - lo < 1e-15) continue;
    const int panels = std::max(4, static_cast<int>(std::ceil((hi - lo) * freq / kPi)) * 2);
    const double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = lo + (p + 0.5) * h;
      for (int q = 0; q < 4; ++q) {
        const double x = mid + 0.5 * h * kGx[q];
        sum += (0.5 * h * kGw[q]) * std::exp(cplx(0, B * x)) *
               phase_integral(A, g.t_minus.eval(x), g.t_plus.eval(x));
      }
    }
  }
  return sum;
}

}  // namespace detail

inline GalerkinOperator build_massive_galerkin(const ValidatedDomain& d, double m, int k_max) {
  if (k_max < 1) throw InvariantViolation("k_max must be at least 1");
  if (d.conformal()) throw InvariantViolation("galerkin compression is defined on flat domains");
  const double b = d.b;
  const FlatDomain& flat = d.flat();
  const int modes = 2 * k_max + 1;
  const int dim = 2 * modes;

  // basis data: spinor amplitude and wave frequencies (tau t + xi x)
  std::vector<Vec2> amp(dim);
  std::vector<double> tau(dim), xi(dim);
  for (int n = -k_max; n <= k_max; ++n) {
    const double p = kTwoPi * n / b;
    for (int comp = 0; comp < 2; ++comp) {
      const int idx = 2 * (n + k_max) + comp;
      if (m == 0.0) {
        // chiral basis: comp 0 = left mover, comp 1 = right mover
        amp[idx] = comp == 0 ? Vec2(1, 0) : Vec2(0, 1);
        amp[idx] /= std::sqrt(kTwoPi * b);
        tau[idx] = comp == 0 ? p : -p;
        xi[idx] = p;
      } else {
        const double omega = std::sqrt(p * p + m * m);
        const double s = comp == 0 ? 1.0 : -1.0;
        const Vec2 chi(1.0 / std::sqrt(2.0), cplx(0, 1.0 / std::sqrt(2.0)));
        Mat2 proj = s * omega * gamma::g0 - p * gamma::g1 + m * Mat2::Identity();
        amp[idx] = proj * chi / (2.0 * omega * std::sqrt(kPi * b));
        tau[idx] = -s * omega;
        xi[idx] = p;
      }
    }
  }

  GalerkinOperator op;
  op.b = b;
  op.mass = m;
  op.k_max = k_max;
  op.matrix.resize(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int bb = 0; bb < dim; ++bb) {
      const cplx sandwich = (amp[a].adjoint() * gamma::g0 * amp[bb])(0);
      if (sandwich == cplx(0, 0)) {
        op.matrix(a, bb) = 0.0;
        continue;
      }
      const cplx wave = detail::spacetime_wave_integral(flat, tau[bb] - tau[a], xi[bb] - xi[a]);
      op.matrix(a, bb) = sandwich * wave;
    }
  op.herm_defect = (op.matrix - op.matrix.adjoint()).norm();
  op.matrix = 0.5 * (op.matrix + op.matrix.adjoint().eval());
  return op;
}

}  // namespace fermisig
