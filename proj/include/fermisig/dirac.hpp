#pragma once

// Spinor algebra and the causal fundamental solution k_m of the 2d Dirac
// equation, together with exact massless transport and quadrature-based
// massive Cauchy evolution.
//
// Conventions: gamma0 = [[0,1],[1,0]], gamma1 = [[0,1],[-1,0]], spin inner
// product <.|.> = <psi, gamma0 phi>_C2, slice scalar product
// (psi|phi) = 2 pi int <psi, phi>_C2 dx.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "fermisig/bessel.hpp"
#include "fermisig/constants.hpp"
#include "fermisig/errors.hpp"

namespace fermisig {

using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;
using cplx = std::complex<double>;

namespace gamma {

inline const Mat2 g0 = (Mat2() << 0, 1, 1, 0).finished();
inline const Mat2 g1 = (Mat2() << 0, 1, -1, 0).finished();
inline const Mat2 gu = g0 + g1;                                  // gamma^u
inline const Mat2 gv = g0 - g1;                                  // gamma^v
inline const Mat2 chirality = (Mat2() << -1, 0, 0, 1).finished();  // Gamma = diag(-1,1)
inline const Mat2 chi_L = (Mat2() << 1, 0, 0, 0).finished();
inline const Mat2 chi_R = (Mat2() << 0, 0, 0, 1).finished();

// adjoint with respect to the spin inner product: A* = g0 A^dag g0
inline Mat2 spin_adjoint(const Mat2& a) { return g0 * a.adjoint() * g0; }

}  // namespace gamma

inline double sign_eps(double t) { return t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0); }

// Bessel bracket of the causal fundamental solution without the eps(t) sign:
// k_m regular part = eps(t) * km_regular_bare. Zero outside the closed light
// cone and for m = 0.
inline Mat2 km_regular_bare(double m, double t, double x) {
  const double q = t * t - x * x;
  if (m <= 0.0 || q < 0.0) return Mat2::Zero();
  const double rho = std::sqrt(q);
  const double j0 = bessel::j0(m * rho);
  const double j1r = m * bessel::j1_over_x(m * rho);  // J1(m rho)/rho
  Mat2 out = cplx(0.0, -m / (4.0 * kPi) * j0) * Mat2::Identity();
  out -= (m / (4.0 * kPi) * j1r) * (t * gamma::g0 - x * gamma::g1);
  return out;
}

// Regular (Bessel) part of the causal fundamental solution k_m; the two
// lightlike delta terms are handled analytically by the callers. Total
// function; eps(0) = 0, so the regular part vanishes on the Cauchy line.
inline Mat2 km_regular(double m, double t, double x) {
  if (t == 0.0) return Mat2::Zero();
  return sign_eps(t) * km_regular_bare(m, t, x);
}

// ---------------------------------------------------------------------------
// Spinor fields on a spatial slice. Values are stored at n+1 uniformly spaced
// nodes of [x0, x1]; data is treated as compactly supported (zero outside).

struct SpinorField {
  double x0 = 0.0, x1 = 1.0;
  int n = 2;  // cells; n+1 nodes
  double time = 0.0;
  std::vector<Vec2> values;

  double h() const { return (x1 - x0) / n; }
  double node(int i) const { return x0 + i * h(); }

  static SpinorField zero(double x0, double x1, int n, double time = 0.0) {
    SpinorField f;
    f.x0 = x0;
    f.x1 = x1;
    f.n = n;
    f.time = time;
    f.values.assign(n + 1, Vec2::Zero());
    return f;
  }

  template <typename F>
  static SpinorField sample(double x0, double x1, int n, F&& fn, double time = 0.0) {
    SpinorField f = zero(x0, x1, n, time);
    for (int i = 0; i <= n; ++i) f.values[i] = fn(f.node(i));
    return f;
  }

  // linear interpolation, zero outside the covered range
  Vec2 eval(double x) const {
    if (x <= x0 || x >= x1) return Vec2::Zero();
    const double s = (x - x0) / h();
    const int i = std::min(n - 1, static_cast<int>(s));
    const double a = s - i;
    return (1.0 - a) * values[i] + a * values[i + 1];
  }
};

// (psi|psi) on the slice: 2 pi int |psi|^2 dx by the trapezoid rule.
inline double slice_norm(const SpinorField& f) {
  double sum = 0.0;
  for (int i = 0; i <= f.n; ++i) {
    const double wgt = (i == 0 || i == f.n) ? 0.5 : 1.0;
    sum += wgt * f.values[i].squaredNorm();
  }
  return kTwoPi * sum * f.h();
}

inline double slice_inner_real(const SpinorField& a, const SpinorField& b) {
  double sum = 0.0;
  for (int i = 0; i <= a.n; ++i) {
    const double wgt = (i == 0 || i == a.n) ? 0.5 : 1.0;
    sum += wgt * a.values[i].dot(b.values[i]).real();
  }
  return kTwoPi * sum * a.h();
}

// A: psi -> Gamma conj(psi); antiunitary, involutive
inline SpinorField charge_conjugate(const SpinorField& f) {
  SpinorField out = f;
  for (auto& v : out.values) v = Vec2(-std::conj(v(0)), std::conj(v(1)));
  return out;
}

// Exact characteristic transport psi(t,x) = (psi_L(0,x+t), psi_R(0,x-t)).
// The output grid is widened so the full support stays covered.
inline SpinorField evolve_massless(const SpinorField& initial, double t) {
  const double pad = std::fabs(t);
  const int extra = static_cast<int>(std::ceil(pad / initial.h()));
  SpinorField out = SpinorField::zero(initial.x0 - extra * initial.h(), initial.x1 + extra * initial.h(),
                                      initial.n + 2 * extra, initial.time + t);
  for (int i = 0; i <= out.n; ++i) {
    const double x = out.node(i);
    out.values[i](0) = initial.eval(x + t)(0);
    out.values[i](1) = initial.eval(x - t)(1);
  }
  return out;
}

struct QuadratureSpec {
  int panels = 64;  // composite Simpson panels across the integration range
};

namespace detail {

// composite Simpson over [a,b] of a Vec2-valued integrand; panel ends are
// pinned to a and b so support edges are never overshot by rounding
template <typename F>
Vec2 simpson(F&& fn, double a, double b, int panels) {
  if (b <= a) return Vec2::Zero();
  const int n = std::max(1, panels);
  const double h = (b - a) / n;
  Vec2 sum = Vec2::Zero();
  for (int i = 0; i < n; ++i) {
    const double lo = i == 0 ? a : a + i * h;
    const double hi = i == n - 1 ? b : a + (i + 1) * h;
    sum += (fn(lo) + 4.0 * fn(0.5 * (lo + hi)) + fn(hi)) * ((hi - lo) / 6.0);
  }
  return sum;
}

}  // namespace detail

// Cauchy evolution psi(t,x) = 2 pi int k_m(t, x-y) gamma0 psi(0,y) dy.
// The delta part is the exact massless transport; the Bessel part is a
// composite-Simpson integral over [x-|t|, x+|t|] clipped to the support.
inline SpinorField evolve_massive(const SpinorField& initial, double t, double m, const QuadratureSpec& quad) {
  if (m < 0.0) throw InvariantViolation("mass must be non-negative");
  if (quad.panels < initial.n) throw QuadratureTooCoarse("quadrature must resolve the field grid");
  SpinorField out = evolve_massless(initial, t);
  if (m == 0.0 || t == 0.0) return out;

  const Mat2 g1g0 = gamma::g1 * gamma::g0;  // diag(1,-1)
  for (int i = 0; i <= out.n; ++i) {
    const double x = out.node(i);
    double lo = std::max(x - std::fabs(t), initial.x0);
    double hi = std::min(x + std::fabs(t), initial.x1);
    if (hi <= lo) continue;
    const int panels = std::max(4, static_cast<int>(std::lround(quad.panels * (hi - lo) / (initial.x1 - initial.x0))));
    auto integrand = [&](double y) -> Vec2 {
      const double dx = x - y;
      const double q = t * t - dx * dx;
      if (q < 0.0) return Vec2::Zero();  // closed cone: the edge value is the inside limit
      const double rho = std::sqrt(q);
      const double j0 = bessel::j0(m * rho);
      const double j1r = m * bessel::j1_over_x(m * rho);
      // 2 pi r(t, x-y) gamma0 = -(m/2) eps(t) [ i J0 gamma0 + (t - (x-y) g1g0) J1/rho ]
      Mat2 kermat = cplx(0.0, 1.0) * j0 * gamma::g0;
      kermat += j1r * (t * Mat2::Identity() - dx * g1g0);
      kermat *= -(m / 2.0) * sign_eps(t);
      return kermat * initial.eval(y);
    };
    out.values[i] += detail::simpson(integrand, lo, hi, panels);
  }
  out.time = initial.time + t;
  return out;
}

// Residual of the group property: two-step versus one-step evolution of a
// smooth reference datum, in the max norm. Decreases under refinement of the
// grid and quadrature together.
inline double group_property_defect(double m, double t1, double t2, int grid) {
  if (grid < 16) throw InvariantViolation("grid must be at least 16");
  auto bump = [](double x) -> Vec2 {
    const double s = 2.0 * x - 1.0;
    if (std::fabs(s) >= 1.0) return Vec2::Zero();
    const double g = std::exp(-1.0 / (1.0 - s * s));
    return Vec2(g, 0.5 * g);
  };
  const SpinorField initial = SpinorField::sample(0.0, 1.0, grid, bump);
  QuadratureSpec quad{4 * grid};
  const SpinorField two = evolve_massive(evolve_massive(initial, t1, m, quad), t2, m, quad);
  const SpinorField one = evolve_massive(initial, t1 + t2, m, quad);
  double defect = 0.0;
  for (int i = 0; i <= two.n; ++i) {
    const double x = two.node(i);
    defect = std::max(defect, (two.values[i] - one.eval(x)).norm());
  }
  return defect;
}

}  // namespace fermisig
