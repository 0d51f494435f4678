#pragma once

// Bessel functions J0, J1 of the first kind, self-contained.
// Power series in extended precision for small argument, Hankel asymptotic
// expansion beyond; absolute accuracy better than 1e-12 on [0, 50].

#include <cmath>
#include <numbers>

namespace fermisig::bessel {

namespace detail {

inline constexpr double kSeriesCut = 15.0;

inline double series_jn(int nu, double x) {
  // J_nu(x) = (x/2)^nu sum_k (-1)^k (x^2/4)^k / (k! (k+nu)!)
  const long double q = static_cast<long double>(x) * x / 4.0L;
  long double term = 1.0L;
  for (int j = 1; j <= nu; ++j) term *= static_cast<long double>(x) / (2.0L * j);
  long double sum = term;
  for (int k = 1; k < 80; ++k) {
    term *= -q / (static_cast<long double>(k) * (k + nu));
    sum += term;
    if (std::fabs(static_cast<double>(term)) < 1e-19L * (1.0L + std::fabs(static_cast<double>(sum)))) break;
  }
  return static_cast<double>(sum);
}

inline double hankel_jn(int nu, double x) {
  // A&S 9.2.5: J_nu = sqrt(2/(pi x)) (P cos chi - Q sin chi), chi = x - (2 nu + 1) pi/4
  const double mu = 4.0 * nu * nu;
  long double a = 1.0L;  // a_k recursion
  long double p = 1.0L, q = 0.0L;
  const long double inv_x = 1.0L / x;
  long double xpow = 1.0L;
  for (int k = 1; k <= 14; ++k) {
    a *= (mu - (2.0L * k - 1.0L) * (2.0L * k - 1.0L)) / (8.0L * k);
    xpow *= inv_x;
    const long double contrib = a * xpow;
    const int j = (k / 2) % 2;  // sign (-1)^floor(k/2)
    if (k % 2 == 1)
      q += (j ? -contrib : contrib);
    else
      p += (j ? -contrib : contrib);
    if (std::fabs(static_cast<double>(contrib)) < 1e-18) break;
  }
  const double chi = x - (2 * nu + 1) * std::numbers::pi / 4.0;
  return std::sqrt(2.0 / (std::numbers::pi * x)) *
         (static_cast<double>(p) * std::cos(chi) - static_cast<double>(q) * std::sin(chi));
}

}  // namespace detail

inline double j0(double x) {
  x = std::fabs(x);
  return x <= detail::kSeriesCut ? detail::series_jn(0, x) : detail::hankel_jn(0, x);
}

inline double j1(double x) {
  const double s = x < 0 ? -1.0 : 1.0;
  x = std::fabs(x);
  return s * (x <= detail::kSeriesCut ? detail::series_jn(1, x) : detail::hankel_jn(1, x));
}

// J1(x)/x, finite at the origin (limit 1/2); this is the combination entering
// the causal fundamental solution on the light cone.
inline double j1_over_x(double x) {
  if (std::fabs(x) < 1e-8) return 0.5 - x * x / 16.0;
  return j1(x) / x;
}

}  // namespace fermisig::bessel
