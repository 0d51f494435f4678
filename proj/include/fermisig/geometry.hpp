#pragma once

// Bounded globally hyperbolic subsets of the Minkowski plane and conformally
// flat surfaces over them. The Cauchy surface is the segment {0} x (0,b); all
// domains live inside the causal diamond D spanned by (0,0) and (0,b).
//
// Light-cone coordinates: u = t + x, w = x - t (so v = t - x = -w). D is the
// unit square (0,b)^2 in (u,w), and lightlike rectangles are coordinate
// rectangles there.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fermisig/errors.hpp"
#include "fermisig/expression.hpp"
#include "fermisig/rng.hpp"

namespace fermisig {

struct Point {
  double t = 0.0;
  double x = 0.0;

  double u() const { return t + x; }
  double v() const { return t - x; }
  double w() const { return x - t; }
};

inline Point point_from_uw(double u, double w) { return Point{(u - w) / 2.0, (u + w) / 2.0}; }

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return std::max(0.0, hi - lo); }
  bool contains(double s) const { return s > lo && s < hi; }
};

// ---------------------------------------------------------------------------
// Domain types

struct SimpleDomain {
  std::vector<double> breakpoints;              // x_0 < x_1 < ... < x_K, x_0 = 0
  std::vector<std::vector<bool>> incidence;     // K x K, (k,l) = cell with w in I_k, u in I_l

  int K() const { return static_cast<int>(breakpoints.size()) - 1; }
  double width(int k) const { return breakpoints[k] - breakpoints[k - 1]; }  // 1-based
  bool cell(int k, int l) const { return incidence[k - 1][l - 1]; }          // 1-based
};

struct Polyline {
  std::vector<double> xs;  // strictly increasing, xs.front() = 0, xs.back() = b
  std::vector<double> ts;

  double eval(double x) const {
    if (x <= xs.front()) return ts.front();
    if (x >= xs.back()) return ts.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin());
    const double s = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ts[i - 1] + s * (ts[i] - ts[i - 1]);
  }

  std::vector<double> slopes() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < xs.size(); ++i) out.push_back((ts[i] - ts[i - 1]) / (xs[i] - xs[i - 1]));
    return out;
  }

  // Total variation of the derivative, with the derivative extended by zero
  // outside [0,b]: jumps at both endpoints count.
  double tv_of_slope() const {
    const auto s = slopes();
    if (s.empty()) return 0.0;
    double tv = std::fabs(s.front()) + std::fabs(s.back());
    for (std::size_t i = 1; i < s.size(); ++i) tv += std::fabs(s[i] - s[i - 1]);
    return tv;
  }
};

struct GraphDomain {
  double b = 1.0;
  Polyline t_plus;   // future boundary T_+ >= 0
  Polyline t_minus;  // past boundary T_- <= 0
};

// Conformal factor, expression-backed or sampled on a regular (t,x) grid with
// bilinear interpolation.
struct GridField {
  double t0 = 0, t1 = 0, x0 = 0, x1 = 0;
  int nt = 0, nx = 0;
  std::vector<double> values;  // (nt) x (nx), row-major in t

  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * nx + j]; }

  double eval(double t, double x) const {
    const double ht = (t1 - t0) / (nt - 1), hx = (x1 - x0) / (nx - 1);
    double ft = (t - t0) / ht, fx = (x - x0) / hx;
    ft = std::clamp(ft, 0.0, static_cast<double>(nt - 1));
    fx = std::clamp(fx, 0.0, static_cast<double>(nx - 1));
    const int i = std::min(nt - 2, static_cast<int>(ft)), j = std::min(nx - 2, static_cast<int>(fx));
    const double a = ft - i, c = fx - j;
    return (1 - a) * ((1 - c) * at(i, j) + c * at(i, j + 1)) + a * ((1 - c) * at(i + 1, j) + c * at(i + 1, j + 1));
  }
};

class ConformalFactor {
 public:
  ConformalFactor() : kind_(Kind::One) {}
  explicit ConformalFactor(ExprPtr e) : kind_(Kind::Expression), expr_(std::move(e)) {
    dt_ = derivative(expr_, 't');
    dx_ = derivative(expr_, 'x');
    dtt_ = derivative(dt_, 't');
    dxx_ = derivative(dx_, 'x');
  }
  explicit ConformalFactor(GridField g) : kind_(Kind::Grid), grid_(std::move(g)) {}

  bool trivial() const { return kind_ == Kind::One; }
  bool expression_backed() const { return kind_ == Kind::Expression; }
  const ExprPtr& expression() const { return expr_; }
  const GridField& grid() const { return grid_; }

  double operator()(double t, double x) const {
    switch (kind_) {
      case Kind::One:
        return 1.0;
      case Kind::Expression:
        return eval(expr_, t, x);
      case Kind::Grid:
        return grid_.eval(t, x);
    }
    return 1.0;
  }

  // d'Alembertian of log f. Exact for expression-backed factors.
  double box_log(double t, double x) const {
    if (kind_ == Kind::One) return 0.0;
    if (kind_ == Kind::Expression) {
      const double f = eval(expr_, t, x);
      const double ft = eval(dt_, t, x), fx = eval(dx_, t, x);
      const double ftt = eval(dtt_, t, x), fxx = eval(dxx_, t, x);
      return (ftt * f - ft * ft) / (f * f) - (fxx * f - fx * fx) / (f * f);
    }
    // second-order central differences on the sample grid
    const double ht = (grid_.t1 - grid_.t0) / (grid_.nt - 1);
    const double hx = (grid_.x1 - grid_.x0) / (grid_.nx - 1);
    if (t - ht < grid_.t0 || t + ht > grid_.t1 || x - hx < grid_.x0 || x + hx > grid_.x1)
      throw BoundaryTooClose("curvature stencil leaves the sample grid");
    auto lf = [&](double tt, double xx) { return std::log(grid_.eval(tt, xx)); };
    const double gtt = (lf(t + ht, x) - 2 * lf(t, x) + lf(t - ht, x)) / (ht * ht);
    const double gxx = (lf(t, x + hx) - 2 * lf(t, x) + lf(t, x - hx)) / (hx * hx);
    return gtt - gxx;
  }

 private:
  enum class Kind { One, Expression, Grid };
  Kind kind_;
  ExprPtr expr_, dt_, dx_, dtt_, dxx_;
  GridField grid_;
};

using FlatDomain = std::variant<SimpleDomain, GraphDomain>;

struct ConformalDomain {
  FlatDomain base;
  ConformalFactor f;
};

using Domain = std::variant<SimpleDomain, GraphDomain, ConformalDomain>;

// ---------------------------------------------------------------------------
// Containment (strict interior)

namespace detail {

inline bool simple_contains(const SimpleDomain& d, const Point& p) {
  const auto& bp = d.breakpoints;
  const int K = d.K();
  const double uu = p.u(), ww = p.w();
  if (uu <= bp.front() || uu >= bp.back() || ww <= bp.front() || ww >= bp.back()) return false;
  // strip index plus flag whether the coordinate sits exactly on a lattice line
  auto locate = [&](double s, int& idx, bool& on_line) {
    const auto it = std::upper_bound(bp.begin(), bp.end(), s);
    idx = static_cast<int>(it - bp.begin());  // 1-based strip
    on_line = (*(it - 1) == s);
  };
  int l = 0, k = 0;
  bool on_u = false, on_w = false;
  locate(uu, l, on_u);
  locate(ww, k, on_w);
  // interior of the closed-cell union: a lattice point is interior iff all
  // touching cells are included
  const std::vector<int> ls = on_u ? std::vector<int>{l - 1, l} : std::vector<int>{l};
  const std::vector<int> ks = on_w ? std::vector<int>{k - 1, k} : std::vector<int>{k};
  for (int kk : ks)
    for (int ll : ls) {
      if (kk < 1 || kk > K || ll < 1 || ll > K) return false;
      if (!d.cell(kk, ll)) return false;
    }
  return true;
}

inline bool graph_contains(const GraphDomain& d, const Point& p) {
  if (p.x <= 0.0 || p.x >= d.b) return false;
  return p.t > d.t_minus.eval(p.x) && p.t < d.t_plus.eval(p.x);
}

}  // namespace detail

inline bool flat_contains(const FlatDomain& d, const Point& p) {
  return std::visit(
      [&](const auto& dom) {
        using T = std::decay_t<decltype(dom)>;
        if constexpr (std::is_same_v<T, SimpleDomain>)
          return detail::simple_contains(dom, p);
        else
          return detail::graph_contains(dom, p);
      },
      d);
}

// ---------------------------------------------------------------------------
// Validation

class ValidatedDomain {
 public:
  Domain domain;
  double b = 0.0;  // Cauchy-surface length; bounding diamond is (0,b)^2 in (u,w)

  const FlatDomain& flat() const {
    if (const auto* c = std::get_if<ConformalDomain>(&domain)) return c->base;
    if (const auto* s = std::get_if<SimpleDomain>(&domain)) return as_flat_simple(s);
    return as_flat_graph(std::get_if<GraphDomain>(&domain));
  }

  bool conformal() const { return std::holds_alternative<ConformalDomain>(domain); }

  const ConformalFactor& factor() const {
    static const ConformalFactor one{};
    if (const auto* c = std::get_if<ConformalDomain>(&domain)) return c->f;
    return one;
  }

  bool contains(const Point& p) const { return flat_contains(flat(), p); }

  double f(double t, double x) const { return factor()(t, x); }

 private:
  // std::variant<SimpleDomain,GraphDomain> view without copying
  mutable std::optional<FlatDomain> flat_cache_;
  const FlatDomain& as_flat_simple(const SimpleDomain* s) const {
    if (!flat_cache_) flat_cache_ = FlatDomain(*s);
    return *flat_cache_;
  }
  const FlatDomain& as_flat_graph(const GraphDomain* g) const {
    if (!flat_cache_) flat_cache_ = FlatDomain(*g);
    return *flat_cache_;
  }
};

namespace detail {

inline void validate_simple(const SimpleDomain& d) {
  const int K = d.K();
  if (K < 1) throw InvariantViolation("simple domain needs at least one interval");
  if (std::fabs(d.breakpoints.front()) > 1e-12) throw InvariantViolation("breakpoints must start at 0");
  for (int i = 1; i <= K; ++i)
    if (!(d.breakpoints[i] > d.breakpoints[i - 1])) throw InvariantViolation("breakpoints not strictly increasing");
  if (static_cast<int>(d.incidence.size()) != K) throw InvariantViolation("incidence must be K x K");
  for (const auto& row : d.incidence)
    if (static_cast<int>(row.size()) != K) throw InvariantViolation("incidence must be K x K");
  for (int k = 1; k <= K; ++k)
    if (!d.cell(k, k)) throw InvariantViolation("missing diagonal cell (Cauchy line must lie in the domain)");

  // causal convexity: if two cells are causally ordered (future = u-strip
  // index up, w-strip index down), the whole index rectangle between them
  // must be filled
  std::vector<std::vector<int>> pref(K + 1, std::vector<int>(K + 1, 0));
  for (int k = 1; k <= K; ++k)
    for (int l = 1; l <= K; ++l) pref[k][l] = pref[k - 1][l] + pref[k][l - 1] - pref[k - 1][l - 1] + (d.cell(k, l) ? 1 : 0);
  auto filled = [&](int k1, int k2, int l1, int l2) {
    const int count = pref[k2][l2] - pref[k1 - 1][l2] - pref[k2][l1 - 1] + pref[k1 - 1][l1 - 1];
    return count == (k2 - k1 + 1) * (l2 - l1 + 1);
  };
  for (int k1 = 1; k1 <= K; ++k1)
    for (int l1 = 1; l1 <= K; ++l1) {
      if (!d.cell(k1, l1)) continue;
      for (int k2 = 1; k2 <= k1; ++k2)
        for (int l2 = l1; l2 <= K; ++l2) {
          if (!d.cell(k2, l2)) continue;
          if (!filled(k2, k1, l1, l2))
            throw InvariantViolation("causal convexity: hole between cells (" + std::to_string(k1) + "," +
                                     std::to_string(l1) + ") and (" + std::to_string(k2) + "," + std::to_string(l2) +
                                     ")");
        }
    }
}

inline void validate_polyline(const Polyline& p, double b, bool future) {
  if (p.xs.size() < 2 || p.xs.size() != p.ts.size()) throw InvariantViolation("boundary polyline needs >= 2 vertices");
  for (std::size_t i = 1; i < p.xs.size(); ++i)
    if (!(p.xs[i] > p.xs[i - 1])) throw InvariantViolation("boundary vertices must be strictly increasing in x");
  if (std::fabs(p.xs.front()) > 1e-12 || std::fabs(p.xs.back() - b) > 1e-12)
    throw InvariantViolation("boundary must span [0,b]");
  if (std::fabs(p.ts.front()) > 1e-12 || std::fabs(p.ts.back()) > 1e-12)
    throw InvariantViolation("boundary must be pinned to the Cauchy endpoints");
  for (double s : p.slopes())
    if (std::fabs(s) > 1.0 + 1e-12) throw InvariantViolation("non-timelike boundary violated (|slope| > 1)");
  for (double t : p.ts) {
    if (future && t < -1e-12) throw InvariantViolation("future boundary dips below the Cauchy line");
    if (!future && t > 1e-12) throw InvariantViolation("past boundary rises above the Cauchy line");
  }
}

inline void validate_graph(const GraphDomain& d) {
  if (!(d.b > 0.0)) throw InvariantViolation("Cauchy length b must be positive");
  validate_polyline(d.t_plus, d.b, true);
  validate_polyline(d.t_minus, d.b, false);
}

}  // namespace detail

inline ValidatedDomain validate_domain(const Domain& dom) {
  ValidatedDomain out;
  out.domain = dom;
  if (const auto* s = std::get_if<SimpleDomain>(&dom)) {
    detail::validate_simple(*s);
    out.b = s->breakpoints.back();
  } else if (const auto* g = std::get_if<GraphDomain>(&dom)) {
    detail::validate_graph(*g);
    out.b = g->b;
  } else {
    const auto& c = std::get<ConformalDomain>(dom);
    if (const auto* s2 = std::get_if<SimpleDomain>(&c.base)) {
      detail::validate_simple(*s2);
      out.b = s2->breakpoints.back();
    } else {
      detail::validate_graph(std::get<GraphDomain>(c.base));
      out.b = std::get<GraphDomain>(c.base).b;
    }
    if (std::fabs(out.b - 1.0) > 1e-12)
      throw InvariantViolation("conformal domains use the b = 1 Cauchy convention");
    // positivity of f sampled over the bounding diamond
    const int n = 64;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Point p = point_from_uw((i + 0.5) * out.b / n, (j + 0.5) * out.b / n);
        if (!flat_contains(c.base, p)) continue;
        const double v = c.f(p.t, p.x);
        if (!(v > 0.0) || !std::isfinite(v)) throw InvariantViolation("conformal factor must be strictly positive");
      }
  }
  return out;
}

inline bool contains(const ValidatedDomain& d, const Point& p) { return d.contains(p); }

// ---------------------------------------------------------------------------
// Regions and volumes

struct RegionSelector {
  enum class Kind { Whole, CausalSet, Beam, DiamondOf };
  Kind kind = Kind::Whole;
  Point zeta, zeta2;
  Interval I, J;

  static RegionSelector whole() { return {}; }
  static RegionSelector causal_set(Point z) { return {Kind::CausalSet, z, {}, {}, {}}; }
  static RegionSelector beam(Interval i, Interval j) { return {Kind::Beam, {}, {}, i, j}; }
  static RegionSelector diamond_of(Point a, Point bb) { return {Kind::DiamondOf, a, bb, {}, {}}; }

  bool member(const Point& p) const {
    switch (kind) {
      case Kind::Whole:
        return true;
      case Kind::CausalSet:
        return (p.u() - zeta.u()) * (p.v() - zeta.v()) >= 0.0;
      case Kind::Beam:
        return I.contains(p.u()) && J.contains(p.w());
      case Kind::DiamondOf: {
        const double du = (p.u() - zeta.u()) * (p.u() - zeta2.u());
        const double dv = (p.v() - zeta.v()) * (p.v() - zeta2.v());
        return du <= 0.0 && dv <= 0.0;
      }
    }
    return false;
  }

  // w-interval of the region at fixed u; empty optional = nothing there
  std::optional<Interval> w_interval(double u, double b) const {
    switch (kind) {
      case Kind::Whole:
        return Interval{0.0, b};
      case Kind::CausalSet:
        if (u > zeta.u()) return Interval{0.0, zeta.w()};
        return Interval{zeta.w(), b};
      case Kind::Beam:
        if (!I.contains(u)) return std::nullopt;
        return Interval{std::max(0.0, J.lo), std::min(b, J.hi)};
      case Kind::DiamondOf: {
        const double ulo = std::min(zeta.u(), zeta2.u()), uhi = std::max(zeta.u(), zeta2.u());
        if (u <= ulo || u >= uhi) return std::nullopt;
        const double wlo = std::min(zeta.w(), zeta2.w()), whi = std::max(zeta.w(), zeta2.w());
        return Interval{wlo, whi};
      }
    }
    return std::nullopt;
  }

  std::vector<double> u_breaks() const {
    switch (kind) {
      case Kind::Whole:
        return {};
      case Kind::CausalSet:
        return {zeta.u()};
      case Kind::Beam:
        return {I.lo, I.hi};
      case Kind::DiamondOf:
        return {zeta.u(), zeta2.u()};
    }
    return {};
  }
};

namespace detail {

// Sections of the flat domain along one light-cone coordinate with the other
// held fixed: {s : point(u,w) in M} where (u,w) = (c,s) if fixed_is_u, else
// (s,c). Exact (piecewise-linear boundaries), returned as disjoint intervals.
inline std::vector<Interval> lc_sections(const FlatDomain& d, double c, bool fixed_is_u) {
  std::vector<Interval> out;
  if (const auto* sd = std::get_if<SimpleDomain>(&d)) {
    const auto& bp = sd->breakpoints;
    if (c <= bp.front() || c >= bp.back()) return out;
    const int fixed_idx = static_cast<int>(std::upper_bound(bp.begin(), bp.end(), c) - bp.begin());
    for (int j = 1; j <= sd->K(); ++j) {
      const bool inc = fixed_is_u ? sd->cell(j, fixed_idx) : sd->cell(fixed_idx, j);
      if (!inc) continue;
      if (!out.empty() && out.back().hi == bp[j - 1])
        out.back().hi = bp[j];
      else
        out.push_back({bp[j - 1], bp[j]});
    }
    return out;
  }
  const auto& g = std::get<GraphDomain>(d);
  if (c <= 0.0 || c >= g.b) return out;
  // membership boundaries: kinks of T+- mapped to s = 2 x_i - c, plus the
  // zero of the linear gap t - T(x) on each piece
  std::vector<double> breaks{0.0, g.b};
  const double sgn = fixed_is_u ? -1.0 : 1.0;  // t = sgn (s - c)/2
  auto add_breaks = [&](const Polyline& p) {
    for (double xi : p.xs) {
      const double s = 2.0 * xi - c;
      if (s > 0.0 && s < g.b) breaks.push_back(s);
    }
    for (std::size_t i = 1; i < p.xs.size(); ++i) {
      const double x0 = p.xs[i - 1], x1 = p.xs[i], t0 = p.ts[i - 1];
      const double slope = (p.ts[i] - t0) / (x1 - x0);
      const double denom = sgn - slope;
      if (std::fabs(denom) < 1e-14) continue;  // boundary piece parallel to the scan line
      const double s = (sgn * c + 2.0 * t0 + slope * c - 2.0 * slope * x0) / denom;
      const double x = (s + c) / 2.0;
      if (s > 0.0 && s < g.b && x >= x0 - 1e-12 && x <= x1 + 1e-12) breaks.push_back(s);
    }
  };
  add_breaks(g.t_plus);
  add_breaks(g.t_minus);
  std::sort(breaks.begin(), breaks.end());
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    if (breaks[i] - breaks[i - 1] < 1e-14) continue;
    const double sm = 0.5 * (breaks[i] + breaks[i - 1]);
    const Point p = fixed_is_u ? point_from_uw(c, sm) : point_from_uw(sm, c);
    if (graph_contains(g, p)) {
      if (!out.empty() && std::fabs(out.back().hi - breaks[i - 1]) < 1e-14)
        out.back().hi = breaks[i];
      else
        out.push_back({breaks[i - 1], breaks[i]});
    }
  }
  return out;
}

// w-sections of the flat domain at fixed u
inline std::vector<Interval> w_sections(const FlatDomain& d, double u) { return lc_sections(d, u, true); }

inline std::vector<double> domain_u_breaks(const FlatDomain& d) {
  if (const auto* s = std::get_if<SimpleDomain>(&d)) return s->breakpoints;
  const auto& g = std::get<GraphDomain>(d);
  std::vector<double> out{0.0, g.b};
  auto add = [&](const Polyline& p) {
    for (std::size_t i = 0; i < p.xs.size(); ++i) {
      const double uu = p.ts[i] + p.xs[i];
      if (uu > 0.0 && uu < g.b) out.push_back(uu);
    }
  };
  add(g.t_plus);
  add(g.t_minus);
  std::sort(out.begin(), out.end());
  return out;
}

// Exact integral over u of the overlap between the domain sections and the
// region's w-interval. Between structural breakpoints the section ends are
// linear in u and the region interval is constant, so the overlap is exact
// piecewise-linear integration with analytically located kinks.
inline double overlap_length(const FlatDomain& d, const RegionSelector& r, double b, double u) {
  const auto reg = r.w_interval(u, b);
  if (!reg) return 0.0;
  double total = 0.0;
  for (const auto& s : w_sections(d, u))
    total += std::max(0.0, std::min(s.hi, reg->hi) - std::max(s.lo, reg->lo));
  return total;
}

inline double integrate_overlap_panel(const FlatDomain& d, const RegionSelector& r, double b, double ua, double ub,
                                      int depth) {
  const double h = ub - ua;
  if (h < 1e-14) return overlap_length(d, r, b, 0.5 * (ua + ub)) * h;
  const double p1 = ua + 0.25 * h, p2 = ua + 0.75 * h;
  const auto reg = r.w_interval(0.5 * (ua + ub), b);
  if (!reg) return 0.0;
  const auto s1 = w_sections(d, p1), s2 = w_sections(d, p2);
  if (s1.size() != s2.size()) {
    if (depth > 52) return 0.5 * h * (overlap_length(d, r, b, p1) + overlap_length(d, r, b, p2));
    return integrate_overlap_panel(d, r, b, ua, 0.5 * (ua + ub), depth + 1) +
           integrate_overlap_panel(d, r, b, 0.5 * (ua + ub), ub, depth + 1);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < s1.size(); ++j) {
    // reconstruct the linear section ends from the two interior samples
    const double lo_slope = (s2[j].lo - s1[j].lo) / (p2 - p1);
    const double hi_slope = (s2[j].hi - s1[j].hi) / (p2 - p1);
    auto lo_at = [&](double u) { return s1[j].lo + lo_slope * (u - p1); };
    auto hi_at = [&](double u) { return s1[j].hi + hi_slope * (u - p1); };
    auto overlap_at = [&](double u) {
      return std::max(0.0, std::min(hi_at(u), reg->hi) - std::max(lo_at(u), reg->lo));
    };
    // kinks: clamping events of the two linear ends
    std::vector<double> cuts{ua, ub};
    auto add_cross = [&](double val, double base, double slope) {
      if (std::fabs(slope) < 1e-14) return;
      const double u = p1 + (val - base) / slope;
      if (u > ua && u < ub) cuts.push_back(u);
    };
    add_cross(reg->lo, s1[j].lo, lo_slope);
    add_cross(reg->hi, s1[j].hi, hi_slope);
    // vanishing overlap: min(hi,Rhi) - max(lo,Rlo) = 0 in any clamp regime
    add_cross(reg->lo, s1[j].hi, hi_slope);
    add_cross(reg->hi, s1[j].lo, lo_slope);
    if (std::fabs(hi_slope - lo_slope) > 1e-14) {
      const double u = p1 + (s1[j].lo - s1[j].hi) / (hi_slope - lo_slope);
      if (u > ua && u < ub) cuts.push_back(u);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 1; i < cuts.size(); ++i)
      total += 0.5 * (overlap_at(cuts[i - 1]) + overlap_at(cuts[i])) * (cuts[i] - cuts[i - 1]);
  }
  return total;
}

}  // namespace detail

enum class VolumeMethod { Exact, Grid, MonteCarlo };

struct McResult {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
};

// Monte Carlo volume, sampling (u,w) uniformly over the bounding diamond.
// Deterministic for fixed (seed, samples).
inline McResult volume_montecarlo(const ValidatedDomain& d, const RegionSelector& region, std::uint64_t seed,
                                  std::int64_t samples) {
  CounterRng rng(seed, /*stream=*/17);
  const double cell = d.b * d.b / 2.0;  // tx-area of the bounding diamond
  double sum = 0.0, sumsq = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    const Point p = point_from_uw(rng.uniform() * d.b, rng.uniform() * d.b);
    double val = 0.0;
    if (d.contains(p) && region.member(p)) {
      const double f = d.conformal() ? d.f(p.t, p.x) : 1.0;
      val = f * f;
    }
    sum += val;
    sumsq += val * val;
  }
  const double mean = sum / samples;
  const double var = std::max(0.0, sumsq / samples - mean * mean);
  return {cell * mean, cell * std::sqrt(var / samples), samples};
}

inline double volume_grid(const ValidatedDomain& d, const RegionSelector& region, int n) {
  const double h = d.b / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Point p = point_from_uw((i + 0.5) * h, (j + 0.5) * h);
      if (!d.contains(p) || !region.member(p)) continue;
      const double f = d.conformal() ? d.f(p.t, p.x) : 1.0;
      sum += f * f;
    }
  return sum * h * h / 2.0;
}

inline double volume_exact(const ValidatedDomain& d, const RegionSelector& region) {
  if (d.conformal()) throw UnsupportedExact("exact volume of a conformal domain");
  const FlatDomain& flat = d.flat();
  if (region.kind == RegionSelector::Kind::Whole) {
    if (const auto* s = std::get_if<SimpleDomain>(&flat)) {
      double sum = 0.0;
      for (int k = 1; k <= s->K(); ++k)
        for (int l = 1; l <= s->K(); ++l)
          if (s->cell(k, l)) sum += s->width(k) * s->width(l) / 2.0;
      return sum;
    }
    const auto& g = std::get<GraphDomain>(flat);
    std::vector<double> xs;
    xs.insert(xs.end(), g.t_plus.xs.begin(), g.t_plus.xs.end());
    xs.insert(xs.end(), g.t_minus.xs.begin(), g.t_minus.xs.end());
    std::sort(xs.begin(), xs.end());
    double sum = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
      if (xs[i] - xs[i - 1] < 1e-15) continue;
      const double ga = g.t_plus.eval(xs[i - 1]) - g.t_minus.eval(xs[i - 1]);
      const double gb = g.t_plus.eval(xs[i]) - g.t_minus.eval(xs[i]);
      sum += 0.5 * (ga + gb) * (xs[i] - xs[i - 1]);
    }
    return sum;
  }
  // general piecewise-linear region: integrate section overlaps in u
  std::vector<double> breaks = detail::domain_u_breaks(flat);
  for (double ub : region.u_breaks())
    if (ub > 0.0 && ub < d.b) breaks.push_back(ub);
  breaks.push_back(0.0);
  breaks.push_back(d.b);
  std::sort(breaks.begin(), breaks.end());
  double uvarea = 0.0;
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    const double ua = breaks[i - 1], ub = breaks[i];
    if (ub - ua < 1e-15) continue;
    uvarea += detail::integrate_overlap_panel(flat, region, d.b, ua, ub, 0);
  }
  return uvarea / 2.0;
}

inline double volume(const ValidatedDomain& d, const RegionSelector& region, VolumeMethod method,
                     std::uint64_t seed = 0, std::int64_t samples = 200000, int grid_n = 512) {
  switch (method) {
    case VolumeMethod::Exact:
      return volume_exact(d, region);
    case VolumeMethod::Grid:
      return volume_grid(d, region, grid_n);
    case VolumeMethod::MonteCarlo:
      return volume_montecarlo(d, region, seed, samples).value;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Curves

struct CurveSample {
  enum class Kind { Timelike, Spacelike };
  std::vector<Point> vertices;
  Kind kind = Kind::Spacelike;
};

inline double curve_length(const CurveSample& c, const ConformalFactor* f = nullptr) {
  if (c.vertices.size() < 2) return 0.0;
  double len = 0.0;
  for (std::size_t i = 1; i < c.vertices.size(); ++i) {
    const double dt = c.vertices[i].t - c.vertices[i - 1].t;
    const double dx = c.vertices[i].x - c.vertices[i - 1].x;
    const double q = dt * dt - dx * dx;
    if (c.kind == CurveSample::Kind::Timelike && q <= 0.0)
      throw MixedCausalType("segment " + std::to_string(i) + " is not timelike");
    if (c.kind == CurveSample::Kind::Spacelike && q >= 0.0)
      throw MixedCausalType("segment " + std::to_string(i) + " is not spacelike");
    double seg = std::sqrt(std::fabs(q));
    if (f) {
      const Point mid{0.5 * (c.vertices[i].t + c.vertices[i - 1].t), 0.5 * (c.vertices[i].x + c.vertices[i - 1].x)};
      seg *= (*f)(mid.t, mid.x);
    }
    len += seg;
  }
  return len;
}

inline double cell_area(const SimpleDomain& d, int k, int l) {
  if (k < 1 || k > d.K() || l < 1 || l > d.K()) throw IndexOutOfRange("cell index out of range");
  if (!d.cell(k, l)) return 0.0;
  return d.width(k) * d.width(l) / 2.0;
}

// ---------------------------------------------------------------------------
// Curvature of conformally flat metrics: R = -(2/f^2) box(log f)

inline double scalar_curvature(const ConformalDomain& d, const Point& p) {
  const double f = d.f(p.t, p.x);
  return -2.0 / (f * f) * d.f.box_log(p.t, p.x);
}

// Integral of R over the causal diamond spanned by zeta and zeta2, evaluated
// through the corner formula (no quadrature).
inline double diamond_curvature_integral(const ConformalDomain& d, const ValidatedDomain& vd, const Point& zeta,
                                         const Point& zeta2) {
  const Point eta = point_from_uw(zeta.u(), zeta2.w());
  const Point eta2 = point_from_uw(zeta2.u(), zeta.w());
  if (!vd.contains(eta) || !vd.contains(eta2)) throw CornerOutsideDomain("diamond corner outside the domain");
  const auto lf = [&](const Point& q) { return std::log(d.f(q.t, q.x)); };
  return -4.0 * (lf(zeta) + lf(zeta2) - lf(eta) - lf(eta2));
}

}  // namespace fermisig
