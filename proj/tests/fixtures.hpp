#pragma once

// Shared domain fixtures for the test suites.

#include <vector>

#include "fermisig/geometry.hpp"
#include "fermisig/rng.hpp"

namespace fermisig::fixtures {

// single causal diamond over a Cauchy line of length l, as a simple domain
inline SimpleDomain diamond_simple(double l = 1.0) {
  SimpleDomain d;
  d.breakpoints = {0.0, l};
  d.incidence = {{true}};
  return d;
}

// the same diamond as a graph domain
inline GraphDomain diamond_graph(double b = 1.0) {
  GraphDomain g;
  g.b = b;
  g.t_plus.xs = {0.0, b / 2.0, b};
  g.t_plus.ts = {0.0, b / 2.0, 0.0};
  g.t_minus.xs = {0.0, b / 2.0, b};
  g.t_minus.ts = {0.0, -b / 2.0, 0.0};
  return g;
}

// triangle with future boundary min(x, b-x) and flat past boundary
inline GraphDomain triangle_graph(double b = 1.0) {
  GraphDomain g;
  g.b = b;
  g.t_plus.xs = {0.0, b / 2.0, b};
  g.t_plus.ts = {0.0, b / 2.0, 0.0};
  g.t_minus.xs = {0.0, b};
  g.t_minus.ts = {0.0, 0.0};
  return g;
}

// two diamonds joined by one future cell (the K = 2 staircase)
inline SimpleDomain staircase2(double w1 = 1.0, double w2 = 0.6) {
  SimpleDomain d;
  d.breakpoints = {0.0, w1, w1 + w2};
  d.incidence = {{true, true}, {false, true}};
  return d;
}

// random causally convex simple domain: diagonal cells plus a staircase band
inline SimpleDomain random_simple(std::uint64_t seed, int max_K = 6) {
  CounterRng rng(seed, 3);
  const int K = 1 + static_cast<int>(rng.uniform() * max_K);
  SimpleDomain d;
  d.breakpoints = {0.0};
  for (int k = 0; k < K; ++k) d.breakpoints.push_back(d.breakpoints.back() + 0.1 + rng.uniform());
  d.incidence.assign(K, std::vector<bool>(K, false));
  for (int k = 0; k < K; ++k) d.incidence[k][k] = true;
  // future band: cells (k, l) with k <= l <= k + reach, staircase-convex
  std::vector<int> reach_f(K, 0), reach_p(K, 0);
  for (int k = 0; k < K; ++k) {
    reach_f[k] = static_cast<int>(rng.uniform() * 2.4);
    reach_p[k] = static_cast<int>(rng.uniform() * 2.4);
  }
  // enforce convexity by monotone trimming: a cell (k,l), l > k is allowed
  // only if (k+1, l) or (k, l-1) is present; build by expanding bands level
  // by level
  for (int band = 1; band < K; ++band)
    for (int k = 0; k + band < K; ++k) {
      const int l = k + band;
      const bool support = band == 1 || (d.incidence[k + 1][l] && d.incidence[k][l - 1]);
      if (support && reach_f[k] >= band) d.incidence[k][l] = true;
      const bool support_p = band == 1 || (d.incidence[l][k + 1] && d.incidence[l - 1][k]);
      if (support_p && reach_p[k] >= band) d.incidence[l][k] = true;
    }
  return d;
}

inline ConformalDomain conformal_diamond(const char* f_expr) {
  ConformalDomain c;
  c.base = diamond_graph(1.0);
  c.f = ConformalFactor(parse_expression(f_expr));
  return c;
}

}  // namespace fermisig::fixtures
