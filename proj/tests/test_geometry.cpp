#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fermisig/geometry.hpp"
#include "fixtures.hpp"

using namespace fermisig;
namespace fx = fermisig::fixtures;

TEST_CASE("validate: smallest simple domain and constructed violations") {
  CHECK_NOTHROW(validate_domain(fx::diamond_simple(1.0)));

  SimpleDomain missing_diag;
  missing_diag.breakpoints = {0.0, 1.0, 2.0};
  missing_diag.incidence = {{true, false}, {false, false}};
  CHECK_THROWS_AS(validate_domain(Domain{missing_diag}), InvariantViolation);

  // convexity hole: cells (2,2) and (1,3) demand the column between them
  SimpleDomain holed;
  holed.breakpoints = {0.0, 1.0, 2.0, 3.0};
  holed.incidence = {{true, false, true}, {false, true, false}, {false, false, true}};
  CHECK_THROWS_AS(validate_domain(Domain{holed}), InvariantViolation);

  GraphDomain steep = fx::triangle_graph(1.0);
  steep.t_plus.ts = {0.0, 0.6, 0.0};  // slope 1.2
  CHECK_THROWS_AS(validate_domain(Domain{steep}), InvariantViolation);

  GraphDomain unpinned = fx::triangle_graph(1.0);
  unpinned.t_plus.ts = {0.1, 0.5, 0.0};
  CHECK_THROWS_AS(validate_domain(Domain{unpinned}), InvariantViolation);

  ConformalDomain bad_f;
  bad_f.base = fx::diamond_graph(1.0);
  bad_f.f = ConformalFactor(parse_expression("x - 0.5"));  // changes sign
  CHECK_THROWS_AS(validate_domain(Domain{bad_f}), InvariantViolation);
}

TEST_CASE("the isospectral-example staircase domains validate") {
  SimpleDomain t_dom;
  t_dom.breakpoints = {0.0, 1.0, 2.0, 3.0};
  t_dom.incidence = {{true, true, false}, {false, true, true}, {false, false, true}};
  CHECK_NOTHROW(validate_domain(Domain{t_dom}));
  // and its time reflection
  SimpleDomain mirrored = t_dom;
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) mirrored.incidence[k][l] = t_dom.incidence[l][k];
  CHECK_NOTHROW(validate_domain(Domain{mirrored}));
}

TEST_CASE("contains") {
  const auto diamond = validate_domain(fx::diamond_simple(1.0));
  CHECK(diamond.contains(Point{0.0, 0.5}));
  CHECK_FALSE(diamond.contains(Point{0.6, 0.5}));
  CHECK_FALSE(diamond.contains(Point{0.5, 0.5}));  // apex is boundary
  CHECK_FALSE(diamond.contains(Point{0.0, 0.0}));  // corner is boundary

  const auto tri = validate_domain(Domain{fx::triangle_graph(1.0)});
  CHECK_FALSE(tri.contains(Point{-0.1, 0.5}));
  CHECK(tri.contains(Point{0.2, 0.5}));
  CHECK_FALSE(tri.contains(Point{0.0, 0.5}));  // base edge

  // staircase: a lattice edge between two included cells is interior, an
  // edge bordering a missing cell is boundary
  const auto stair = validate_domain(Domain{fx::staircase2(1.0, 1.0)});
  CHECK(stair.contains(Point{0.25, 0.75}));         // u = 1 edge between (1,1) and (1,2)
  CHECK_FALSE(stair.contains(Point{-0.25, 0.75}));  // w = 1 edge, past cell (2,1) missing
}

TEST_CASE("volume: exact, grid, monte carlo") {
  const auto diamond = validate_domain(fx::diamond_simple(1.0));
  CHECK(volume(diamond, RegionSelector::whole(), VolumeMethod::Exact) == doctest::Approx(0.5).epsilon(1e-13));

  // causal set of (0, 0.5): future and past triangles of 1/8 each
  const double vol_cs = volume(diamond, RegionSelector::causal_set(Point{0.0, 0.5}), VolumeMethod::Exact);
  CHECK(vol_cs == doctest::Approx(0.25).epsilon(1e-12));
  const double vol_cs_grid = volume(diamond, RegionSelector::causal_set(Point{0.0, 0.5}), VolumeMethod::Grid);
  CHECK(vol_cs_grid == doctest::Approx(0.25).epsilon(2e-3));

  // beam through the diamond: full intervals give the whole volume
  const double vol_beam =
      volume(diamond, RegionSelector::beam(Interval{0.0, 1.0}, Interval{0.0, 1.0}), VolumeMethod::Exact);
  CHECK(vol_beam == doctest::Approx(0.5).epsilon(1e-13));
  const double vol_beam2 =
      volume(diamond, RegionSelector::beam(Interval{0.2, 0.5}, Interval{0.4, 0.9}), VolumeMethod::Exact);
  CHECK(vol_beam2 == doctest::Approx(0.3 * 0.5 / 2.0).epsilon(1e-12));

  // diamond-of-two-points region
  const Point za{-0.2, 0.5}, zb{0.2, 0.5};
  const double vol_dd = volume(diamond, RegionSelector::diamond_of(za, zb), VolumeMethod::Exact);
  CHECK(vol_dd == doctest::Approx(0.4 * 0.4 / 2.0).epsilon(1e-12));

  // graph domain: triangle area b^2/4
  const auto tri = validate_domain(Domain{fx::triangle_graph(1.0)});
  CHECK(volume(tri, RegionSelector::whole(), VolumeMethod::Exact) == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("volume: exact vs monte carlo within 3 standard errors on random simple domains") {
  for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u}) {
    const auto dom = validate_domain(Domain{fx::random_simple(seed)});
    const double exact = volume(dom, RegionSelector::whole(), VolumeMethod::Exact);
    const McResult mc = volume_montecarlo(dom, RegionSelector::whole(), seed, 200000);
    CHECK(std::fabs(mc.value - exact) <= 3.0 * mc.std_error + 1e-12);
    // cell-area sum equals the exact volume
    const auto& sd = std::get<SimpleDomain>(dom.domain);
    double cells = 0.0;
    for (int k = 1; k <= sd.K(); ++k)
      for (int l = 1; l <= sd.K(); ++l) cells += cell_area(sd, k, l);
    CHECK(cells == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("monte carlo volume is deterministic in the seed") {
  const auto dom = validate_domain(Domain{fx::random_simple(5)});
  const McResult a = volume_montecarlo(dom, RegionSelector::whole(), 42, 50000);
  const McResult b = volume_montecarlo(dom, RegionSelector::whole(), 42, 50000);
  CHECK(a.value == b.value);
  const McResult c = volume_montecarlo(dom, RegionSelector::whole(), 43, 50000);
  CHECK(a.value != c.value);
}

TEST_CASE("domain lies inside its bounding diamond (rejection sampling)") {
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    const auto dom = validate_domain(Domain{fx::random_simple(seed)});
    CounterRng rng(seed, 9);
    for (int i = 0; i < 2000; ++i) {
      const Point p = point_from_uw(rng.uniform(-0.5, 1.5) * dom.b, rng.uniform(-0.5, 1.5) * dom.b);
      if (dom.contains(p)) {
        CHECK(p.u() > 0.0);
        CHECK(p.u() < dom.b);
        CHECK(p.w() > 0.0);
        CHECK(p.w() < dom.b);
      }
    }
  }
}

TEST_CASE("causal-set volume against brute-force grid counting") {
  const auto dom = validate_domain(Domain{fx::staircase2(1.0, 0.7)});
  const Point z{0.1, 0.6};
  const double exact = volume(dom, RegionSelector::causal_set(z), VolumeMethod::Exact);
  // 100 x 100 brute-force containment grid
  const double grid = volume_grid(dom, RegionSelector::causal_set(z), 100);
  CHECK(exact == doctest::Approx(grid).epsilon(0.03));
  // monotonicity: causal set of a point in J(z) integrates consistently
  const double whole = volume(dom, RegionSelector::whole(), VolumeMethod::Exact);
  CHECK(exact <= whole + 1e-12);
}

TEST_CASE("curve lengths") {
  CurveSample cauchy{{{0.0, 0.0}, {0.0, 1.0}}, CurveSample::Kind::Spacelike};
  CHECK(curve_length(cauchy) == doctest::Approx(1.0));

  CurveSample diag{{{-0.5, 0.5}, {0.5, 0.5}}, CurveSample::Kind::Timelike};
  CHECK(curve_length(diag) == doctest::Approx(1.0));

  CurveSample poly{{{0.0, 0.0}, {0.2, 0.5}, {0.0, 1.0}}, CurveSample::Kind::Spacelike};
  CHECK(curve_length(poly) == doctest::Approx(2.0 * std::sqrt(0.25 - 0.04)).epsilon(1e-12));

  CurveSample mixed{{{0.0, 0.0}, {0.2, 0.5}, {0.9, 0.6}}, CurveSample::Kind::Spacelike};
  CHECK_THROWS_AS(curve_length(mixed), MixedCausalType);

  // conformal length weights each segment by f at its midpoint
  ConformalFactor two(parse_expression("2"));
  CHECK(curve_length(cauchy, &two) == doctest::Approx(2.0));
}

TEST_CASE("cell areas") {
  const auto d = fx::diamond_simple(2.0);
  CHECK(cell_area(d, 1, 1) == doctest::Approx(2.0));  // l^2/2
  CHECK_THROWS_AS(cell_area(d, 0, 1), IndexOutOfRange);
  CHECK_THROWS_AS(cell_area(d, 1, 2), IndexOutOfRange);

  SimpleDomain ab;
  ab.breakpoints = {0.0, std::sqrt(2.0) * 1.5, std::sqrt(2.0) * (1.5 + 0.5)};
  ab.incidence = {{true, true}, {false, true}};
  CHECK(cell_area(ab, 1, 2) == doctest::Approx(1.5 * 0.5).epsilon(1e-12));  // sqrt2 a x sqrt2 b -> a b
  CHECK(cell_area(ab, 2, 1) == 0.0);                                        // excluded cell
}

TEST_CASE("scalar curvature") {
  ConformalDomain flat = fx::conformal_diamond("1");
  CHECK(scalar_curvature(flat, Point{0.1, 0.4}) == doctest::Approx(0.0));

  ConformalDomain linear = fx::conformal_diamond("exp(t)");
  CHECK(std::fabs(scalar_curvature(linear, Point{0.1, 0.4})) < 1e-12);

  ConformalDomain quad = fx::conformal_diamond("exp((t^2 - x^2)/4)");
  for (const Point p : {Point{0.05, 0.45}, Point{-0.1, 0.6}}) {
    const double expect = -2.0 * std::exp(-(p.t * p.t - p.x * p.x) / 2.0);
    CHECK(scalar_curvature(quad, p) == doctest::Approx(expect).epsilon(1e-10));
  }

  // grid-backed factor: central differences against the exact value
  GridField gf;
  gf.t0 = -0.6;
  gf.t1 = 0.6;
  gf.x0 = -0.1;
  gf.x1 = 1.1;
  gf.nt = gf.nx = 241;
  for (int i = 0; i < gf.nt; ++i)
    for (int j = 0; j < gf.nx; ++j) {
      const double t = gf.t0 + (gf.t1 - gf.t0) * i / (gf.nt - 1);
      const double x = gf.x0 + (gf.x1 - gf.x0) * j / (gf.nx - 1);
      gf.values.push_back(std::exp((t * t - x * x) / 4.0));
    }
  ConformalDomain quad_grid;
  quad_grid.base = fx::diamond_graph(1.0);
  quad_grid.f = ConformalFactor(gf);
  const Point p{0.05, 0.45};
  CHECK(scalar_curvature(quad_grid, p) ==
        doctest::Approx(-2.0 * std::exp(-(p.t * p.t - p.x * p.x) / 2.0)).epsilon(0.05));
  CHECK_THROWS_AS(scalar_curvature(quad_grid, Point{0.599, 0.5}), BoundaryTooClose);
}

TEST_CASE("diamond curvature integral: corner formula vs quadrature") {
  ConformalDomain flat = fx::conformal_diamond("1");
  const auto vflat = validate_domain(Domain{flat});
  CHECK(diamond_curvature_integral(flat, vflat, Point{0.2, 0.5}, Point{-0.2, 0.5}) == doctest::Approx(0.0));

  ConformalDomain quad = fx::conformal_diamond("exp((t^2 - x^2)/4)");
  const auto vquad = validate_domain(Domain{quad});
  const Point z1{0.2, 0.5}, z2{-0.2, 0.5};
  const double corner = diamond_curvature_integral(quad, vquad, z1, z2);

  // 2d quadrature of R f^2 over the causal diamond D(z1, z2)
  const int n = 600;
  double sum = 0.0;
  const double ulo = std::min(z1.u(), z2.u()), uhi = std::max(z1.u(), z2.u());
  const double wlo = std::min(z1.w(), z2.w()), whi = std::max(z1.w(), z2.w());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Point p = point_from_uw(ulo + (uhi - ulo) * (i + 0.5) / n, wlo + (whi - wlo) * (j + 0.5) / n);
      const double f = quad.f(p.t, p.x);
      sum += scalar_curvature(quad, p) * f * f;
    }
  sum *= (uhi - ulo) * (whi - wlo) / (2.0 * n * n);
  CHECK(corner == doctest::Approx(sum).epsilon(0.005));

  // degenerate lightlike pair: corners coincide with the endpoints
  const Point l1{0.0, 0.3}, l2{0.1, 0.4};
  CHECK(std::fabs(diamond_curvature_integral(quad, vquad, l1, l2)) < 1e-12);

  // corner dips below the Cauchy line of a triangle-based surface
  ConformalDomain tri_conf;
  tri_conf.base = fx::triangle_graph(1.0);
  tri_conf.f = ConformalFactor(parse_expression("exp((t^2 - x^2)/4)"));
  const auto vtri = validate_domain(Domain{tri_conf});
  CHECK_THROWS_AS(
      diamond_curvature_integral(tri_conf, vtri, point_from_uw(0.2, 0.15), point_from_uw(0.9, 0.85)),
      CornerOutsideDomain);
}
