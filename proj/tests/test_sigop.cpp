#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fermisig/sigop.hpp"
#include "fermisig/spectral.hpp"
#include "fixtures.hpp"

using namespace fermisig;
namespace fx = fermisig::fixtures;

TEST_CASE("build_simple: unit diamond and the example staircase") {
  const SimpleOperator op = build_simple(fx::diamond_simple(1.0));
  REQUIRE(op.K == 1);
  CHECK(op.T(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  const auto rep = spectrum(op);
  CHECK(rep.eigenvalues[0] == doctest::Approx(kInvFourPi).epsilon(1e-14));
  CHECK(rep.eigenvalues[1] == doctest::Approx(-kInvFourPi).epsilon(1e-14));

  // isospectral-example domain at (a,b,c) = (1,1,1): T = [[1,1,0],[0,1,1],[0,0,1]]
  SimpleDomain stair;
  const double s2 = std::sqrt(2.0);
  stair.breakpoints = {0.0, s2, 2 * s2, 3 * s2};
  stair.incidence = {{true, true, false}, {false, true, true}, {false, false, true}};
  const SimpleOperator t3 = build_simple(stair);
  Eigen::MatrixXd expect(3, 3);
  expect << 1, 1, 0, 0, 1, 1, 0, 0, 1;
  CHECK((t3.T - expect).norm() < 1e-14);

  // diagonal-only incidence decouples into diamonds with T = diag(w_k / sqrt 2)
  SimpleDomain diag;
  diag.breakpoints = {0.0, 0.5, 1.7};
  diag.incidence = {{true, false}, {false, true}};
  const SimpleOperator t2 = build_simple(diag);
  CHECK(t2.T(0, 0) == doctest::Approx(0.5 / s2));
  CHECK(t2.T(1, 1) == doctest::Approx(1.2 / s2));
  CHECK(t2.T(0, 1) == 0.0);

  // the full block matrix is Hermitian with the right corner blocks
  const Eigen::MatrixXd full = t3.full_matrix();
  CHECK((full - full.transpose()).norm() == 0.0);
  CHECK(full(3, 0) == doctest::Approx(1.0 / (kTwoPi * s2)));
}

TEST_CASE("build_flat_massless: diamond kernel structure") {
  const auto d = validate_domain(Domain{fx::diamond_simple(1.0)});
  const OperatorMatrix op = build_flat_massless(d, 64);
  CHECK(op.chiral);
  // on the Cauchy line i+-(x,x) = (0,x) lies inside: entries (1/4pi)
  for (int i = 0; i < op.n; ++i) {
    CHECK(op.lr(i, i).real() == doctest::Approx(kInvFourPi));
    CHECK(op.rl(i, i).real() == doctest::Approx(kInvFourPi));
  }
  // boundedness: |kernel| <= 1/4pi
  CHECK(op.lr.cwiseAbs().maxCoeff() <= kInvFourPi + 1e-15);
  // kernel symmetry S(x,y)^dag = S(y,x): lr(i,j) = rl(j,i) for real entries
  CHECK((op.lr - op.rl.transpose()).norm() == 0.0);

  const auto rep = spectrum(op);
  CHECK(rep.eigenvalues[0] == doctest::Approx(kInvFourPi).epsilon(1e-12));
  CHECK(rep.pairing_defect < 1e-14);

  // tr S^2 equals mu / 4 pi^2 (exact for the aligned diamond grid)
  const double tr2 = trace_power_matrix(op, 1);
  CHECK(tr2 == doctest::Approx(0.5 * kInvFourPiSq).epsilon(1e-12));
}

TEST_CASE("oracle chain: discretized operator reproduces the exact simple operator") {
  for (std::uint64_t seed : {31u, 32u}) {
    const SimpleDomain sd = fx::random_simple(seed, 4);
    const auto d = validate_domain(Domain{sd});
    const auto exact = spectrum(build_simple(sd));
    const auto disc = spectrum(build_flat_massless(d, 256));
    const int top = std::min<int>(10, static_cast<int>(exact.eigenvalues.size()));
    for (int i = 0; i < top; ++i)
      CHECK(std::fabs(disc.eigenvalues[i] - exact.eigenvalues[i]) <=
            0.02 * std::fabs(exact.eigenvalues[i]) + 1e-13);
  }
}

TEST_CASE("triangle massless operator: tr S^2 and block structure") {
  const auto d = validate_domain(Domain{fx::triangle_graph(1.0)});
  const OperatorMatrix op = build_flat_massless(d, 256);
  const double tr2 = trace_power_matrix(op, 1);
  CHECK(tr2 == doctest::Approx(0.25 * kInvFourPiSq).epsilon(0.01));
}

TEST_CASE("build_conformal: unit factor reduces to the flat operator") {
  ConformalDomain cd;
  cd.base = fx::diamond_graph(1.0);
  cd.f = ConformalFactor(parse_expression("1"));
  const auto dconf = validate_domain(Domain{cd});
  const auto dflat = validate_domain(Domain{fx::diamond_graph(1.0)});
  const OperatorMatrix a = build_conformal(dconf, 64);
  const OperatorMatrix b = build_flat_massless(dflat, 64);
  CHECK((a.lr - b.lr).norm() == 0.0);
  CHECK((a.rl - b.rl).norm() == 0.0);
  CHECK((a.weights - b.weights).norm() == 0.0);
}

TEST_CASE("build_conformal: constant factor rescales the spectrum") {
  const double c = 1.4;
  ConformalDomain cd;
  cd.base = fx::diamond_graph(1.0);
  cd.f = ConformalFactor(parse_expression("1.4"));
  const auto d = validate_domain(Domain{cd});
  const OperatorMatrix op = build_conformal(d, 128);
  const auto rep = spectrum(op);
  CHECK(rep.eigenvalues[0] == doctest::Approx(c * kInvFourPi).epsilon(1e-10));
  // tr S^2 = c^2 mu_flat / 4 pi^2
  CHECK(trace_power_matrix(op, 1) == doctest::Approx(c * c * 0.5 * kInvFourPiSq).epsilon(1e-10));
}

TEST_CASE("build_conformal: smooth factor volume identity") {
  const auto d = validate_domain(Domain{fx::conformal_diamond("1 + 0.3*sin(pi*x)*exp(-t^2)")});
  const OperatorMatrix op = build_conformal(d, 256);
  const double tr2 = trace_power_matrix(op, 1);
  const double mu = volume(d, RegionSelector::whole(), VolumeMethod::Grid, 0, 0, 2048);
  CHECK(tr2 == doctest::Approx(mu * kInvFourPiSq).epsilon(0.01));
}

TEST_CASE("massive kernel: small-m continuity to the massless operator") {
  const auto d = validate_domain(Domain{fx::diamond_simple(1.0)});
  const OperatorMatrix flat = build_flat_massless(d, 24);
  const double m1 = 1e-2, m2 = 1e-3;
  const OperatorMatrix k1 = build_massive_kernel(d, m1, 24, QuadratureSpec{24});
  const OperatorMatrix k2 = build_massive_kernel(d, m2, 24, QuadratureSpec{24});
  const double d1 = (k1.lr - flat.lr).cwiseAbs().maxCoeff() + (k1.ll).cwiseAbs().maxCoeff();
  const double d2 = (k2.lr - flat.lr).cwiseAbs().maxCoeff() + (k2.ll).cwiseAbs().maxCoeff();
  CHECK(d1 < 0.05 * kInvFourPi);
  CHECK(d2 < 0.005 * kInvFourPi);
  CHECK(d1 / d2 == doctest::Approx(10.0).epsilon(0.3));  // O(m) drift
}

TEST_CASE("massive kernel: Hermiticity defect and volume trace inequality") {
  const auto d = validate_domain(Domain{fx::diamond_simple(1.0)});
  const OperatorMatrix op = build_massive_kernel(d, 1.0, 48, QuadratureSpec{32});
  CHECK(op.sym_defect < 1e-6);
  // the mass term of tr S^2 is strictly positive
  const double tr2 = trace_power_matrix(op, 1);
  CHECK(tr2 > 0.5 * kInvFourPiSq * 1.01);
}

TEST_CASE("galerkin: triangle off-diagonal elements match the closed form") {
  const auto d = validate_domain(Domain{fx::triangle_graph(1.0)});
  const GalerkinOperator op = build_massive_galerkin(d, 0.0, 5);
  CHECK(op.herm_defect < 1e-10);
  const double b = 1.0;
  for (int n = 1; n <= 5; ++n) {
    const cplx got = op.matrix(op.index(n, 0), op.index(n, 1));  // <L,n | S | R,n>
    const cplx expect = cplx(0, -b / (8 * kPi * kPi) / n);
    CHECK(std::abs(got - expect) < 1e-10);
    // off-diagonal in n vanishes
    if (n < 5) {
      const cplx cross = op.matrix(op.index(n, 0), op.index(n + 1, 1));
      CHECK(std::abs(cross) < 1e-10);
    }
  }
}

TEST_CASE("galerkin: diamond reproduces the exact +-b/4pi pair in the n = 0 sector") {
  const auto d = validate_domain(Domain{fx::diamond_simple(1.0)});
  for (int k : {2, 6}) {
    const GalerkinOperator op = build_massive_galerkin(d, 0.0, k);
    const auto rep = spectrum(op);
    CHECK(rep.eigenvalues[0] == doctest::Approx(kInvFourPi).epsilon(1e-12));
    CHECK(rep.eigenvalues[1] == doctest::Approx(-kInvFourPi).epsilon(1e-12));
  }
}

TEST_CASE("galerkin: Rayleigh-Ritz |lambda_1| estimates are nondecreasing in k_max") {
  const auto d = validate_domain(Domain{fx::diamond_simple(1.0)});
  double prev = 0.0;
  for (int k : {2, 4, 8, 16}) {
    const GalerkinOperator op = build_massive_galerkin(d, 1.0, k);
    const auto rep = spectrum(op);
    CHECK(rep.lambda_max() >= prev - 1e-12);
    prev = rep.lambda_max();
  }
}

TEST_CASE("massive kernel vs galerkin: top eigenvalues agree on the diamond, mb = 1") {
  const auto d = validate_domain(Domain{fx::diamond_simple(1.0)});
  const auto kern = spectrum(build_massive_kernel(d, 1.0, 72, QuadratureSpec{40}));
  const auto gal = spectrum(build_massive_galerkin(d, 1.0, 28));
  for (int i = 0; i < 5; ++i)
    CHECK(std::fabs(kern.eigenvalues[i]) ==
          doctest::Approx(std::fabs(gal.eigenvalues[i])).epsilon(0.02));
}
