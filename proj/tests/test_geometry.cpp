#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "solvframe/examplegroups.hpp"
#include "solvframe/geometry.hpp"
#include "test_groups.hpp"

using namespace solvframe;
using Catch::Approx;

namespace {
const double kE = std::exp(1.0);
const double kSqrtE = std::sqrt(kE);
}

TEST_CASE("epsilon = 1 certifies for the toy chart (2)") {
  GroupSpec s = builtin_spec("toy3d");
  BetaMap beta(s, orbital_data_with_J(s, {2}));
  EpsilonCertificate c = epsilon_search(beta, 1.0);
  CHECK(c.epsilon == 1.0);
  CHECK(c.min_abs_jac_det > 0);
  CHECK(c.injectivity_margin > 0);
}

TEST_CASE("linear charts certify at any epsilon") {
  GroupSpec s = builtin_spec("heisenberg");
  BetaMap beta(s, orbital_data(s));
  EpsilonCertificate c = epsilon_search(beta, 8.0);
  CHECK(c.epsilon == 8.0);
  CHECK(c.min_abs_jac_det == Approx(1.0).margin(1e-12));
}

TEST_CASE("the five-dimensional chart (2,3) certifies at large boxes") {
  GroupSpec s = builtin_spec("example5d");
  BetaMap beta(s, orbital_data_with_J(s, {2, 3}));
  EpsilonCertificate c = epsilon_search(beta, 2.0, 32);
  CHECK(c.epsilon == 2.0);
  // det Jac beta_(2,3) = 2 e^{t2} > 0
  CHECK(c.min_abs_jac_det > 0.5);
}

TEST_CASE("bisection shrinks past a Jacobian zero") {
  // toy chart (2): beta'(t) = (t - 1) e^{-t} vanishes at t = 1, so any
  // box with eps/2 >= 1 must be rejected and the search must settle
  // strictly below 2.
  GroupSpec s = builtin_spec("toy3d");
  BetaMap beta(s, orbital_data_with_J(s, {2}));
  EpsilonCertificate c = epsilon_search(beta, 3.0, 96);
  CHECK(c.epsilon < 2.0);
  CHECK(c.epsilon > 1.0);
}

TEST_CASE("delta_sup matches the closed-form suprema") {
  SECTION("toy at eps = 1: sqrt(e)/2 at the left endpoint") {
    GroupSpec s = builtin_spec("toy3d");
    BetaMap beta(s, orbital_data_with_J(s, {2}));
    DeltaEstimate d = delta_sup(beta, 1.0, 257);
    CHECK(d.grid_max == Approx(kSqrtE / 2).margin(1e-6));
    CHECK(d.inflated == Approx(1.01 * d.grid_max));
  }
  SECTION("Heisenberg: eps/2") {
    GroupSpec s = builtin_spec("heisenberg");
    BetaMap beta(s, orbital_data(s));
    for (double eps : {0.5, 1.0, 2.0}) {
      DeltaEstimate d = delta_sup(beta, eps, 129);
      CHECK(d.grid_max == Approx(eps / 2).margin(1e-12));
    }
  }
  SECTION("five-dimensional example at eps = 1: e") {
    GroupSpec s = builtin_spec("example5d");
    BetaMap beta(s, orbital_data_with_J(s, {2, 3}));
    DeltaEstimate d = delta_sup(beta, 1.0, 129);
    CHECK(d.grid_max == Approx(kE).margin(1e-6));
  }
}

TEST_CASE("delta_sup is monotone in epsilon") {
  GroupSpec s = builtin_spec("toy3d");
  BetaMap beta(s, orbital_data_with_J(s, {2}));
  double prev = 0;
  for (double eps : {0.25, 0.5, 0.75, 1.0, 1.25}) {
    DeltaEstimate d = delta_sup(beta, eps, 129);
    CHECK(d.grid_max >= prev - 1e-12);
    prev = d.grid_max;
  }
}

TEST_CASE("default lattice construction") {
  LatticePair lat = build_lattices(kSqrtE / 2, {2});
  CHECK(lat.L(0, 0) == Approx(1.0 / kSqrtE));
  CHECK(lat.L_dual(0, 0) == Approx(kSqrtE));
  CHECK(lat.frame_bound_prediction == Approx(kSqrtE));
  CHECK(lat.frame_bound_prediction * std::abs(det(lat.L)) == Approx(1.0).margin(1e-15));
}

TEST_CASE("override lattice reproduces the measure-exact bound") {
  const double c = 2 * kSqrtE / (1 + kE);
  Mat<double> L(1, 1);
  L(0, 0) = c;
  LatticePair lat = build_lattices(kSqrtE / 2, {2}, L);
  CHECK(lat.L_dual(0, 0) == Approx((1 + kE) / (2 * kSqrtE)).epsilon(1e-14));
  CHECK(lat.frame_bound_prediction == Approx((1 + kE) / (2 * kSqrtE)).epsilon(1e-14));
}

TEST_CASE("singular overrides are rejected") {
  Mat<double> L(2, 2);
  L(0, 0) = 1.0;  // second row zero
  CHECK_THROWS_AS(build_lattices(1.0, {1, 2}, L), std::invalid_argument);
}

TEST_CASE("frame bound times |det L| is one") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int t = 0; t < 20; ++t) {
    LatticePair lat = build_lattices(u(rng), {1, 2});
    CHECK(lat.frame_bound_prediction * std::abs(det(lat.L)) == Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("packing holds for the default lattice on every builtin") {
  for (const auto& name : builtin_names()) {
    GroupSpec s = builtin_spec(name);
    OrbitalData data = orbital_data(s);
    BetaMap beta(s, data);
    double eps_max = s.n2 >= 3 ? 0.8 : 1.0;
    EpsilonCertificate cert = epsilon_search(beta, eps_max, 32);
    DeltaEstimate d = delta_sup(beta, cert.epsilon, 65);
    LatticePair lat = build_lattices(d.grid_max, data.J);
    PackingReport pk = check_packing(beta, cert.epsilon, lat, s.n2 == 1 ? 2048 : 4096);
    INFO(name << ": overlap " << pk.worst_overlap << ", slack " << pk.min_slack);
    CHECK(pk.passed);
  }
}

TEST_CASE("toy packing across lattices") {
  GroupSpec s = builtin_spec("toy3d");
  OrbitalData data = orbital_data_with_J(s, {2});
  BetaMap beta(s, data);
  const double delta = kSqrtE / 2;

  SECTION("default (2 delta) lattice passes") {
    LatticePair lat = build_lattices(delta, {2});
    PackingReport pk = check_packing(beta, 1.0, lat, 2048);
    CHECK(pk.passed);
  }
  SECTION("a 0.5-spaced dual lattice fails by pigeonhole") {
    Mat<double> L(1, 1);
    L(0, 0) = 2.0;  // dual spacing 0.5 < |B| = 1.127...
    LatticePair lat = build_lattices(delta, {2}, L);
    PackingReport pk = check_packing(beta, 1.0, lat, 2048);
    CHECK_FALSE(pk.passed);
    CHECK(pk.worst_overlap > 0.2);
  }
  SECTION("the measure-exact lattice passes with near-zero slack") {
    Mat<double> L(1, 1);
    L(0, 0) = 2 * kSqrtE / (1 + kE);
    LatticePair lat = build_lattices(delta, {2}, L);
    PackingReport pk = check_packing(beta, 1.0, lat, 2048);
    CHECK(pk.passed);
    CHECK(pk.min_slack < 5e-3);  // B is a fundamental domain up to a null set
  }
}

TEST_CASE("tile factorization splits coordinates on commutative m") {
  GroupSpec s = builtin_spec("toeplitz");
  TileFactorization f = factorize_tile(s, 1.0, {1.3, -0.2});
  CHECK(f.k == std::vector<long>{-1, 0});
  CHECK(f.u[0] == Approx(0.3).margin(1e-12));
  CHECK(f.u[1] == Approx(-0.2).margin(1e-12));
}

TEST_CASE("tiling check passes on commutative builtins") {
  for (const auto& name : {"toy3d", "heisenberg", "example5d"}) {
    GroupSpec s = builtin_spec(name);
    TilingReport r = tiling_check(s, 1.0, 2000, 19);
    INFO(name << ": failures " << r.failures << " worst residual " << r.worst_residual);
    CHECK(r.passed());
  }
}

TEST_CASE("tiling check passes on the step-two noncommutative m") {
  GroupSpec s = testgroups::steptwo_malcev();
  TilingReport r = tiling_check(s, 1.0, 2000, 23, 2.5);
  INFO("failures " << r.failures << " worst residual " << r.worst_residual);
  CHECK(r.passed());
}

TEST_CASE("tiling check passes on a solvable noncommutative m") {
  GroupSpec s = testgroups::solvable_m_malcev();
  // order-8 BCH truncation needs small coordinates
  TilingReport r = tiling_check(s, 0.01, 500, 29, 0.02);
  INFO("failures " << r.failures << " worst residual " << r.worst_residual);
  CHECK(r.passed());
}

TEST_CASE("measurable partition: factorized tiles reconstruct the sample") {
  GroupSpec s = testgroups::steptwo_malcev();
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> coords{u(rng), u(rng), u(rng)};
    TileFactorization f = factorize_tile(s, 0.7, coords);
    std::vector<double> gk(3);
    for (int d = 0; d < 3; ++d) gk[d] = 0.7 * double(f.k[d]);
    auto m = m_product(s, m_inverse(s, gk), f.u);
    for (int d = 0; d < 3; ++d) CHECK(m[d] == Approx(coords[d]).margin(1e-10));
  }
}
