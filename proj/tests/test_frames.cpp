#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <random>

#include "solvframe/frames.hpp"
#include "test_groups.hpp"

using namespace solvframe;
using Catch::Approx;

namespace {

const double kE = std::exp(1.0);
const double kSqrtE = std::sqrt(kE);

FrameDesign design_for(const std::string& name, std::vector<int> J = {},
                       double eps_max = 1.0,
                       std::optional<double> diag_override = {}) {
  auto spec = std::make_shared<GroupSpec>(builtin_spec(name));
  DesignOptions opt;
  opt.J = std::move(J);
  opt.eps_max = eps_max;
  if (diag_override) {
    Mat<double> L(spec->n2, spec->n2);
    for (int i = 0; i < spec->n2; ++i) L(i, i) = *diag_override;
    opt.lattice_override = L;
  }
  return make_frame_design(spec, opt);
}

}  // namespace

TEST_CASE("tight generator on the Heisenberg-type group is the indicator") {
  FrameDesign d = design_for("heisenberg");
  Generator gen = tight_generator(d);
  CHECK(gen.value({0.0}) == Approx(1.0).margin(1e-12));
  CHECK(gen.value({0.49}) == Approx(1.0).margin(1e-12));
  CHECK(gen.value({0.7}) == 0.0);
  CHECK(gen.norm_squared == Approx(1.0).epsilon(1e-12));  // |beta(F_eps)| = eps
}

TEST_CASE("tight generator profile on the toy group") {
  FrameDesign d = design_for("toy3d", {2});
  Generator gen = tight_generator(d);
  CHECK(gen.value({0.0}) == Approx(1.0).margin(1e-12));
  // Theta(beta(t))^{-1} = (1 - t) e^{-t} at t = -1/2
  CHECK(gen.value({-0.5}) == Approx(std::sqrt(1.5 * kSqrtE)).epsilon(1e-12));
  CHECK(gen.norm_squared == Approx((1 + kE) / (2 * kSqrtE)).epsilon(1e-9));
}

TEST_CASE("smooth generator bump values and boundary flatness") {
  FrameDesign d = design_for("heisenberg");
  Generator gen = smooth_generator(d, 0.5);
  CHECK(gen.value({0.0}) == Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(gen.value({0.25}) == 0.0);
  CHECK(gen.value({0.3}) == 0.0);

  // all derivatives vanish at the support boundary: evaluate the 1-d
  // profile through fourth-order nested duals just inside the edge
  using D1 = Dual<double>;
  using D2 = Dual<D1>;
  using D3 = Dual<D2>;
  using D4 = Dual<D3>;
  D4 u;
  u.val.val.val.val = 0.999;
  u.val.val.val.dot = 1.0;
  u.val.val.dot.val = 1.0;
  u.val.dot.val.val = 1.0;
  u.dot.val.val.val = 1.0;
  D4 v = mollifier(u);
  CHECK(std::abs(v.val.val.val.val) < 1e-200);
  CHECK(std::abs(v.dot.val.val.val) < 1e-190);
  CHECK(std::abs(v.dot.dot.val.val) < 1e-180);
  CHECK(std::abs(v.dot.dot.dot.val) < 1e-170);
  CHECK(std::abs(v.dot.dot.dot.dot) < 1e-160);
  // and exactly zero at the edge itself
  D4 edge;
  edge.val.val.val.val = 1.0;
  edge.dot.val.val.val = 1.0;
  D4 ve = mollifier(edge);
  CHECK(ve.val.val.val.val == 0.0);
  CHECK(ve.dot.dot.dot.dot == 0.0);
}

TEST_CASE("Upsilon carries the dual-lattice cell volume") {
  FrameDesign d = design_for("heisenberg", {}, 2.0);  // eps = 2, delta = 1
  Generator gen = smooth_generator(d, 0.5);
  // Psi = 1, |det L^T| = 2 delta = 2
  double s0 = gen.value({0.0});
  CHECK(upsilon(d, gen, {0.0}) == Approx(std::sqrt(2.0) * s0).epsilon(1e-12));
}

TEST_CASE("grid functions integrate the Haar measure") {
  FrameDesign d = design_for("heisenberg");
  auto one = [](const std::vector<double>&) { return cxd(1.0); };
  GridFunction g = sample_grid_function(*d.spec, 1.0, 24, {{0}, {1}}, one);
  CHECK(g.norm_squared() == Approx(2.0).epsilon(1e-12));
}

TEST_CASE("rep_apply with the identity leaves samples unchanged") {
  FrameDesign d = design_for("heisenberg");
  auto tfs = make_test_functions(*d.spec, 1.0, 1, 3, 5, true);
  GridFunction h = sample_grid_function(*d.spec, 1.0, 16, tfs[0].tiles, tfs[0].eval);
  GridFunction out = rep_apply(d, GroupElement::identity(*d.spec), h);
  REQUIRE(out.tiles.size() >= h.tiles.size());
  // compare on the original tiles
  for (std::size_t t = 0; t < h.tiles.size(); ++t) {
    auto it = std::find(out.tiles.begin(), out.tiles.end(), h.tiles[t]);
    REQUIRE(it != out.tiles.end());
    std::size_t ot = std::size_t(it - out.tiles.begin());
    for (std::size_t q = 0; q < h.nodes.size(); ++q)
      CHECK(std::abs(out.values[ot][q] - h.values[t][q]) < 1e-13);
  }
}

TEST_CASE("rep_apply phase on the affine group") {
  FrameDesign d = design_for("affine");
  auto one = [](const std::vector<double>&) { return cxd(1.0); };
  GridFunction h = sample_grid_function(*d.spec, 1.0, 12, {{0}}, one);
  GroupElement g{{0.7}, {0.0}};
  GridFunction out = rep_apply(d, g, h);
  for (double a : {-0.3, 0.0, 0.4}) {
    cxd expect = unit_phase(0.7 * std::exp(-a));
    cxd got = out.eval({a});
    CHECK(std::abs(got - expect) < 1e-12);
  }
}

TEST_CASE("rep_apply phase on the Heisenberg-type group is a modulation") {
  FrameDesign d = design_for("heisenberg");
  auto one = [](const std::vector<double>&) { return cxd(1.0); };
  GridFunction h = sample_grid_function(*d.spec, 1.0, 12, {{0}}, one);
  GroupElement g{{0.0, 1.3}, {0.0}};  // exp(x2 X2)
  GridFunction out = rep_apply(d, g, h);
  for (double a : {-0.2, 0.1, 0.45}) {
    cxd expect = unit_phase(-a * 1.3);
    CHECK(std::abs(out.eval({a}) - expect) < 1e-12);
  }
}

TEST_CASE("rep_apply translates the support and re-tiles") {
  FrameDesign d = design_for("heisenberg");
  auto tfs = make_test_functions(*d.spec, 1.0, 1, 1, 7, true);
  GridFunction h = sample_grid_function(*d.spec, 1.0, 16, tfs[0].tiles, tfs[0].eval);
  GroupElement g{{0.0, 0.0}, {1.7}};  // e(t), shifts coordinates by +1.7
  GridFunction out = rep_apply(d, g, h);
  bool has_tile2 = false;
  for (auto& k : out.tiles) has_tile2 |= (k == std::vector<long>{-2});
  CHECK(has_tile2);
  CHECK(out.norm_squared() == Approx(h.norm_squared()).epsilon(1e-10));
}

TEST_CASE("rep_apply enforces the tile budget") {
  FrameDesign d = design_for("heisenberg");
  auto tfs = make_test_functions(*d.spec, 1.0, 1, 3, 7, true);
  GridFunction h = sample_grid_function(*d.spec, 1.0, 12, tfs[0].tiles, tfs[0].eval);
  GroupElement g{{0.0, 0.0}, {5.0}};
  CHECK_THROWS_AS(rep_apply(d, g, h, 2), std::domain_error);
}

TEST_CASE("unitarity of the representation") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> ux(-1.0, 1.0);
  for (const auto& name : {"affine", "heisenberg", "toy3d", "example5d"}) {
    FrameDesign d = design_for(name);
    auto tfs = make_test_functions(*d.spec, d.epsilon(), 2, d.n2() == 1 ? 3 : 2, 19, true);
    std::size_t order = d.n2() == 1 ? 32 : 20;
    for (const auto& tf : tfs) {
      GridFunction h =
          sample_grid_function(*d.spec, d.epsilon(), order, tf.tiles, tf.eval);
      GroupElement g;
      g.x.resize(d.spec->n1);
      g.t.resize(d.spec->n2);
      for (auto& v : g.x) v = ux(rng);
      for (auto& v : g.t) v = 0.8 * ux(rng);
      GridFunction out = rep_apply(d, g, h);
      INFO(name);
      CHECK(out.norm_squared() ==
            Approx(h.norm_squared()).epsilon(1e-8));
    }
  }
}

TEST_CASE("homomorphism on the M part") {
  SECTION("commutative M") {
    FrameDesign d = design_for("toy3d", {2});
    auto tfs = make_test_functions(*d.spec, 1.0, 1, 3, 11, true);
    GridFunction h = sample_grid_function(*d.spec, 1.0, 16, tfs[0].tiles, tfs[0].eval);
    GroupElement gt{{0.0, 0.0}, {0.6}}, gs{{0.0, 0.0}, {-0.9}};
    GridFunction two = rep_apply(d, gt, rep_apply(d, gs, h));
    GroupElement gts{{0.0, 0.0}, m_product(*d.spec, gt.t, gs.t)};
    GridFunction one = rep_apply(d, gts, h);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int i = 0; i < 40; ++i) {
      std::vector<double> v{u(rng)};
      CHECK(std::abs(two.eval(v) - one.eval(v)) < 1e-10);
    }
  }
  SECTION("noncommutative M") {
    auto spec = std::make_shared<GroupSpec>(testgroups::solvable_action());
    DesignOptions opt;
    opt.eps_max = 0.1;
    FrameDesign d = make_frame_design(spec, opt);
    auto tfs = make_test_functions(*spec, d.epsilon(), 1, 1, 13, true);
    GridFunction h =
        sample_grid_function(*spec, d.epsilon(), 10, tfs[0].tiles, tfs[0].eval);
    GroupElement gt{{0.0, 0.0}, {0.02, -0.015}}, gs{{0.0, 0.0}, {-0.01, 0.02}};
    GridFunction two = rep_apply(d, gt, rep_apply(d, gs, h));
    GroupElement gts{{0.0, 0.0}, m_product(*spec, gt.t, gs.t)};
    GridFunction one = rep_apply(d, gts, h);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.08, 0.08);
    for (int i = 0; i < 40; ++i) {
      std::vector<double> v{u(rng), u(rng)};
      CHECK(std::abs(two.eval(v) - one.eval(v)) < 1e-10);
    }
  }
}

TEST_CASE("frame coefficients of the indicator against Fourier orthogonality") {
  FrameDesign d = design_for("heisenberg");
  Generator gen = tight_generator(d);
  auto one = [](const std::vector<double>&) { return cxd(1.0); };
  std::size_t order = required_order(d, 8);
  GridFunction h = sample_grid_function(*d.spec, 1.0, order, {{0}}, one);
  CoefficientTable t = frame_coefficients(d, h, gen, 8);
  REQUIRE(t.gammas.size() == 1);
  for (std::size_t f = 0; f < t.k_list.size(); ++f) {
    if (t.k_list[f][0] == 0)
      CHECK(std::abs(t.coeffs[0][f] - cxd(1.0)) < 1e-12);
    else
      CHECK(std::abs(t.coeffs[0][f]) < 1e-12);
  }
}

TEST_CASE("coefficients vanish structurally for non-overlapping tiles") {
  FrameDesign d = design_for("heisenberg");
  Generator gen = tight_generator(d);
  auto tfs = make_test_functions(*d.spec, 1.0, 1, 1, 3, true);
  GridFunction h = sample_grid_function(*d.spec, 1.0, 24, tfs[0].tiles, tfs[0].eval);
  CoefficientTable t = frame_coefficients(d, h, gen, 4);
  // the gamma sum is truncated exactly to the tiles carrying h
  CHECK(t.gammas == h.tiles);
}

TEST_CASE("tight frame ratio: Heisenberg Parseval without rescaling") {
  FrameDesign d = design_for("heisenberg");
  Generator gen = tight_generator(d);
  auto tfs = make_test_functions(*d.spec, 1.0, 3, 5, 21, true);
  std::size_t order = required_order(d, 12);
  std::vector<GridFunction> hs;
  for (const auto& tf : tfs)
    hs.push_back(sample_grid_function(*d.spec, 1.0, order, tf.tiles, tf.eval));
  TightReport rep = verify_tight(d, gen, hs, 12, 1e-4);
  CHECK(rep.frame_bound == Approx(1.0).epsilon(1e-12));
  for (const auto& c : rep.cases) CHECK(c.ratio == Approx(1.0).epsilon(1e-4));
  CHECK(rep.passed);
  CHECK(rep.parseval_after_rescale);
  CHECK(rep.ratio_spread <= 2e-4);
}

TEST_CASE("tight frame ratio: toy group with the default lattice") {
  FrameDesign d = design_for("toy3d", {2});
  CHECK(d.delta.grid_max == Approx(kSqrtE / 2).margin(1e-6));
  CHECK(d.lattice.frame_bound_prediction == Approx(kSqrtE).epsilon(1e-6));
  Generator gen = tight_generator(d);
  auto tfs = make_test_functions(*d.spec, 1.0, 3, 5, 33, true);
  std::size_t order = required_order(d, 24);
  std::vector<GridFunction> hs;
  for (const auto& tf : tfs)
    hs.push_back(sample_grid_function(*d.spec, 1.0, order, tf.tiles, tf.eval));
  TightReport rep = verify_tight(d, gen, hs, 24, 1e-3);
  for (const auto& c : rep.cases)
    CHECK(c.ratio + c.tail_ratio == Approx(kSqrtE).epsilon(1e-3));
  CHECK(rep.passed);
}

TEST_CASE("tight frame ratio: toy group with the measure-exact lattice") {
  const double c = 2 * kSqrtE / (1 + kE);
  FrameDesign d = design_for("toy3d", {2}, 1.0, c);
  CHECK(d.lattice.frame_bound_prediction == Approx((1 + kE) / (2 * kSqrtE)).epsilon(1e-12));
  Generator gen = tight_generator(d);
  auto tfs = make_test_functions(*d.spec, 1.0, 5, 5, 91, true);
  std::size_t order = required_order(d, 32);
  std::vector<GridFunction> hs;
  for (const auto& tf : tfs)
    hs.push_back(sample_grid_function(*d.spec, 1.0, order, tf.tiles, tf.eval));
  TightReport rep = verify_tight(d, gen, hs, 32, 1e-3);
  for (const auto& ca : rep.cases)
    CHECK(ca.ratio + ca.tail_ratio == Approx((1 + kE) / (2 * kSqrtE)).epsilon(1e-3));
  CHECK(rep.passed);
}

TEST_CASE("indicator tails: polynomial test functions rely on the shell estimate") {
  FrameDesign d = design_for("heisenberg");
  Generator gen = tight_generator(d);
  auto tfs = make_test_functions(*d.spec, 1.0, 2, 3, 57, false);  // rough profiles
  std::size_t order = required_order(d, 48);
  std::vector<GridFunction> hs;
  for (const auto& tf : tfs)
    hs.push_back(sample_grid_function(*d.spec, 1.0, order, tf.tiles, tf.eval));
  TightReport rep = verify_tight(d, gen, hs, 48, 2e-3);
  for (const auto& ca : rep.cases) {
    CHECK(ca.tail_ratio > 0);
    CHECK(ca.ratio + ca.tail_ratio == Approx(1.0).epsilon(5e-3));
  }
}

TEST_CASE("densify halves the spacing until the cover sum is positive") {
  FrameDesign d = design_for("heisenberg");
  Generator bump = smooth_generator(d, 0.5);
  DensifyResult r = densify_gamma_M(d, bump, 1.0);
  CHECK(r.accepted);
  CHECK(r.spacing == Approx(0.25));
  CHECK(r.refinements == 2);  // spacing 1 and 1/2 both leave dead points
  CHECK(r.lower > 0);
  CHECK(r.upper >= r.lower);
  CHECK(r.upper <= 4.0 * upsilon(d, bump, {0.0}) * upsilon(d, bump, {0.0}));
}

TEST_CASE("densify fails for a bump that cannot cover") {
  FrameDesign d = design_for("heisenberg");
  Generator bump = smooth_generator(d, 0.5);
  DensifyResult r = densify_gamma_M(d, bump, 2e-4);
  // starting below the failure threshold exhausts the refinement budget
  CHECK_FALSE(r.accepted);
}

TEST_CASE("smooth frame sandwich and proof identity on the Heisenberg group") {
  FrameDesign d = design_for("heisenberg");
  Generator bump = smooth_generator(d, 0.5);
  DensifyResult dres = densify_gamma_M(d, bump, 1.0, 65);
  REQUIRE(dres.accepted);
  auto tfs = make_test_functions(*d.spec, 1.0, 5, 3, 71, true);
  std::size_t order = required_order(d, 16, 0.5);
  SmoothReport rep = verify_smooth_frame(d, bump, dres.spacing, dres.lower, dres.upper,
                                         tfs, 16, 1e-2, 1e-4, order);
  for (const auto& c : rep.cases) {
    INFO("ratio " << c.ratio << " in [" << dres.lower << ", " << dres.upper << "]"
                  << " identity rel err " << c.identity_rel_err);
    CHECK(c.sandwich_ok);
    CHECK(c.identity_rel_err <= 1e-4);
  }
  CHECK(rep.passed);
}

TEST_CASE("smooth frame sandwich on the toy group") {
  FrameDesign d = design_for("toy3d", {2});
  Generator bump = smooth_generator(d, 0.5);
  DensifyResult dres = densify_gamma_M(d, bump, 1.0, 65);
  REQUIRE(dres.accepted);
  auto tfs = make_test_functions(*d.spec, 1.0, 5, 3, 77, true);
  std::size_t order = required_order(d, 16, 0.5);
  SmoothReport rep = verify_smooth_frame(d, bump, dres.spacing, dres.lower, dres.upper,
                                         tfs, 16, 1e-2, 1e-4, order);
  for (const auto& c : rep.cases) {
    CHECK(c.sandwich_ok);
    CHECK(c.identity_rel_err <= 1e-4);
  }
  CHECK(rep.passed);
}

TEST_CASE("zero test functions sit trivially inside the sandwich") {
  FrameDesign d = design_for("heisenberg");
  Generator bump = smooth_generator(d, 0.5);
  TestFunction zero;
  zero.tiles = {{0}};
  zero.eval = [](const std::vector<double>&) { return cxd(0.0); };
  SmoothReport rep =
      verify_smooth_frame(d, bump, 0.25, 0.1, 10.0, {zero}, 8, 1e-2, 1e-4, 24);
  CHECK(rep.cases[0].energy <= 1e-12);
  CHECK(rep.cases[0].sandwich_ok);
}

TEST_CASE("a coarsened Gamma_M violates the lower bound where the cover dies") {
  FrameDesign d = design_for("heisenberg");
  Generator bump = smooth_generator(d, 0.5);
  DensifyResult fine = densify_gamma_M(d, bump, 1.0, 65);
  REQUIRE(fine.accepted);
  // h concentrated in the dead zone of the spacing-1 cover
  TestFunction dead;
  dead.tiles = {{0}};
  dead.eval = [](const std::vector<double>& v) -> cxd {
    return mollifier((v[0] - 0.4) / 0.05);
  };
  SmoothReport rep = verify_smooth_frame(d, bump, 1.0, fine.lower, fine.upper, {dead},
                                         16, 1e-2, 1.0, 48);
  CHECK_FALSE(rep.cases[0].sandwich_ok);
  CHECK(rep.cases[0].energy < fine.lower * rep.cases[0].norm_squared);
}
