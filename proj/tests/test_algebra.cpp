#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "solvframe/algebra.hpp"
#include "solvframe/examplegroups.hpp"
#include "test_groups.hpp"

using namespace solvframe;
using Catch::Approx;

TEST_CASE("validate accepts the toy group") {
  GroupSpec s = builtin_spec("toy3d");
  ValidationReport r = validate(s);
  INFO(r.summary());
  CHECK(r.all_passed());
}

TEST_CASE("validate accepts an abelian algebra") {
  ValidationReport r = validate(testgroups::abelian());
  INFO(r.summary());
  CHECK(r.all_passed());
}

TEST_CASE("validate names the pair when antisymmetry entries are missing") {
  // [A1, X1] = X1 without the mirrored entry
  GroupSpec s = make_group_spec(2, 1, {{3, 1, 1, 1.0}}, {1.0, 0.0}, CommutativeClass{});
  ValidationReport r = validate(s);
  CHECK_FALSE(r.all_passed());
  bool found = false;
  for (const auto& c : r.checks)
    if (c.name == "antisymmetry" && !c.passed) {
      found = true;
      CHECK(c.detail.find("A1") != std::string::npos);
      CHECK(c.detail.find("X1") != std::string::npos);
    }
  CHECK(found);
}

TEST_CASE("validate flags complex spectra") {
  ValidationReport r = validate(testgroups::rotation_bad());
  bool flagged = false;
  for (const auto& c : r.checks)
    if (c.name == "real_spectrum_heuristic") flagged = !c.passed;
  CHECK(flagged);
}

TEST_CASE("validate checks the declared nilpotency step") {
  ValidationReport ok = validate(testgroups::steptwo_bch());
  CHECK(ok.all_passed());
  // declaring the solvable m nilpotent must fail the step check
  GroupSpec wrong = make_group_spec(1, 2, testgroups::sym({{2, 3, 3, 1.0}}), {1.0},
                                    NilpotentClass{2});
  ValidationReport r = validate(wrong);
  bool flagged = false;
  for (const auto& c : r.checks)
    if (c.name == "nilpotency_step") flagged = !c.passed;
  CHECK(flagged);
}

TEST_CASE("ad of the toy generator restricted to p") {
  GroupSpec s = builtin_spec("toy3d");
  for (double a : {1.0, 0.7, -0.3}) {
    std::vector<double> z(s.dim(), 0.0);
    z[2] = a;  // a A1
    AdOperator op = ad_operator(s, z, true);
    CHECK(op.matrix(0, 0) == Approx(a));
    CHECK(op.matrix(0, 1) == Approx(a));
    CHECK(op.matrix(1, 0) == Approx(0.0));
    CHECK(op.matrix(1, 1) == Approx(a));
  }
}

TEST_CASE("ad of zero is the zero matrix") {
  GroupSpec s = builtin_spec("toy3d");
  std::vector<double> z(s.dim(), 0.0);
  CHECK(max_abs(ad_operator(s, z, false).matrix) == 0.0);
}

TEST_CASE("ad on the Heisenberg-type group maps X2 to X1") {
  GroupSpec s = builtin_spec("heisenberg");
  std::vector<double> z(s.dim(), 0.0);
  z[2] = 1.0;  // A1
  Mat<double> m = ad_operator(s, z, true).matrix;
  CHECK(m(0, 1) == Approx(1.0));
  CHECK(m(0, 0) == 0.0);
  CHECK(m(1, 0) == 0.0);
  CHECK(m(1, 1) == 0.0);
}

TEST_CASE("ad is linear in its generator") {
  GroupSpec s = builtin_spec("example5d");
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(s.dim()), y(s.dim()), z(s.dim());
    double al = u(rng), be = u(rng);
    for (int i = 0; i < s.dim(); ++i) {
      x[i] = u(rng);
      y[i] = u(rng);
      z[i] = al * x[i] + be * y[i];
    }
    Mat<double> lhs = ad_operator(s, z, false).matrix;
    Mat<double> ax = ad_operator(s, x, false).matrix;
    Mat<double> ay = ad_operator(s, y, false).matrix;
    Mat<double> rhs = ax * al + ay * be;
    CHECK(max_abs(lhs - rhs) < 1e-13);
  }
}

TEST_CASE("matrix exponential of the toy adjoint") {
  Mat<double> m(2, 2);
  m(0, 0) = 1; m(0, 1) = 1; m(1, 1) = 1;
  Mat<double> e = exp_matrix(m);
  const double ee = std::exp(1.0);
  CHECK(e(0, 0) == Approx(ee).epsilon(1e-13));
  CHECK(e(0, 1) == Approx(ee).epsilon(1e-13));
  CHECK(e(1, 0) == Approx(0.0).margin(1e-14));
  CHECK(e(1, 1) == Approx(ee).epsilon(1e-13));
}

TEST_CASE("matrix exponential of zero is the identity exactly") {
  Mat<double> z(3, 3);
  Mat<double> e = exp_matrix(z);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(e(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("matrix exponential of a nilpotent block is exact") {
  Mat<double> n(2, 2);
  n(0, 1) = 1;
  Mat<double> e = exp_matrix(n);
  CHECK(e(0, 0) == 1.0);
  CHECK(e(0, 1) == Approx(1.0).epsilon(1e-15));
  CHECK(e(1, 0) == 0.0);
  CHECK(e(1, 1) == 1.0);
}

TEST_CASE("matrix exponential rejects huge entries") {
  Mat<double> m(2, 2);
  m(0, 0) = 2e3;
  CHECK_THROWS_AS(exp_matrix(m), std::domain_error);
}

TEST_CASE("det(exp(M)) = exp(trace M) on random triangular matrices") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int t = 0; t < 30; ++t) {
    int n = 2 + int(t % 3);
    Mat<double> m(n, n);
    double tr = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        m(i, j) = u(rng);
        if (i == j) tr += m(i, j);
      }
    CHECK(det(exp_matrix(m)) == Approx(std::exp(tr)).epsilon(1e-10));
  }
}

TEST_CASE("bch_nu is the identity on commutative m") {
  GroupSpec s = builtin_spec("toeplitz");
  Vec<double> a{0.3, -0.8};
  Vec<double> nu = bch_nu(s, a);
  CHECK(nu[0] == 0.3);
  CHECK(nu[1] == -0.8);
}

TEST_CASE("bch_nu of zero is zero") {
  GroupSpec s = testgroups::steptwo_bch();
  Vec<double> z(3);
  Vec<double> nu = bch_nu(s, z);
  CHECK(max_abs(nu) == 0.0);
}

TEST_CASE("bch_nu on step-two m matches the closed polynomial") {
  GroupSpec s = testgroups::steptwo_bch();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 25; ++t) {
    Vec<double> a{u(rng), u(rng), u(rng)};
    Vec<double> nu = bch_nu(s, a);
    CHECK(nu[0] == Approx(a[0]).margin(1e-14));
    CHECK(nu[1] == Approx(a[1]).margin(1e-14));
    CHECK(nu[2] == Approx(a[2] + a[0] * a[1] / 2).margin(1e-13));
  }
}

TEST_CASE("bch_nu reproduces the degree-three filiform terms") {
  GroupSpec s = testgroups::filiform3();
  double x = 0.7, y = -0.4;
  Vec<double> a{x, y, 0.0, 0.0};
  Vec<double> nu = bch_nu(s, a);
  CHECK(nu[0] == Approx(x).margin(1e-14));
  CHECK(nu[1] == Approx(y).margin(1e-14));
  CHECK(nu[2] == Approx(x * y / 2).margin(1e-13));
  CHECK(nu[3] == Approx(x * x * y / 12).margin(1e-13));
}

TEST_CASE("bch_nu on the solvable m matches the affine closed form") {
  GroupSpec s = testgroups::solvable_m();
  // exp(a A1) exp(b A2) = exp(a A1 + a b / (1 - e^{-a}) A2); the order-8
  // truncation guard keeps |a| small, which is the intended regime
  for (auto [a, b] : {std::pair{0.04, 0.2}, {-0.03, 0.4}, {0.02, -0.05}}) {
    Vec<double> v{a, b};
    Vec<double> nu = bch_nu(s, v);
    double expected = a * b / (1.0 - std::exp(-a));
    CHECK(nu[0] == Approx(a).margin(1e-14));
    CHECK(nu[1] == Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("bch_nu guards against non-convergent truncation") {
  GroupSpec s = testgroups::solvable_m();
  Vec<double> big{40.0, 40.0};
  CHECK_THROWS_AS(bch_nu(s, big), std::domain_error);
}

TEST_CASE("m_product and m_inverse agree with the group law") {
  for (GroupSpec s : {testgroups::steptwo_bch(), testgroups::solvable_m()}) {
    std::mt19937_64 rng(17);
    const double half = s.m_commutative() || !std::holds_alternative<GeneralClass>(s.m_class)
                            ? 0.4
                            : 0.02;
    std::uniform_real_distribution<double> u(-half, half);
    for (int t = 0; t < 10; ++t) {
      std::vector<double> a(s.n2), b(s.n2), c(s.n2);
      for (int i = 0; i < s.n2; ++i) {
        a[i] = u(rng);
        b[i] = u(rng);
        c[i] = u(rng);
      }
      // inverse law
      auto ainv = m_inverse(s, a);
      auto prod = m_product(s, a, ainv);
      for (int i = 0; i < s.n2; ++i) CHECK(prod[i] == Approx(0.0).margin(1e-11));
      // associativity
      auto lhs = m_product(s, m_product(s, a, b), c);
      auto rhs = m_product(s, a, m_product(s, b, c));
      for (int i = 0; i < s.n2; ++i) CHECK(lhs[i] == Approx(rhs[i]).margin(1e-10));
    }
  }
}

TEST_CASE("jacobian of a scalar map") {
  Mat<double> j = jacobian(
      [](const Vec<dual>& x) {
        Vec<dual> y(1);
        y[0] = -x[0] * exp(-x[0]);
        return y;
      },
      {0.0});
  CHECK(j(0, 0) == Approx(-1.0).margin(1e-15));
}

TEST_CASE("jacobian of the identity map is the identity") {
  Mat<double> j = jacobian([](const Vec<dual>& x) { return x; }, {0.4, -2.0, 3.1});
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) CHECK(j(i, k) == (i == k ? 1.0 : 0.0));
}

TEST_CASE("jacobian of the two-variable chart map") {
  // t -> (e^{-t2}(t1 - 1), e^{2 t2}) at the origin
  Mat<double> j = jacobian(
      [](const Vec<dual>& t) {
        Vec<dual> y(2);
        y[0] = exp(dual(0.0) - t[1]) * (t[0] - 1.0);
        y[1] = exp(2.0 * t[1]);
        return y;
      },
      {0.0, 0.0});
  CHECK(j(0, 0) == Approx(1.0).margin(1e-14));
  CHECK(j(0, 1) == Approx(1.0).margin(1e-14));
  CHECK(j(1, 0) == Approx(0.0).margin(1e-14));
  CHECK(j(1, 1) == Approx(2.0).margin(1e-14));
}

TEST_CASE("jacobian agrees with central finite differences") {
  auto f = [](const Vec<dual>& x) {
    Vec<dual> y(2);
    y[0] = exp(x[0] * x[1]) + x[2];
    y[1] = x[0] * x[0] - x[1] / (1.0 + x[2] * x[2]);
    return y;
  };
  std::vector<double> x0{0.3, -0.7, 1.1};
  Mat<double> j = jacobian(f, x0);
  const double h = 1e-6;
  for (int d = 0; d < 3; ++d) {
    auto xp = x0, xm = x0;
    xp[d] += h;
    xm[d] -= h;
    Vec<dual> vp(3), vm(3);
    for (int i = 0; i < 3; ++i) {
      vp[i] = dual(xp[i]);
      vm[i] = dual(xm[i]);
    }
    Vec<dual> fp = f(vp), fm = f(vm);
    for (int i = 0; i < 2; ++i)
      CHECK(j(i, d) == Approx((fp[i].val - fm[i].val) / (2 * h)).margin(1e-6));
  }
}

TEST_CASE("jacobi residual is tiny for every builtin") {
  for (const auto& name : builtin_names()) {
    GroupSpec s = builtin_spec(name);
    ValidationReport r = validate(s);
    INFO(name << "\n" << r.summary());
    CHECK(r.all_passed());
  }
}

TEST_CASE("general real eigenvalues come out right on a known matrix") {
  // companion-style matrix with eigenvalues 1, 2, 3
  Mat<double> m(3, 3);
  m(0, 0) = 6; m(0, 1) = -11; m(0, 2) = 6;
  m(1, 0) = 1; m(2, 1) = 1;
  auto ev = eigenvalues(m);
  std::vector<double> re;
  for (auto& e : ev) {
    CHECK(std::abs(e.imag()) < 1e-8);
    re.push_back(e.real());
  }
  std::sort(re.begin(), re.end());
  REQUIRE(re.size() == 3);
  CHECK(re[0] == Approx(1.0).margin(1e-8));
  CHECK(re[1] == Approx(2.0).margin(1e-8));
  CHECK(re[2] == Approx(3.0).margin(1e-8));
}

TEST_CASE("complex pairs are detected") {
  Mat<double> m(2, 2);
  m(0, 1) = 1;
  m(1, 0) = -1;
  auto ev = eigenvalues(m);
  REQUIRE(ev.size() == 2);
  CHECK(std::abs(std::abs(ev[0].imag()) - 1.0) < 1e-10);
}
