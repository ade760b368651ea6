#ifndef SOLVFRAME_ALGEBRA_HPP
#define SOLVFRAME_ALGEBRA_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "linalg.hpp"

namespace solvframe {

/// Linear functional on the ideal p, coefficients in the dual basis
/// (X_1*, ..., X_{n1}*).
struct Functional {
  std::vector<double> coeffs;

  Functional() = default;
  explicit Functional(std::vector<double> c) : coeffs(std::move(c)) {
    for (double x : coeffs)
      if (!std::isfinite(x)) throw std::invalid_argument("Functional: non-finite entry");
  }
  std::size_t size() const { return coeffs.size(); }
  bool is_zero() const {
    for (double x : coeffs)
      if (x != 0.0) return false;
    return true;
  }
};

struct NilpotentClass { int step; };
struct GeneralClass { int bch_order; };
struct CommutativeClass {};
using MClass = std::variant<CommutativeClass, NilpotentClass, GeneralClass>;

/// A completely solvable Lie algebra g = p + m given by structure
/// constants over the ordered basis (X_1..X_{n1}, A_1..A_{n2}).
/// Bracket entries use 1-based indices: [Z_i, Z_j] = sum_k c Z_k.
struct GroupSpec {
  int n1 = 0;
  int n2 = 0;
  std::vector<std::string> basis_names;
  // brackets[(i-1)*dim + (j-1)] is the coordinate vector of [Z_i, Z_j].
  std::vector<std::vector<double>> bracket_table;
  Functional lambda;
  MClass m_class = CommutativeClass{};

  int dim() const { return n1 + n2; }
  bool m_commutative() const { return std::holds_alternative<CommutativeClass>(m_class); }

  const std::vector<double>& bracket(int i, int j) const {
    return bracket_table[static_cast<std::size_t>(i) * dim() + j];
  }
  std::vector<double>& bracket(int i, int j) {
    return bracket_table[static_cast<std::size_t>(i) * dim() + j];
  }

  /// BCH truncation order appropriate for the declared class of m.
  int bch_truncation() const {
    if (std::holds_alternative<CommutativeClass>(m_class)) return 1;
    if (auto* nil = std::get_if<NilpotentClass>(&m_class)) return nil->step;
    return std::get<GeneralClass>(m_class).bch_order;
  }
};

/// Builder used by configs and builtins.
struct BracketEntry {
  int i, j, k;  // 1-based basis indices
  double c;
};

inline GroupSpec make_group_spec(int n1, int n2,
                                 const std::vector<BracketEntry>& entries,
                                 std::vector<double> lambda,
                                 MClass m_class,
                                 std::vector<std::string> names = {}) {
  GroupSpec s;
  s.n1 = n1;
  s.n2 = n2;
  const int d = n1 + n2;
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("GroupSpec: need n1 >= 1 and n2 >= 1");
  if (static_cast<int>(lambda.size()) != n1)
    throw std::invalid_argument("GroupSpec: lambda must have length dim_p");
  if (names.empty()) {
    for (int k = 1; k <= n1; ++k) names.push_back("X" + std::to_string(k));
    for (int k = 1; k <= n2; ++k) names.push_back("A" + std::to_string(k));
  }
  if (static_cast<int>(names.size()) != d)
    throw std::invalid_argument("GroupSpec: basis_names must have length dim_p + dim_m");
  s.basis_names = std::move(names);
  s.bracket_table.assign(static_cast<std::size_t>(d) * d, std::vector<double>(d, 0.0));
  for (const auto& e : entries) {
    if (e.i < 1 || e.i > d || e.j < 1 || e.j > d || e.k < 1 || e.k > d)
      throw std::invalid_argument("GroupSpec: bracket index out of range");
    s.bracket(e.i - 1, e.j - 1)[e.k - 1] += e.c;
  }
  s.lambda = Functional(std::move(lambda));
  s.m_class = m_class;
  return s;
}

/// [u, v] for coordinate vectors over the full algebra. Templated so the
/// same contraction drives dual-number derivatives of BCH expressions.
template <class T>
Vec<T> bracket_full(const GroupSpec& s, const Vec<T>& u, const Vec<T>& v) {
  const int d = s.dim();
  Vec<T> out(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const auto& c = s.bracket(i, j);
      for (int k = 0; k < d; ++k)
        if (c[k] != 0.0) out[k] += u[i] * v[j] * T(c[k]);
    }
  return out;
}

/// Matrix of ad(Z) on the chosen sub-basis. Columns are bracket images.
/// `restrict_p` selects ad(Z)|_p (n1 x n1); otherwise the full algebra.
struct AdOperator {
  Mat<double> matrix;
  bool restricted_to_p = false;
};

inline AdOperator ad_operator(const GroupSpec& s, const std::vector<double>& z,
                              bool restrict_p) {
  const int d = s.dim();
  if (static_cast<int>(z.size()) != d)
    throw std::invalid_argument("ad: element must have full-algebra length");
  const int n = restrict_p ? s.n1 : d;
  Mat<double> m(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < d; ++i) {
      if (z[i] == 0.0) continue;
      const auto& c = s.bracket(i, j);
      for (int k = 0; k < n; ++k) m(k, j) += z[i] * c[k];
    }
  }
  return {std::move(m), restrict_p};
}

/// ad(A_k)|_p for the m-basis element A_k (0-based k), cached per spec
/// by the callers that need it in hot loops.
inline Mat<double> ad_m_basis_on_p(const GroupSpec& s, int k) {
  std::vector<double> z(s.dim(), 0.0);
  z[s.n1 + k] = 1.0;
  return ad_operator(s, z, true).matrix;
}

/// ad(A_k)|_m expressed in the A-basis (n2 x n2).
inline Mat<double> ad_m_basis_on_m(const GroupSpec& s, int k) {
  const int n1 = s.n1, n2 = s.n2;
  Mat<double> m(n2, n2);
  for (int j = 0; j < n2; ++j) {
    const auto& c = s.bracket(n1 + k, n1 + j);
    for (int t = 0; t < n2; ++t) m(t, j) = c[n1 + t];
  }
  return m;
}

/// exp of a small matrix; thin wrapper so callers depend on the module
/// surface rather than on the linalg internals.
template <class T>
Mat<T> exp_matrix(const Mat<T>& m) {
  return expm(m);
}

/// Forward-mode Jacobian of f: R^k -> R^l at x. The map is evaluated in
/// dual arithmetic once per input direction; derivatives are exact.
inline Mat<double> jacobian(const std::function<Vec<dual>(const Vec<dual>&)>& f,
                            const std::vector<double>& x) {
  const std::size_t k = x.size();
  Vec<dual> xd(k);
  for (std::size_t i = 0; i < k; ++i) xd[i] = dual(x[i]);
  Mat<double> jac;
  for (std::size_t d = 0; d < k; ++d) {
    xd[d].dot = 1.0;
    Vec<dual> y = f(xd);
    if (d == 0) jac = Mat<double>(y.size(), k);
    for (std::size_t i = 0; i < y.size(); ++i) jac(i, d) = y[i].dot;
    xd[d].dot = 0.0;
  }
  return jac;
}

// ---------------------------------------------------------------------------
// Baker-Campbell-Hausdorff machinery on m
// ---------------------------------------------------------------------------

namespace bch_detail {

/// One Dynkin term: nested ad-word applied to X or Y with a rational
/// coefficient. Blocks store (p_i, q_i) exponents; terms whose innermost
/// letter repeats vanish and are pruned at table-build time.
struct DynkinTerm {
  std::vector<std::pair<int, int>> blocks;
  double coeff;
  int degree;
  bool ends_in_y;  // true: word ... Y with ad prefix; false: ... X
};

inline const std::vector<DynkinTerm>& dynkin_table(int order) {
  static std::map<int, std::vector<DynkinTerm>> cache;
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  std::vector<DynkinTerm> table;
  std::vector<std::pair<int, int>> blocks;

  std::function<void(int, int)> rec = [&](int degree, int nblocks) {
    if (nblocks > 0) {
      const auto [pn, qn] = blocks.back();
      // Innermost letter rules: the term is
      //   ad(X)^{p1} ad(Y)^{q1} ... ad(X)^{pn} ad(Y)^{qn-1} Y   (qn >= 1)
      //   ad(X)^{p1} ad(Y)^{q1} ... ad(Y)^{q_{n-1}} ad(X)^{pn-1} X (qn = 0)
      // It vanishes when qn >= 2, or when qn = 0 and pn >= 2, or when the
      // word reduces to a single repeated letter bracketing itself.
      bool viable = (qn == 1) || (qn == 0 && pn == 1);
      if (viable) {
        double fact = 1.0;
        int total = 0;
        for (auto [p, q] : blocks) {
          for (int v = 2; v <= p; ++v) fact *= v;
          for (int v = 2; v <= q; ++v) fact *= v;
          total += p + q;
        }
        double coeff = ((nblocks % 2 == 1) ? 1.0 : -1.0) / nblocks / total / fact;
        table.push_back({blocks, coeff, total, qn == 1});
      }
    }
    if (degree >= order) return;
    for (int add = 1; degree + add <= order; ++add) {
      for (int p = 0; p <= add; ++p) {
        blocks.emplace_back(p, add - p);
        rec(degree + add, nblocks + 1);
        blocks.pop_back();
      }
    }
  };
  rec(0, 0);
  return cache.emplace(order, std::move(table)).first->second;
}

}  // namespace bch_detail

/// Truncated BCH product Z with exp(U) exp(V) = exp(Z) on m, through the
/// Dynkin series up to total bracket degree `order`. `last_degree_norm`
/// reports the max-norm of the contribution at the top degree, which the
/// convergence guard inspects for non-terminating (general solvable) m.
template <class T>
Vec<T> bch_combine(const GroupSpec& s, const Vec<T>& u_m, const Vec<T>& v_m,
                   int order, double* last_degree_norm = nullptr) {
  const int n1 = s.n1, n2 = s.n2;
  Vec<T> u(s.dim()), v(s.dim());
  for (int i = 0; i < n2; ++i) {
    u[n1 + i] = u_m[i];
    v[n1 + i] = v_m[i];
  }
  Vec<T> sum(s.dim());
  // homogeneous parts of the two highest degrees, for the convergence
  // guard (cancellations within a degree must not trigger it)
  Vec<T> top0(s.dim()), top1(s.dim());
  for (const auto& term : bch_detail::dynkin_table(order)) {
    Vec<T> w = term.ends_in_y ? v : u;
    // apply the ad word right to left
    for (std::size_t b = term.blocks.size(); b-- > 0;) {
      auto [p, q] = term.blocks[b];
      int qq = q, pp = p;
      if (b + 1 == term.blocks.size()) {
        if (term.ends_in_y) qq -= 1; else pp -= 1;
      }
      for (int r = 0; r < qq; ++r) w = bracket_full(s, v, w);
      for (int r = 0; r < pp; ++r) w = bracket_full(s, u, w);
    }
    Vec<T> contrib = w * T(term.coeff);
    if (term.degree == order) top0 += contrib;
    if (term.degree == order - 1) top1 += contrib;
    sum += contrib;
  }
  if (last_degree_norm) *last_degree_norm = std::max(max_abs(top0), max_abs(top1));
  Vec<T> out(n2);
  for (int i = 0; i < n2; ++i) out[i] = sum[n1 + i];
  // brackets of m-elements must stay in m; validated separately
  return out;
}

/// First-kind coordinates of exp(a1 A1) ... exp(an2 An2):
/// nu(a) = a1 A1 * a2 A2 * ... * an2 An2 under the BCH product.
/// Identity for commutative m, exact polynomial for nilpotent m,
/// truncated with a convergence guard otherwise.
template <class T>
Vec<T> bch_nu(const GroupSpec& s, const Vec<T>& a) {
  const int n2 = s.n2;
  if (static_cast<int>(a.size()) != n2)
    throw std::invalid_argument("bch_nu: argument must have length dim_m");
  if (s.m_commutative()) return a;
  const int order = s.bch_truncation();
  const bool guarded = std::holds_alternative<GeneralClass>(s.m_class);
  Vec<T> z(n2);
  z[0] = a[0];
  for (int k = 1; k < n2; ++k) {
    Vec<T> step(n2);
    step[k] = a[k];
    double top = 0.0;
    z = bch_combine(s, z, step, order, &top);
    if (guarded) {
      double scale = 0.0;
      for (int i = 0; i < n2; ++i) scale = std::max(scale, primal_abs(z[i]));
      if (top >= 1e-12 * std::max(scale, 1e-300) && top > 0.0)
        throw std::domain_error(
            "bch_nu: truncated BCH series has not converged; use a smaller box (epsilon)");
    }
  }
  return z;
}

/// Inverse of nu by Newton iteration with the exact dual-number Jacobian.
inline std::vector<double> bch_nu_inverse(const GroupSpec& s,
                                          const std::vector<double>& w) {
  const int n2 = s.n2;
  if (s.m_commutative()) return w;
  std::vector<double> a = w;  // nu = id + higher order, so w seeds well
  for (int it = 0; it < 60; ++it) {
    Vec<double> av(n2);
    for (int i = 0; i < n2; ++i) av[i] = a[i];
    Vec<double> r = bch_nu(s, av);
    double res = 0.0;
    for (int i = 0; i < n2; ++i) {
      r[i] -= w[i];
      res = std::max(res, std::abs(r[i]));
    }
    if (res < 1e-14) return a;
    Mat<double> jac = jacobian(
        [&](const Vec<dual>& x) { return bch_nu(s, x); }, a);
    Vec<double> step = solve(jac, r);
    for (int i = 0; i < n2; ++i) a[i] -= step[i];
  }
  throw std::domain_error("bch_nu_inverse: Newton iteration did not converge");
}

// ---------------------------------------------------------------------------
// Group operations on M in canonical coordinates of the second kind
// ---------------------------------------------------------------------------

/// Coordinates of e(t) e(r): through first-kind coordinates and BCH.
inline std::vector<double> m_product(const GroupSpec& s,
                                     const std::vector<double>& t,
                                     const std::vector<double>& r) {
  const int n2 = s.n2;
  if (s.m_commutative()) {
    std::vector<double> out(n2);
    for (int i = 0; i < n2; ++i) out[i] = t[i] + r[i];
    return out;
  }
  Vec<double> tv(n2), rv(n2);
  for (int i = 0; i < n2; ++i) { tv[i] = t[i]; rv[i] = r[i]; }
  Vec<double> z = bch_combine(s, bch_nu(s, tv), bch_nu(s, rv), s.bch_truncation());
  std::vector<double> w(n2);
  for (int i = 0; i < n2; ++i) w[i] = z[i];
  return bch_nu_inverse(s, w);
}

/// Coordinates of e(t)^{-1}.
inline std::vector<double> m_inverse(const GroupSpec& s, const std::vector<double>& t) {
  const int n2 = s.n2;
  if (s.m_commutative()) {
    std::vector<double> out(n2);
    for (int i = 0; i < n2; ++i) out[i] = -t[i];
    return out;
  }
  Vec<double> tv(n2);
  for (int i = 0; i < n2; ++i) tv[i] = t[i];
  Vec<double> z = bch_nu(s, tv);
  std::vector<double> w(n2);
  for (int i = 0; i < n2; ++i) w[i] = -z[i];
  return bch_nu_inverse(s, w);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationCheck {
  std::string name;
  bool passed;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  std::vector<std::string> warnings;

  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  std::string summary() const {
    std::ostringstream os;
    for (const auto& c : checks)
      os << (c.passed ? "pass" : "FAIL") << "  " << c.name
         << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
    for (const auto& w : warnings) os << "warn  " << w << "\n";
    return os.str();
  }
};

/// Checks the structural hypotheses: antisymmetry of the bracket table,
/// the Jacobi identity, p an ideal, m a subalgebra, subordination of
/// lambda, and the real-spectrum heuristic for complete solvability.
inline ValidationReport validate(const GroupSpec& s) {
  ValidationReport rep;
  const int d = s.dim();
  const double tol = 1e-12;

  {
    bool ok = true;
    std::string detail;
    for (int i = 0; i < d && ok; ++i)
      for (int j = 0; j < d && ok; ++j)
        for (int k = 0; k < d; ++k) {
          if (std::abs(s.bracket(i, j)[k] + s.bracket(j, i)[k]) > tol) {
            ok = false;
            detail = "offending pair (" + s.basis_names[i] + ", " + s.basis_names[j] + ")";
            break;
          }
        }
    rep.checks.push_back({"antisymmetry", ok, detail});
  }
  {
    double worst = 0;
    std::string detail;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          // [[Zi,Zj],Zk] + [[Zj,Zk],Zi] + [[Zk,Zi],Zj]
          std::vector<double> acc(d, 0.0);
          auto add = [&](const std::vector<double>& ab, int c) {
            for (int m = 0; m < d; ++m) {
              if (ab[m] == 0.0) continue;
              const auto& mc = s.bracket(m, c);
              for (int t = 0; t < d; ++t) acc[t] += ab[m] * mc[t];
            }
          };
          add(s.bracket(i, j), k);
          add(s.bracket(j, k), i);
          add(s.bracket(k, i), j);
          for (int t = 0; t < d; ++t) worst = std::max(worst, std::abs(acc[t]));
          if (worst > tol && detail.empty())
            detail = "triple (" + s.basis_names[i] + ", " + s.basis_names[j] + ", " +
                     s.basis_names[k] + ")";
        }
    rep.checks.push_back({"jacobi_identity", worst <= tol, detail});
  }
  {
    bool ok = true;
    std::string detail;
    for (int i = 0; i < d && ok; ++i)
      for (int j = 0; j < s.n1 && ok; ++j)
        for (int k = s.n1; k < d; ++k)
          if (std::abs(s.bracket(i, j)[k]) > tol) {
            ok = false;
            detail = "[" + s.basis_names[i] + ", " + s.basis_names[j] + "] leaves p";
            break;
          }
    rep.checks.push_back({"p_ideal", ok, detail});
  }
  {
    bool ok = true;
    std::string detail;
    for (int i = s.n1; i < d && ok; ++i)
      for (int j = s.n1; j < d && ok; ++j)
        for (int k = 0; k < s.n1; ++k)
          if (std::abs(s.bracket(i, j)[k]) > tol) {
            ok = false;
            detail = "[" + s.basis_names[i] + ", " + s.basis_names[j] + "] leaves m";
            break;
          }
    rep.checks.push_back({"m_subalgebra", ok, detail});
  }
  {
    bool ok = !s.lambda.is_zero();
    std::string detail = ok ? "" : "lambda is identically zero";
    if (static_cast<int>(s.lambda.size()) != s.n1) {
      ok = false;
      detail = "lambda length mismatch";
    } else {
      for (int i = 0; i < s.n1 && ok; ++i)
        for (int j = 0; j < s.n1; ++j) {
          double v = 0;
          for (int k = 0; k < s.n1; ++k) v += s.lambda.coeffs[k] * s.bracket(i, j)[k];
          if (std::abs(v) > tol) {
            ok = false;
            detail = "lambda([" + s.basis_names[i] + ", " + s.basis_names[j] + "]) != 0";
            break;
          }
        }
    }
    rep.checks.push_back({"subordination", ok, detail});
  }
  {
    // Real spectrum of ad(Z_i) for each basis element. A basis-level
    // check only; complete solvability proper quantifies over all Z.
    bool ok = true;
    std::string detail;
    for (int i = 0; i < d && ok; ++i) {
      std::vector<double> z(d, 0.0);
      z[i] = 1.0;
      auto ev = eigenvalues(ad_operator(s, z, false).matrix);
      for (const auto& e : ev)
        if (std::abs(e.imag()) > 1e-9) {
          ok = false;
          detail = "ad(" + s.basis_names[i] + ") has eigenvalue with imaginary part " +
                   std::to_string(e.imag());
          break;
        }
    }
    rep.checks.push_back({"real_spectrum_heuristic", ok, detail});
    if (ok)
      rep.warnings.push_back(
          "complete solvability checked on basis elements only (heuristic certificate)");
  }
  if (auto* nil = std::get_if<NilpotentClass>(&s.m_class)) {
    bool ok = true;
    std::string detail;
    for (int k = 0; k < s.n2 && ok; ++k) {
      Mat<double> adm = ad_m_basis_on_m(s, k);
      Mat<double> pw = Mat<double>::identity(s.n2);
      for (int r = 0; r <= nil->step; ++r) pw = pw * adm;
      if (max_abs(pw) > tol) {
        ok = false;
        detail = "ad(" + s.basis_names[s.n1 + k] + ")^" + std::to_string(nil->step + 1) +
                 " != 0 on m";
      }
    }
    rep.checks.push_back({"nilpotency_step", ok, detail});
  }
  {
    // Strong Malcev ordering of the A-basis: prefix spans should be
    // ideals of m. The tiling construction relies on it, so flag early.
    bool malcev = true;
    for (int pre = 1; pre < s.n2 && malcev; ++pre)
      for (int i = s.n1; i < d && malcev; ++i)
        for (int j = s.n1; j < s.n1 + pre; ++j)
          for (int k = s.n1 + pre; k < d; ++k)
            if (std::abs(s.bracket(i, j)[k]) > tol) { malcev = false; break; }
    if (!malcev)
      rep.warnings.push_back(
          "A-basis prefixes are not ideals of m; tiling factorization assumes a strong "
          "Malcev ordering");
  }
  return rep;
}

}  // namespace solvframe

#endif
