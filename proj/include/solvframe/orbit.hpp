#ifndef SOLVFRAME_ORBIT_HPP
#define SOLVFRAME_ORBIT_HPP

#include <algorithm>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "algebra.hpp"
#include "quadrature.hpp"

namespace solvframe {

/// Caches ad(A_k)|_p so the coadjoint factor can be evaluated cheaply
/// in both double and dual arithmetic.
class CoadjointEvaluator {
 public:
  explicit CoadjointEvaluator(const GroupSpec& spec) : spec_(&spec) {
    for (int k = 0; k < spec.n2; ++k) ad_p_.push_back(ad_m_basis_on_p(spec, k));
  }

  const GroupSpec& spec() const { return *spec_; }

  /// C(a) = (e^{-ad(a_{n2} A_{n2})} ... e^{-ad(a_1 A_1)})|_p.
  template <class T>
  Mat<T> factor(const Vec<T>& a) const {
    const int n1 = spec_->n1, n2 = spec_->n2;
    Mat<T> c = Mat<T>::identity(n1);
    // right-to-left product: the a_1 factor acts first
    for (int k = 0; k < n2; ++k) {
      Mat<T> m(n1, n1);
      for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n1; ++j) m(i, j) = T(-ad_p_[k](i, j)) * a[k];
      c = expm(m) * c;
    }
    return c;
  }

  /// theta_lambda(a) = C(a)^* lambda, expressed in the dual basis:
  /// component k is <lambda, C(a) X_k>.
  template <class T>
  Vec<T> theta(const Vec<T>& a) const {
    const int n1 = spec_->n1;
    Mat<T> c = factor(a);
    Vec<T> th(n1);
    for (int j = 0; j < n1; ++j) {
      T s(0);
      for (int i = 0; i < n1; ++i) s += T(spec_->lambda.coeffs[i]) * c(i, j);
      th[j] = s;
    }
    return th;
  }

  /// Jacobian of theta at a (n1 x n2), by forward-mode duals.
  Mat<double> theta_jacobian(const std::vector<double>& a) const {
    return jacobian([this](const Vec<dual>& x) { return theta(x); }, a);
  }

 private:
  const GroupSpec* spec_;
  std::vector<Mat<double>> ad_p_;
};

inline Mat<double> coadjoint_factor(const GroupSpec& spec, const std::vector<double>& a) {
  CoadjointEvaluator ev(spec);
  Vec<double> av(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) av[i] = a[i];
  return ev.factor(av);
}

inline std::vector<double> theta(const GroupSpec& spec, const std::vector<double>& a) {
  CoadjointEvaluator ev(spec);
  Vec<double> av(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) av[i] = a[i];
  Vec<double> th = ev.theta(av);
  std::vector<double> out(th.size());
  for (std::size_t i = 0; i < th.size(); ++i) out[i] = th[i];
  return out;
}

/// One admissible index tuple with its subdeterminant of D_theta.
struct TupleCandidate {
  std::vector<int> indices;  // 1-based, strictly increasing
  double det;
};

/// The orbital data at lambda: D_theta = Jac_theta(0), the exhaustive
/// candidate scan over increasing n2-tuples, and the selected J.
struct OrbitalData {
  std::vector<int> J;          // 1-based indices into 1..n1
  Mat<double> D;               // n1 x n2
  std::vector<TupleCandidate> candidates;  // admissible tuples only
  double chosen_det = 0.0;
  std::size_t tuples_scanned = 0;
};

namespace orbit_detail {

inline double submatrix_det(const Mat<double>& d, const std::vector<int>& rows1b) {
  const std::size_t n = rows1b.size();
  Mat<double> sub(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sub(i, j) = d(rows1b[i] - 1, j);
  return det(sub);
}

inline double row_norm_product(const Mat<double>& d, const std::vector<int>& rows1b) {
  double prod = 1.0;
  for (int r : rows1b) {
    double s = 0;
    for (std::size_t j = 0; j < d.cols(); ++j) s += d(r - 1, j) * d(r - 1, j);
    prod *= std::sqrt(s);
  }
  return prod;
}

}  // namespace orbit_detail

/// Enumerates all C(n1, n2) row tuples, keeps the nonsingular ones and
/// selects J maximizing |det|, ties broken lexicographically. The scan
/// is capped: desk-scale groups stay far below the limit.
inline OrbitalData orbital_data(const GroupSpec& spec,
                                std::size_t tuple_cap = 100000) {
  CoadjointEvaluator ev(spec);
  const int n1 = spec.n1, n2 = spec.n2;
  if (n2 > n1)
    throw std::domain_error("orbital_data: dim_m exceeds dim_p, no index tuples exist");
  OrbitalData data;
  data.D = ev.theta_jacobian(std::vector<double>(n2, 0.0));

  std::vector<int> tuple(n2);
  for (int i = 0; i < n2; ++i) tuple[i] = i + 1;
  bool more = true;
  while (more) {
    if (++data.tuples_scanned > tuple_cap)
      throw std::domain_error("orbital_data: tuple enumeration exceeds cap of " +
                              std::to_string(tuple_cap));
    double dt = orbit_detail::submatrix_det(data.D, tuple);
    double scale = orbit_detail::row_norm_product(data.D, tuple);
    if (std::abs(dt) > 1e-10 * std::max(scale, 1e-300))
      data.candidates.push_back({tuple, dt});
    // next increasing tuple
    more = false;
    for (int i = n2 - 1; i >= 0; --i) {
      if (tuple[i] < n1 - (n2 - 1 - i)) {
        ++tuple[i];
        for (int j = i + 1; j < n2; ++j) tuple[j] = tuple[j - 1] + 1;
        more = true;
        break;
      }
    }
  }
  if (data.candidates.empty())
    throw std::domain_error(
        "orbital_data: no nonsingular index tuple; Jac_theta(0) is rank deficient "
        "(lambda does not satisfy the free-action hypotheses numerically)");
  const TupleCandidate* best = &data.candidates.front();
  for (const auto& c : data.candidates) {
    // strictly larger |det| wins; ties keep the lexicographically
    // earlier tuple because the scan emits tuples in increasing order
    if (std::abs(c.det) > std::abs(best->det) + 1e-15 * std::abs(best->det)) best = &c;
  }
  data.J = best->indices;
  data.chosen_det = best->det;
  return data;
}

/// Selects a caller-specified J (CLI --J override) after checking
/// admissibility against the same rank tolerance.
inline OrbitalData orbital_data_with_J(const GroupSpec& spec, std::vector<int> J) {
  OrbitalData data = orbital_data(spec);
  std::sort(J.begin(), J.end());
  for (const auto& c : data.candidates)
    if (c.indices == J) {
      data.J = J;
      data.chosen_det = c.det;
      return data;
    }
  std::ostringstream os;
  os << "requested J = (";
  for (std::size_t i = 0; i < J.size(); ++i) os << (i ? "," : "") << J[i];
  os << ") is not an admissible tuple";
  throw std::domain_error(os.str());
}

/// beta_J: m -> span{X_j* : j in J}, the J-indexed components of theta.
class BetaMap {
 public:
  BetaMap(const GroupSpec& spec, std::vector<int> J)
      : ev_(spec), J_(std::move(J)) {}
  BetaMap(const GroupSpec& spec, const OrbitalData& data) : BetaMap(spec, data.J) {}

  const std::vector<int>& J() const { return J_; }
  const GroupSpec& spec() const { return ev_.spec(); }
  const CoadjointEvaluator& coadjoint() const { return ev_; }

  template <class T>
  Vec<T> operator()(const Vec<T>& a) const {
    Vec<T> th = ev_.theta(a);
    Vec<T> out(J_.size());
    for (std::size_t i = 0; i < J_.size(); ++i) out[i] = th[J_[i] - 1];
    return out;
  }

  std::vector<double> eval(const std::vector<double>& a) const {
    Vec<double> av(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) av[i] = a[i];
    Vec<double> b = (*this)(av);
    std::vector<double> out(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) out[i] = b[i];
    return out;
  }

  /// Jacobian of beta at a (n2 x n2).
  Mat<double> jacobian_at(const std::vector<double>& a) const {
    return jacobian([this](const Vec<dual>& x) { return (*this)(x); }, a);
  }

  double abs_det_jacobian(const std::vector<double>& a) const {
    return std::abs(det(jacobian_at(a)));
  }

 private:
  CoadjointEvaluator ev_;
  std::vector<int> J_;
};

inline std::vector<double> beta(const GroupSpec& spec, const OrbitalData& data,
                                const std::vector<double>& a) {
  return BetaMap(spec, data).eval(a);
}

/// P_J zeroes the components outside J; idempotent by construction.
inline std::vector<double> projection_apply(const std::vector<int>& J,
                                            const std::vector<double>& v) {
  std::vector<double> out(v.size(), 0.0);
  for (int j : J)
    if (j >= 1 && j <= static_cast<int>(v.size())) out[j - 1] = v[j - 1];
  return out;
}

/// Report of the numerical free-action / immersion check: rank of
/// Jac_theta at sampled points of m.
struct FreeActionReport {
  int samples = 0;
  int failures = 0;
  double worst_ratio = 1.0;  // smallest sigma_min/sigma_max seen
  std::vector<std::vector<double>> failed_points;

  bool all_full_rank() const { return failures == 0; }
};

inline FreeActionReport free_action_check(const GroupSpec& spec,
                                          const std::vector<double>& lambda,
                                          const std::vector<std::vector<double>>& points) {
  GroupSpec probe = spec;
  probe.lambda.coeffs = lambda;
  CoadjointEvaluator ev(probe);
  FreeActionReport rep;
  for (const auto& a : points) {
    ++rep.samples;
    Mat<double> jac = ev.theta_jacobian(a);
    auto sv = singular_values(jac);
    double smin = sv.front(), smax = sv.back();
    double ratio = smax > 0 ? smin / smax : 0.0;
    rep.worst_ratio = std::min(rep.worst_ratio, ratio);
    if (!(ratio > 1e-9)) {
      ++rep.failures;
      if (rep.failed_points.size() < 16) rep.failed_points.push_back(a);
    }
  }
  return rep;
}

inline FreeActionReport free_action_check(const GroupSpec& spec,
                                          const std::vector<double>& lambda,
                                          int n_samples, double box_half_width,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-box_half_width, box_half_width);
  std::vector<std::vector<double>> pts(n_samples, std::vector<double>(spec.n2));
  for (auto& p : pts)
    for (auto& x : p) x = u(rng);
  return free_action_check(spec, lambda, pts);
}

/// Inverts beta_J on the certified box [-eps/2, eps/2]^{n2} by damped
/// Newton iteration seeded from the nearest precomputed grid preimage.
/// Queries outside beta_J(box) fail with a domain error.
class BetaInverter {
 public:
  BetaInverter(const BetaMap& beta, double epsilon, std::size_t seed_grid = 9)
      : beta_(&beta), eps_(epsilon) {
    const int n2 = beta.spec().n2;
    std::vector<double> lo(n2, -epsilon / 2), hi(n2, epsilon / 2);
    for (auto& a : uniform_grid(lo, hi, seed_grid)) {
      seeds_a_.push_back(a);
      seeds_xi_.push_back(beta.eval(a));
    }
  }

  double epsilon() const { return eps_; }

  /// Returns a with beta(a) = xi to residual 1e-12 and a in the closed
  /// certified box (a hair of slack absorbs roundoff at the faces).
  std::vector<double> invert(const std::vector<double>& xi) const {
    auto r = try_invert(xi);
    if (!r.second)
      throw std::domain_error("beta inversion: point is outside beta_J(O_eps)");
    return r.first;
  }

  bool contains(const std::vector<double>& xi) const { return try_invert(xi).second; }

  std::pair<std::vector<double>, bool> try_invert(const std::vector<double>& xi) const {
    const int n2 = beta_->spec().n2;
    // nearest seed in image space
    std::size_t best = 0;
    double bestd = 1e300;
    for (std::size_t s = 0; s < seeds_xi_.size(); ++s) {
      double d = 0;
      for (int i = 0; i < n2; ++i) {
        double t = seeds_xi_[s][i] - xi[i];
        d += t * t;
      }
      if (d < bestd) { bestd = d; best = s; }
    }
    std::vector<double> a = seeds_a_[best];
    const double box = eps_ / 2 + 1e-9;
    double res = residual(a, xi);
    for (int it = 0; it < 100; ++it) {
      if (res < 1e-12) {
        for (int i = 0; i < n2; ++i)
          if (std::abs(a[i]) > box) return {a, false};
        return {a, true};
      }
      Mat<double> jac = beta_->jacobian_at(a);
      Vec<double> r(n2);
      std::vector<double> bx = beta_->eval(a);
      for (int i = 0; i < n2; ++i) r[i] = bx[i] - xi[i];
      Vec<double> step;
      try {
        step = solve(jac, r);
      } catch (const std::domain_error&) {
        return {a, false};
      }
      double damp = 1.0;
      for (int half = 0; half < 30; ++half) {
        std::vector<double> cand(n2);
        for (int i = 0; i < n2; ++i) cand[i] = a[i] - damp * step[i];
        bool inside = true;
        for (int i = 0; i < n2; ++i)
          if (std::abs(cand[i]) > box * 1.5) inside = false;
        double cres = inside ? residual(cand, xi) : 1e300;
        if (cres < res) {
          a = cand;
          res = cres;
          break;
        }
        damp *= 0.5;
        if (half == 29) return {a, false};
      }
    }
    return {a, false};
  }

 private:
  double residual(const std::vector<double>& a, const std::vector<double>& xi) const {
    std::vector<double> b = beta_->eval(a);
    double r = 0;
    for (std::size_t i = 0; i < b.size(); ++i) r = std::max(r, std::abs(b[i] - xi[i]));
    return r;
  }

  const BetaMap* beta_;
  double eps_;
  std::vector<std::vector<double>> seeds_a_;
  std::vector<std::vector<double>> seeds_xi_;
};

}  // namespace solvframe

#endif
