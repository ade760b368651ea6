#ifndef SOLVFRAME_GEOMETRY_HPP
#define SOLVFRAME_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "orbit.hpp"
#include "quadrature.hpp"

namespace solvframe {

struct CertificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Grid certificate that beta_J restricted to [-eps/2, eps/2]^{n2} is a
/// diffeomorphism onto its image: nonvanishing Jacobian determinant at
/// every node plus positive pairwise image separation.
struct EpsilonCertificate {
  double epsilon = 0;
  std::size_t grid_n = 0;
  double min_abs_jac_det = 0;
  double injectivity_margin = 0;
};

namespace geo_detail {

inline std::size_t capped_grid(std::size_t grid_n, int dim, std::size_t cap_total) {
  std::size_t per = grid_n;
  auto total = [&](std::size_t p) {
    std::size_t t = 1;
    for (int d = 0; d < dim; ++d) t *= p;
    return t;
  };
  while (per > 2 && total(per) > cap_total) --per;
  return per;
}

}  // namespace geo_detail

/// Tries one fixed epsilon; empty result means rejection.
inline std::optional<EpsilonCertificate> certify_epsilon(const BetaMap& beta,
                                                         double epsilon,
                                                         std::size_t grid_n) {
  const int n2 = beta.spec().n2;
  const std::size_t det_n = geo_detail::capped_grid(grid_n, n2, 1000000);
  const std::size_t pair_n = geo_detail::capped_grid(grid_n, n2, 4096);

  std::vector<double> lo(n2, -epsilon / 2), hi(n2, epsilon / 2);
  const double det0 = std::abs(det(beta.jacobian_at(std::vector<double>(n2, 0.0))));

  // signed determinants on the grid: a fold inside the box shows up as a
  // sign change or a near-zero relative to the neighbouring variation,
  // even when no node lands on the zero set itself
  auto det_pts = uniform_grid(lo, hi, det_n);
  std::vector<double> dets(det_pts.size());
  for (std::size_t i = 0; i < det_pts.size(); ++i) dets[i] = det(beta.jacobian_at(det_pts[i]));
  double min_det = 1e300;
  for (double d : dets) min_det = std::min(min_det, std::abs(d));
  if (!(min_det > 1e-10 * det0)) return std::nullopt;
  {
    std::size_t stride = 1;
    for (int d = 0; d < n2; ++d) {
      for (std::size_t i = 0; i < det_pts.size(); ++i) {
        std::size_t along = (i / stride) % det_n;
        if (along + 1 >= det_n) continue;
        double a = dets[i], b = dets[i + stride];
        if (a * b <= 0) return std::nullopt;
        double variation = std::abs(b - a);
        if (std::min(std::abs(a), std::abs(b)) < 0.5 * variation) return std::nullopt;
      }
      stride *= det_n;
    }
  }

  auto pts = uniform_grid(lo, hi, pair_n);
  std::vector<std::vector<double>> imgs;
  imgs.reserve(pts.size());
  double diam = 0;
  for (auto& a : pts) imgs.push_back(beta.eval(a));
  for (std::size_t i = 0; i < imgs.size(); ++i)
    for (int d = 0; d < n2; ++d) diam = std::max(diam, std::abs(imgs[i][d] - imgs[0][d]));

  // index coordinates to exclude neighbour pairs (< 2 cells apart)
  auto index_of = [&](std::size_t flat) {
    std::vector<std::size_t> ix(n2);
    for (int d = 0; d < n2; ++d) {
      ix[d] = flat % pair_n;
      flat /= pair_n;
    }
    return ix;
  };
  double margin = 1e300;
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    auto ii = index_of(i);
    for (std::size_t j = i + 1; j < imgs.size(); ++j) {
      auto jj = index_of(j);
      std::size_t cell_dist = 0;
      for (int d = 0; d < n2; ++d)
        cell_dist = std::max(cell_dist,
                             ii[d] > jj[d] ? ii[d] - jj[d] : jj[d] - ii[d]);
      if (cell_dist < 2) continue;
      double dist = 0;
      for (int d = 0; d < n2; ++d) dist = std::max(dist, std::abs(imgs[i][d] - imgs[j][d]));
      margin = std::min(margin, dist);
    }
  }
  if (!(margin > 1e-12 * std::max(diam, 1e-30))) return std::nullopt;

  EpsilonCertificate cert;
  cert.epsilon = epsilon;
  cert.grid_n = grid_n;
  cert.min_abs_jac_det = min_det;
  cert.injectivity_margin = margin;
  return cert;
}

/// Largest epsilon <= eps_max whose box certifies, located by halving
/// until a candidate is accepted and then 16 bisection refinements.
inline EpsilonCertificate epsilon_search(const BetaMap& beta, double eps_max,
                                         std::size_t grid_n = 64,
                                         double eps_min = 1e-4) {
  if (auto c = certify_epsilon(beta, eps_max, grid_n)) return *c;
  double hi = eps_max, lo = eps_max / 2;
  std::optional<EpsilonCertificate> accepted;
  while (lo >= eps_min) {
    accepted = certify_epsilon(beta, lo, grid_n);
    if (accepted) break;
    hi = lo;
    lo /= 2;
  }
  if (!accepted)
    throw CertificationError(
        "epsilon_search: no diffeomorphism box certified down to eps_min");
  for (int it = 0; it < 16; ++it) {
    double mid = 0.5 * (lo + hi);
    if (auto c = certify_epsilon(beta, mid, grid_n)) {
      accepted = c;
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return *accepted;
}

/// Grid sup of ||beta_J||_max over the epsilon box. The closed grid
/// upper-bounds the half-open sup at node resolution; the inflated value
/// carries a 1.01 safety factor for packing-margin diagnostics.
struct DeltaEstimate {
  double grid_max = 0;
  double inflated = 0;
};

inline DeltaEstimate delta_sup(const BetaMap& beta, double epsilon,
                               std::size_t grid_n = 256) {
  const int n2 = beta.spec().n2;
  const std::size_t per = geo_detail::capped_grid(grid_n, n2, 1000000);
  std::vector<double> lo(n2, -epsilon / 2), hi(n2, epsilon / 2);
  double m = 0;
  for (auto& a : uniform_grid(lo, hi, per)) {
    auto xi = beta.eval(a);
    for (double x : xi) m = std::max(m, std::abs(x));
  }
  return {m, 1.01 * m};
}

/// The lattice pair of Lemma GammaP: Lambda = L Z^J in the X_j
/// coordinates and Lambda* = L^{-T} Z^J in the dual coordinates, with
/// the predicted tight-frame bound |det L|^{-1}.
struct LatticePair {
  double delta = 0;
  Mat<double> L;        // n2 x n2, invertible
  Mat<double> L_dual;   // inverse transpose of L; Lambda* basis columns
  std::vector<int> J;   // 1-based p-indices the lattice lives on
  double frame_bound_prediction = 0;
  bool is_diagonal = true;
};

inline LatticePair build_lattices(double delta, const std::vector<int>& J,
                                  const std::optional<Mat<double>>& override_L = {}) {
  if (!(delta > 0)) throw std::invalid_argument("build_lattices: delta must be positive");
  const std::size_t n2 = J.size();
  LatticePair lat;
  lat.delta = delta;
  lat.J = J;
  if (override_L) {
    lat.L = *override_L;
    if (lat.L.rows() != n2 || lat.L.cols() != n2)
      throw std::invalid_argument("build_lattices: override has wrong shape");
    double d = det(lat.L);
    if (std::abs(d) < 1e-14)
      throw std::invalid_argument("build_lattices: override lattice matrix is singular");
    lat.L_dual = inverse(lat.L).transposed();
    lat.frame_bound_prediction = 1.0 / std::abs(d);
    lat.is_diagonal = true;
    for (std::size_t i = 0; i < n2 && lat.is_diagonal; ++i)
      for (std::size_t j = 0; j < n2; ++j)
        if (i != j && lat.L(i, j) != 0.0) { lat.is_diagonal = false; break; }
  } else {
    lat.L = Mat<double>(n2, n2);
    lat.L_dual = Mat<double>(n2, n2);
    for (std::size_t i = 0; i < n2; ++i) {
      lat.L(i, i) = 1.0 / (2.0 * delta);
      lat.L_dual(i, i) = 2.0 * delta;
    }
    lat.frame_bound_prediction = std::pow(2.0 * delta, double(n2));
  }
  return lat;
}

/// Modulation lattice point X = L k restricted to the J coordinates.
inline std::vector<double> lattice_point(const LatticePair& lat,
                                         const std::vector<int>& k) {
  std::vector<double> x(lat.J.size(), 0.0);
  for (std::size_t i = 0; i < lat.J.size(); ++i)
    for (std::size_t j = 0; j < lat.J.size(); ++j) x[i] += lat.L(i, j) * k[j];
  return x;
}

// ---------------------------------------------------------------------------
// Tiling of M by Gamma_M^eps translates of Omega_eps
// ---------------------------------------------------------------------------

struct TileFactorization {
  std::vector<long> k;      // gamma = e(eps k)
  std::vector<double> u;    // omega = e(u), u in [-eps/2, eps/2)^{n2}
};

namespace geo_detail {

inline long split_half_open(double x, double eps, double& u) {
  double j = std::floor((x + eps / 2) / eps);
  u = x - j * eps;
  // guard against roundoff leaving u just outside the half-open cell
  if (u >= eps / 2) { u -= eps; j += 1; }
  if (u < -eps / 2) { u += eps; j -= 1; }
  return -static_cast<long>(j);
}

}  // namespace geo_detail

/// Inductive factorization m = gamma^{-1} omega from the normal-subgroup
/// proof: the last coordinate splits directly, the prefix is conjugated
/// back through Ad(exp(eps k_d A_d)) and recurses.
inline TileFactorization factorize_tile(const GroupSpec& spec, double epsilon,
                                        const std::vector<double>& coords) {
  const int n2 = spec.n2;
  TileFactorization f;
  f.k.assign(n2, 0);
  f.u.assign(n2, 0.0);
  if (spec.m_commutative()) {
    for (int d = 0; d < n2; ++d)
      f.k[d] = geo_detail::split_half_open(coords[d], epsilon, f.u[d]);
    return f;
  }
  std::vector<Mat<double>> ad_m;
  for (int k = 0; k < n2; ++k) ad_m.push_back(ad_m_basis_on_m(spec, k));

  std::vector<double> s(coords);
  for (int d = n2 - 1; d >= 1; --d) {
    f.k[d] = geo_detail::split_half_open(s[d], epsilon, f.u[d]);
    // conjugate the prefix element by gamma_d = exp(eps k_d A_d)
    std::vector<double> prefix(n2, 0.0);
    for (int i = 0; i < d; ++i) prefix[i] = s[i];
    Vec<double> pv(n2);
    for (int i = 0; i < n2; ++i) pv[i] = prefix[i];
    Vec<double> w = bch_nu(spec, pv);
    Mat<double> adm = ad_m[d];
    adm *= epsilon * double(f.k[d]);
    Vec<double> wp = expm(adm) * w;
    std::vector<double> wv(n2);
    for (int i = 0; i < n2; ++i) wv[i] = wp[i];
    std::vector<double> sp = bch_nu_inverse(spec, wv);
    for (int i = 0; i < d; ++i) s[i] = sp[i];
    // the conjugated element stays in the prefix ideal
  }
  f.k[0] = geo_detail::split_half_open(s[0], epsilon, f.u[0]);
  return f;
}

struct TilingReport {
  int samples = 0;
  int failures = 0;
  double worst_residual = 0;
  std::vector<std::vector<double>> failed_points;

  bool passed() const { return failures == 0; }
};

/// Verifies existence and uniqueness of the factorization on random
/// samples: gamma m must land in Omega_eps for the factored k and for no
/// neighbouring lattice index.
inline TilingReport tiling_check(const GroupSpec& spec, double epsilon,
                                 int n_samples, std::uint64_t seed = 7,
                                 double box_half_width = 0.0) {
  const int n2 = spec.n2;
  if (box_half_width <= 0) box_half_width = 4.0 * epsilon;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-box_half_width, box_half_width);
  TilingReport rep;
  std::vector<int> shifts;
  for (int d = 0; d < n2; ++d) shifts.push_back(d);

  for (int t = 0; t < n_samples; ++t) {
    std::vector<double> s(n2);
    for (auto& x : s) x = dist(rng);
    ++rep.samples;
    bool ok = true;
    double res = 0;

    TileFactorization f = factorize_tile(spec, epsilon, s);
    // existence: gamma * m = omega, i.e. mprod(eps k, s) == u in the box
    std::vector<double> gk(n2);
    for (int d = 0; d < n2; ++d) gk[d] = epsilon * double(f.k[d]);
    std::vector<double> w = m_product(spec, gk, s);
    for (int d = 0; d < n2; ++d) {
      res = std::max(res, std::abs(w[d] - f.u[d]));
      if (f.u[d] < -epsilon / 2 || f.u[d] >= epsilon / 2) ok = false;
    }
    if (res > 1e-9 * std::max(1.0, box_half_width)) ok = false;

    // uniqueness: no neighbouring gamma' also lands in the box
    if (ok) {
      std::vector<long> dk(n2, -1);
      while (true) {
        bool nonzero = false;
        for (int d = 0; d < n2; ++d) nonzero |= (dk[d] != 0);
        if (nonzero) {
          std::vector<double> gk2(n2);
          for (int d = 0; d < n2; ++d) gk2[d] = epsilon * double(f.k[d] + dk[d]);
          std::vector<double> w2 = m_product(spec, gk2, s);
          bool inside = true;
          for (int d = 0; d < n2; ++d)
            if (w2[d] < -epsilon / 2 + 1e-12 || w2[d] >= epsilon / 2 - 1e-12)
              inside = false;
          if (inside) ok = false;
        }
        int d = 0;
        for (; d < n2; ++d) {
          if (++dk[d] <= 1) break;
          dk[d] = -1;
        }
        if (d == n2 || !ok) break;
      }
    }
    rep.worst_residual = std::max(rep.worst_residual, res);
    if (!ok) {
      ++rep.failures;
      if (rep.failed_points.size() < 16) rep.failed_points.push_back(s);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Packing condition T^eps
// ---------------------------------------------------------------------------

struct PackingReport {
  bool passed = false;
  double min_slack = 0;        // pairwise distance to the nearest nonzero
                               // lattice vector, max-norm
  double worst_overlap = 0;    // estimated overlap fraction under the worst
                               // nonzero lattice translate
  std::vector<double> worst_kappa;
};

/// Checks that beta_J(F_eps) meets none of its nonzero Lambda* translates
/// in positive measure. Sampled beta values give the pairwise slack; the
/// overlap measure of each candidate translate is estimated by Newton
/// membership tests, so boundary-touching translates (null sets) pass.
inline PackingReport check_packing(const BetaMap& beta, double epsilon,
                                   const LatticePair& lat,
                                   std::size_t n_samples = 4096) {
  const int n2 = beta.spec().n2;
  std::size_t per = geo_detail::capped_grid(
      std::max<std::size_t>(8, static_cast<std::size_t>(
                                   std::llround(std::pow(double(n_samples), 1.0 / n2)))),
      n2, n_samples);

  // half-open sample grid: nodes at -eps/2 + i h, i = 0..per-1
  std::vector<std::vector<double>> pts;
  {
    std::vector<std::size_t> idx(n2, 0);
    std::size_t total = 1;
    for (int d = 0; d < n2; ++d) total *= per;
    double h = epsilon / double(per);
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::vector<double> a(n2);
      for (int d = 0; d < n2; ++d) a[d] = -epsilon / 2 + h * double(idx[d]);
      pts.push_back(std::move(a));
      for (int d = 0; d < n2; ++d) {
        if (++idx[d] < per) break;
        idx[d] = 0;
      }
    }
  }
  std::vector<std::vector<double>> imgs;
  imgs.reserve(pts.size());
  for (auto& a : pts) imgs.push_back(beta.eval(a));

  PackingReport rep;

  // pairwise slack against the dual lattice (diagonal fast path; general
  // override matrices round in lattice coordinates)
  Mat<double> to_lattice = lat.is_diagonal ? Mat<double>() : lat.L.transposed();
  double slack = 1e300;
  for (std::size_t i = 0; i < imgs.size(); ++i)
    for (std::size_t j = i + 1; j < imgs.size(); ++j) {
      double dist = 0;
      bool nonzero = false;
      if (lat.is_diagonal) {
        for (int d = 0; d < n2; ++d) {
          double spacing = lat.L_dual(d, d);
          double diff = imgs[i][d] - imgs[j][d];
          double m = std::round(diff / spacing);
          if (m != 0) nonzero = true;
          dist = std::max(dist, std::abs(diff - m * spacing));
        }
      } else {
        Vec<double> diff(n2);
        for (int d = 0; d < n2; ++d) diff[d] = imgs[i][d] - imgs[j][d];
        Vec<double> y = to_lattice * diff;  // L^T diff = lattice coordinates
        std::vector<double> m(n2);
        for (int d = 0; d < n2; ++d) {
          m[d] = std::round(y[d]);
          if (m[d] != 0) nonzero = true;
        }
        for (int d = 0; d < n2; ++d) {
          double kd = 0;
          for (int e = 0; e < n2; ++e) kd += lat.L_dual(d, e) * m[e];
          dist = std::max(dist, std::abs(diff[d] - kd));
        }
      }
      if (nonzero) slack = std::min(slack, dist);
    }
  rep.min_slack = slack == 1e300 ? 0.0 : slack;

  // overlap-measure estimate per candidate nonzero translate
  BetaInverter inv(beta, epsilon);
  std::vector<double> span_lo(n2, 1e300), span_hi(n2, -1e300);
  for (auto& xi : imgs)
    for (int d = 0; d < n2; ++d) {
      span_lo[d] = std::min(span_lo[d], xi[d]);
      span_hi[d] = std::max(span_hi[d], xi[d]);
    }
  std::vector<int> mrange(n2);
  for (int d = 0; d < n2; ++d) {
    double spacing = lat.is_diagonal ? lat.L_dual(d, d) : 0.0;
    double diam = span_hi[d] - span_lo[d];
    mrange[d] = lat.is_diagonal
                    ? static_cast<int>(std::ceil(diam / spacing)) + 1
                    : 2;  // conservative window for general lattices
  }
  double worst = 0;
  std::vector<double> worst_kappa(n2, 0.0);
  std::vector<int> m(n2, 0);
  std::function<void(int)> scan = [&](int d) {
    if (d == n2) {
      bool nonzero = false;
      for (int e = 0; e < n2; ++e) nonzero |= (m[e] != 0);
      if (!nonzero) return;
      std::vector<double> kappa(n2, 0.0);
      for (int r = 0; r < n2; ++r)
        for (int c = 0; c < n2; ++c) kappa[r] += lat.L_dual(r, c) * double(m[c]);
      // quick reject: translated bounding box misses the image box
      for (int r = 0; r < n2; ++r)
        if (span_lo[r] + kappa[r] > span_hi[r] + 1e-12 ||
            span_hi[r] + kappa[r] < span_lo[r] - 1e-12)
          return;
      std::size_t hits = 0;
      for (auto& xi : imgs) {
        std::vector<double> shifted(n2);
        for (int r = 0; r < n2; ++r) shifted[r] = xi[r] + kappa[r];
        if (inv.contains(shifted)) ++hits;
      }
      double frac = double(hits) / double(imgs.size());
      if (frac > worst) {
        worst = frac;
        worst_kappa = kappa;
      }
      return;
    }
    for (m[d] = -mrange[d]; m[d] <= mrange[d]; ++m[d]) scan(d + 1);
  };
  scan(0);
  rep.worst_overlap = worst;
  rep.worst_kappa = worst_kappa;
  // a genuine violation overlaps in positive measure; boundary contact
  // contributes at most a sliver one sample wide
  rep.passed = worst <= 2.5 / double(per);
  return rep;
}

}  // namespace solvframe

#endif
