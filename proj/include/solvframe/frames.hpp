#ifndef SOLVFRAME_FRAMES_HPP
#define SOLVFRAME_FRAMES_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"
#include "measure.hpp"

namespace solvframe {

using cxd = std::complex<double>;

inline cxd unit_phase(double turns) { return std::polar(1.0, 2.0 * M_PI * turns); }

/// Group element g = exp(sum x_k X_k) e(t) in the canonical coordinates.
struct GroupElement {
  std::vector<double> x;  // coordinates in p
  std::vector<double> t;  // second-kind coordinates in M

  static GroupElement identity(const GroupSpec& s) {
    return {std::vector<double>(s.n1, 0.0), std::vector<double>(s.n2, 0.0)};
  }
};

/// Everything the frame constructions derive from a certified chart:
/// orbital data, the epsilon box, delta, and the lattice pair.
struct FrameDesign {
  std::shared_ptr<const GroupSpec> spec;
  std::shared_ptr<const BetaMap> beta;
  std::shared_ptr<const BetaInverter> inverter;
  OrbitalData orbital;
  EpsilonCertificate cert;
  DeltaEstimate delta;
  LatticePair lattice;
  std::vector<double> beta_span;  // per-axis image diameter over the box

  double epsilon() const { return cert.epsilon; }
  int n2() const { return spec->n2; }
};

struct DesignOptions {
  std::vector<int> J;  // empty selects max-|det| tuple
  double eps_max = 1.0;
  std::size_t grid_n = 64;
  std::size_t delta_grid_n = 256;
  std::optional<Mat<double>> lattice_override;
};

inline FrameDesign make_frame_design(std::shared_ptr<const GroupSpec> spec,
                                     const DesignOptions& opt = {}) {
  FrameDesign d;
  d.spec = spec;
  d.orbital = opt.J.empty() ? orbital_data(*spec) : orbital_data_with_J(*spec, opt.J);
  d.beta = std::make_shared<BetaMap>(*spec, d.orbital.J);
  d.cert = epsilon_search(*d.beta, opt.eps_max, opt.grid_n);
  d.delta = delta_sup(*d.beta, d.cert.epsilon, opt.delta_grid_n);
  d.lattice = build_lattices(d.delta.grid_max, d.orbital.J, opt.lattice_override);
  d.inverter = std::make_shared<BetaInverter>(*d.beta, d.cert.epsilon);

  const int n2 = spec->n2;
  std::vector<double> lo(n2, -d.cert.epsilon / 2), hi(n2, d.cert.epsilon / 2);
  std::vector<double> bmin(n2, 1e300), bmax(n2, -1e300);
  for (auto& a : uniform_grid(lo, hi, 33)) {
    auto xi = d.beta->eval(a);
    for (int j = 0; j < n2; ++j) {
      bmin[j] = std::min(bmin[j], xi[j]);
      bmax[j] = std::max(bmax[j], xi[j]);
    }
  }
  d.beta_span.resize(n2);
  for (int j = 0; j < n2; ++j) d.beta_span[j] = bmax[j] - bmin[j];
  return d;
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Smooth bump profile with all derivatives vanishing at |u| = 1.
template <class T>
T mollifier(const T& u) {
  if (primal_abs(u) >= 1.0) return T(0);
  return exp(T(-1.0) / (T(1.0) - u * u));
}

/// Frame generator on Omega_eps, evaluated in the second-kind chart
/// u in F_eps; identically zero outside its support box.
struct Generator {
  enum class Kind { tight_indicator, smooth_bump };
  Kind kind = Kind::tight_indicator;
  double support_half_width = 0;  // per-axis, in chart coordinates
  double norm_squared = 0;        // tight: reported ||f||^2 = |beta(F_eps)|
  double bump_theta = 0;          // smooth: support fraction of eps/2
  std::function<double(const std::vector<double>&)> value;
};

/// Tight-indicator generator r x 1_{Omega_eps} with
/// r(e(A)) = (rho(A) Theta(beta(A)))^{-1/2}. Evaluated through the
/// identity Theta(beta(A)) |det Jac beta(A)| = 1, so the hot path needs
/// no Newton inversion. Its squared Haar norm equals |beta(F_eps)|.
inline Generator tight_generator(const FrameDesign& design,
                                 std::size_t norm_order = 32) {
  const GroupSpec& spec = *design.spec;
  auto beta = design.beta;
  const double eps = design.epsilon();
  Generator gen;
  gen.kind = Generator::Kind::tight_indicator;
  gen.support_half_width = eps / 2;
  gen.value = [&spec, beta, eps](const std::vector<double>& u) -> double {
    for (double c : u)
      if (std::abs(c) > eps / 2) return 0.0;
    return std::sqrt(beta->abs_det_jacobian(u) / rho(spec, u));
  };
  const int n2 = spec.n2;
  std::vector<double> lo(n2, -eps / 2), hi(n2, eps / 2);
  TensorGrid g = tensor_gauss(lo, hi, norm_order);
  double nsq = 0;
  for (std::size_t q = 0; q < g.nodes.size(); ++q) {
    double r = gen.value(g.nodes[q]);
    nsq += g.weights[q] * r * r * rho(spec, g.nodes[q]);
  }
  gen.norm_squared = nsq;
  return gen;
}

/// Smooth bump generator s(e(a)) = prod_k mollifier(2 a_k / (theta eps))
/// supported strictly inside Omega_eps^o, with Sigma_s checked against
/// the packing lattice.
inline Generator smooth_generator(const FrameDesign& design, double bump_theta) {
  if (!(bump_theta > 0 && bump_theta < 1))
    throw std::invalid_argument("smooth_generator: support fraction must be in (0,1)");
  const double eps = design.epsilon();
  const double w = bump_theta * eps / 2;
  Generator gen;
  gen.kind = Generator::Kind::smooth_bump;
  gen.support_half_width = w;
  gen.bump_theta = bump_theta;
  gen.value = [w](const std::vector<double>& u) -> double {
    double v = 1.0;
    for (double c : u) {
      v *= mollifier(c / w);
      if (v == 0.0) return 0.0;
    }
    return v;
  };
  // Sigma_s = beta(supp s) must avoid its nonzero Lambda* translates.
  PackingReport pk = check_packing(*design.beta, 2 * w, design.lattice, 2048);
  if (!pk.passed)
    throw std::domain_error(
        "smooth_generator: Sigma_s is not contained in a fundamental domain of "
        "Lambda*; refine the lattice");
  return gen;
}

/// Upsilon(m) = sqrt(Psi(Phi(m)) |det (L^eps)^T|) s(m) in the chart.
/// |det (L^eps)^T| is the dual-lattice cell volume 1/|det L|.
inline double upsilon(const FrameDesign& design, const Generator& gen,
                      const std::vector<double>& v) {
  double s = gen.value(v);
  if (s == 0.0) return 0.0;
  double psi = psi_on_chart(*design.spec, *design.beta, v);
  return std::sqrt(psi * design.lattice.frame_bound_prediction) * s;
}

// ---------------------------------------------------------------------------
// Grid functions on M
// ---------------------------------------------------------------------------

/// A function on M sampled on finitely many tiles gamma^{-1} Omega_eps of
/// the Gamma_M tiling. Per-tile values live on a shared Gauss-Legendre
/// grid over F_eps; weights already include the Haar density rho. The
/// originating evaluator rides along so translated supports can be
/// resampled.
struct GridFunction {
  const GroupSpec* spec = nullptr;
  double epsilon = 0;
  std::size_t order = 0;
  std::vector<std::vector<double>> nodes;  // chart nodes in F_eps
  std::vector<double> weights;             // GL weight x rho(u)
  std::vector<std::vector<long>> tiles;    // Gamma_M indices
  std::vector<std::vector<cxd>> values;    // [tile][node]
  std::function<cxd(const std::vector<double>&)> eval;  // on M coordinates

  double norm_squared() const {
    double s = 0;
    for (const auto& tv : values)
      for (std::size_t q = 0; q < tv.size(); ++q) s += weights[q] * std::norm(tv[q]);
    return s;
  }
};

/// Coordinates of gamma^{-1} e(u) for gamma = e(eps k).
inline std::vector<double> tile_point(const GroupSpec& spec, double eps,
                                      const std::vector<long>& k,
                                      const std::vector<double>& u) {
  std::vector<double> gk(spec.n2);
  for (int d = 0; d < spec.n2; ++d) gk[d] = eps * double(k[d]);
  return m_product(spec, m_inverse(spec, gk), u);
}

inline GridFunction sample_grid_function(
    const GroupSpec& spec, double epsilon, std::size_t order,
    const std::vector<std::vector<long>>& tiles,
    std::function<cxd(const std::vector<double>&)> eval) {
  GridFunction g;
  g.spec = &spec;
  g.epsilon = epsilon;
  g.order = order;
  g.eval = std::move(eval);
  const int n2 = spec.n2;
  std::vector<double> lo(n2, -epsilon / 2), hi(n2, epsilon / 2);
  TensorGrid grid = tensor_gauss(lo, hi, order);
  g.nodes = grid.nodes;
  g.weights.resize(grid.weights.size());
  for (std::size_t q = 0; q < grid.nodes.size(); ++q)
    g.weights[q] = grid.weights[q] * rho(spec, grid.nodes[q]);
  g.tiles = tiles;
  g.values.resize(tiles.size());
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    g.values[t].resize(g.nodes.size());
    for (std::size_t q = 0; q < g.nodes.size(); ++q)
      g.values[t][q] = g.eval(tile_point(spec, epsilon, tiles[t], g.nodes[q]));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Representation action
// ---------------------------------------------------------------------------

/// (pi_lambda(g) h)(e(a)) = exp(2 pi i <C(a)* lambda, x>) h(e(t)^{-1} e(a)).
/// The result is resampled on the tiles covering the translated support;
/// exceeding the tile budget raises a truncation error.
inline GridFunction rep_apply(const FrameDesign& design, const GroupElement& g,
                              const GridFunction& h, std::size_t tile_budget = 4096) {
  const GroupSpec& spec = *design.spec;
  if (!h.eval) throw std::invalid_argument("rep_apply: grid function has no evaluator");
  auto beta = design.beta;
  auto coad = [beta](const std::vector<double>& v) {
    Vec<double> av(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) av[i] = v[i];
    return beta->coadjoint().theta(av);
  };
  std::vector<double> x = g.x;
  std::vector<double> tinv = m_inverse(spec, g.t);
  auto old_eval = h.eval;
  std::function<cxd(const std::vector<double>&)> new_eval =
      [&spec, coad, x, tinv, old_eval](const std::vector<double>& v) -> cxd {
    Vec<double> th = coad(v);
    double turns = 0;
    for (std::size_t i = 0; i < x.size(); ++i) turns += th[i] * x[i];
    return unit_phase(turns) * old_eval(m_product(spec, tinv, v));
  };

  // discover the tiles covering e(t) . supp(h)
  std::set<std::vector<long>> tile_set;
  const double eps = h.epsilon;
  for (std::size_t t = 0; t < h.tiles.size(); ++t) {
    std::vector<std::vector<double>> probes = h.nodes;
    std::vector<double> corner_lo(spec.n2, -eps / 2 + 1e-12);
    std::vector<double> corner_hi(spec.n2, eps / 2 - 1e-12);
    for (auto& c : uniform_grid(corner_lo, corner_hi, 2)) probes.push_back(c);
    for (const auto& u : probes) {
      std::vector<double> p = tile_point(spec, eps, h.tiles[t], u);
      std::vector<double> moved = m_product(spec, g.t, p);
      tile_set.insert(factorize_tile(spec, eps, moved).k);
      if (tile_set.size() > tile_budget)
        throw std::domain_error("rep_apply: translated support exceeds the tile budget");
    }
  }
  std::vector<std::vector<long>> tiles(tile_set.begin(), tile_set.end());
  return sample_grid_function(spec, eps, h.order, tiles, new_eval);
}

// ---------------------------------------------------------------------------
// Frame coefficients
// ---------------------------------------------------------------------------

/// Gauss-Legendre order resolving the worst phase oscillation of the
/// modulation window. Gauss rules only enter their exponential regime
/// once the point count passes ~(e/4) of the total phase in radians, so
/// the order grows at 4.5 points per cycle (floor: 12 + 2 cycles, min 24).
/// `span_scale` shrinks the cycle count when integrating over a sub-box.
inline std::size_t required_order(const FrameDesign& design, int k_mod,
                                  double span_scale = 1.0) {
  double cycles = 0;
  const int n2 = design.n2();
  for (int j = 0; j < n2; ++j) {
    double lmax = 0;
    for (int i = 0; i < n2; ++i) lmax = std::max(lmax, std::abs(design.lattice.L(j, i)));
    cycles += design.beta_span[j] * lmax * double(k_mod) * span_scale;
  }
  std::size_t order = std::max<std::size_t>(
      24, 12 + std::size_t(std::ceil(4.5 * cycles)));
  return std::min<std::size_t>(order, 220);
}

struct CoefficientTable {
  std::vector<std::vector<long>> gammas;
  std::vector<std::vector<int>> k_list;           // modulation tuples
  std::vector<std::vector<cxd>> coeffs;           // [gamma][k]
  int k_mod = 0;
  double total_energy = 0;
  double last_shell_energy = 0;
  double tail_estimate = 0;
};

namespace frames_detail {

inline std::vector<std::vector<int>> modulation_tuples(int n2, int k_mod) {
  std::vector<std::vector<int>> ks;
  std::vector<int> k(n2, -k_mod);
  while (true) {
    ks.push_back(k);
    int d = 0;
    for (; d < n2; ++d) {
      if (++k[d] <= k_mod) break;
      k[d] = -k_mod;
    }
    if (d == n2) break;
  }
  return ks;
}

inline double shell_tail_sum(int K) {
  // sum_{r > K} (K/r)^2, the 1/k^2 energy-decay model of indicator
  // generators; smooth generators contribute a vanishing last shell.
  double s = 0;
  for (int r = K + 1; r <= K + 200000; ++r) s += double(K) * double(K) / (double(r) * double(r));
  s += double(K) * double(K) / (double(K) + 200000.5);
  return s;
}

}  // namespace frames_detail

/// <h, pi(gamma^{-1} exp X) f> for all gamma in h's tiles and X = L k,
/// |k|_inf <= k_mod. The generator is supported inside Omega_eps, so the
/// tiling truncates the gamma sum exactly; per tile the coefficient is a
/// windowed Fourier integral of h against beta_J.
inline CoefficientTable frame_coefficients(const FrameDesign& design,
                                           const GridFunction& h,
                                           const Generator& gen, int k_mod) {
  const GroupSpec& spec = *design.spec;
  const int n2 = spec.n2;
  if (k_mod < 1) throw std::invalid_argument("frame_coefficients: k_mod must be >= 1");
  CoefficientTable table;
  table.k_mod = k_mod;
  table.gammas = h.tiles;
  table.k_list = frames_detail::modulation_tuples(n2, k_mod);
  const std::size_t nk = table.k_list.size();
  table.coeffs.assign(h.tiles.size(), std::vector<cxd>(nk, cxd(0)));

  // per-node data shared across tiles
  const std::size_t nq = h.nodes.size();
  std::vector<double> gen_rho_w(nq);
  std::vector<std::vector<double>> beta_q(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    gen_rho_w[q] = gen.value(h.nodes[q]) * h.weights[q];
    beta_q[q] = design.beta->eval(h.nodes[q]);
  }

  const bool diag = design.lattice.is_diagonal;
  for (std::size_t t = 0; t < h.tiles.size(); ++t) {
    auto& out = table.coeffs[t];
    for (std::size_t q = 0; q < nq; ++q) {
      if (gen_rho_w[q] == 0.0) continue;
      cxd amp = h.values[t][q] * gen_rho_w[q];
      if (diag) {
        // powers of the per-axis unit phases, walked incrementally
        std::vector<cxd> base(n2), cur(n2);
        for (int j = 0; j < n2; ++j) {
          base[j] = unit_phase(-beta_q[q][j] * design.lattice.L(j, j));
          cur[j] = std::pow(base[j], -k_mod);
        }
        std::vector<int> k(n2, -k_mod);
        std::size_t flat = 0;
        while (true) {
          cxd ph(1.0);
          for (int j = 0; j < n2; ++j) ph *= cur[j];
          out[flat] += amp * ph;
          ++flat;
          int d = 0;
          for (; d < n2; ++d) {
            if (++k[d] <= k_mod) {
              cur[d] *= base[d];
              break;
            }
            k[d] = -k_mod;
            cur[d] = std::pow(base[d], -k_mod);
          }
          if (d == n2) break;
        }
      } else {
        for (std::size_t f = 0; f < nk; ++f) {
          double turns = 0;
          for (int j = 0; j < n2; ++j) {
            double xj = 0;
            for (int i = 0; i < n2; ++i)
              xj += design.lattice.L(j, i) * double(table.k_list[f][i]);
            turns -= beta_q[q][j] * xj;
          }
          out[f] += amp * unit_phase(turns);
        }
      }
    }
  }

  for (std::size_t t = 0; t < h.tiles.size(); ++t)
    for (std::size_t f = 0; f < nk; ++f) {
      double e = std::norm(table.coeffs[t][f]);
      table.total_energy += e;
      int shell = 0;
      for (int j = 0; j < n2; ++j) shell = std::max(shell, std::abs(table.k_list[f][j]));
      if (shell == k_mod) table.last_shell_energy += e;
    }
  // shell energies of indicator-type generators follow the perimeter
  // law E_r ~ C/r^2, so the tail extrapolates from the last shell
  table.tail_estimate = table.last_shell_energy * frames_detail::shell_tail_sum(k_mod);
  return table;
}

// ---------------------------------------------------------------------------
// Tight-frame verification
// ---------------------------------------------------------------------------

struct TightCase {
  double norm_squared = 0;
  double energy = 0;
  double ratio = 0;
  double tail_ratio = 0;
  bool passed = false;
};

struct TightReport {
  double frame_bound = 0;
  double tolerance = 0;
  std::vector<TightCase> cases;
  double ratio_spread = 0;  // max/min - 1 across the test set
  bool parseval_after_rescale = false;
  bool passed = false;
};

inline TightReport verify_tight(const FrameDesign& design, const Generator& gen,
                                const std::vector<GridFunction>& test_functions,
                                int k_mod, double tol) {
  if (gen.kind != Generator::Kind::tight_indicator)
    throw std::invalid_argument("verify_tight: generator must be the tight indicator");
  TightReport rep;
  rep.frame_bound = design.lattice.frame_bound_prediction;
  rep.tolerance = tol;
  double rmin = 1e300, rmax = 0;
  bool all = true;
  for (const auto& h : test_functions) {
    CoefficientTable tb = frame_coefficients(design, h, gen, k_mod);
    TightCase c;
    c.norm_squared = h.norm_squared();
    c.energy = tb.total_energy;
    c.ratio = c.energy / c.norm_squared;
    c.tail_ratio = tb.tail_estimate / c.norm_squared;
    c.passed = std::abs(c.ratio - rep.frame_bound) <=
               tol * rep.frame_bound + c.tail_ratio;
    all &= c.passed;
    rmin = std::min(rmin, c.ratio + c.tail_ratio);
    rmax = std::max(rmax, c.ratio + c.tail_ratio);
    rep.cases.push_back(c);
  }
  rep.ratio_spread = rep.cases.empty() ? 0.0 : rmax / rmin - 1.0;
  // Parseval clause: rescaling the generator by |det L|^{1/2} divides
  // every ratio by the frame bound.
  rep.parseval_after_rescale = true;
  for (const auto& c : rep.cases)
    if (std::abs(c.ratio / rep.frame_bound - 1.0) >
        tol + c.tail_ratio / rep.frame_bound)
      rep.parseval_after_rescale = false;
  rep.passed = all && !rep.cases.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// Smooth-frame machinery
// ---------------------------------------------------------------------------

struct DensifyResult {
  double spacing = 0;
  double lower = 0;   // grid inf of sum_gamma |Upsilon(gamma m)|^2
  double upper = 0;   // grid sup
  int refinements = 0;
  bool accepted = false;
};

/// Sum of |Upsilon(gamma m)|^2 over gamma = e(spacing k) in a window
/// large enough to cover the bump support around m = e(v).
inline double upsilon_cover_sum(const FrameDesign& design, const Generator& gen,
                                double spacing, const std::vector<double>& v) {
  const GroupSpec& spec = *design.spec;
  const int n2 = spec.n2;
  const double w = gen.support_half_width;
  std::vector<long> center = factorize_tile(spec, spacing, v).k;
  const long rad = static_cast<long>(std::ceil(w / spacing)) + 2;
  double sum = 0;
  std::vector<long> k(n2);
  std::function<void(int)> walk = [&](int d) {
    if (d == n2) {
      std::vector<double> gk(n2);
      for (int j = 0; j < n2; ++j) gk[j] = spacing * double(k[j]);
      std::vector<double> moved = m_product(spec, gk, v);
      for (int j = 0; j < n2; ++j)
        if (std::abs(moved[j]) >= w) return;
      double up = upsilon(design, gen, moved);
      sum += up * up;
      return;
    }
    for (k[d] = center[d] - rad; k[d] <= center[d] + rad; ++k[d]) walk(d + 1);
  };
  walk(0);
  return sum;
}

/// Halves the Gamma_M spacing until the covering sum is strictly
/// positive over a dense grid of one period cell (tile periodicity
/// makes one cell representative).
inline DensifyResult densify_gamma_M(const FrameDesign& design, const Generator& gen,
                                     double start_spacing, std::size_t grid_per_axis = 33) {
  if (gen.kind != Generator::Kind::smooth_bump)
    throw std::invalid_argument("densify_gamma_M: generator must be a smooth bump");
  const int n2 = design.n2();
  DensifyResult res;
  res.spacing = start_spacing;
  while (res.spacing >= 1e-4 * design.epsilon()) {
    std::vector<double> lo(n2, -res.spacing / 2), hi(n2, res.spacing / 2);
    double inf = 1e300, sup = 0;
    for (auto& v : uniform_grid(lo, hi, grid_per_axis)) {
      double s = upsilon_cover_sum(design, gen, res.spacing, v);
      inf = std::min(inf, s);
      sup = std::max(sup, s);
    }
    res.lower = inf;
    res.upper = sup;
    if (inf > 1e-12 * std::max(sup, 1e-300)) {
      res.accepted = true;
      return res;
    }
    res.spacing /= 2;
    ++res.refinements;
  }
  res.accepted = false;
  return res;
}

/// Evaluable test function together with the epsilon-tiling tiles that
/// carry its support.
struct TestFunction {
  std::function<cxd(const std::vector<double>&)> eval;
  std::vector<std::vector<long>> tiles;
};

/// Seeded test set: per-tile profiles on a block of tiles around the
/// identity. Smooth profiles are complex affine fields under a bump that
/// vanishes at the tile boundary; "rough" adds plain polynomial-times-
/// indicator profiles whose Fourier tails exercise the shell estimate.
inline std::vector<TestFunction> make_test_functions(const GroupSpec& spec,
                                                     double epsilon, int count,
                                                     int tiles_per_axis,
                                                     std::uint64_t seed,
                                                     bool smooth = true) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const int n2 = spec.n2;

  std::vector<std::vector<long>> tiles;
  {
    std::vector<long> k(n2, 0);
    long half = tiles_per_axis / 2;
    std::function<void(int)> walk = [&](int d) {
      if (d == n2) {
        tiles.push_back(k);
        return;
      }
      for (k[d] = -half; k[d] < tiles_per_axis - half; ++k[d]) walk(d + 1);
    };
    walk(0);
  }

  std::vector<TestFunction> fns;
  for (int f = 0; f < count; ++f) {
    struct Profile {
      std::vector<long> tile;
      cxd a;
      std::vector<cxd> b;
    };
    auto profiles = std::make_shared<std::vector<Profile>>();
    for (const auto& tk : tiles) {
      Profile p;
      p.tile = tk;
      p.a = cxd(coef(rng), coef(rng));
      p.b.resize(n2);
      for (int j = 0; j < n2; ++j) p.b[j] = cxd(coef(rng), coef(rng));
      profiles->push_back(std::move(p));
    }
    const GroupSpec* sp = &spec;
    bool use_bump = smooth;
    TestFunction tf;
    tf.tiles = tiles;
    tf.eval = [sp, epsilon, profiles, use_bump](const std::vector<double>& v) -> cxd {
      TileFactorization ft = factorize_tile(*sp, epsilon, v);
      for (const auto& p : *profiles) {
        if (p.tile != ft.k) continue;
        cxd val = p.a;
        for (std::size_t j = 0; j < ft.u.size(); ++j) val += p.b[j] * ft.u[j];
        if (use_bump)
          for (double uj : ft.u) val *= mollifier(2.0 * uj / epsilon);
        return val;
      }
      return cxd(0);
    };
    fns.push_back(std::move(tf));
  }
  return fns;
}

struct SmoothCase {
  double norm_squared = 0;
  double energy = 0;
  double ratio = 0;
  double identity_lhs = 0;
  double identity_rhs = 0;
  double identity_rel_err = 0;
  bool sandwich_ok = false;
};

struct SmoothReport {
  double lower = 0;
  double upper = 0;
  double spacing = 0;
  std::vector<SmoothCase> cases;
  bool passed = false;
};

/// Coefficient energy of the smooth system { pi(gamma^{-1} exp X) s }
/// for gamma in the densified Gamma_M and X = L k, |k|_inf <= k_mod.
/// Every coefficient is a Fourier integral over the bump support.
inline double smooth_coefficient_energy(const FrameDesign& design, const Generator& gen,
                                        double spacing, const TestFunction& h,
                                        int k_mod, std::size_t order) {
  const GroupSpec& spec = *design.spec;
  const int n2 = spec.n2;
  const double w = gen.support_half_width;
  const double eps = design.epsilon();

  // candidate gamma indices: gamma^{-1} supp(s) must meet supp(h).
  // The coordinate bounding box of supp(h) comes from its tile corners;
  // the per-axis index window then covers every lattice point whose
  // translate of the support box can reach it (padded for the mild box
  // bending a noncommutative product introduces).
  std::vector<std::vector<long>> gammas;
  {
    std::vector<double> blo(n2, 1e300), bhi(n2, -1e300);
    std::vector<double> tlo(n2, -eps / 2), thi(n2, eps / 2);
    auto tile_probe = uniform_grid(tlo, thi, 3);
    for (const auto& tk : h.tiles)
      for (const auto& tu : tile_probe) {
        std::vector<double> xpt = tile_point(spec, eps, tk, tu);
        for (int j = 0; j < n2; ++j) {
          blo[j] = std::min(blo[j], xpt[j]);
          bhi[j] = std::max(bhi[j], xpt[j]);
        }
      }
    std::vector<long> klo(n2), khi(n2);
    for (int j = 0; j < n2; ++j) {
      klo[j] = static_cast<long>(std::floor((-w - bhi[j]) / spacing)) - 2;
      khi[j] = static_cast<long>(std::ceil((w - blo[j]) / spacing)) + 2;
    }
    std::vector<long> kk(n2);
    std::function<void(int)> walk = [&](int d) {
      if (d == n2) {
        gammas.push_back(kk);
        return;
      }
      for (kk[d] = klo[d]; kk[d] <= khi[d]; ++kk[d]) walk(d + 1);
    };
    walk(0);
  }

  std::vector<double> lo(n2, -w), hi(n2, w);
  TensorGrid grid = tensor_gauss(lo, hi, order);
  const std::size_t nq = grid.nodes.size();
  std::vector<double> srw(nq);
  std::vector<std::vector<double>> beta_q(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    srw[q] = gen.value(grid.nodes[q]) * rho(spec, grid.nodes[q]) * grid.weights[q];
    beta_q[q] = design.beta->eval(grid.nodes[q]);
  }
  auto ks = frames_detail::modulation_tuples(n2, k_mod);
  const std::size_t nk = ks.size();
  const bool diag = design.lattice.is_diagonal;

  // per-node tables of e^{-2 pi i beta_j L_jj k}, k = -K..K (diagonal L)
  const int width = 2 * k_mod + 1;
  std::vector<cxd> powers;
  if (diag) {
    powers.assign(nq * n2 * width, cxd(1));
    for (std::size_t q = 0; q < nq; ++q)
      for (int j = 0; j < n2; ++j) {
        cxd base = unit_phase(-beta_q[q][j] * design.lattice.L(j, j));
        cxd run = std::pow(base, -k_mod);
        for (int p = 0; p < width; ++p) {
          powers[(q * n2 + j) * width + p] = run;
          run *= base;
        }
      }
  }

  double energy = 0;
  std::vector<cxd> coeff(nk);
  for (const auto& gk : gammas) {
    std::vector<double> gcoord(n2);
    for (int j = 0; j < n2; ++j) gcoord[j] = spacing * double(gk[j]);
    std::vector<double> ginv = m_inverse(spec, gcoord);
    std::vector<cxd> amp(nq);
    bool any = false;
    for (std::size_t q = 0; q < nq; ++q) {
      if (srw[q] == 0.0) continue;
      amp[q] = h.eval(m_product(spec, ginv, grid.nodes[q])) * srw[q];
      any |= (amp[q] != cxd(0));
    }
    if (!any) continue;
    std::fill(coeff.begin(), coeff.end(), cxd(0));
    if (diag) {
      for (std::size_t q = 0; q < nq; ++q) {
        if (amp[q] == cxd(0)) continue;
        const cxd* pq = &powers[q * n2 * width];
        for (std::size_t f = 0; f < nk; ++f) {
          cxd ph = pq[ks[f][0] + k_mod];
          for (int j = 1; j < n2; ++j) ph *= pq[j * width + ks[f][j] + k_mod];
          coeff[f] += amp[q] * ph;
        }
      }
    } else {
      for (std::size_t q = 0; q < nq; ++q) {
        if (amp[q] == cxd(0)) continue;
        for (std::size_t f = 0; f < nk; ++f) {
          double turns = 0;
          for (int j = 0; j < n2; ++j) {
            double xj = 0;
            for (int i = 0; i < n2; ++i) xj += design.lattice.L(j, i) * double(ks[f][i]);
            turns -= beta_q[q][j] * xj;
          }
          coeff[f] += amp[q] * unit_phase(turns);
        }
      }
    }
    for (const auto& c : coeff) energy += std::norm(c);
  }
  return energy;
}

/// Verifies the frame sandwich A ||h||^2 <= energy <= B ||h||^2 and the
/// proof identity energy = int |h|^2 (sum_gamma |Upsilon(gamma m)|^2) dmu.
inline SmoothReport verify_smooth_frame(const FrameDesign& design, const Generator& gen,
                                        double spacing, double lower, double upper,
                                        const std::vector<TestFunction>& test_functions,
                                        int k_mod, double tol,
                                        double identity_tol = 1e-4,
                                        std::size_t order = 48) {
  const GroupSpec& spec = *design.spec;
  const int n2 = spec.n2;
  const double eps = design.epsilon();
  SmoothReport rep;
  rep.lower = lower;
  rep.upper = upper;
  rep.spacing = spacing;
  bool all = true;
  for (const auto& h : test_functions) {
    SmoothCase c;
    GridFunction hg = sample_grid_function(spec, eps, order, h.tiles, h.eval);
    c.norm_squared = hg.norm_squared();
    c.energy = smooth_coefficient_energy(design, gen, spacing, h, k_mod, order);
    c.ratio = c.norm_squared > 0 ? c.energy / c.norm_squared : 0.0;
    c.identity_lhs = c.energy;
    // right-hand side: per-tile quadrature of |h|^2 times the cover sum
    double rhs = 0;
    for (std::size_t t = 0; t < hg.tiles.size(); ++t)
      for (std::size_t q = 0; q < hg.nodes.size(); ++q) {
        double hv = std::norm(hg.values[t][q]);
        if (hv == 0.0) continue;
        std::vector<double> m = tile_point(spec, eps, hg.tiles[t], hg.nodes[q]);
        rhs += hg.weights[q] * hv * upsilon_cover_sum(design, gen, spacing, m);
      }
    c.identity_rhs = rhs;
    c.identity_rel_err =
        rhs > 0 ? std::abs(c.identity_lhs - rhs) / rhs : std::abs(c.identity_lhs);
    if (c.norm_squared == 0.0) {
      c.sandwich_ok = c.energy <= 1e-12;
    } else {
      c.sandwich_ok = (c.energy >= lower * (1.0 - tol) * c.norm_squared) &&
                      (c.energy <= upper * (1.0 + tol) * c.norm_squared);
    }
    all &= c.sandwich_ok && (c.identity_rel_err <= identity_tol);
    rep.cases.push_back(c);
  }
  rep.passed = all && !rep.cases.empty();
  return rep;
}

}  // namespace solvframe

#endif
