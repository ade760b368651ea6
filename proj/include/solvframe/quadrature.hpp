#ifndef SOLVFRAME_QUADRATURE_HPP
#define SOLVFRAME_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <vector>

namespace solvframe {

/// One-dimensional Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes are the roots of P_n found by Newton iteration from the
/// Chebyshev-like initial guess; weights follow from the derivative.
inline GaussRule gauss_legendre(std::size_t n) {
  if (n == 0) throw std::invalid_argument("gauss_legendre: order must be positive");
  static std::map<std::size_t, GaussRule> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it2 = 0; it2 < 100; ++it2) {
      // Legendre recurrence for P_n(x) and P'_n(x).
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  cache[n] = rule;
  return rule;
}

/// Tensor-product Gauss-Legendre grid on a box given by per-axis
/// [lo, hi) intervals. Nodes are interior, so half-open boxes are safe.
struct TensorGrid {
  std::vector<std::vector<double>> nodes;  // flattened grid, each of dim axes
  std::vector<double> weights;             // includes the box volume factor
  std::size_t order = 0;
};

inline TensorGrid tensor_gauss(const std::vector<double>& lo,
                               const std::vector<double>& hi,
                               std::size_t order) {
  const std::size_t dim = lo.size();
  GaussRule g = gauss_legendre(order);
  TensorGrid grid;
  grid.order = order;
  std::size_t total = 1;
  for (std::size_t d = 0; d < dim; ++d) total *= order;
  grid.nodes.reserve(total);
  grid.weights.reserve(total);
  std::vector<std::size_t> idx(dim, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::vector<double> x(dim);
    double w = 1.0;
    for (std::size_t d = 0; d < dim; ++d) {
      double mid = 0.5 * (lo[d] + hi[d]);
      double rad = 0.5 * (hi[d] - lo[d]);
      x[d] = mid + rad * g.nodes[idx[d]];
      w *= rad * g.weights[idx[d]];
    }
    grid.nodes.push_back(std::move(x));
    grid.weights.push_back(w);
    for (std::size_t d = 0; d < dim; ++d) {
      if (++idx[d] < order) break;
      idx[d] = 0;
    }
  }
  return grid;
}

/// Uniform lattice of sample points over a closed box, endpoints included.
inline std::vector<std::vector<double>> uniform_grid(const std::vector<double>& lo,
                                                     const std::vector<double>& hi,
                                                     std::size_t per_axis) {
  const std::size_t dim = lo.size();
  std::size_t total = 1;
  for (std::size_t d = 0; d < dim; ++d) total *= per_axis;
  std::vector<std::vector<double>> pts;
  pts.reserve(total);
  std::vector<std::size_t> idx(dim, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::vector<double> x(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      double t = per_axis == 1 ? 0.5 : double(idx[d]) / double(per_axis - 1);
      x[d] = lo[d] + t * (hi[d] - lo[d]);
    }
    pts.push_back(std::move(x));
    for (std::size_t d = 0; d < dim; ++d) {
      if (++idx[d] < per_axis) break;
      idx[d] = 0;
    }
  }
  return pts;
}

}  // namespace solvframe

#endif
