#ifndef SOLVFRAME_MEASURE_HPP
#define SOLVFRAME_MEASURE_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "orbit.hpp"

namespace solvframe {

/// Haar weight w(A) = |det((id - e^{-ad A})/ad A)| on m, evaluated as
/// |det phi(ad(A)|_m)| with phi(x) = (1 - e^{-x})/x through its power
/// series, so singular ad needs no special casing. w(0) = 1 exactly.
inline double weight_w(const GroupSpec& spec, const std::vector<double>& a) {
  const int n2 = spec.n2;
  if (spec.m_commutative()) return 1.0;
  Mat<double> adA(n2, n2);
  for (int k = 0; k < n2; ++k) {
    if (a[k] == 0.0) continue;
    Mat<double> m = ad_m_basis_on_m(spec, k);
    m *= a[k];
    adA += m;
  }
  return std::abs(det(phi1m(adA)));
}

/// Jacobian determinant of nu at a, by forward duals.
inline double nu_jacobian_det(const GroupSpec& spec, const std::vector<double>& a) {
  if (spec.m_commutative()) return 1.0;
  Mat<double> jac = jacobian([&](const Vec<dual>& x) { return bch_nu(spec, x); }, a);
  return std::abs(det(jac));
}

/// Radon-Nikodym density of Haar measure in second-kind coordinates:
/// d mu_M(e(a)) = rho(a) da with rho(a) = w(nu(a)) |det Jac nu(a)|.
/// Identically 1 for commutative m.
inline double rho(const GroupSpec& spec, const std::vector<double>& a) {
  if (spec.m_commutative()) return 1.0;
  Vec<double> av(spec.n2);
  for (int i = 0; i < spec.n2; ++i) av[i] = a[i];
  Vec<double> nu = bch_nu(spec, av);
  std::vector<double> nv(spec.n2);
  for (int i = 0; i < spec.n2; ++i) nv[i] = nu[i];
  return weight_w(spec, nv) * nu_jacobian_det(spec, a);
}

/// Modular function Delta_M(e(a)) = |det Ad(e(a))|_m|^{-1}, the product
/// of the one-parameter adjoint factors in basis order.
inline double modular_delta(const GroupSpec& spec, const std::vector<double>& a) {
  const int n2 = spec.n2;
  if (spec.m_commutative()) return 1.0;
  Mat<double> ad_prod = Mat<double>::identity(n2);
  for (int k = 0; k < n2; ++k) {
    Mat<double> m = ad_m_basis_on_m(spec, k);
    m *= a[k];
    ad_prod = ad_prod * expm(m);
  }
  return 1.0 / std::abs(det(ad_prod));
}

/// Theta_lambda(xi) = |det Jac [beta_J|_O]^{-1}(xi)|, evaluated by
/// inverting beta_J on the certified box and taking the reciprocal
/// forward Jacobian determinant at the preimage.
inline double theta_density(const BetaMap& beta, const BetaInverter& inv,
                            const std::vector<double>& xi) {
  std::vector<double> a = inv.invert(xi);
  double d = beta.abs_det_jacobian(a);
  if (d <= 0) throw std::domain_error("theta_density: vanishing Jacobian at preimage");
  return 1.0 / d;
}

/// Psi_J(xi) dxi = d mu_M(Phi^{-1}(xi)); computed as rho(a) Theta(xi)
/// at a = beta^{-1}(xi), the chain-rule composition of the certified
/// densities.
inline double psi_density(const GroupSpec& spec, const BetaMap& beta,
                          const BetaInverter& inv, const std::vector<double>& xi) {
  std::vector<double> a = inv.invert(xi);
  double d = beta.abs_det_jacobian(a);
  if (d <= 0) throw std::domain_error("psi_density: vanishing Jacobian at preimage");
  return rho(spec, a) / d;
}

/// Forward evaluation of Psi along the chart: Psi(beta(a)) for a in the
/// certified box. Equals rho(a)/|det Jac beta(a)| and avoids the Newton
/// inversion in quadrature loops.
inline double psi_on_chart(const GroupSpec& spec, const BetaMap& beta,
                           const std::vector<double>& a) {
  double d = beta.abs_det_jacobian(a);
  if (d <= 0) throw std::domain_error("psi_on_chart: vanishing Jacobian");
  return rho(spec, a) / d;
}

/// The explicit partial-derivative route of the smooth-frame density:
/// d(xi) = |det d t / d xi| with t(xi) = nu(e^{-1}(Phi^{-1}(xi))), and
/// Psi = w(t(xi)) d(xi). Retained as a cross-check of psi_density, not
/// as a code path; the two agree by the chain rule.
inline double psi_density_dfunc(const GroupSpec& spec, const BetaMap& beta,
                                const BetaInverter& inv,
                                const std::vector<double>& xi) {
  const int n2 = spec.n2;
  std::vector<double> a = inv.invert(xi);
  Mat<double> jac_beta = beta.jacobian_at(a);
  Mat<double> d_t(n2, n2);
  if (spec.m_commutative()) {
    d_t = inverse(jac_beta);
  } else {
    Mat<double> jac_nu =
        jacobian([&](const Vec<dual>& x) { return bch_nu(spec, x); }, a);
    d_t = jac_nu * inverse(jac_beta);
  }
  Vec<double> av(n2);
  for (int i = 0; i < n2; ++i) av[i] = a[i];
  Vec<double> t = bch_nu(spec, av);
  std::vector<double> tv(n2);
  for (int i = 0; i < n2; ++i) tv[i] = t[i];
  return weight_w(spec, tv) * std::abs(det(d_t));
}

}  // namespace solvframe

#endif
