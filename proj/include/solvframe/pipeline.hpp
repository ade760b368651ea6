#ifndef SOLVFRAME_PIPELINE_HPP
#define SOLVFRAME_PIPELINE_HPP

#include <chrono>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include "examplegroups.hpp"
#include "frames.hpp"
#include "io.hpp"

namespace solvframe {

/// Exit codes shared by the CLI and the pipeline driver.
enum ExitCode : int {
  exit_ok = 0,
  exit_verification_failed = 1,
  exit_input_error = 2,
  exit_certification_failed = 3,
};

struct PipelineOptions {
  std::vector<int> J;                     // empty: auto-select
  double eps_max = 1.0;
  std::size_t grid_n = 64;
  std::size_t delta_grid_n = 256;
  int k_mod = 0;                          // 0: dimension-scaled default
  double tol = 1e-2;
  std::vector<double> lattice_override;   // diagonal entries of L
  double bump_theta = 0.5;
  std::uint64_t seed = 1234;
  int n_test_functions = 5;
  int tiles_per_axis = 0;                 // 0: dimension-scaled default
  int smooth_k_mod = 0;                   // 0: dimension-scaled default
  double smooth_identity_tol = 1e-3;
  std::size_t tiling_samples = 2000;
  bool with_timings = true;
  std::string dump_coeffs_path;
  std::string dump_density_path;
};

inline int default_k_mod(int n2) { return n2 <= 1 ? 24 : (n2 == 2 ? 10 : 4); }
inline int default_smooth_k_mod(int n2) { return n2 <= 1 ? 16 : (n2 == 2 ? 6 : 3); }
inline int default_tiles_per_axis(int n2) { return n2 <= 1 ? 5 : (n2 == 2 ? 3 : 2); }

struct PipelineResult {
  json report;
  int exit_code = exit_ok;
};

namespace pipeline_detail {

class StageTimer {
 public:
  explicit StageTimer(bool enabled) : enabled_(enabled) {}
  template <class F>
  auto run(json& report, const std::string& name, F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    auto done = [&] {
      if (enabled_) {
        auto ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
        report["timings_ms"][name] = ms;
      }
    };
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      done();
    } else {
      auto r = f();
      done();
      return r;
    }
  }

 private:
  bool enabled_;
};

inline void dump_density_csv(const std::string& path, const FrameDesign& d) {
  std::ofstream out(path);
  const GroupSpec& spec = *d.spec;
  const int n2 = spec.n2;
  out << "axis,t";
  for (int j = 0; j < n2; ++j) out << ",beta_" << d.orbital.J[j];
  out << ",rho,theta_density,psi\n";
  const int samples = 201;
  for (int axis = 0; axis < n2; ++axis) {
    for (int i = 0; i < samples; ++i) {
      double t = -d.epsilon() / 2 + d.epsilon() * double(i) / double(samples - 1);
      std::vector<double> a(n2, 0.0);
      a[axis] = t;
      auto xi = d.beta->eval(a);
      double jac = d.beta->abs_det_jacobian(a);
      double rh = rho(spec, a);
      out << axis + 1 << "," << t;
      for (int j = 0; j < n2; ++j) out << "," << xi[j];
      out << "," << rh << "," << 1.0 / jac << "," << rh / jac << "\n";
    }
  }
}

inline void dump_coeffs_csv(const std::string& path, const CoefficientTable& t) {
  std::ofstream out(path);
  out << "tile,k,re,im,abs2\n";
  for (std::size_t g = 0; g < t.gammas.size(); ++g)
    for (std::size_t f = 0; f < t.k_list.size(); ++f) {
      out << "\"";
      for (std::size_t j = 0; j < t.gammas[g].size(); ++j)
        out << (j ? " " : "") << t.gammas[g][j];
      out << "\",\"";
      for (std::size_t j = 0; j < t.k_list[f].size(); ++j)
        out << (j ? " " : "") << t.k_list[f][j];
      const cxd& c = t.coeffs[g][f];
      out << "\"," << c.real() << "," << c.imag() << "," << std::norm(c) << "\n";
    }
}

}  // namespace pipeline_detail

/// Runs the requested stage chain on the spec, assembling a JSON report.
/// Stages: validate < orbit < certify < lattice < tight/smooth < full.
inline PipelineResult run_pipeline(std::shared_ptr<const GroupSpec> spec,
                                   const std::string& command,
                                   const PipelineOptions& opt = {}) {
  PipelineResult result;
  json& rep = result.report;
  rep["command"] = command;
  rep["spec"] = group_spec_to_json(*spec);
  rep["seed"] = opt.seed;
  pipeline_detail::StageTimer timer(opt.with_timings);

  const bool want_orbit = command != "validate";
  const bool want_certify = want_orbit && command != "orbit";
  const bool want_lattice = want_certify && command != "certify";
  const bool want_tight = command == "tight" || command == "full";
  const bool want_smooth = command == "smooth" || command == "full";

  // validate
  ValidationReport val = timer.run(rep, "validate", [&] { return validate(*spec); });
  {
    json checks = json::array();
    for (const auto& c : val.checks)
      checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    rep["validation"] = {{"checks", checks},
                         {"warnings", val.warnings},
                         {"passed", val.all_passed()}};
  }
  if (!val.all_passed()) {
    rep["failure_stage"] = "validate";
    result.exit_code = exit_input_error;
    return result;
  }
  if (!want_orbit) return result;

  // orbit
  FrameDesign design;
  try {
    DesignOptions dopt;
    dopt.J = opt.J;
    dopt.eps_max = opt.eps_max;
    dopt.grid_n = opt.grid_n;
    dopt.delta_grid_n = opt.delta_grid_n;
    if (!opt.lattice_override.empty()) {
      const int n2 = spec->n2;
      if (static_cast<int>(opt.lattice_override.size()) != n2)
        throw ConfigError("lattice override needs one diagonal entry per m-axis");
      Mat<double> L(n2, n2);
      for (int i = 0; i < n2; ++i) L(i, i) = opt.lattice_override[i];
      dopt.lattice_override = L;
    }
    if (!want_certify) {
      // orbit stage only: no epsilon certification required
      OrbitalData data = timer.run(rep, "orbit", [&] {
        return opt.J.empty() ? orbital_data(*spec) : orbital_data_with_J(*spec, opt.J);
      });
      rep["orbital"] = orbital_data_to_json(data);
      return result;
    }
    design = timer.run(rep, "design", [&] { return make_frame_design(spec, dopt); });
  } catch (const CertificationError& e) {
    rep["failure_stage"] = "certify";
    rep["error"] = e.what();
    result.exit_code = exit_certification_failed;
    return result;
  } catch (const std::domain_error& e) {
    rep["failure_stage"] = "orbit";
    rep["error"] = e.what();
    result.exit_code = exit_input_error;
    return result;
  } catch (const ConfigError& e) {
    rep["failure_stage"] = "options";
    rep["error"] = e.what();
    result.exit_code = exit_input_error;
    return result;
  }
  rep["orbital"] = orbital_data_to_json(design.orbital);
  rep["certificate"] = {{"epsilon", design.cert.epsilon},
                        {"grid_n", design.cert.grid_n},
                        {"min_abs_jac_det", design.cert.min_abs_jac_det},
                        {"injectivity_margin", design.cert.injectivity_margin}};
  if (command == "certify") return result;

  // lattice + packing + tiling
  {
    json lat;
    lat["delta"] = design.delta.grid_max;
    lat["delta_inflated"] = design.delta.inflated;
    json Lrows = json::array();
    for (std::size_t i = 0; i < design.lattice.L.rows(); ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < design.lattice.L.cols(); ++j)
        row.push_back(design.lattice.L(i, j));
      Lrows.push_back(row);
    }
    lat["L"] = Lrows;
    lat["frame_bound_prediction"] = design.lattice.frame_bound_prediction;
    PackingReport pk = timer.run(rep, "packing", [&] {
      return check_packing(*design.beta, design.epsilon(), design.lattice);
    });
    lat["packing"] = {{"passed", pk.passed},
                      {"min_slack", pk.min_slack},
                      {"worst_overlap", pk.worst_overlap}};
    TilingReport tl = timer.run(rep, "tiling", [&] {
      return tiling_check(*spec, design.epsilon(), static_cast<int>(opt.tiling_samples),
                          opt.seed);
    });
    lat["tiling"] = {{"samples", tl.samples},
                     {"failures", tl.failures},
                     {"worst_residual", tl.worst_residual}};
    rep["lattice"] = lat;
    if (!pk.passed || !tl.passed()) {
      rep["failure_stage"] = "lattice";
      result.exit_code = exit_verification_failed;
      return result;
    }
  }
  if (!want_tight && !want_smooth) return result;

  const int n2 = spec->n2;
  const int k_mod = opt.k_mod > 0 ? opt.k_mod : default_k_mod(n2);
  const int tiles_axis =
      opt.tiles_per_axis > 0 ? opt.tiles_per_axis : default_tiles_per_axis(n2);

  if (want_tight) {
    Generator gen = timer.run(rep, "tight_generator", [&] { return tight_generator(design); });
    rep["tight"]["generator_norm_squared"] = gen.norm_squared;
    auto tfs = make_test_functions(*spec, design.epsilon(), opt.n_test_functions,
                                   tiles_axis, opt.seed, true);
    std::size_t order = required_order(design, k_mod);
    rep["tight"]["quadrature_order"] = order;
    rep["tight"]["k_mod"] = k_mod;
    std::vector<GridFunction> hs;
    for (const auto& tf : tfs)
      hs.push_back(sample_grid_function(*spec, design.epsilon(), order, tf.tiles, tf.eval));
    TightReport tr = timer.run(rep, "verify_tight", [&] {
      return verify_tight(design, gen, hs, k_mod, opt.tol);
    });
    json cases = json::array();
    for (const auto& c : tr.cases)
      cases.push_back({{"norm_squared", c.norm_squared},
                       {"energy", c.energy},
                       {"ratio", c.ratio},
                       {"tail_ratio", c.tail_ratio},
                       {"passed", c.passed}});
    rep["tight"]["frame_bound"] = tr.frame_bound;
    rep["tight"]["cases"] = cases;
    rep["tight"]["ratio_spread"] = tr.ratio_spread;
    rep["tight"]["parseval_after_rescale"] = tr.parseval_after_rescale;
    rep["tight"]["passed"] = tr.passed;
    if (!opt.dump_coeffs_path.empty() && !hs.empty()) {
      CoefficientTable tb = frame_coefficients(design, hs.front(), gen, k_mod);
      pipeline_detail::dump_coeffs_csv(opt.dump_coeffs_path, tb);
    }
    if (!tr.passed) {
      rep["failure_stage"] = "tight";
      result.exit_code = exit_verification_failed;
      return result;
    }
  }

  if (want_smooth) {
    try {
      Generator bump = timer.run(rep, "smooth_generator",
                                 [&] { return smooth_generator(design, opt.bump_theta); });
      DensifyResult dres = timer.run(rep, "densify", [&] {
        return densify_gamma_M(design, bump, design.epsilon());
      });
      rep["smooth"]["spacing"] = dres.spacing;
      rep["smooth"]["lower"] = dres.lower;
      rep["smooth"]["upper"] = dres.upper;
      rep["smooth"]["refinements"] = dres.refinements;
      if (!dres.accepted) {
        rep["failure_stage"] = "smooth";
        rep["error"] = "densify_gamma_M: no spacing with positive lower bound";
        result.exit_code = exit_verification_failed;
        return result;
      }
      const int smooth_k = opt.smooth_k_mod > 0 ? opt.smooth_k_mod : default_smooth_k_mod(n2);
      auto tfs = make_test_functions(*spec, design.epsilon(), opt.n_test_functions,
                                     std::min(tiles_axis, 3), opt.seed + 1, true);
      std::size_t order = required_order(design, smooth_k, opt.bump_theta);
      rep["smooth"]["k_mod"] = smooth_k;
      rep["smooth"]["quadrature_order"] = order;
      SmoothReport sr = timer.run(rep, "verify_smooth", [&] {
        return verify_smooth_frame(design, bump, dres.spacing, dres.lower, dres.upper,
                                   tfs, smooth_k, opt.tol, opt.smooth_identity_tol,
                                   order);
      });
      json cases = json::array();
      for (const auto& c : sr.cases)
        cases.push_back({{"norm_squared", c.norm_squared},
                         {"energy", c.energy},
                         {"ratio", c.ratio},
                         {"identity_rel_err", c.identity_rel_err},
                         {"sandwich_ok", c.sandwich_ok}});
      rep["smooth"]["cases"] = cases;
      rep["smooth"]["passed"] = sr.passed;
      if (!sr.passed) {
        rep["failure_stage"] = "smooth";
        result.exit_code = exit_verification_failed;
        return result;
      }
    } catch (const std::domain_error& e) {
      rep["failure_stage"] = "smooth";
      rep["error"] = e.what();
      result.exit_code = exit_verification_failed;
      return result;
    }
  }

  if (!opt.dump_density_path.empty())
    pipeline_detail::dump_density_csv(opt.dump_density_path, design);
  return result;
}

}  // namespace solvframe

#endif
