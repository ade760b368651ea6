// solvframe: construct and numerically verify (tight) frames generated
// by induced representations of completely solvable Lie groups.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "solvframe/solvframe.hpp"

namespace {

using namespace solvframe;

struct CliArgs {
  std::string command;
  std::string example;
  std::string config;
  std::string J_str;
  double eps_max = 1.0;
  std::size_t grid_n = 64;
  int k_mod = 0;
  double tol = 1e-2;
  std::string lattice_override;
  double bump_theta = 0.5;
  std::uint64_t seed = 1234;
  std::string out_path;
  std::string dump_coeffs;
  std::string dump_density;
  bool no_timings = false;
};

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoi(item));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

int run(const CliArgs& args) {
  if (args.command == "list-examples") {
    for (const auto& n : builtin_names()) std::cout << n << "\n";
    return exit_ok;
  }

  std::shared_ptr<const GroupSpec> spec;
  try {
    if (!args.example.empty())
      spec = std::make_shared<GroupSpec>(builtin_spec(args.example));
    else if (!args.config.empty())
      spec = std::make_shared<GroupSpec>(parse_group_config(args.config));
    else {
      std::cerr << "error: provide --example NAME or --config PATH\n";
      return exit_input_error;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_input_error;
  }

  PipelineOptions opt;
  try {
    opt.J = parse_int_list(args.J_str);
    opt.lattice_override = parse_double_list(args.lattice_override);
  } catch (const std::exception& e) {
    std::cerr << "error: malformed list option: " << e.what() << "\n";
    return exit_input_error;
  }
  opt.eps_max = args.eps_max;
  opt.grid_n = args.grid_n;
  opt.k_mod = args.k_mod;
  opt.tol = args.tol;
  opt.bump_theta = args.bump_theta;
  opt.seed = args.seed;
  opt.with_timings = !args.no_timings;
  opt.dump_coeffs_path = args.dump_coeffs;
  opt.dump_density_path = args.dump_density;

  PipelineResult res = run_pipeline(spec, args.command, opt);

  std::string text = res.report.dump(2);
  if (!args.out_path.empty()) {
    std::ofstream out(args.out_path);
    if (!out) {
      std::cerr << "error: cannot write report to '" << args.out_path << "'\n";
      return exit_input_error;
    }
    out << text << "\n";
  } else {
    std::cout << text << "\n";
  }
  if (res.exit_code != exit_ok && res.report.contains("failure_stage"))
    std::cerr << "stage '" << res.report["failure_stage"].get<std::string>()
              << "' failed\n";
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "solvframe: orbital-data / lattice / density pipeline for frames of "
      "completely solvable Lie groups"};
  app.require_subcommand(1);

  CliArgs args;
  const std::vector<std::string> commands = {"validate", "orbit",  "certify",
                                             "lattice",  "tight",  "smooth",
                                             "full",     "list-examples"};
  for (const auto& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    if (name == "list-examples") continue;
    sub->add_option("--example", args.example, "builtin example name");
    sub->add_option("--config", args.config, "path to a GroupSpec JSON file");
    sub->add_option("config_pos", args.config, "path to a GroupSpec JSON file");
    sub->add_option("--J", args.J_str, "index tuple override, e.g. \"2\" or \"2,3\"");
    sub->add_option("--eps-max", args.eps_max, "largest box size to certify");
    sub->add_option("--grid-n", args.grid_n, "certification grid resolution per axis");
    sub->add_option("--kmod", args.k_mod, "modulation truncation (0: auto)");
    sub->add_option("--tol", args.tol, "verification tolerance");
    sub->add_option("--lattice-override", args.lattice_override,
                    "diagonal entries of L, e.g. \"0.5\" or \"0.5,0.25\"");
    sub->add_option("--bump-theta", args.bump_theta,
                    "smooth bump support fraction of eps/2");
    sub->add_option("--seed", args.seed, "test-function seed");
    sub->add_option("--out", args.out_path, "write the JSON report here");
    sub->add_option("--dump-coeffs", args.dump_coeffs,
                    "write a coefficient CSV for the first test function");
    sub->add_option("--dump-density", args.dump_density,
                    "write beta/rho/Theta/Psi axis profiles as CSV");
    sub->add_flag("--no-timings", args.no_timings,
                  "omit wall-clock timings from the report");
  }

  CLI11_PARSE(app, argc, argv);
  args.command = app.get_subcommands().front()->get_name();
  try {
    return run(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return solvframe::exit_input_error;
  }
}
