#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gpeberry/config.hpp"
#include "gpeberry/runs.hpp"
#include "gpeberry/verify.hpp"

namespace {

using namespace gpeberry;

enum ExitCode { ok = 0, verification_failed = 1, config_error = 2, numerical_abort = 3 };

struct Overrides {
  std::string config;
  std::optional<double> period_T;
  std::optional<double> kappa_tilde;
  std::optional<double> hbar;
  std::optional<double> dt;
  std::optional<int> n;
  std::optional<std::size_t> n_points;
  std::string out;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("-c,--config", o.config, "run configuration (JSON)")->required();
  sub->add_option("--T", o.period_T, "override period_T");
  sub->add_option("--kappa-tilde", o.kappa_tilde, "override kappa_tilde");
  sub->add_option("--hbar", o.hbar, "override hbar");
  sub->add_option("--dt", o.dt, "override the step of the command's integrator");
  sub->add_option("--n", o.n, "single quantum number (replaces n_list)");
  sub->add_option("--n-points", o.n_points, "fix the auto-sized grid to this many points");
  sub->add_option("-o,--out", o.out, "output file (default stdout)");
}

RunConfig load(const Overrides& o, const std::string& command) {
  json j = read_json_file(o.config);
  RunConfig c = parse_config(j);
  if (o.hbar || o.kappa_tilde)
    c.scales = PhysicalScales::unit_norm(o.hbar.value_or(c.scales.hbar), o.kappa_tilde.value_or(c.scales.kappa_tilde));
  if (o.period_T) {
    if (!(*o.period_T > 0.0)) throw ConfigError("--T must be positive");
    c.path = c.path.with_period(*o.period_T);
  }
  if (o.n) {
    if (*o.n < 0) throw ConfigError("--n must be non-negative");
    c.n_list = {*o.n};
    c.n_max = std::max(c.n_max, *o.n);
  }
  if (o.n_points) {
    if (*o.n_points < 16) throw ConfigError("--n-points must be at least 16");
    c.grid_options.min_points = c.grid_options.max_points = *o.n_points;
  }
  if (o.dt) {
    if (!(*o.dt > 0.0)) throw ConfigError("--dt must be positive");
    if (command == "hes") c.hes.dt = *o.dt;
    else if (command == "germ") c.germ.dt = *o.dt;
    else c.propagator.dt = *o.dt;
  }
  if (!c.golden.empty() && std::filesystem::path(c.golden).is_relative())
    c.golden = (std::filesystem::path(o.config).parent_path() / c.golden).string();
  return c;
}

// Writes to the --out file or stdout.
template <typename F>
void emit(const std::string& out, F&& write) {
  if (out.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(out);
  if (!f) throw ConfigError("cannot open output file '" + out + "'");
  write(f);
}

void print_json(std::ostream& os, const json& j) { os << j.dump(2) << '\n'; }

int cmd_spectrum(const RunConfig& c, const Overrides& o) {
  const auto r = run_spectrum(c);
  emit(o.out, [&](std::ostream& os) {
    os.precision(17);
    os << "n,E_closed_form,rayleigh_quotient,residual\n";
    for (const auto& row : r.rows) os << row.n << ',' << row.energy << ',' << row.rayleigh << ',' << row.residual << '\n';
  });
  return ok;
}

int cmd_hes(const RunConfig& c, const Overrides& o) {
  const auto tr = run_hes(c);
  emit(o.out, [&](std::ostream& os) { write_hes_csv(os, tr); });
  if (tr.below_uncertainty_bound) std::cerr << "warning: initial moments violate the uncertainty bound\n";
  return ok;
}

int cmd_germ(const RunConfig& c, const Overrides& o) {
  const auto tr = run_germ(c);
  emit(o.out, [&](std::ostream& os) { write_germ_csv(os, tr); });
  return ok;
}

int cmd_berry(const RunConfig& c, const Overrides& o) {
  const json r = run_berry(c);
  emit(o.out, [&](std::ostream& os) { print_json(os, r); });
  return ok;
}

int cmd_hannay(const RunConfig& c, const Overrides& o) {
  const json r = run_hannay(c);
  emit(o.out, [&](std::ostream& os) { print_json(os, r); });
  return ok;
}

int cmd_propagate(const RunConfig& c, const Overrides& o, const std::string& wf_bin, const std::string& wf_csv) {
  const int n = c.n_list.front();
  const LoopPropagation lp = propagate_loop(c, n, c.period(), true);
  json manifest{{"config_file", o.config},
                {"path", to_json(c.path)},
                {"hbar", c.scales.hbar},
                {"kappa_tilde", c.scales.kappa_tilde},
                {"grid", to_json(lp.grid)},
                {"propagator",
                 {{"dt", c.propagator.dt},
                  {"scheme", scheme_name(c.propagator.scheme)},
                  {"self_consistency_iters", c.propagator.self_consistency_iters},
                  {"energy_shift", c.propagator.energy_shift}}},
                {"seeds", json::array()},
                {"diagnostics", to_json(lp.diagnostics)},
                {"phase", phase_report(lp, c.n_samples)}};
  emit(o.out, [&](std::ostream& os) { print_json(os, manifest); });
  if (lp.failure) {
    std::cerr << *lp.failure << '\n';
    return numerical_abort;
  }
  if (!wf_bin.empty()) {
    std::ofstream f(wf_bin, std::ios::binary);
    if (!f) throw ConfigError("cannot open '" + wf_bin + "'");
    write_wavefunction_binary(f, lp.final_state);
  }
  if (!wf_csv.empty()) {
    std::ofstream f(wf_csv);
    if (!f) throw ConfigError("cannot open '" + wf_csv + "'");
    write_wavefunction_csv(f, lp.final_state);
  }
  return ok;
}

int cmd_verify(const RunConfig& c, const Overrides& o, const std::string& write_golden) {
  if (!write_golden.empty()) {
    std::ofstream f(write_golden);
    if (!f) throw ConfigError("cannot open '" + write_golden + "'");
    f << golden_record(c).dump() << '\n';
  }
  const auto checks = run_verify(c);
  json j{{"passed", all_passed(checks)}, {"checks", json::array()}};
  for (const auto& ch : checks) j["checks"].push_back(to_json(ch));
  emit(o.out, [&](std::ostream& os) { print_json(os, j); });
  return all_passed(checks) ? ok : verification_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Berry phases of the nonlocal Gross-Pitaevskii equation with a quadratic kernel"};
  app.require_subcommand(1);
  Overrides o;
  std::string wf_bin, wf_csv, write_golden;
  const char* names[] = {"spectrum", "hes", "germ", "berry", "hannay", "propagate", "verify"};
  const char* helps[] = {"instantaneous spectrum table (CSV)",
                         "moment (Hamilton-Ehrenfest) trajectory (CSV)",
                         "complex germ trajectory (CSV)",
                         "closed-form, surface and propagated Berry phases (JSON)",
                         "Hannay angle and its nonlinear correction (JSON)",
                         "propagate an eigenstate once around the loop (JSON manifest)",
                         "run the invariant suites (JSON, exit 1 on failure)"};
  for (int i = 0; i < 7; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], helps[i]);
    add_common(sub, o);
    if (std::string(names[i]) == "propagate") {
      sub->add_option("--wavefunction", wf_bin, "write the final state (binary)");
      sub->add_option("--wavefunction-csv", wf_csv, "write the final state (CSV)");
    }
    if (std::string(names[i]) == "verify") sub->add_option("--write-golden", write_golden, "write the golden record");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : config_error;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    const RunConfig c = load(o, cmd);
    if (cmd == "spectrum") return cmd_spectrum(c, o);
    if (cmd == "hes") return cmd_hes(c, o);
    if (cmd == "germ") return cmd_germ(c, o);
    if (cmd == "berry") return cmd_berry(c, o);
    if (cmd == "hannay") return cmd_hannay(c, o);
    if (cmd == "propagate") return cmd_propagate(c, o, wf_bin, wf_csv);
    return cmd_verify(c, o, write_golden);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const Error& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return numerical_abort;
  }
}
