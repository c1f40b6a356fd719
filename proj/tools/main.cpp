// Command-line front end: exact solver, Monte Carlo simulator, parameter
// sweeps and solver-vs-simulation comparison for the misinformation gossip
// model.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gossip/simulator.hpp"
#include "gossip/solver.hpp"
#include "gossip/sweep.hpp"

namespace {

using nlohmann::json;

struct ParamFlags {
  int n = 10;
  double lambda_e = 1.0;
  double lambda_s = 1.0;
  double lambda = 1.0;
  double p = 0.9;

  gossip::NetworkParams to_params() const {
    gossip::NetworkParams params;
    params.node_count = n;
    params.source_update_rate = lambda_e;
    params.delivery_rate = lambda_s;
    params.gossip_rate = lambda;
    params.mutation_prob = p;
    gossip::validate(params);
    return params;
  }
};

void add_param_flags(CLI::App* cmd, ParamFlags& flags) {
  cmd->add_option("--n", flags.n, "number of user nodes");
  cmd->add_option("--lambda-e", flags.lambda_e, "source self-update rate");
  cmd->add_option("--lambda-s", flags.lambda_s, "total source-to-network rate");
  cmd->add_option("--lambda", flags.lambda, "per-node gossip rate");
  cmd->add_option("--p", flags.p, "mutation probability per gossip transmission");
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open output file '" + out_path + "'");
  out << text;
}

int run_solve(const ParamFlags& flags, bool full, const std::string& out_path) {
  const gossip::NetworkParams params = flags.to_params();
  const gossip::AnalyticalSolution solution = gossip::solve(params);
  json out;
  out["params"] = gossip::params_to_json(params);
  out["F"] = solution.truth_fraction;
  out["x1"] = solution.age_diverges ? json() : json(solution.expected_age);
  out["age_diverges"] = solution.age_diverges;
  if (full) {
    out["c_vector"] = solution.fresh_truth;
    out["v_vector"] = solution.expected_min_age;
    out["t_table"] = gossip::triangular_to_json(solution.truth_table);
  }
  emit(out.dump(2) + "\n", out_path);
  if (solution.age_diverges) {
    std::cerr << "note: version age diverges (lambda_s = 0)\n";
  }
  return 0;
}

int run_simulate(const ParamFlags& flags, const gossip::SweepSim& sim, bool verbose,
                 const std::string& out_path) {
  gossip::SimConfig config;
  config.params = flags.to_params();
  config.horizon = sim.horizon;
  config.burn_in_fraction = sim.burn_in_fraction;
  config.seed = sim.seed;
  config.replications = sim.replications;
  if (verbose) {
    // Trajectory log: one line per applied event, node ids 1-based with the
    // source as node 0.
    config.observer = [n = config.params.node_count](const gossip::Event& ev,
                                                     const gossip::NetworkState& state) {
      int from = 0, to = 0;
      bool honest = true;
      if (ev.kind == gossip::EventKind::kSourceDelivery) {
        to = ev.receiver + 1;
      } else if (ev.kind == gossip::EventKind::kGossip) {
        from = ev.sender + 1;
        to = ev.receiver + 1;
        honest = ev.honest;
      }
      std::fprintf(stderr, "%.6f,%s,%d,%d,%d,%.6f,%llu\n", ev.time, gossip::to_string(ev.kind),
                   from, to, honest ? 1 : 0, gossip::truth_fraction(state),
                   static_cast<unsigned long long>(state.nodes.front().version_age));
    };
  }
  const gossip::EstimateReport report = gossip::simulate(config);
  json out;
  out["params"] = gossip::params_to_json(config.params);
  out["horizon"] = config.horizon;
  out["burn_in_fraction"] = config.burn_in_fraction;
  out["seed"] = config.seed;
  out["replications"] = config.replications;
  out["F_hat"] = report.truth_fraction_mean;
  out["F_ci95"] = report.truth_fraction_ci95;
  out["x1_hat"] = report.age_mean;
  out["x1_ci95"] = report.age_ci95;
  out["event_count"] = report.event_count;
  out["elapsed_sim_time"] = report.elapsed_sim_time;
  emit(out.dump(2) + "\n", out_path);
  return 0;
}

int run_sweep_cmd(const std::string& spec_path, const std::string& out_path,
                  const std::string& format, int workers, bool timing) {
  const gossip::SweepSpec spec = gossip::load_sweep_spec(spec_path);
  const std::vector<gossip::SweepRow> rows = gossip::run_sweep(spec, workers);
  if (format == "json") {
    emit(gossip::sweep_to_json(spec, rows, timing).dump(2) + "\n", out_path);
  } else {
    std::ostringstream csv;
    gossip::write_sweep_csv(csv, rows, timing);
    emit(csv.str(), out_path);
  }
  return 0;
}

int run_compare(const std::string& spec_path, const gossip::CompareTolerance& tolerance,
                int workers, bool unbalanced_solver) {
  gossip::SweepSpec spec = gossip::load_sweep_spec(spec_path);
  if (!spec.sim) {
    throw std::runtime_error("compare requires a spec with a non-null \"sim\" section");
  }
  std::vector<gossip::SweepRow> rows = gossip::run_sweep(spec, workers);
  if (unbalanced_solver) {
    // Negative control: replace the analytical side with the unbalanced
    // truth-table variant. A healthy pipeline must now report mismatches.
    for (gossip::SweepRow& row : rows) {
      const gossip::NetworkParams params =
          gossip::substitute(spec.base, spec.parameter, row.value);
      gossip::TruthTableOptions options;
      options.square_corruption_count = true;
      row.analytical.truth_table =
          gossip::solve_truth_table(params, row.analytical.fresh_truth, options);
      row.analytical.truth_fraction = row.analytical.truth_table(1, 0);
    }
  }
  const std::vector<gossip::PointVerdict> verdicts = gossip::compare_rows(rows, tolerance);
  std::size_t passed = 0;
  for (const gossip::PointVerdict& v : verdicts) {
    std::printf("point %s=%g: F |diff|=%.6g tol=%.6g", gossip::to_string(spec.parameter),
                v.value, v.truth_diff, v.truth_tolerance);
    if (v.age_checked) {
      std::printf("; x1 |diff|=%.6g tol=%.6g", v.age_diff, v.age_tolerance);
    } else {
      std::printf("; x1 skipped (diverges)");
    }
    std::printf(" -> %s\n", v.pass ? "PASS" : "FAIL");
    passed += v.pass;
  }
  std::printf("overall: %zu/%zu points pass\n", passed, verdicts.size());
  return passed == verdicts.size() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"misinformation spread in an age-based gossip network: exact solver and simulator"};
  app.require_subcommand(1);

  ParamFlags solve_flags;
  bool solve_full = false;
  std::string solve_out;
  CLI::App* solve_cmd = app.add_subcommand("solve", "evaluate the stationary recursions exactly");
  add_param_flags(solve_cmd, solve_flags);
  solve_cmd->add_flag("--full", solve_full, "include c_vector, v_vector and t_table");
  solve_cmd->add_option("--out", solve_out, "write JSON here instead of stdout");

  ParamFlags sim_flags;
  gossip::SweepSim sim_opts;
  bool sim_verbose = false;
  std::string sim_out;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "run the discrete-event simulation");
  add_param_flags(sim_cmd, sim_flags);
  sim_cmd->add_option("--horizon", sim_opts.horizon, "total simulated time");
  sim_cmd->add_option("--burn-in", sim_opts.burn_in_fraction, "discarded prefix fraction");
  sim_cmd->add_option("--seed", sim_opts.seed, "RNG seed");
  sim_cmd->add_option("--replications", sim_opts.replications, "independent trajectories");
  sim_cmd->add_flag("--verbose", sim_verbose, "stream a trajectory log to stderr");
  sim_cmd->add_option("--out", sim_out, "write the report here instead of stdout");

  std::string sweep_spec, sweep_out, sweep_format = "csv";
  int sweep_workers = 0;
  bool sweep_timing = false;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep from a JSON spec");
  sweep_cmd->add_option("spec", sweep_spec, "sweep spec file")->required();
  sweep_cmd->add_option("--out", sweep_out, "output path (default stdout)");
  sweep_cmd->add_option("--format", sweep_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  sweep_cmd->add_option("--workers", sweep_workers, "parallel sweep points (0 = all cores)");
  sweep_cmd->add_flag("--timing", sweep_timing, "fill the wall_seconds column (not reproducible)");

  std::string compare_spec;
  gossip::CompareTolerance tolerance;
  int compare_workers = 0;
  bool compare_unbalanced = false;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "check simulation against the solver point by point");
  compare_cmd->add_option("spec", compare_spec, "sweep spec file with sim enabled")->required();
  compare_cmd->add_option("--z", tolerance.ci_multiplier, "CI multiplier");
  compare_cmd->add_option("--f-floor", tolerance.truth_fraction_floor, "absolute slack on F");
  compare_cmd->add_option("--x1-rel-floor", tolerance.age_relative_floor, "relative slack on x1");
  compare_cmd->add_option("--workers", compare_workers, "parallel sweep points (0 = all cores)");
  compare_cmd
      ->add_flag("--unbalanced-solver", compare_unbalanced,
                 "negative control: compare against the unbalanced truth-table variant")
      ->group("validation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve_cmd->parsed()) return run_solve(solve_flags, solve_full, solve_out);
    if (sim_cmd->parsed()) return run_simulate(sim_flags, sim_opts, sim_verbose, sim_out);
    if (sweep_cmd->parsed()) {
      return run_sweep_cmd(sweep_spec, sweep_out, sweep_format, sweep_workers, sweep_timing);
    }
    if (compare_cmd->parsed()) {
      return run_compare(compare_spec, tolerance, compare_workers, compare_unbalanced);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
