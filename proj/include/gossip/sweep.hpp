#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "gossip/params.hpp"
#include "gossip/simulator.hpp"
#include "gossip/solver.hpp"

namespace gossip {

enum class SweptParameter { kNodeCount, kSourceUpdateRate, kDeliveryRate, kGossipRate, kMutationProb };

inline const char* to_string(SweptParameter parameter) {
  switch (parameter) {
    case SweptParameter::kNodeCount: return "n";
    case SweptParameter::kSourceUpdateRate: return "lambda_e";
    case SweptParameter::kDeliveryRate: return "lambda_s";
    case SweptParameter::kGossipRate: return "lambda";
    case SweptParameter::kMutationProb: return "p";
  }
  return "?";
}

inline SweptParameter parse_swept_parameter(const std::string& name) {
  if (name == "n") return SweptParameter::kNodeCount;
  if (name == "lambda_e") return SweptParameter::kSourceUpdateRate;
  if (name == "lambda_s") return SweptParameter::kDeliveryRate;
  if (name == "lambda") return SweptParameter::kGossipRate;
  if (name == "p") return SweptParameter::kMutationProb;
  throw std::invalid_argument("unknown sweep parameter '" + name + "'");
}

struct SweepSim {
  double horizon = 5e5;
  double burn_in_fraction = 0.1;
  std::uint64_t seed = 0;
  int replications = 1;
};

struct SweepSpec {
  NetworkParams base;
  SweptParameter parameter = SweptParameter::kGossipRate;
  std::vector<double> values;
  std::optional<SweepSim> sim;
  bool want_c_vector = false;
  bool want_v_vector = false;
  bool want_t_table = false;
};

inline NetworkParams substitute(const NetworkParams& base, SweptParameter parameter, double value) {
  NetworkParams params = base;
  switch (parameter) {
    case SweptParameter::kNodeCount: {
      if (!(value >= 1.0) || value != std::floor(value)) {
        throw std::invalid_argument("swept n values must be positive integers");
      }
      params.node_count = static_cast<int>(value);
      break;
    }
    case SweptParameter::kSourceUpdateRate: params.source_update_rate = value; break;
    case SweptParameter::kDeliveryRate: params.delivery_rate = value; break;
    case SweptParameter::kGossipRate: params.gossip_rate = value; break;
    case SweptParameter::kMutationProb: params.mutation_prob = value; break;
  }
  return params;
}

inline NetworkParams params_from_json(const nlohmann::json& j) {
  NetworkParams params;
  params.node_count = j.at("n").get<int>();
  params.source_update_rate = j.at("lambda_e").get<double>();
  params.delivery_rate = j.at("lambda_s").get<double>();
  params.gossip_rate = j.at("lambda").get<double>();
  params.mutation_prob = j.at("p").get<double>();
  return params;
}

inline nlohmann::json params_to_json(const NetworkParams& params) {
  return {{"n", params.node_count},
          {"lambda_e", params.source_update_rate},
          {"lambda_s", params.delivery_rate},
          {"lambda", params.gossip_rate},
          {"p", params.mutation_prob}};
}

// Spec file schema:
//   {
//     "base":   {"n": 10, "lambda_e": 1, "lambda_s": 1, "lambda": 1, "p": 0.9},
//     "sweep":  {"parameter": "lambda", "values": [0.01, ...]},
//     "sim":    {"horizon": 5e5, "seed": 1, "replications": 1,
//                "burn_in_fraction": 0.1} | null,
//     "outputs": ["F", "x1", "c_vector", "v_vector", "t_table"]
//   }
// Every value must yield a valid parameter set after substitution.
inline SweepSpec parse_sweep_spec(const nlohmann::json& j) {
  SweepSpec spec;
  spec.base = params_from_json(j.at("base"));
  spec.parameter = parse_swept_parameter(j.at("sweep").at("parameter").get<std::string>());
  spec.values = j.at("sweep").at("values").get<std::vector<double>>();
  if (spec.values.empty()) throw std::invalid_argument("sweep values must be nonempty");
  if (j.contains("sim") && !j.at("sim").is_null()) {
    SweepSim sim;
    const auto& js = j.at("sim");
    if (js.contains("horizon")) sim.horizon = js.at("horizon").get<double>();
    if (js.contains("burn_in_fraction")) sim.burn_in_fraction = js.at("burn_in_fraction").get<double>();
    if (js.contains("seed")) sim.seed = js.at("seed").get<std::uint64_t>();
    if (js.contains("replications")) sim.replications = js.at("replications").get<int>();
    spec.sim = sim;
  }
  if (j.contains("outputs")) {
    for (const auto& out : j.at("outputs")) {
      const auto name = out.get<std::string>();
      if (name == "c_vector") spec.want_c_vector = true;
      else if (name == "v_vector") spec.want_v_vector = true;
      else if (name == "t_table") spec.want_t_table = true;
      else if (name != "F" && name != "x1") {
        throw std::invalid_argument("unknown output '" + name + "'");
      }
    }
  }
  for (double value : spec.values) validate(substitute(spec.base, spec.parameter, value));
  return spec;
}

inline SweepSpec load_sweep_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sweep spec '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
    return parse_sweep_spec(j);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("bad sweep spec '" + path + "': " + e.what());
  }
}

struct SweepRow {
  double value = 0.0;
  AnalyticalSolution analytical;
  std::optional<EstimateReport> sim;
  double wall_seconds = 0.0;
};

// Runs one row: solve always, simulate when the spec asks for it. Every
// point reuses the spec seed (common random numbers across the sweep), so
// results do not depend on worker scheduling and a mutation-probability
// sweep reproduces the age column bit for bit.
inline SweepRow run_sweep_point(const SweepSpec& spec, std::size_t index) {
  const auto started = std::chrono::steady_clock::now();
  SweepRow row;
  row.value = spec.values[index];
  const NetworkParams params = substitute(spec.base, spec.parameter, row.value);
  row.analytical = solve(params);
  if (spec.sim) {
    SimConfig config;
    config.params = params;
    config.horizon = spec.sim->horizon;
    config.burn_in_fraction = spec.sim->burn_in_fraction;
    config.seed = spec.sim->seed;
    config.replications = spec.sim->replications;
    row.sim = simulate(config);
  }
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return row;
}

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, int workers = 0) {
  const std::size_t count = spec.values.size();
  std::vector<SweepRow> rows(count);
  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 1;
  }
  workers = std::min<int>(workers, static_cast<int>(count));

  std::atomic<std::size_t> next{0};
  std::vector<std::string> errors(count);
  auto work = [&] {
    for (;;) {
      const std::size_t index = next.fetch_add(1);
      if (index >= count) return;
      try {
        rows[index] = run_sweep_point(spec, index);
      } catch (const std::exception& e) {
        errors[index] = e.what();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!errors[i].empty()) {
      std::ostringstream message;
      message << "sweep point " << i << " (" << to_string(spec.parameter) << "="
              << spec.values[i] << ") failed: " << errors[i];
      throw std::runtime_error(message.str());
    }
  }
  return rows;
}

// Full round-trip formatting: 17 significant digits survive text -> double.
inline std::string format_full(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

inline constexpr const char* kSweepCsvHeader =
    "value,F_analytical,x1_analytical,F_sim_mean,F_sim_ci95,x1_sim_mean,x1_sim_ci95,"
    "event_count,wall_seconds";

// Fixed column order, '.' decimal point, one row per swept value. Sim cells
// are empty for solver-only sweeps. Wall-clock cells are empty unless
// requested: they are the one field that would break byte-for-byte
// reproducibility of otherwise identical runs.
inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows,
                            bool include_timing = false) {
  out << kSweepCsvHeader << '\n';
  for (const SweepRow& row : rows) {
    out << format_full(row.value) << ',' << format_full(row.analytical.truth_fraction) << ','
        << format_full(row.analytical.expected_age) << ',';
    if (row.sim) {
      out << format_full(row.sim->truth_fraction_mean) << ','
          << format_full(row.sim->truth_fraction_ci95) << ',' << format_full(row.sim->age_mean)
          << ',' << format_full(row.sim->age_ci95) << ',' << row.sim->event_count << ',';
    } else {
      out << ",,,,,";
    }
    if (include_timing) out << format_full(row.wall_seconds);
    out << '\n';
  }
}

inline nlohmann::json triangular_to_json(const TriangularTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (int k = 1; k <= table.size(); ++k) {
    nlohmann::json row = nlohmann::json::array();
    for (int m = 0; k + m <= table.size(); ++m) row.push_back(table(k, m));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json sweep_to_json(const SweepSpec& spec, const std::vector<SweepRow>& rows,
                                    bool include_timing = false) {
  nlohmann::json out;
  out["parameter"] = to_string(spec.parameter);
  out["base"] = params_to_json(spec.base);
  nlohmann::json jrows = nlohmann::json::array();
  for (const SweepRow& row : rows) {
    nlohmann::json jrow;
    jrow["value"] = row.value;
    jrow["F_analytical"] = row.analytical.truth_fraction;
    jrow["x1_analytical"] = row.analytical.age_diverges
                                ? nlohmann::json()
                                : nlohmann::json(row.analytical.expected_age);
    jrow["age_diverges"] = row.analytical.age_diverges;
    if (row.sim) {
      jrow["F_sim_mean"] = row.sim->truth_fraction_mean;
      jrow["F_sim_ci95"] = row.sim->truth_fraction_ci95;
      jrow["x1_sim_mean"] = row.sim->age_mean;
      jrow["x1_sim_ci95"] = row.sim->age_ci95;
      jrow["event_count"] = row.sim->event_count;
    }
    if (include_timing) jrow["wall_seconds"] = row.wall_seconds;
    if (spec.want_c_vector) jrow["c_vector"] = row.analytical.fresh_truth;
    if (spec.want_v_vector) jrow["v_vector"] = row.analytical.expected_min_age;
    if (spec.want_t_table) jrow["t_table"] = triangular_to_json(row.analytical.truth_table);
    jrows.push_back(std::move(jrow));
  }
  out["rows"] = std::move(jrows);
  return out;
}

struct CompareTolerance {
  double ci_multiplier = 3.0;        // z: CI-scaled slack
  double truth_fraction_floor = 0.02;  // absolute slack on F
  double age_relative_floor = 0.05;    // relative slack on x1
};

struct PointVerdict {
  double value = 0.0;
  bool pass = true;
  double truth_diff = 0.0, truth_tolerance = 0.0;
  bool age_checked = false;
  double age_diff = 0.0, age_tolerance = 0.0;
};

// Verdict per sweep point: simulation and solver must agree within
// max(floor, z * CI95) on the truth fraction, and likewise (with a relative
// floor) on the version age wherever the analytical age is finite.
inline std::vector<PointVerdict> compare_rows(const std::vector<SweepRow>& rows,
                                              const CompareTolerance& tolerance = {}) {
  std::vector<PointVerdict> verdicts;
  verdicts.reserve(rows.size());
  for (const SweepRow& row : rows) {
    if (!row.sim) throw std::invalid_argument("compare requires simulation results");
    PointVerdict verdict;
    verdict.value = row.value;
    verdict.truth_diff = std::abs(row.sim->truth_fraction_mean - row.analytical.truth_fraction);
    verdict.truth_tolerance = std::max(tolerance.truth_fraction_floor,
                                       tolerance.ci_multiplier * row.sim->truth_fraction_ci95);
    verdict.pass = verdict.truth_diff <= verdict.truth_tolerance;
    if (!row.analytical.age_diverges && std::isfinite(row.analytical.expected_age)) {
      verdict.age_checked = true;
      verdict.age_diff = std::abs(row.sim->age_mean - row.analytical.expected_age);
      verdict.age_tolerance = std::max(tolerance.age_relative_floor * row.analytical.expected_age,
                                       tolerance.ci_multiplier * row.sim->age_ci95);
      verdict.pass = verdict.pass && verdict.age_diff <= verdict.age_tolerance;
    }
    verdicts.push_back(verdict);
  }
  return verdicts;
}

}  // namespace gossip
