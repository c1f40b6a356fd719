#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "gossip/sweep.hpp"

using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

// Runs a command line, capturing stdout.
RunResult run_command(const std::string& command) {
  RunResult result;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buffer;
  std::size_t got;
  while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.output.append(buffer.data(), got);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string cli_path() { return GOSSIP_CLI_PATH; }

std::filesystem::path write_temp_spec(const std::string& name, const json& spec) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << spec.dump(2);
  return path;
}

json small_sim_spec() {
  return json{{"base", {{"n", 4}, {"lambda_e", 1.0}, {"lambda_s", 1.0}, {"lambda", 1.0}, {"p", 0.9}}},
              {"sweep", {{"parameter", "p"}, {"values", {0.0, 0.5, 0.9}}}},
              {"sim", {{"horizon", 2000.0}, {"seed", 5}, {"replications", 1}}},
              {"outputs", {"F", "x1", "c_vector"}}};
}

}  // namespace

TEST_CASE("sweep spec parsing") {
  const gossip::SweepSpec spec = gossip::parse_sweep_spec(small_sim_spec());
  CHECK(spec.base.node_count == 4);
  CHECK(spec.parameter == gossip::SweptParameter::kMutationProb);
  CHECK(spec.values.size() == 3);
  REQUIRE(spec.sim.has_value());
  CHECK(spec.sim->horizon == 2000.0);
  CHECK(spec.want_c_vector);
  CHECK_FALSE(spec.want_t_table);

  json bad = small_sim_spec();
  bad["sweep"]["parameter"] = "tau";
  CHECK_THROWS(gossip::parse_sweep_spec(bad));

  bad = small_sim_spec();
  bad["sweep"]["values"] = json::array();
  CHECK_THROWS(gossip::parse_sweep_spec(bad));

  bad = small_sim_spec();
  bad["sweep"]["values"] = {0.0, 1.5};  // invalid p after substitution
  CHECK_THROWS(gossip::parse_sweep_spec(bad));

  bad = small_sim_spec();
  bad["sweep"]["parameter"] = "n";
  bad["sweep"]["values"] = {2.5};
  CHECK_THROWS(gossip::parse_sweep_spec(bad));

  bad = small_sim_spec();
  bad["outputs"].push_back("q_matrix");
  CHECK_THROWS(gossip::parse_sweep_spec(bad));

  json solver_only = small_sim_spec();
  solver_only["sim"] = nullptr;
  CHECK_FALSE(gossip::parse_sweep_spec(solver_only).sim.has_value());
}

TEST_CASE("solver-only sweep rows and CSV shape") {
  json spec_json = small_sim_spec();
  spec_json["sim"] = nullptr;
  const gossip::SweepSpec spec = gossip::parse_sweep_spec(spec_json);
  const auto rows = gossip::run_sweep(spec, 2);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].analytical.truth_fraction == 1.0);  // p = 0
  CHECK(rows[1].analytical.truth_fraction >= rows[2].analytical.truth_fraction);
  CHECK_FALSE(rows[0].sim.has_value());

  std::ostringstream csv;
  gossip::write_sweep_csv(csv, rows);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == gossip::kSweepCsvHeader);
  std::getline(lines, line);
  CHECK(line.substr(0, 2) == "0,");
  CHECK(line.find(",,,,,") != std::string::npos);  // empty sim cells
}

TEST_CASE("sweep with simulation is deterministic and fills sim columns") {
  const gossip::SweepSpec spec = gossip::parse_sweep_spec(small_sim_spec());
  const auto rows_a = gossip::run_sweep(spec, 2);
  const auto rows_b = gossip::run_sweep(spec, 1);

  std::ostringstream csv_a, csv_b;
  gossip::write_sweep_csv(csv_a, rows_a);
  gossip::write_sweep_csv(csv_b, rows_b);
  CHECK(csv_a.str() == csv_b.str());  // worker count must not matter

  REQUIRE(rows_a[0].sim.has_value());
  CHECK(rows_a[0].sim->truth_fraction_mean == 1.0);  // p = 0 point

  const json mirror = gossip::sweep_to_json(spec, rows_a);
  REQUIRE(mirror.at("rows").size() == 3);
  CHECK(mirror.at("rows")[0].contains("F_sim_mean"));
  CHECK(mirror.at("rows")[0].at("c_vector").size() == 4);
  CHECK_FALSE(mirror.at("rows")[0].contains("t_table"));
  CHECK_FALSE(mirror.at("rows")[0].contains("wall_seconds"));
}

TEST_CASE("x1 sim column is constant across a p sweep with a fixed seed") {
  // The honesty stream is isolated, so sweeping p cannot move the ages.
  json spec_json = small_sim_spec();
  spec_json["sweep"]["values"] = {0.0, 0.3, 0.6, 1.0};
  const auto rows = gossip::run_sweep(gossip::parse_sweep_spec(spec_json), 2);
  for (const auto& row : rows) {
    CHECK(row.sim->age_mean == rows[0].sim->age_mean);
    CHECK(row.sim->age_ci95 == rows[0].sim->age_ci95);
  }
}

TEST_CASE("a failing sweep point names itself") {
  // Valid parameters, but a one-node network with only a gossip process has
  // no events to simulate; the sweep must abort naming the point.
  const json spec_json = {
      {"base", {{"n", 1}, {"lambda_e", 0.0}, {"lambda_s", 0.0}, {"lambda", 1.0}, {"p", 0.0}}},
      {"sweep", {{"parameter", "lambda"}, {"values", {1.0}}}},
      {"sim", {{"horizon", 10.0}, {"seed", 1}}}};
  const gossip::SweepSpec spec = gossip::parse_sweep_spec(spec_json);
  CHECK_THROWS_WITH(gossip::run_sweep(spec, 1),
                    Catch::Matchers::ContainsSubstring("sweep point 0 (lambda=1)"));
}

TEST_CASE("comparison verdicts") {
  gossip::SweepRow row;
  row.value = 1.0;
  row.analytical.truth_fraction = 0.5;
  row.analytical.expected_age = 2.0;
  gossip::EstimateReport sim;
  sim.truth_fraction_mean = 0.51;
  sim.truth_fraction_ci95 = 0.001;
  sim.age_mean = 2.05;
  sim.age_ci95 = 0.01;
  row.sim = sim;

  auto verdicts = gossip::compare_rows({row});
  REQUIRE(verdicts.size() == 1);
  CHECK(verdicts[0].pass);  // 0.01 <= floor 0.02, 0.05 <= 0.05*2

  row.sim->truth_fraction_mean = 0.6;
  verdicts = gossip::compare_rows({row});
  CHECK_FALSE(verdicts[0].pass);

  row.sim->truth_fraction_mean = 0.51;
  row.analytical.age_diverges = true;
  row.analytical.expected_age = std::numeric_limits<double>::infinity();
  verdicts = gossip::compare_rows({row});
  CHECK(verdicts[0].pass);
  CHECK_FALSE(verdicts[0].age_checked);

  gossip::SweepRow solver_only;
  CHECK_THROWS_AS(gossip::compare_rows({solver_only}), std::invalid_argument);
}

TEST_CASE("full-precision formatting round-trips") {
  for (double value : {1.0 / 3.0, 0.1, 12345.6789, 1e-300, 0.0}) {
    CHECK(std::stod(gossip::format_full(value)) == value);
  }
  CHECK(gossip::format_full(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("cli: solve") {
  auto result = run_command(cli_path() + " solve --n 1 --lambda-e 1 --lambda-s 1 --lambda 1 --p 0.9");
  CHECK(result.exit_code == 0);
  json out = json::parse(result.output);
  CHECK(out.at("F").get<double>() == 1.0);
  CHECK(out.at("x1").get<double>() == 1.0);

  result = run_command(cli_path() + " solve --n 10 --lambda-e 1 --lambda-s 1 --lambda 0 --p 0.9 --full");
  out = json::parse(result.output);
  CHECK(out.at("F").get<double>() == 1.0);
  CHECK(out.at("x1").get<double>() == Catch::Approx(10.0).margin(1e-9));
  CHECK(out.at("c_vector").size() == 10);
  CHECK(out.at("t_table").size() == 10);

  result = run_command(cli_path() + " solve --p 0");
  out = json::parse(result.output);
  CHECK(out.at("F").get<double>() == 1.0);

  // Diverging age is reported as a marker, not a failure.
  result = run_command(cli_path() + " solve --lambda-s 0 2>/dev/null");
  CHECK(result.exit_code == 0);
  out = json::parse(result.output);
  CHECK(out.at("age_diverges").get<bool>());
  CHECK(out.at("x1").is_null());
}

TEST_CASE("cli: usage errors exit with code 2") {
  CHECK(run_command(cli_path() + " solve --n -3 2>/dev/null").exit_code == 2);
  CHECK(run_command(cli_path() + " solve --bogus 2>/dev/null").exit_code == 2);
  CHECK(run_command(cli_path() + " 2>/dev/null").exit_code == 2);
  CHECK(run_command(cli_path() + " sweep /nonexistent.json 2>/dev/null").exit_code == 2);
}

TEST_CASE("cli: simulate is reproducible byte for byte") {
  const std::string command =
      cli_path() + " simulate --n 4 --lambda-e 1 --lambda-s 1 --lambda 1 --p 0.5"
                   " --horizon 2000 --seed 7";
  const auto first = run_command(command);
  const auto second = run_command(command);
  CHECK(first.exit_code == 0);
  CHECK(first.output == second.output);
  const json out = json::parse(first.output);
  CHECK(out.at("F_hat").get<double>() <= 1.0);
  CHECK(out.at("event_count").get<std::uint64_t>() > 0);

  const auto honest = run_command(cli_path() + " simulate --p 0 --horizon 1000 --seed 7");
  CHECK(json::parse(honest.output).at("F_hat").get<double>() == 1.0);
}

TEST_CASE("cli: sweep writes CSV and JSON") {
  const auto spec_path = write_temp_spec("gossip_sweep_spec.json", small_sim_spec());
  const std::string base = cli_path() + " sweep " + spec_path.string();

  const auto csv_a = run_command(base);
  const auto csv_b = run_command(base + " --workers 1");
  CHECK(csv_a.exit_code == 0);
  CHECK(csv_a.output == csv_b.output);
  CHECK(csv_a.output.rfind(gossip::kSweepCsvHeader, 0) == 0);

  const auto as_json = run_command(base + " --format json");
  CHECK(as_json.exit_code == 0);
  CHECK(json::parse(as_json.output).at("rows").size() == 3);

  const auto out_path = std::filesystem::temp_directory_path() / "gossip_sweep_out.csv";
  const auto to_file = run_command(base + " --out " + out_path.string());
  CHECK(to_file.exit_code == 0);
  std::ifstream in(out_path);
  std::string header;
  std::getline(in, header);
  CHECK(header == gossip::kSweepCsvHeader);
  std::filesystem::remove(out_path);
  std::filesystem::remove(spec_path);
}

TEST_CASE("cli: compare passes against the solver and fails the negative control") {
  json spec = small_sim_spec();
  spec["sweep"]["values"] = {0.9};
  spec["sim"]["horizon"] = 5e4;
  const auto spec_path = write_temp_spec("gossip_compare_spec.json", spec);

  const auto good = run_command(cli_path() + " compare " + spec_path.string());
  CHECK(good.exit_code == 0);
  CHECK(good.output.find("PASS") != std::string::npos);

  const auto bad =
      run_command(cli_path() + " compare " + spec_path.string() + " --unbalanced-solver");
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("FAIL") != std::string::npos);

  // Solver-only specs cannot be compared.
  json solver_only = spec;
  solver_only["sim"] = nullptr;
  const auto solver_path = write_temp_spec("gossip_compare_solver_only.json", solver_only);
  CHECK(run_command(cli_path() + " compare " + solver_path.string() + " 2>/dev/null").exit_code == 2);
  std::filesystem::remove(spec_path);
  std::filesystem::remove(solver_path);
}
