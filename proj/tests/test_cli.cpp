#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
  int exit_code = -1;
  std::string stdout_text;
  std::string stderr_text;
};

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "nfdp_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

CliRun run_cli(const fs::path& dir, const std::string& args, const std::string& env = "") {
  fs::path out = dir / "stdout.txt";
  fs::path err = dir / "stderr.txt";
  std::string command = env + (env.empty() ? "" : " ") + NFDP_CLI_PATH + " " + args + " > " +
                        out.string() + " 2> " + err.string();
  int raw = std::system(command.c_str());
  CliRun run;
  run.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  run.stdout_text = read_file(out);
  run.stderr_text = read_file(err);
  return run;
}

// The one result file the run appended under `records`, as parsed JSON lines.
std::vector<json> result_records(const fs::path& records, std::string* stem = nullptr) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(records)) files.push_back(entry.path());
  REQUIRE(files.size() == 1);
  if (stem != nullptr) *stem = files.front().stem().string();
  std::vector<json> parsed;
  for (const std::string& line : read_lines(files.front())) parsed.push_back(json::parse(line));
  return parsed;
}

const char* kSolveConfig = R"({"forward": {"bsc": 0.1}, "feedback": {"bsc": 0.1}})";

const char* kSimulateConfig = R"({
  "forward": {"bsc": 0.1}, "feedback": {"bsc": 0.1},
  "scheme": {"kind": "markov", "stages": [[[0], [1]]]},
  "trials": 20000, "seed": 9})";

}  // namespace

TEST_CASE("solve writes one record with the dynamic-program results") {
  fs::path dir = fresh_dir("solve");
  write_file(dir / "config.json", kSolveConfig);
  fs::path records = dir / "records";

  CliRun run = run_cli(dir, "solve --config " + (dir / "config.json").string() + " --out " +
                                records.string());
  REQUIRE(run.exit_code == 0);

  std::string stem;
  std::vector<json> lines = result_records(records, &stem);
  REQUIRE(lines.size() == 1);
  const json& rec = lines.front();
  CHECK(rec.at("method") == "dp_solve");
  CHECK(rec.at("config_hash") == stem);
  CHECK(std::abs(rec.at("pe").get<double>() - 0.1) <= 1e-9);
  CHECK(rec.at("dp").at("consistent") == true);
  CHECK(rec.at("dp").at("branch_maps") == json::parse("[[1],[1]]"));
  CHECK(std::abs(rec.at("dp").at("extracted_pe").get<double>() - 0.1) <= 1e-9);
  CHECK(rec.at("seed") == 1);

  json streamed = json::parse(run.stdout_text);
  CHECK(streamed.at("config_hash") == stem);
}

TEST_CASE("oracle reports both searches and their gap") {
  fs::path dir = fresh_dir("oracle");
  write_file(dir / "config.json", kSolveConfig);
  fs::path records = dir / "records";

  CliRun run = run_cli(dir, "oracle --config " + (dir / "config.json").string() + " --out " +
                                records.string());
  REQUIRE(run.exit_code == 0);

  std::vector<json> lines = result_records(records);
  const json& rec = lines.front();
  CHECK(rec.at("method") == "oracle");
  CHECK(std::abs(rec.at("oracle").at("general").get<double>() - 0.1) <= 1e-9);
  CHECK(std::abs(rec.at("oracle").at("markov").get<double>() - 0.1) <= 1e-9);
  CHECK(std::abs(rec.at("oracle").at("gap").get<double>()) <= 1e-12);
  CHECK(rec.at("oracle").at("general_searched") == 4);
  CHECK(std::abs(rec.at("pe").get<double>() - 0.1) <= 1e-9);
}

TEST_CASE("simulate reruns append identical records and fill the CSV") {
  fs::path dir = fresh_dir("simulate");
  write_file(dir / "config.json", kSimulateConfig);
  fs::path records = dir / "records";
  fs::path csv = dir / "summary.csv";
  std::string args = "simulate --config " + (dir / "config.json").string() + " --out " +
                     records.string() + " --csv " + csv.string();

  REQUIRE(run_cli(dir, args).exit_code == 0);
  REQUIRE(run_cli(dir, args).exit_code == 0);

  std::vector<json> lines = result_records(records);
  REQUIRE(lines.size() == 2);
  json first = lines[0];
  json second = lines[1];
  CHECK(first.at("method") == "monte_carlo");
  CHECK(first.at("trials") == 20000);
  CHECK(first.at("decoder") == "true_posterior");
  double pe = first.at("pe").get<double>();
  double se = first.at("stderr").get<double>();
  CHECK(std::abs(pe - 0.1) <= 4.0 * se + 1e-12);
  first.erase("seconds");
  second.erase("seconds");
  CHECK(first == second);  // bit-identical replay

  std::vector<std::string> rows = read_lines(csv);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] ==
        "config_hash,method,pe,stderr,dp_value,oracle_general,oracle_markov,consistent,seconds");
  std::string hash = first.at("config_hash").get<std::string>();
  CHECK(rows[1].rfind(hash + ",monte_carlo,", 0) == 0);
  CHECK(rows[2].rfind(hash + ",monte_carlo,", 0) == 0);
}

TEST_CASE("simulate with zero trials evaluates exactly") {
  fs::path dir = fresh_dir("simulate_exact");
  write_file(dir / "config.json", R"({
    "forward": {"bsc": 0.1}, "feedback": {"bsc": 0.1},
    "scheme": {"kind": "markov", "stages": [[[0], [1]]]},
    "trials": 0})");
  fs::path records = dir / "records";

  CliRun run = run_cli(dir, "simulate --config " + (dir / "config.json").string() + " --out " +
                                records.string());
  REQUIRE(run.exit_code == 0);
  const json rec = result_records(records).front();
  CHECK(rec.at("method") == "exact");
  CHECK(std::abs(rec.at("pe").get<double>() - 0.1) <= 1e-12);
  CHECK(!rec.contains("stderr"));
  CHECK(!rec.contains("trials"));
}

TEST_CASE("seed override from the environment") {
  fs::path dir = fresh_dir("seed_env");
  write_file(dir / "config.json", kSimulateConfig);
  fs::path records = dir / "records";
  std::string args = "simulate --config " + (dir / "config.json").string() + " --out " +
                     records.string();

  CliRun run = run_cli(dir, args, "NFDP_SEED=777");
  REQUIRE(run.exit_code == 0);
  const json rec = result_records(records).front();
  CHECK(rec.at("seed") == 777);
  CHECK(rec.at("config").at("seed") == 777);

  CliRun bad = run_cli(dir, args, "NFDP_SEED=abc");
  CHECK(bad.exit_code == 2);
  CHECK(bad.stderr_text.find("NFDP_SEED") != std::string::npos);
}

TEST_CASE("rejected configs exit with 2 and leave no records") {
  fs::path dir = fresh_dir("rejects");
  fs::path records = dir / "records";

  write_file(dir / "bad_rows.json", R"({"forward": [[0.5, 0.4]], "feedback": {"bsc": 0.1}})");
  CliRun rows = run_cli(dir, "solve --config " + (dir / "bad_rows.json").string() + " --out " +
                                 records.string());
  CHECK(rows.exit_code == 2);
  CHECK(rows.stderr_text.find("error:") != std::string::npos);
  CHECK(!fs::exists(records));

  write_file(dir / "missing.json", R"({"forward": {"bsc": 0.1}})");
  CliRun missing = run_cli(dir, "simulate --config " + (dir / "missing.json").string() +
                                    " --out " + records.string());
  CHECK(missing.exit_code == 2);
  CHECK(missing.stderr_text.find("missing required key 'feedback'") != std::string::npos);
  CHECK(!fs::exists(records));
}

TEST_CASE("verify runs the randomized cross-checks and reports each one") {
  fs::path dir = fresh_dir("verify");
  write_file(dir / "config.json", R"({
    "forward": {"bsc": 0.1}, "feedback": {"bsc": 0.1}, "seed": 3,
    "verify": {"instances": 7, "collapse_instances": 3}})");
  fs::path records = dir / "records";

  CliRun run = run_cli(dir, "verify --config " + (dir / "config.json").string() + " --out " +
                                records.string());
  REQUIRE(run.exit_code == 0);
  CHECK(run.stderr_text.find("[PASS]") != std::string::npos);
  CHECK(run.stderr_text.find("[FAIL]") == std::string::npos);

  const json rec = result_records(records).front();
  CHECK(rec.at("method") == "verify");
  CHECK(rec.at("seed") == 3);
  CHECK(rec.at("verify").at("all_passed") == true);
  const json& checks = rec.at("verify").at("checks");
  REQUIRE(checks.size() == 3);
  for (const json& check : checks) CHECK(check.at("passed") == true);
  CHECK(checks.at(0).at("instances") == 7);
  CHECK(checks.at(1).at("instances") == 3);
}
