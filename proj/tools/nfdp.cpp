#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nfdp/config.hpp"
#include "nfdp/dp_solver.hpp"
#include "nfdp/errors.hpp"
#include "nfdp/evaluate.hpp"
#include "nfdp/oracle.hpp"
#include "nfdp/parallel.hpp"
#include "nfdp/schemes.hpp"
#include "nfdp/verify.hpp"

namespace {

using nfdp::ExperimentConfig;
using nlohmann::json;

constexpr const char* kToolVersion = "0.1.0";

struct Output {
  std::string out_dir;
  std::string csv_path;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw nfdp::ValidationError("cannot read config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig config = nfdp::parse_config(read_file(path));
  if (const char* env = std::getenv("NFDP_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      std::string text(env);
      config.seed = std::stoull(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw nfdp::ValidationError("NFDP_SEED must be an unsigned integer");
    }
  }
  return config;
}

json base_record(const ExperimentConfig& config) {
  json record;
  record["tool_version"] = kToolVersion;
  record["config"] = json::parse(nfdp::config_to_json(config));
  record["config_hash"] = nfdp::config_hash(config);
  record["seed"] = config.seed;
  return record;
}

std::string csv_field(const json& record, const char* outer, const char* inner = nullptr) {
  const json* cell = record.contains(outer) ? &record.at(outer) : nullptr;
  if (cell != nullptr && inner != nullptr)
    cell = cell->contains(inner) ? &cell->at(inner) : nullptr;
  if (cell == nullptr || cell->is_null()) return "";
  if (cell->is_string()) return cell->get<std::string>();
  return cell->dump();
}

void append_csv(const std::string& path, const json& record) {
  bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw nfdp::ValidationError("cannot open CSV file '" + path + "'");
  if (fresh)
    out << "config_hash,method,pe,stderr,dp_value,oracle_general,oracle_markov,consistent,"
           "seconds\n";
  out << csv_field(record, "config_hash") << ',' << csv_field(record, "method") << ','
      << csv_field(record, "pe") << ',' << csv_field(record, "stderr") << ','
      << csv_field(record, "dp", "value") << ',' << csv_field(record, "oracle", "general") << ','
      << csv_field(record, "oracle", "markov") << ',' << csv_field(record, "dp", "consistent")
      << ',' << csv_field(record, "seconds") << '\n';
}

// Success path only: records are written after the computation finished, so a
// rejected config leaves no partial output behind.
void emit(const json& record, const Output& output) {
  std::cout << record.dump() << std::endl;
  std::filesystem::create_directories(output.out_dir);
  std::string path = output.out_dir + "/" + record.at("config_hash").get<std::string>() + ".json";
  std::ofstream out(path, std::ios::app);
  if (!out) throw nfdp::ValidationError("cannot open result file '" + path + "'");
  out << record.dump() << "\n";
  if (!output.csv_path.empty()) append_csv(output.csv_path, record);
}

nfdp::GeneralEncoder general_from_config(const ExperimentConfig& config, int Z) {
  std::vector<std::vector<int>> tables;
  for (const auto& stage : config.scheme.stages) {
    std::vector<int> flat;
    for (const auto& row : stage) flat.insert(flat.end(), row.begin(), row.end());
    tables.push_back(std::move(flat));
  }
  return nfdp::GeneralEncoder(config.messages, static_cast<int>(config.forward.size()), Z,
                              std::move(tables));
}

nfdp::MarkovPolicy markov_from_config(const ExperimentConfig& config) {
  std::vector<nfdp::EncoderMap> maps;
  for (const auto& stage : config.scheme.stages) {
    std::vector<int> flat;
    for (const auto& row : stage) flat.insert(flat.end(), row.begin(), row.end());
    maps.emplace_back(config.messages, config.memory.size,
                      static_cast<int>(config.forward.size()), std::move(flat));
  }
  return nfdp::MarkovPolicy(std::move(maps), nfdp::make_memory_update(config),
                            config.memory.initial);
}

int run_solve(const ExperimentConfig& config, nfdp::Execution execution, const Output& output) {
  nfdp::ChannelPair channels = nfdp::make_channels(config);
  nfdp::MemoryUpdate update = nfdp::make_memory_update(config);
  nfdp::SolverCaps caps{config.caps.actions, config.caps.states};
  nfdp::SolveReport report =
      nfdp::solve(channels, config.horizon, config.messages, config.memory.size, update,
                  config.memory.initial, caps, execution);

  json record = base_record(config);
  record["method"] = "dp_solve";
  record["pe"] = report.averaged_value;
  json dp;
  dp["value"] = report.averaged_value;
  dp["message_values"] = report.message_values;
  dp["consistent"] = report.consistent;
  dp["state_counts"] = report.state_counts;
  dp["branch_maps"] = report.branch_maps;
  if (report.extracted_exact_pe.has_value()) dp["extracted_pe"] = *report.extracted_exact_pe;
  if (report.extracted.has_value()) {
    std::vector<std::vector<std::vector<int>>> stages;
    for (const nfdp::EncoderMap& map : report.extracted->stages) {
      std::vector<std::vector<int>> rows;
      for (int w = 0; w < map.message_count(); ++w) {
        std::vector<int> row;
        for (int u = 0; u < map.memory_size(); ++u) row.push_back(map(w, u));
        rows.push_back(std::move(row));
      }
      stages.push_back(std::move(rows));
    }
    dp["extracted_stages"] = stages;
  }
  record["dp"] = std::move(dp);
  record["seconds"] = report.seconds;
  emit(record, output);
  return 0;
}

int run_oracle(const ExperimentConfig& config, nfdp::Execution execution, const Output& output) {
  if (!config.oracle.general && !config.oracle.markov)
    throw nfdp::ValidationError("oracle: both searches are disabled in the config");
  nfdp::ChannelPair channels = nfdp::make_channels(config);
  nfdp::OracleOptions options;
  options.strategy_cap = config.caps.strategies;
  options.path_cap = config.caps.paths;
  options.execution = execution;

  auto start = std::chrono::steady_clock::now();
  json section;
  std::optional<double> general;
  std::optional<double> markov;
  if (config.oracle.general) {
    nfdp::GeneralSearchResult result =
        nfdp::exhaustive_general(channels, config.horizon, config.messages, options);
    section["general"] = result.value;
    section["general_best_index"] = result.best_index;
    section["general_searched"] = result.searched;
    general = result.value;
  }
  if (config.oracle.markov) {
    nfdp::MemoryUpdate update = nfdp::make_memory_update(config);
    nfdp::MarkovSearchResult result =
        nfdp::exhaustive_markov(channels, config.horizon, config.messages, config.memory.size,
                                update, config.memory.initial, options);
    section["markov"] = result.value;
    section["markov_best_index"] = result.best_index;
    section["markov_searched"] = result.searched;
    markov = result.value;
  }
  if (general.has_value() && markov.has_value()) section["gap"] = *markov - *general;
  double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json record = base_record(config);
  record["method"] = "oracle";
  record["pe"] = general.has_value() ? *general : *markov;
  record["oracle"] = std::move(section);
  record["seconds"] = seconds;
  emit(record, output);
  return 0;
}

json trace_to_json(const nfdp::SchemeTrace& trace) {
  json steps = json::array();
  for (const nfdp::TraceStep& step : trace.steps)
    steps.push_back({{"x", step.x},
                     {"y", step.y},
                     {"z", step.z},
                     {"coordinate", step.coordinate},
                     {"pmf_value", step.pmf_value},
                     {"atom_count", step.atom_count}});
  return json{{"message", trace.message}, {"decoded", trace.decoded}, {"steps", std::move(steps)}};
}

int run_simulate(const ExperimentConfig& config, nfdp::Execution execution,
                 const Output& output) {
  if (config.scheme.kind.empty())
    throw nfdp::ValidationError("simulate: config must name a scheme");
  nfdp::ChannelPair channels = nfdp::make_channels(config);
  nfdp::Decoder decoder = config.decoder == "recursive" ? nfdp::Decoder::RecursiveBelief
                                                        : nfdp::Decoder::TruePosterior;
  nfdp::EvalOptions exact_options;
  exact_options.path_cap = config.caps.paths;
  exact_options.execution = execution;
  nfdp::MonteCarloOptions mc_options;
  mc_options.execution = execution;
  nfdp::MessageBelief prior = nfdp::MessageBelief::uniform(config.messages);

  auto start = std::chrono::steady_clock::now();
  json record = base_record(config);
  nfdp::EvaluationResult estimate;

  if (config.scheme.kind == "pms_noiseless" || config.scheme.kind == "pms_noisy") {
    nfdp::InputDistribution input =
        config.scheme.input.empty()
            ? nfdp::InputDistribution::uniform(channels.input_size())
            : nfdp::InputDistribution(config.scheme.input);
    nfdp::PmsOptions pms;
    pms.trials = config.trials;
    pms.seed = config.seed;
    pms.dump_traces = config.dump_traces;
    nfdp::SchemeRunResult run =
        config.scheme.kind == "pms_noiseless"
            ? nfdp::pms_noiseless(channels, config.messages, config.horizon, input, pms)
            : nfdp::pms_noisy(channels, config.messages, config.horizon, input, pms);
    estimate = run.estimate;
    if (config.dump_traces) {
      json traces = json::array();
      for (const nfdp::SchemeTrace& trace : run.traces) traces.push_back(trace_to_json(trace));
      record["traces"] = std::move(traces);
    }
  } else if (config.scheme.kind == "markov") {
    nfdp::MarkovPolicy policy = markov_from_config(config);
    if (config.trials == 0) {
      estimate = nfdp::exact_error_probability(policy, channels, prior, decoder, exact_options);
    } else {
      estimate = nfdp::monte_carlo_pe(policy, channels, config.trials, config.seed, mc_options);
      if (config.compare_oracle)
        record["exact_pe"] =
            nfdp::exact_error_probability(policy, channels, prior, decoder, exact_options)
                .error_probability;
    }
  } else {
    nfdp::GeneralEncoder encoder =
        config.scheme.kind == "repetition"
            ? nfdp::repetition_scheme(config.messages, config.horizon, channels.input_size(),
                                      channels.feedback_size())
            : general_from_config(config, channels.feedback_size());
    if (config.trials == 0) {
      estimate = nfdp::exact_error_probability(encoder, channels, prior, decoder, exact_options);
    } else {
      estimate = nfdp::monte_carlo_pe(encoder, channels, config.trials, config.seed, mc_options);
      if (config.compare_oracle)
        record["exact_pe"] =
            nfdp::exact_error_probability(encoder, channels, prior, decoder, exact_options)
                .error_probability;
    }
  }

  record["method"] = estimate.method;
  record["pe"] = estimate.error_probability;
  if (estimate.std_error.has_value()) record["stderr"] = *estimate.std_error;
  if (estimate.trials > 0) record["trials"] = estimate.trials;
  record["decoder"] = nfdp::decoder_name(estimate.decoder);
  record["seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit(record, output);
  return 0;
}

int run_verify(const std::optional<ExperimentConfig>& config, nfdp::Execution execution,
               const Output& output) {
  nfdp::VerifyOptions options;
  options.execution = execution;
  if (config.has_value()) {
    options.instances = config->verify.instances;
    options.collapse_instances = config->verify.collapse_instances;
    options.seed = config->seed;
  }
  nfdp::VerifyReport report = nfdp::run_verification(options);

  json checks = json::array();
  for (const nfdp::VerifyCheck& check : report.checks) {
    std::cerr << (check.passed ? "[PASS] " : "[FAIL] ") << check.name << " — " << check.detail
              << " (" << check.instances << " instances, " << check.comparisons
              << " comparisons)\n";
    checks.push_back({{"name", check.name},
                      {"instances", check.instances},
                      {"comparisons", check.comparisons},
                      {"passed", check.passed},
                      {"detail", check.detail}});
  }
  json record = base_record(config.has_value() ? *config : ExperimentConfig{});
  record["method"] = "verify";
  record["verify"] = {{"checks", std::move(checks)}, {"all_passed", report.all_passed}};
  record["seconds"] = report.seconds;
  emit(record, output);
  return report.all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Belief-state solver and simulator for channels with noisy feedback"};
  app.require_subcommand(1);

  std::string config_path;
  Output output;
  output.out_dir = "results";
  int workers = 0;
  bool serial = false;

  auto add_common = [&](CLI::App* cmd, bool config_required) {
    CLI::Option* opt = cmd->add_option("--config", config_path, "experiment JSON file")
                           ->check(CLI::ExistingFile);
    if (config_required) opt->required();
    cmd->add_option("--out", output.out_dir, "directory for JSONL result records")
        ->capture_default_str();
    cmd->add_option("--csv", output.csv_path, "also append a summary row to this CSV file");
    cmd->add_option("--workers", workers, "worker threads (0 keeps the runtime default)");
    cmd->add_flag("--serial", serial, "disable parallel kernels");
  };

  CLI::App* solve_cmd =
      app.add_subcommand("solve", "backward dynamic program over reachable belief states");
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle", "exhaustive strategy searches for small instances");
  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "evaluate a fixed scheme exactly or by Monte Carlo");
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "randomized cross-checks of the belief recursions");
  add_common(solve_cmd, true);
  add_common(oracle_cmd, true);
  add_common(simulate_cmd, true);
  add_common(verify_cmd, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (workers > 0) nfdp::set_worker_count(workers);
    nfdp::Execution execution = serial ? nfdp::Execution::Serial : nfdp::Execution::Parallel;

    if (verify_cmd->parsed()) {
      std::optional<ExperimentConfig> config;
      if (!config_path.empty()) config = load_config(config_path);
      return run_verify(config, execution, output);
    }
    ExperimentConfig config = load_config(config_path);
    if (workers == 0 && config.workers > 0) nfdp::set_worker_count(config.workers);
    if (solve_cmd->parsed()) return run_solve(config, execution, output);
    if (oracle_cmd->parsed()) return run_oracle(config, execution, output);
    return run_simulate(config, execution, output);
  } catch (const nfdp::CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
