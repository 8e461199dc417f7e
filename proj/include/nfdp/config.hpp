#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nfdp/channel.hpp"
#include "nfdp/policy.hpp"

namespace nfdp {

// Experiment description as read from a JSON file. Kernel shorthands
// ({"bsc": eps}, {"identity": n}) are expanded to explicit matrices during
// parsing, so a parsed config serializes to a fully explicit document and
// parsing that document reproduces the config exactly.

struct MemoryConfig {
  int size = 1;
  std::string update_kind = "constant";  // "constant" | "last_feedback" | "table"
  std::vector<std::vector<std::vector<int>>> update_table;  // [u][z][w], kind "table" only
  int initial = 0;

  bool operator==(const MemoryConfig&) const = default;
};

struct CapsConfig {
  std::uint64_t actions = 1000000;
  std::uint64_t states = 10000000;
  std::uint64_t paths = 10000000;
  std::uint64_t strategies = 1000000;

  bool operator==(const CapsConfig&) const = default;
};

struct OracleConfig {
  bool general = true;
  bool markov = true;

  bool operator==(const OracleConfig&) const = default;
};

struct SchemeConfig {
  // "" (none) | "markov" | "general" | "repetition" | "pms_noiseless" | "pms_noisy"
  std::string kind;
  // markov: stages[t][w][u]; general: stages[t][w][feedback prefix index]
  std::vector<std::vector<std::vector<int>>> stages;
  std::vector<double> input;  // posterior-matching input distribution; empty = uniform

  bool operator==(const SchemeConfig&) const = default;
};

struct VerifyConfig {
  std::uint64_t instances = 100;
  std::uint64_t collapse_instances = 50;

  bool operator==(const VerifyConfig&) const = default;
};

struct ExperimentConfig {
  std::vector<std::vector<double>> forward;
  std::vector<std::vector<double>> feedback;
  int messages = 2;
  int horizon = 1;
  MemoryConfig memory;
  CapsConfig caps;
  OracleConfig oracle;
  SchemeConfig scheme;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  std::string decoder = "true_posterior";  // "true_posterior" | "recursive"
  int workers = 0;                         // 0 = leave the runtime default
  bool dump_traces = false;
  bool compare_oracle = false;
  VerifyConfig verify;

  bool operator==(const ExperimentConfig&) const = default;
};

// Parses a JSON document. Collects every problem it can find (unknown keys,
// wrong types, out-of-range values, inconsistent dimensions) and throws one
// ValidationError listing all of them.
ExperimentConfig parse_config(const std::string& json_text);

// Canonical serialization: every field explicit, keys sorted, compact. The
// round trip parse_config(config_to_json(c)) == c holds for any valid c.
std::string config_to_json(const ExperimentConfig& config);

// FNV-1a 64-bit hash of the canonical serialization, as 16 hex digits. Used
// to name result files so reruns of the same experiment append to one place.
std::string config_hash(const ExperimentConfig& config);

ChannelPair make_channels(const ExperimentConfig& config);
MemoryUpdate make_memory_update(const ExperimentConfig& config);

}  // namespace nfdp
