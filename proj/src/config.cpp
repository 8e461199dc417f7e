#include "nfdp/config.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nfdp/errors.hpp"

namespace nfdp {

namespace {

using nlohmann::json;

struct Collector {
  std::vector<std::string> problems;

  void add(std::string problem) { problems.push_back(std::move(problem)); }
  bool clean() const { return problems.empty(); }

  void finish() const {
    if (problems.empty()) return;
    std::string joined;
    for (const std::string& p : problems) {
      if (!joined.empty()) joined += "; ";
      joined += p;
    }
    throw ValidationError("config: " + joined);
  }
};

void check_keys(const json& object, std::initializer_list<const char*> allowed,
                const std::string& where, Collector& errors) {
  for (const auto& item : object.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) known = true;
    if (!known) errors.add("unknown key '" + where + item.key() + "'");
  }
}

bool want_int(const json& parent, const char* key, int& out, const std::string& where,
              Collector& errors) {
  if (!parent.contains(key)) return false;
  const json& j = parent.at(key);
  if (!j.is_number_integer()) {
    errors.add("'" + where + key + "' must be an integer");
    return false;
  }
  out = j.get<int>();
  return true;
}

bool want_uint(const json& parent, const char* key, std::uint64_t& out, const std::string& where,
               Collector& errors) {
  if (!parent.contains(key)) return false;
  const json& j = parent.at(key);
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() &&
                                 j.get<std::int64_t>() < 0)) {
    errors.add("'" + where + key + "' must be a non-negative integer");
    return false;
  }
  out = j.get<std::uint64_t>();
  return true;
}

bool want_bool(const json& parent, const char* key, bool& out, const std::string& where,
               Collector& errors) {
  if (!parent.contains(key)) return false;
  const json& j = parent.at(key);
  if (!j.is_boolean()) {
    errors.add("'" + where + key + "' must be a boolean");
    return false;
  }
  out = j.get<bool>();
  return true;
}

bool want_string(const json& parent, const char* key, std::string& out, const std::string& where,
                 Collector& errors) {
  if (!parent.contains(key)) return false;
  const json& j = parent.at(key);
  if (!j.is_string()) {
    errors.add("'" + where + key + "' must be a string");
    return false;
  }
  out = j.get<std::string>();
  return true;
}

std::vector<std::vector<double>> parse_matrix(const json& j, const std::string& where,
                                              Collector& errors) {
  std::vector<std::vector<double>> rows;
  if (!j.is_array() || j.empty()) {
    errors.add("'" + where + "' must be a non-empty array of rows");
    return rows;
  }
  std::size_t width = 0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& row = j.at(i);
    if (!row.is_array() || row.empty()) {
      errors.add("'" + where + "' row " + std::to_string(i) + " must be a non-empty array");
      return {};
    }
    if (i == 0) width = row.size();
    if (row.size() != width) {
      errors.add("'" + where + "' rows have unequal lengths");
      return {};
    }
    std::vector<double> entries;
    for (const json& cell : row) {
      if (!cell.is_number()) {
        errors.add("'" + where + "' entries must be numbers");
        return {};
      }
      entries.push_back(cell.get<double>());
    }
    rows.push_back(std::move(entries));
  }
  return rows;
}

std::vector<std::vector<double>> parse_kernel(const json& parent, const char* key,
                                              Collector& errors) {
  std::string where(key);
  if (!parent.contains(key)) {
    errors.add("missing required key '" + where + "'");
    return {};
  }
  const json& j = parent.at(key);
  if (j.is_object()) {
    check_keys(j, {"bsc", "identity"}, where + ".", errors);
    if (j.contains("bsc") && j.contains("identity")) {
      errors.add("'" + where + "' names two shorthands at once");
      return {};
    }
    if (j.contains("bsc")) {
      const json& eps = j.at("bsc");
      if (!eps.is_number() || eps.get<double>() < 0.0 || eps.get<double>() > 1.0) {
        errors.add("'" + where + ".bsc' must be a number in [0, 1]");
        return {};
      }
      double e = eps.get<double>();
      return {{1.0 - e, e}, {e, 1.0 - e}};
    }
    if (j.contains("identity")) {
      const json& n = j.at("identity");
      if (!n.is_number_integer() || n.get<int>() < 1) {
        errors.add("'" + where + ".identity' must be a positive integer");
        return {};
      }
      std::vector<std::vector<double>> rows(
          static_cast<std::size_t>(n.get<int>()),
          std::vector<double>(static_cast<std::size_t>(n.get<int>()), 0.0));
      for (std::size_t i = 0; i < rows.size(); ++i) rows[i][i] = 1.0;
      return rows;
    }
    errors.add("'" + where + "' object must name 'bsc' or 'identity'");
    return {};
  }
  if (j.is_array()) return parse_matrix(j, where, errors);
  errors.add("'" + where + "' must be a matrix or a kernel shorthand");
  return {};
}

bool parse_int3(const json& j, std::vector<std::vector<std::vector<int>>>& out,
                const std::string& where, Collector& errors) {
  if (!j.is_array()) {
    errors.add("'" + where + "' must be an array");
    return false;
  }
  out.clear();
  for (const json& level1 : j) {
    if (!level1.is_array()) {
      errors.add("'" + where + "' must nest arrays three deep");
      return false;
    }
    std::vector<std::vector<int>> mid;
    for (const json& level2 : level1) {
      if (!level2.is_array()) {
        errors.add("'" + where + "' must nest arrays three deep");
        return false;
      }
      std::vector<int> row;
      for (const json& cell : level2) {
        if (!cell.is_number_integer()) {
          errors.add("'" + where + "' entries must be integers");
          return false;
        }
        row.push_back(cell.get<int>());
      }
      mid.push_back(std::move(row));
    }
    out.push_back(std::move(mid));
  }
  return true;
}

bool dims_match(const std::vector<std::vector<std::vector<int>>>& table, std::size_t a,
                std::size_t b, std::size_t c) {
  if (table.size() != a) return false;
  for (const auto& mid : table) {
    if (mid.size() != b) return false;
    for (const auto& row : mid)
      if (row.size() != c) return false;
  }
  return true;
}

bool entries_in_range(const std::vector<std::vector<std::vector<int>>>& table, int bound) {
  for (const auto& mid : table)
    for (const auto& row : mid)
      for (int v : row)
        if (v < 0 || v >= bound) return false;
  return true;
}

void cross_checks(ExperimentConfig& config, Collector& errors) {
  std::size_t X = config.forward.size();
  std::size_t Y = config.forward.empty() ? 0 : config.forward.front().size();
  std::size_t Z = config.feedback.empty() ? 0 : config.feedback.front().size();

  if (!config.forward.empty() && !config.feedback.empty() && config.feedback.size() != Y)
    errors.add("'feedback' must have one row per forward output (" + std::to_string(Y) +
               " expected, " + std::to_string(config.feedback.size()) + " given)");

  if (config.messages < 2) errors.add("'messages' must be at least 2");
  if (config.horizon < 1) errors.add("'horizon' must be at least 1");
  if (config.memory.size < 1) errors.add("'memory.size' must be at least 1");
  if (config.memory.initial < 0 || config.memory.initial >= config.memory.size)
    errors.add("'memory.initial' must lie in [0, memory.size)");
  if (config.workers < 0) errors.add("'workers' must be non-negative");
  if (config.decoder != "true_posterior" && config.decoder != "recursive")
    errors.add("'decoder' must be 'true_posterior' or 'recursive'");

  if (config.memory.update_kind == "constant") {
    if (config.memory.size != 1)
      errors.add("'memory.update' constant needs memory.size == 1");
  } else if (config.memory.update_kind == "last_feedback") {
    if (Z != 0 && config.memory.size != static_cast<int>(Z))
      errors.add("'memory.update' last_feedback needs memory.size == feedback alphabet size");
  } else if (config.memory.update_kind == "table") {
    if (!dims_match(config.memory.update_table, static_cast<std::size_t>(config.memory.size), Z,
                    static_cast<std::size_t>(config.messages)))
      errors.add("'memory.update' table must be memory.size x feedback x messages");
    else if (!entries_in_range(config.memory.update_table, config.memory.size))
      errors.add("'memory.update' table entries must name memory states");
  } else {
    errors.add("'memory.update' must be 'constant', 'last_feedback', or a table");
  }

  const std::string& kind = config.scheme.kind;
  if (kind != "" && kind != "markov" && kind != "general" && kind != "repetition" &&
      kind != "pms_noiseless" && kind != "pms_noisy") {
    errors.add("'scheme.kind' is not recognized");
    return;
  }
  if (kind == "markov") {
    if (!dims_match(config.scheme.stages, static_cast<std::size_t>(config.horizon),
                    static_cast<std::size_t>(config.messages),
                    static_cast<std::size_t>(config.memory.size)))
      errors.add("'scheme.stages' must be horizon x messages x memory.size");
    else if (!entries_in_range(config.scheme.stages, static_cast<int>(X)))
      errors.add("'scheme.stages' entries must name input symbols");
  } else if (kind == "general") {
    if (config.scheme.stages.size() != static_cast<std::size_t>(config.horizon)) {
      errors.add("'scheme.stages' must list one table per stage");
    } else {
      std::uint64_t prefixes = 1;
      bool shape_ok = true;
      for (std::size_t t = 0; t < config.scheme.stages.size() && shape_ok; ++t) {
        const auto& stage = config.scheme.stages[t];
        if (stage.size() != static_cast<std::size_t>(config.messages)) shape_ok = false;
        for (const auto& row : stage)
          if (row.size() != prefixes) shape_ok = false;
        if (prefixes > 1000000000 / (Z == 0 ? 1 : Z)) {
          errors.add("'scheme.stages' general tables grow past 1e9 entries");
          return;
        }
        prefixes *= Z == 0 ? 1 : Z;
      }
      if (!shape_ok)
        errors.add("'scheme.stages' stage t must be messages x feedback^t");
      else if (!entries_in_range(config.scheme.stages, static_cast<int>(X)))
        errors.add("'scheme.stages' entries must name input symbols");
    }
  } else if (kind == "repetition") {
    if (X < static_cast<std::size_t>(config.messages))
      errors.add("'scheme.kind' repetition needs messages <= input alphabet size");
  } else if (kind == "pms_noiseless" || kind == "pms_noisy") {
    if (!config.scheme.input.empty() && config.scheme.input.size() != X)
      errors.add("'scheme.input' must have one entry per input symbol");
  }
  if (kind != "markov" && kind != "general" && !config.scheme.stages.empty())
    errors.add("'scheme.stages' only applies to markov or general schemes");
  if (kind != "pms_noiseless" && kind != "pms_noisy" && !config.scheme.input.empty())
    errors.add("'scheme.input' only applies to posterior-matching schemes");
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json document;
  try {
    document = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!document.is_object()) throw ValidationError("config: top level must be an object");

  Collector errors;
  check_keys(document,
             {"forward", "feedback", "messages", "horizon", "memory", "caps", "oracle", "scheme",
              "trials", "seed", "decoder", "workers", "dump_traces", "compare_oracle", "verify"},
             "", errors);

  ExperimentConfig config;
  config.forward = parse_kernel(document, "forward", errors);
  config.feedback = parse_kernel(document, "feedback", errors);
  want_int(document, "messages", config.messages, "", errors);
  want_int(document, "horizon", config.horizon, "", errors);
  want_uint(document, "trials", config.trials, "", errors);
  want_uint(document, "seed", config.seed, "", errors);
  want_string(document, "decoder", config.decoder, "", errors);
  want_int(document, "workers", config.workers, "", errors);
  want_bool(document, "dump_traces", config.dump_traces, "", errors);
  want_bool(document, "compare_oracle", config.compare_oracle, "", errors);

  if (document.contains("memory")) {
    const json& memory = document.at("memory");
    if (!memory.is_object()) {
      errors.add("'memory' must be an object");
    } else {
      check_keys(memory, {"size", "update", "initial"}, "memory.", errors);
      want_int(memory, "size", config.memory.size, "memory.", errors);
      want_int(memory, "initial", config.memory.initial, "memory.", errors);
      if (memory.contains("update")) {
        const json& update = memory.at("update");
        if (update.is_string()) {
          config.memory.update_kind = update.get<std::string>();
        } else if (update.is_array()) {
          config.memory.update_kind = "table";
          parse_int3(update, config.memory.update_table, "memory.update", errors);
        } else {
          errors.add("'memory.update' must be a kind string or a table");
        }
      }
    }
  }

  if (document.contains("caps")) {
    const json& caps = document.at("caps");
    if (!caps.is_object()) {
      errors.add("'caps' must be an object");
    } else {
      check_keys(caps, {"actions", "states", "paths", "strategies"}, "caps.", errors);
      want_uint(caps, "actions", config.caps.actions, "caps.", errors);
      want_uint(caps, "states", config.caps.states, "caps.", errors);
      want_uint(caps, "paths", config.caps.paths, "caps.", errors);
      want_uint(caps, "strategies", config.caps.strategies, "caps.", errors);
    }
  }

  if (document.contains("oracle")) {
    const json& oracle = document.at("oracle");
    if (!oracle.is_object()) {
      errors.add("'oracle' must be an object");
    } else {
      check_keys(oracle, {"general", "markov"}, "oracle.", errors);
      want_bool(oracle, "general", config.oracle.general, "oracle.", errors);
      want_bool(oracle, "markov", config.oracle.markov, "oracle.", errors);
    }
  }

  if (document.contains("scheme")) {
    const json& scheme = document.at("scheme");
    if (!scheme.is_object()) {
      errors.add("'scheme' must be an object");
    } else {
      check_keys(scheme, {"kind", "stages", "input"}, "scheme.", errors);
      want_string(scheme, "kind", config.scheme.kind, "scheme.", errors);
      if (scheme.contains("stages"))
        parse_int3(scheme.at("stages"), config.scheme.stages, "scheme.stages", errors);
      if (scheme.contains("input")) {
        const json& input = scheme.at("input");
        if (!input.is_array()) {
          errors.add("'scheme.input' must be an array of numbers");
        } else {
          for (const json& cell : input) {
            if (!cell.is_number()) {
              errors.add("'scheme.input' must be an array of numbers");
              config.scheme.input.clear();
              break;
            }
            config.scheme.input.push_back(cell.get<double>());
          }
        }
      }
    }
  }

  if (document.contains("verify")) {
    const json& verify = document.at("verify");
    if (!verify.is_object()) {
      errors.add("'verify' must be an object");
    } else {
      check_keys(verify, {"instances", "collapse_instances"}, "verify.", errors);
      want_uint(verify, "instances", config.verify.instances, "verify.", errors);
      want_uint(verify, "collapse_instances", config.verify.collapse_instances, "verify.",
                errors);
    }
  }

  if (errors.clean()) cross_checks(config, errors);
  errors.finish();
  return config;
}

std::string config_to_json(const ExperimentConfig& config) {
  json document;
  document["forward"] = config.forward;
  document["feedback"] = config.feedback;
  document["messages"] = config.messages;
  document["horizon"] = config.horizon;
  json memory;
  memory["size"] = config.memory.size;
  if (config.memory.update_kind == "table")
    memory["update"] = config.memory.update_table;
  else
    memory["update"] = config.memory.update_kind;
  memory["initial"] = config.memory.initial;
  document["memory"] = std::move(memory);
  document["caps"] = {{"actions", config.caps.actions},
                      {"states", config.caps.states},
                      {"paths", config.caps.paths},
                      {"strategies", config.caps.strategies}};
  document["oracle"] = {{"general", config.oracle.general}, {"markov", config.oracle.markov}};
  json scheme;
  scheme["kind"] = config.scheme.kind;
  scheme["stages"] = config.scheme.stages;
  scheme["input"] = config.scheme.input;
  document["scheme"] = std::move(scheme);
  document["trials"] = config.trials;
  document["seed"] = config.seed;
  document["decoder"] = config.decoder;
  document["workers"] = config.workers;
  document["dump_traces"] = config.dump_traces;
  document["compare_oracle"] = config.compare_oracle;
  document["verify"] = {{"instances", config.verify.instances},
                        {"collapse_instances", config.verify.collapse_instances}};
  return document.dump();
}

std::string config_hash(const ExperimentConfig& config) {
  std::string canonical = config_to_json(config);
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char byte : canonical) {
    hash ^= byte;
    hash *= 1099511628211ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[hash & 0xF];
    hash >>= 4;
  }
  return out;
}

ChannelPair make_channels(const ExperimentConfig& config) {
  return ChannelPair(StochasticKernel::from_rows(config.forward),
                     StochasticKernel::from_rows(config.feedback));
}

MemoryUpdate make_memory_update(const ExperimentConfig& config) {
  int Z = config.feedback.empty() ? 0 : static_cast<int>(config.feedback.front().size());
  if (config.memory.update_kind == "constant") {
    if (config.memory.size != 1)
      throw ValidationError("memory.update 'constant' needs memory.size == 1");
    return MemoryUpdate::constant(Z, config.messages);
  }
  if (config.memory.update_kind == "last_feedback")
    return MemoryUpdate::last_feedback(Z, config.messages);
  std::vector<int> flat;
  flat.reserve(static_cast<std::size_t>(config.memory.size) * static_cast<std::size_t>(Z) *
               static_cast<std::size_t>(config.messages));
  for (const auto& mid : config.memory.update_table)
    for (const auto& row : mid)
      for (int v : row) flat.push_back(v);
  return MemoryUpdate(config.memory.size, Z, config.messages, std::move(flat));
}

}  // namespace nfdp
