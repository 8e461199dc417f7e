#include "nfdp/oracle.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <string>

#include "nfdp/errors.hpp"

namespace nfdp {

namespace {

constexpr std::uint64_t kSearchBlock = 64;

std::uint64_t pow_checked(std::uint64_t base, std::uint64_t exp, std::uint64_t cap,
                          const char* what) {
  std::uint64_t out = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    if (out > cap / base)
      throw CapacityError(std::string(what) + ": strategy count exceeds cap " +
                          std::to_string(cap));
    out *= base;
  }
  return out;
}

void check_history(std::span<const int> history, int alphabet, int horizon, const char* what) {
  if (static_cast<int>(history.size()) > horizon)
    throw DomainError(std::string(what) + ": history longer than the horizon");
  for (int s : history)
    if (s < 0 || s >= alphabet)
      throw DomainError(std::string(what) + ": symbol outside alphabet");
}

// Enumerates feedback paths of length `len` in ascending base-|Z| index order
// (first symbol most significant), invoking f(path).
template <typename F>
void for_each_path(int z_size, int len, const F& f) {
  std::vector<int> path(static_cast<std::size_t>(len), 0);
  for (;;) {
    f(path);
    int pos = len - 1;
    while (pos >= 0 && path[static_cast<std::size_t>(pos)] == z_size - 1) {
      path[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++path[static_cast<std::size_t>(pos)];
  }
}

// First-argmin search over an indexed strategy family, blocked so that the
// parallel variant reproduces the serial left-to-right scan exactly.
template <typename Evaluate>
std::pair<double, std::uint64_t> argmin_by_index(std::uint64_t count, Execution execution,
                                                 const Evaluate& evaluate) {
  if (execution == Execution::Serial) {
    double best = std::numeric_limits<double>::infinity();
    std::uint64_t best_index = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
      double v = evaluate(i);
      if (v < best) {
        best = v;
        best_index = i;
      }
    }
    return {best, best_index};
  }
  std::uint64_t blocks = (count + kSearchBlock - 1) / kSearchBlock;
  std::vector<double> block_best(static_cast<std::size_t>(blocks),
                                 std::numeric_limits<double>::infinity());
  std::vector<std::uint64_t> block_index(static_cast<std::size_t>(blocks), 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(blocks); ++b) {
    std::uint64_t begin = static_cast<std::uint64_t>(b) * kSearchBlock;
    std::uint64_t end = std::min(count, begin + kSearchBlock);
    double best = std::numeric_limits<double>::infinity();
    std::uint64_t best_index = begin;
    for (std::uint64_t i = begin; i < end; ++i) {
      double v = evaluate(i);
      if (v < best) {
        best = v;
        best_index = i;
      }
    }
    block_best[static_cast<std::size_t>(b)] = best;
    block_index[static_cast<std::size_t>(b)] = best_index;
  }
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t best_index = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    if (block_best[b] < best) {
      best = block_best[b];
      best_index = block_index[b];
    }
  }
  return {best, best_index};
}

GeneralEncoder general_from_index(int message_count, int input_size, int feedback_size,
                                  int horizon, std::uint64_t index) {
  // Slots are ordered stage-major, then message, then feedback prefix; the
  // first slot holds the most significant digit so index order is
  // lexicographic order of the flattened strategy.
  std::vector<std::vector<int>> tables(static_cast<std::size_t>(horizon));
  std::uint64_t prefixes = 1;
  std::vector<std::size_t> sizes(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    sizes[static_cast<std::size_t>(t)] = static_cast<std::size_t>(message_count) * prefixes;
    tables[static_cast<std::size_t>(t)].resize(sizes[static_cast<std::size_t>(t)]);
    prefixes *= static_cast<std::uint64_t>(feedback_size);
  }
  for (int t = horizon - 1; t >= 0; --t) {
    auto& table = tables[static_cast<std::size_t>(t)];
    for (std::size_t slot = table.size(); slot-- > 0;) {
      table[slot] = static_cast<int>(index % input_size);
      index /= static_cast<std::uint64_t>(input_size);
    }
  }
  return GeneralEncoder(message_count, input_size, feedback_size, std::move(tables));
}

}  // namespace

MessageBelief oracle_message_posterior(const MarkovPolicy& policy, const ChannelPair& channels,
                                       std::span<const int> y_history) {
  check_history(y_history, channels.output_size(), policy.horizon(),
                "oracle_message_posterior");
  int M = policy.message_count();
  int Z = channels.feedback_size();
  int t = static_cast<int>(y_history.size());
  if (t == 0) return MessageBelief::uniform(M);

  std::vector<double> joint(static_cast<std::size_t>(M), 0.0);
  for (int w = 0; w < M; ++w) {
    double sum = 0.0;
    // z_t does not influence y_{1..t}; enumerate prefixes z_{1..t-1} only.
    for_each_path(Z, t - 1, [&](const std::vector<int>& zs) {
      Replay r = replay(policy, w, zs);
      double weight = 1.0;
      for (int s = 0; s < t; ++s) {
        int u = r.memories[static_cast<std::size_t>(s)];
        weight *= channels.forward(policy.stages[static_cast<std::size_t>(s)](w, u),
                                   y_history[static_cast<std::size_t>(s)]);
        if (s < t - 1)
          weight *= channels.feedback(y_history[static_cast<std::size_t>(s)],
                                      zs[static_cast<std::size_t>(s)]);
      }
      sum += weight;
    });
    joint[static_cast<std::size_t>(w)] = sum / static_cast<double>(M);
  }
  double total = 0.0;
  for (double p : joint) total += p;
  if (!(total > 0.0))
    throw ImpossibleEvidenceError("oracle_message_posterior: history has probability zero");
  for (double& p : joint) p /= total;
  return MessageBelief(std::move(joint));
}

std::vector<double> oracle_memory_conditional(const MarkovPolicy& policy,
                                              const ChannelPair& channels,
                                              std::span<const int> y_history, int w) {
  check_history(y_history, channels.output_size(), policy.horizon(),
                "oracle_memory_conditional");
  if (w < 0 || w >= policy.message_count())
    throw DomainError("oracle_memory_conditional: message outside alphabet");
  int U = policy.memory_size();
  int Z = channels.feedback_size();
  int t = static_cast<int>(y_history.size());
  std::vector<double> joint(static_cast<std::size_t>(U) * U, 0.0);
  if (t == 0) {
    joint[static_cast<std::size_t>(policy.initial_memory) * U + policy.initial_memory] = 1.0;
    return joint;
  }
  // The full feedback path z_{1..t} matters here: z_t determines the second
  // pair coordinate.
  for_each_path(Z, t, [&](const std::vector<int>& zs) {
    Replay r = replay(policy, w, zs);
    double weight = 1.0;
    for (int s = 0; s < t; ++s) {
      weight *= channels.forward(
          policy.stages[static_cast<std::size_t>(s)](w, r.memories[static_cast<std::size_t>(s)]),
          y_history[static_cast<std::size_t>(s)]);
      weight *= channels.feedback(y_history[static_cast<std::size_t>(s)],
                                  zs[static_cast<std::size_t>(s)]);
    }
    if (weight == 0.0) return;
    int u_last = r.memories[static_cast<std::size_t>(t - 1)];
    int u_next = r.memories[static_cast<std::size_t>(t)];
    joint[static_cast<std::size_t>(u_last) * U + u_next] += weight;
  });
  double total = 0.0;
  for (double p : joint) total += p;
  if (!(total > 0.0))
    throw ImpossibleEvidenceError(
        "oracle_memory_conditional: conditioning event has probability zero");
  for (double& p : joint) p /= total;
  return joint;
}

SenderBelief oracle_sender_conditional(const MarkovPolicy& policy, const ChannelPair& channels,
                                       std::span<const int> z_history, int w) {
  check_history(z_history, channels.feedback_size(), policy.horizon(),
                "oracle_sender_conditional");
  if (w < 0 || w >= policy.message_count())
    throw DomainError("oracle_sender_conditional: message outside alphabet");
  int M = policy.message_count();
  int U = policy.memory_size();
  int Y = channels.output_size();
  int t = static_cast<int>(z_history.size());

  if (t == 0) return initial_sender_belief(M, U, policy.initial_memory);

  Replay r = replay(policy, w, z_history);

  std::map<std::vector<std::int64_t>, std::size_t> seen;
  std::vector<BeliefAtom> atoms;
  std::vector<double> weights;
  double total = 0.0;
  std::size_t per_message = static_cast<std::size_t>(U) * U;

  for_each_path(Y, t, [&](const std::vector<int>& ys) {
    double weight = 1.0;
    for (int s = 0; s < t; ++s) {
      weight *= channels.forward(
          policy.stages[static_cast<std::size_t>(s)](w, r.memories[static_cast<std::size_t>(s)]),
          ys[static_cast<std::size_t>(s)]);
      weight *= channels.feedback(ys[static_cast<std::size_t>(s)],
                                  z_history[static_cast<std::size_t>(s)]);
    }
    if (weight == 0.0) return;

    MessageBelief posterior = oracle_message_posterior(policy, channels, ys);
    std::vector<double> joints(static_cast<std::size_t>(M) * per_message);
    for (int wh = 0; wh < M; ++wh) {
      std::vector<double> slice = oracle_memory_conditional(policy, channels, ys, wh);
      std::copy(slice.begin(), slice.end(),
                joints.begin() + static_cast<std::size_t>(wh) * per_message);
    }
    BeliefAtom atom(std::move(posterior), MemoryBelief(M, U, std::move(joints)));
    total += weight;
    auto it = seen.find(atom.key);
    if (it == seen.end()) {
      seen.emplace(atom.key, atoms.size());
      atoms.push_back(std::move(atom));
      weights.push_back(weight);
    } else {
      weights[it->second] += weight;
    }
  });

  if (!(total > 0.0))
    throw ImpossibleEvidenceError(
        "oracle_sender_conditional: conditioning event has probability zero");
  for (double& p : weights) p /= total;
  return SenderBelief(std::move(atoms), std::move(weights));
}

GeneralSearchResult exhaustive_general(const ChannelPair& channels, int horizon,
                                       int message_count, const OracleOptions& options) {
  if (horizon < 1) throw DomainError("exhaustive_general: horizon must be at least 1");
  if (message_count < 2) throw DomainError("exhaustive_general: need at least 2 messages");
  int X = channels.input_size();
  int Z = channels.feedback_size();
  std::uint64_t slots = 0;
  std::uint64_t prefixes = 1;
  for (int t = 0; t < horizon; ++t) {
    slots += static_cast<std::uint64_t>(message_count) * prefixes;
    prefixes *= static_cast<std::uint64_t>(Z);
  }
  std::uint64_t count = pow_checked(X, slots, options.strategy_cap, "exhaustive_general");

  MessageBelief prior = MessageBelief::uniform(message_count);
  EvalOptions eval;
  eval.path_cap = options.path_cap;
  eval.execution = Execution::Serial;  // the strategy loop is the parallel axis

  auto evaluate = [&](std::uint64_t index) {
    GeneralEncoder enc = general_from_index(message_count, X, Z, horizon, index);
    return exact_error_probability(enc, channels, prior, Decoder::TruePosterior, eval)
        .error_probability;
  };
  auto [best, best_index] = argmin_by_index(count, options.execution, evaluate);

  GeneralSearchResult result{best, best_index, count,
                             general_from_index(message_count, X, Z, horizon, best_index)};
  return result;
}

MarkovSearchResult exhaustive_markov(const ChannelPair& channels, int horizon, int message_count,
                                     int memory_size, const MemoryUpdate& memory_update,
                                     int initial_memory, const OracleOptions& options) {
  if (horizon < 1) throw DomainError("exhaustive_markov: horizon must be at least 1");
  std::uint64_t maps = encoder_map_count(Alphabet(message_count), Alphabet(memory_size),
                                         Alphabet(channels.input_size()), options.strategy_cap);
  std::uint64_t count = pow_checked(maps, static_cast<std::uint64_t>(horizon),
                                    options.strategy_cap, "exhaustive_markov");

  MessageBelief prior = MessageBelief::uniform(message_count);
  EvalOptions eval;
  eval.path_cap = options.path_cap;
  eval.execution = Execution::Serial;

  auto policy_from_index = [&](std::uint64_t index) {
    std::vector<std::uint64_t> stage_indices(static_cast<std::size_t>(horizon));
    for (int t = horizon - 1; t >= 0; --t) {
      stage_indices[static_cast<std::size_t>(t)] = index % maps;
      index /= maps;
    }
    std::vector<EncoderMap> stages;
    stages.reserve(static_cast<std::size_t>(horizon));
    for (std::uint64_t si : stage_indices)
      stages.push_back(encoder_map_from_index(Alphabet(message_count), Alphabet(memory_size),
                                              Alphabet(channels.input_size()), si));
    return MarkovPolicy(std::move(stages), memory_update, initial_memory);
  };

  auto evaluate = [&](std::uint64_t index) {
    return exact_error_probability(policy_from_index(index), channels, prior,
                                   Decoder::TruePosterior, eval)
        .error_probability;
  };
  auto [best, best_index] = argmin_by_index(count, options.execution, evaluate);

  MarkovSearchResult result{best, best_index, count, policy_from_index(best_index)};
  return result;
}

}  // namespace nfdp
