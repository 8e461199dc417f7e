#include "nfdp/evaluate.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "nfdp/errors.hpp"

namespace nfdp {

namespace {

constexpr std::uint64_t kPathBlock = 256;

void check_path_cap(int message_count, int y_size, int z_size, int horizon, std::uint64_t cap) {
  std::uint64_t budget = static_cast<std::uint64_t>(message_count);
  std::uint64_t per_stage = static_cast<std::uint64_t>(y_size) * static_cast<std::uint64_t>(z_size);
  for (int t = 0; t < horizon; ++t) {
    if (budget > cap / per_stage)
      throw CapacityError("exact_error_probability: M*(|Y|*|Z|)^n exceeds the path cap " +
                          std::to_string(cap));
    budget *= per_stage;
  }
  if (budget > cap)
    throw CapacityError("exact_error_probability: M*(|Y|*|Z|)^n exceeds the path cap " +
                        std::to_string(cap));
}

std::uint64_t pow_u64(int base, int exp) {
  std::uint64_t out = 1;
  for (int i = 0; i < exp; ++i) out *= static_cast<std::uint64_t>(base);
  return out;
}

void decode_path_index(std::uint64_t index, int base, int length, std::vector<int>& digits) {
  digits.assign(static_cast<std::size_t>(length), 0);
  for (int pos = length - 1; pos >= 0; --pos) {
    digits[static_cast<std::size_t>(pos)] = static_cast<int>(index % base);
    index /= static_cast<std::uint64_t>(base);
  }
}

// prior(w) * P(y-path | w) for every w, marginalizing feedback prefixes.
std::vector<double> path_evidence(const GeneralEncoder& encoder, const ChannelPair& channels,
                                  std::span<const int> ys, const MessageBelief& prior) {
  int M = encoder.message_count();
  int Z = encoder.feedback_size();
  int t = static_cast<int>(ys.size());
  std::vector<double> evidence(static_cast<std::size_t>(M), 0.0);
  std::vector<double> alpha, beta;
  for (int w = 0; w < M; ++w) {
    alpha.assign(1, 1.0);
    double value = 1.0;
    for (int s = 0; s < t; ++s) {
      int y = ys[static_cast<std::size_t>(s)];
      std::size_t prefixes = alpha.size();
      beta.assign(prefixes, 0.0);
      for (std::size_t p = 0; p < prefixes; ++p)
        beta[p] = alpha[p] * channels.forward(encoder.symbol(s, w, p), y);
      if (s == t - 1) {
        value = 0.0;
        for (double b : beta) value += b;
      } else {
        alpha.assign(prefixes * static_cast<std::size_t>(Z), 0.0);
        for (std::size_t p = 0; p < prefixes; ++p) {
          if (beta[p] == 0.0) continue;
          for (int z = 0; z < Z; ++z)
            alpha[p * static_cast<std::size_t>(Z) + static_cast<std::size_t>(z)] =
                beta[p] * channels.feedback(y, z);
        }
      }
    }
    evidence[static_cast<std::size_t>(w)] = prior(w) * (t == 0 ? 1.0 : value);
  }
  return evidence;
}

// Same quantity on the memory trellis of a Markov policy.
std::vector<double> path_evidence(const MarkovPolicy& policy, const ChannelPair& channels,
                                  std::span<const int> ys, const MessageBelief& prior) {
  int M = policy.message_count();
  int U = policy.memory_size();
  int Z = policy.memory_update.feedback_size();
  int t = static_cast<int>(ys.size());
  std::vector<double> evidence(static_cast<std::size_t>(M), 0.0);
  std::vector<double> alpha(static_cast<std::size_t>(U)), beta(static_cast<std::size_t>(U)),
      next(static_cast<std::size_t>(U));
  for (int w = 0; w < M; ++w) {
    alpha.assign(static_cast<std::size_t>(U), 0.0);
    alpha[static_cast<std::size_t>(policy.initial_memory)] = 1.0;
    double value = 1.0;
    for (int s = 0; s < t; ++s) {
      int y = ys[static_cast<std::size_t>(s)];
      for (int u = 0; u < U; ++u)
        beta[static_cast<std::size_t>(u)] =
            alpha[static_cast<std::size_t>(u)] *
            channels.forward(policy.stages[static_cast<std::size_t>(s)](w, u), y);
      if (s == t - 1) {
        value = 0.0;
        for (double b : beta) value += b;
      } else {
        next.assign(static_cast<std::size_t>(U), 0.0);
        for (int u = 0; u < U; ++u) {
          if (beta[static_cast<std::size_t>(u)] == 0.0) continue;
          for (int z = 0; z < Z; ++z)
            next[static_cast<std::size_t>(policy.memory_update(u, z, w))] +=
                beta[static_cast<std::size_t>(u)] * channels.feedback(y, z);
        }
        alpha = next;
      }
    }
    evidence[static_cast<std::size_t>(w)] = prior(w) * (t == 0 ? 1.0 : value);
  }
  return evidence;
}

int argmax_lowest(std::span<const double> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i)
    if (values[static_cast<std::size_t>(i)] > values[static_cast<std::size_t>(best)]) best = i;
  return best;
}

// Decoder that chains the receiver's running posterior over the feedback
// prefix tree. Dead hypotheses keep probability zero and are never revived.
int recursive_decode(const GeneralEncoder& encoder, const ChannelPair& channels,
                     std::span<const int> ys) {
  int M = encoder.message_count();
  int Z = encoder.feedback_size();
  int t = static_cast<int>(ys.size());
  std::vector<double> posterior(static_cast<std::size_t>(M), 1.0 / M);
  std::vector<std::vector<double>> memory(static_cast<std::size_t>(M),
                                          std::vector<double>{1.0});
  std::vector<double> like(static_cast<std::size_t>(M));
  for (int s = 0; s < t; ++s) {
    int y = ys[static_cast<std::size_t>(s)];
    double total = 0.0;
    for (int w = 0; w < M; ++w) {
      auto& m = memory[static_cast<std::size_t>(w)];
      double l = 0.0;
      for (std::size_t p = 0; p < m.size(); ++p)
        l += m[p] * channels.forward(encoder.symbol(s, w, p), y);
      like[static_cast<std::size_t>(w)] = l;
      total += posterior[static_cast<std::size_t>(w)] * l;
    }
    if (!(total > 0.0))
      throw ImpossibleEvidenceError("recursive decoder: zero-probability output path");
    for (int w = 0; w < M; ++w)
      posterior[static_cast<std::size_t>(w)] *= like[static_cast<std::size_t>(w)] / total;
    if (s == t - 1) break;
    for (int w = 0; w < M; ++w) {
      auto& m = memory[static_cast<std::size_t>(w)];
      std::vector<double> grown(m.size() * static_cast<std::size_t>(Z), 0.0);
      double l = like[static_cast<std::size_t>(w)];
      if (l > 0.0) {
        for (std::size_t p = 0; p < m.size(); ++p) {
          double base = m[p] * channels.forward(encoder.symbol(s, w, p), y) / l;
          if (base == 0.0) continue;
          for (int z = 0; z < Z; ++z)
            grown[p * static_cast<std::size_t>(Z) + static_cast<std::size_t>(z)] =
                base * channels.feedback(y, z);
        }
      }
      m = std::move(grown);
    }
  }
  return argmax_lowest(posterior);
}

int recursive_decode(const MarkovPolicy& policy, const ChannelPair& channels,
                     std::span<const int> ys) {
  ReceiverState state = initial_receiver_state(policy.message_count(), policy.memory_size(),
                                               policy.initial_memory);
  for (int s = 0; s < static_cast<int>(ys.size()); ++s)
    state = advance_receiver(state, policy.stages[static_cast<std::size_t>(s)],
                             ys[static_cast<std::size_t>(s)], channels, policy.memory_update);
  return ml_decode(state.message);
}

// Sums per-path error mass over all output paths. The parallel variant
// partitions paths into fixed blocks and adds per-block sums in block order,
// so its result is invariant to thread count.
template <typename PerPath>
double sum_error_mass(std::uint64_t path_count, Execution execution, const PerPath& per_path) {
  if (execution == Execution::Serial) {
    double total = 0.0;
    for (std::uint64_t i = 0; i < path_count; ++i) total += per_path(i);
    return total;
  }
  std::uint64_t blocks = (path_count + kPathBlock - 1) / kPathBlock;
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(blocks); ++b) {
    std::uint64_t begin = static_cast<std::uint64_t>(b) * kPathBlock;
    std::uint64_t end = std::min(path_count, begin + kPathBlock);
    double acc = 0.0;
    for (std::uint64_t i = begin; i < end; ++i) acc += per_path(i);
    partial[static_cast<std::size_t>(b)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

template <typename Code>
EvaluationResult exact_pe_impl(const Code& code, const ChannelPair& channels,
                               const MessageBelief& prior, Decoder decoder,
                               const EvalOptions& options, int horizon) {
  int Y = channels.output_size();
  std::uint64_t path_count = pow_u64(Y, horizon);
  double error_mass =
      sum_error_mass(path_count, options.execution, [&](std::uint64_t index) -> double {
        thread_local std::vector<int> ys;
        decode_path_index(index, Y, horizon, ys);
        std::vector<double> evidence = path_evidence(code, channels, ys, prior);
        double total = 0.0;
        for (double e : evidence) total += e;
        if (total == 0.0) return 0.0;  // unreachable output path
        int decoded = decoder == Decoder::TruePosterior
                          ? argmax_lowest(evidence)
                          : recursive_decode(code, channels, ys);
        return total - evidence[static_cast<std::size_t>(decoded)];
      });
  EvaluationResult result;
  result.error_probability = error_mass;
  result.decoder = decoder;
  result.method = "exact";
  return result;
}

template <typename Code, typename Simulate, typename Decode>
EvaluationResult monte_carlo_impl(const Code&, const ChannelPair&, std::uint64_t trials,
                                  std::uint64_t seed, const MonteCarloOptions& options,
                                  int message_count, const Simulate& simulate,
                                  const Decode& decode) {
  if (trials == 0) throw DomainError("monte_carlo_pe: need at least one trial");
  std::uint64_t block = options.block_size == 0 ? 4096 : options.block_size;
  std::uint64_t blocks = (trials + block - 1) / block;
  std::vector<std::uint64_t> errors(static_cast<std::size_t>(blocks), 0);

  auto run_block = [&](std::uint64_t b) {
    Rng rng = Rng::derived(seed, b);
    std::uint64_t begin = b * block;
    std::uint64_t end = std::min(trials, begin + block);
    std::uint64_t err = 0;
    std::vector<int> ys;
    for (std::uint64_t i = begin; i < end; ++i) {
      int w = rng.next_index(message_count);
      simulate(w, rng, ys);
      if (decode(ys) != w) ++err;
    }
    errors[static_cast<std::size_t>(b)] = err;
  };

  if (options.execution == Execution::Serial) {
    for (std::uint64_t b = 0; b < blocks; ++b) run_block(b);
  } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(blocks); ++b)
      run_block(static_cast<std::uint64_t>(b));
  }

  std::uint64_t total_errors = 0;
  for (std::uint64_t e : errors) total_errors += e;
  double pe = static_cast<double>(total_errors) / static_cast<double>(trials);
  EvaluationResult result;
  result.error_probability = pe;
  result.std_error = std::sqrt(pe * (1.0 - pe) / static_cast<double>(trials));
  result.trials = trials;
  result.decoder = Decoder::TruePosterior;
  result.method = "monte_carlo";
  return result;
}

}  // namespace

std::string decoder_name(Decoder d) {
  return d == Decoder::TruePosterior ? "true_posterior" : "recursive_belief";
}

int ml_decode(const MessageBelief& belief) {
  return argmax_lowest(belief.probs());
}

MessageBelief true_posterior(const GeneralEncoder& encoder, const ChannelPair& channels,
                             std::span<const int> y_history, const MessageBelief& prior) {
  if (static_cast<int>(y_history.size()) > encoder.horizon())
    throw DomainError("true_posterior: history longer than the horizon");
  if (prior.message_count() != encoder.message_count())
    throw DomainError("true_posterior: prior size does not match the encoder");
  for (int y : y_history)
    if (y < 0 || y >= channels.output_size())
      throw DomainError("true_posterior: output symbol outside alphabet");
  std::vector<double> evidence = path_evidence(encoder, channels, y_history, prior);
  double total = 0.0;
  for (double e : evidence) total += e;
  if (!(total > 0.0))
    throw ImpossibleEvidenceError("true_posterior: the output history has probability zero");
  for (double& e : evidence) e /= total;
  return MessageBelief(std::move(evidence));
}

EvaluationResult exact_error_probability(const GeneralEncoder& encoder,
                                         const ChannelPair& channels, const MessageBelief& prior,
                                         Decoder decoder, const EvalOptions& options) {
  if (prior.message_count() != encoder.message_count())
    throw DomainError("exact_error_probability: prior size does not match the encoder");
  if (encoder.input_size() != channels.input_size() ||
      encoder.feedback_size() != channels.feedback_size())
    throw DomainError("exact_error_probability: encoder alphabets do not match the channels");
  check_path_cap(encoder.message_count(), channels.output_size(), channels.feedback_size(),
                 encoder.horizon(), options.path_cap);
  return exact_pe_impl(encoder, channels, prior, decoder, options, encoder.horizon());
}

EvaluationResult exact_error_probability(const MarkovPolicy& policy, const ChannelPair& channels,
                                         const MessageBelief& prior, Decoder decoder,
                                         const EvalOptions& options) {
  if (prior.message_count() != policy.message_count())
    throw DomainError("exact_error_probability: prior size does not match the policy");
  if (policy.input_size() != channels.input_size() ||
      policy.memory_update.feedback_size() != channels.feedback_size())
    throw DomainError("exact_error_probability: policy alphabets do not match the channels");
  check_path_cap(policy.message_count(), channels.output_size(), channels.feedback_size(),
                 policy.horizon(), options.path_cap);
  return exact_pe_impl(policy, channels, prior, decoder, options, policy.horizon());
}

EvaluationResult monte_carlo_pe(const GeneralEncoder& encoder, const ChannelPair& channels,
                                std::uint64_t trials, std::uint64_t seed,
                                const MonteCarloOptions& options) {
  int n = encoder.horizon();
  int Z = encoder.feedback_size();
  MessageBelief prior = MessageBelief::uniform(encoder.message_count());
  auto simulate = [&](int w, Rng& rng, std::vector<int>& ys) {
    ys.assign(static_cast<std::size_t>(n), 0);
    std::uint64_t prefix = 0;
    for (int t = 0; t < n; ++t) {
      int x = encoder.symbol(t, w, prefix);
      int y = sample(channels.forward, x, rng);
      int z = sample(channels.feedback, y, rng);
      ys[static_cast<std::size_t>(t)] = y;
      prefix = prefix * static_cast<std::uint64_t>(Z) + static_cast<std::uint64_t>(z);
    }
  };
  auto decode = [&](const std::vector<int>& ys) {
    std::vector<double> evidence = path_evidence(encoder, channels, ys, prior);
    return argmax_lowest(evidence);
  };
  return monte_carlo_impl(encoder, channels, trials, seed, options, encoder.message_count(),
                          simulate, decode);
}

EvaluationResult monte_carlo_pe(const MarkovPolicy& policy, const ChannelPair& channels,
                                std::uint64_t trials, std::uint64_t seed,
                                const MonteCarloOptions& options) {
  int n = policy.horizon();
  MessageBelief prior = MessageBelief::uniform(policy.message_count());
  auto simulate = [&](int w, Rng& rng, std::vector<int>& ys) {
    ys.assign(static_cast<std::size_t>(n), 0);
    int u = policy.initial_memory;
    for (int t = 0; t < n; ++t) {
      int x = policy.stages[static_cast<std::size_t>(t)](w, u);
      int y = sample(channels.forward, x, rng);
      int z = sample(channels.feedback, y, rng);
      ys[static_cast<std::size_t>(t)] = y;
      u = policy.memory_update(u, z, w);
    }
  };
  auto decode = [&](const std::vector<int>& ys) {
    std::vector<double> evidence = path_evidence(policy, channels, ys, prior);
    return argmax_lowest(evidence);
  };
  return monte_carlo_impl(policy, channels, trials, seed, options, policy.message_count(),
                          simulate, decode);
}

}  // namespace nfdp
