#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "nfdp/belief.hpp"
#include "nfdp/channel.hpp"
#include "nfdp/parallel.hpp"
#include "nfdp/policy.hpp"

namespace nfdp {

// true_posterior: maximum-likelihood decoding from the exact message
// posterior (path enumeration over feedback prefixes).
// recursive_belief: decoding by the argmax of the recursively chained
// posterior (the receiver's running belief-state update).
enum class Decoder { TruePosterior, RecursiveBelief };

std::string decoder_name(Decoder d);

struct EvalOptions {
  std::uint64_t path_cap = 10000000;  // bound on M * (|Y|*|Z|)^n
  Execution execution = Execution::Parallel;
};

struct EvaluationResult {
  double error_probability = 0.0;
  std::optional<double> std_error;  // Monte Carlo only
  std::uint64_t trials = 0;         // Monte Carlo only
  Decoder decoder = Decoder::TruePosterior;
  std::string method;
};

// Argmax of the posterior; ties resolve to the lowest message index.
int ml_decode(const MessageBelief& belief);

// Exact message posterior given an output history, marginalizing the unseen
// feedback symbols along every prefix: for each hypothesis w,
//   P(w | y_{1..t}) ~ prior(w) * sum_{z-prefix} prod_s Qf(y_s | f_s(w, z_{<s})) Qb(z_s | y_s).
MessageBelief true_posterior(const GeneralEncoder& encoder, const ChannelPair& channels,
                             std::span<const int> y_history, const MessageBelief& prior);

// Exact error probability of an encoder under the chosen decoder, by
// enumeration over output paths (feedback prefixes marginalized per path).
EvaluationResult exact_error_probability(const GeneralEncoder& encoder,
                                         const ChannelPair& channels, const MessageBelief& prior,
                                         Decoder decoder = Decoder::TruePosterior,
                                         const EvalOptions& options = {});

// Same quantity for a Markov policy, computed on the memory trellis instead
// of the feedback-prefix tree; the recursive decoder chains the policy's own
// compact memory beliefs.
EvaluationResult exact_error_probability(const MarkovPolicy& policy, const ChannelPair& channels,
                                         const MessageBelief& prior,
                                         Decoder decoder = Decoder::TruePosterior,
                                         const EvalOptions& options = {});

struct MonteCarloOptions {
  Execution execution = Execution::Parallel;
  std::uint64_t block_size = 4096;  // trials per derived RNG stream
};

// Seeded Monte Carlo estimate with maximum-likelihood decoding from the true
// posterior. Trials are partitioned into fixed blocks with independently
// derived RNG streams, so the estimate is bit-identical for any worker count.
EvaluationResult monte_carlo_pe(const GeneralEncoder& encoder, const ChannelPair& channels,
                                std::uint64_t trials, std::uint64_t seed,
                                const MonteCarloOptions& options = {});

EvaluationResult monte_carlo_pe(const MarkovPolicy& policy, const ChannelPair& channels,
                                std::uint64_t trials, std::uint64_t seed,
                                const MonteCarloOptions& options = {});

}  // namespace nfdp
