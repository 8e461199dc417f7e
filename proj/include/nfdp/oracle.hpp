#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nfdp/belief.hpp"
#include "nfdp/channel.hpp"
#include "nfdp/evaluate.hpp"
#include "nfdp/parallel.hpp"
#include "nfdp/policy.hpp"

namespace nfdp {

// Brute-force conditionals computed directly from the joint distribution over
// (message, outputs, feedback, memories) by full path enumeration. These are
// the reference implementations the recursive belief updates are tested
// against; they share no update code with the recursion.

// P(w | y_history) for a Markov policy.
MessageBelief oracle_message_posterior(const MarkovPolicy& policy, const ChannelPair& channels,
                                       std::span<const int> y_history);

// P(u_t, u_{t+1} | y_history, w): the joint distribution of the memory that
// produced the last output and the memory after the following feedback
// symbol. Returned row-major as a |U| x |U| matrix. An empty history yields
// the point mass at (initial, initial).
std::vector<double> oracle_memory_conditional(const MarkovPolicy& policy,
                                              const ChannelPair& channels,
                                              std::span<const int> y_history, int w);

// Distribution of the receiver's belief pair given the transmitter's
// information (feedback history, true message, and the implied memory and
// input trajectory). Atoms are assembled from the two conditionals above per
// output path and merged on the canonical grid.
SenderBelief oracle_sender_conditional(const MarkovPolicy& policy, const ChannelPair& channels,
                                       std::span<const int> z_history, int w);

struct OracleOptions {
  std::uint64_t strategy_cap = 1000000;
  std::uint64_t path_cap = 10000000;
  Execution execution = Execution::Parallel;
};

struct GeneralSearchResult {
  double value = 0.0;
  std::uint64_t best_index = 0;
  std::uint64_t searched = 0;
  GeneralEncoder best;
};

// Minimum exact error probability over ALL feedback encoders (every map from
// (w, feedback prefix) to an input, jointly over stages), by exhaustive
// search with maximum-likelihood decoding. Ties resolve to the
// lexicographically first strategy.
GeneralSearchResult exhaustive_general(const ChannelPair& channels, int horizon,
                                       int message_count, const OracleOptions& options = {});

struct MarkovSearchResult {
  double value = 0.0;
  std::uint64_t best_index = 0;
  std::uint64_t searched = 0;
  MarkovPolicy best;
};

// Minimum exact error probability over all stage-map sequences driven by the
// given memory transition.
MarkovSearchResult exhaustive_markov(const ChannelPair& channels, int horizon, int message_count,
                                     int memory_size, const MemoryUpdate& memory_update,
                                     int initial_memory = 0, const OracleOptions& options = {});

}  // namespace nfdp
