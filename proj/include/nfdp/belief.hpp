#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nfdp/channel.hpp"
#include "nfdp/policy.hpp"

namespace nfdp {

// Fixed-point grid used for canonical keys: probabilities are keyed by their
// position on a 1e-9 lattice so that floating-point jitter does not split
// atoms that represent the same belief.
inline constexpr std::int64_t kCanonicalGrid = 1000000000;

// Rounds a probability vector onto the canonical grid. The rounded integers
// are adjusted largest-remainder style to sum to exactly kCanonicalGrid, so
// deriving a key from an already-canonical vector reproduces it bit-exactly.
std::vector<std::int64_t> canonical_key(std::span<const double> probs);

// Posterior over messages given the observation history.
class MessageBelief {
 public:
  explicit MessageBelief(std::vector<double> probs);

  static MessageBelief uniform(int message_count);

  int message_count() const { return static_cast<int>(probs_.size()); }
  double operator()(int w) const { return probs_[static_cast<std::size_t>(w)]; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

// For each message hypothesis w, the joint distribution of the memory pair
// (u, u') straddling the current stage: u is the memory that produced the
// latest transmission and u' the memory after the unseen feedback symbol.
// Layout: w-major, then u, then u'.
class MemoryBelief {
 public:
  MemoryBelief(int message_count, int memory_size, std::vector<double> joints);

  // Point mass at (u0, u0) for every message: nothing observed yet.
  static MemoryBelief initial(int message_count, int memory_size, int initial_memory);

  int message_count() const { return message_count_; }
  int memory_size() const { return memory_size_; }

  double joint(int w, int u, int u_next) const {
    return joints_[(static_cast<std::size_t>(w) * memory_size_ + u) * memory_size_ + u_next];
  }

  // Marginal over the pair's first coordinate.
  std::vector<double> current_marginal(int w) const;
  // Marginal over the pair's second coordinate: the distribution of the
  // memory entering the NEXT stage, which is what the next update consumes.
  std::vector<double> next_marginal(int w) const;

  const std::vector<double>& data() const { return joints_; }

 private:
  int message_count_;
  int memory_size_;
  std::vector<double> joints_;
};

// One support point of the transmitter-side belief: a receiver posterior
// paired with the receiver's memory-pair belief, keyed on the canonical grid.
struct BeliefAtom {
  MessageBelief message;
  MemoryBelief memory;
  std::vector<std::int64_t> key;

  BeliefAtom(MessageBelief msg, MemoryBelief mem);
};

// Returns the atom whose probabilities sit exactly on the canonical grid.
// Idempotent: canonicalize(canonicalize(a)) == canonicalize(a).
BeliefAtom canonicalize(const BeliefAtom& atom);

// Finite mixture over belief atoms: what the transmitter knows about the
// receiver's beliefs given its own observations. Atoms are kept sorted by
// canonical key; weights are positive and sum to 1.
class SenderBelief {
 public:
  SenderBelief(std::vector<BeliefAtom> atoms, std::vector<double> weights);

  std::size_t atom_count() const { return atoms_.size(); }
  const BeliefAtom& atom(std::size_t i) const { return atoms_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }

  // Flattened key over (atom key, weight key) pairs; two sender beliefs with
  // equal keys are treated as the same dynamic-program state.
  const std::vector<std::int64_t>& key() const { return key_; }

 private:
  std::vector<BeliefAtom> atoms_;
  std::vector<double> weights_;
  std::vector<std::int64_t> key_;
};

// Belief before anything is observed: uniform posterior, memory pair pinned
// at the initial memory, a single atom of weight 1.
SenderBelief initial_sender_belief(int message_count, int memory_size, int initial_memory);

// Receiver posterior update for one observed channel output y:
//   post(w) ~ prev(w) * sum_u memory_marginal_w(u) * Qf(y | phi(w, u)).
// `memory` is the pair belief from the previous stage; its second-coordinate
// marginal is the distribution of the memory that produced this symbol.
MessageBelief update_message_belief(const MessageBelief& prev, const MemoryBelief& memory,
                                    const EncoderMap& encoder, int y,
                                    const StochasticKernel& forward);

// Memory pair update for one observed channel output y; per hypothesis w:
//   post_w(u, u') ~ sum_z marg_w(u) * Qf(y | phi(w, u)) * Qb(z | y) * [u' = g(u, z, w)].
// A hypothesis the observation rules out entirely keeps the uniform pair
// conditional: its posterior weight is zero everywhere it is consumed, and the
// fixed choice keeps canonical keys comparable across histories.
MemoryBelief update_memory_belief(const MemoryBelief& prev, const EncoderMap& encoder, int y,
                                  const StochasticKernel& forward,
                                  const StochasticKernel& feedback,
                                  const MemoryUpdate& memory_update);

// Transmitter-side belief update after sending with memory u (true message w)
// and observing feedback z: every atom is pushed through the receiver updates
// for every channel output y, branches weighted by Qf(y | phi(w,u)) * Qb(z|y),
// atoms with equal canonical keys merged, weights normalized.
SenderBelief update_sender_belief(const SenderBelief& prev, const EncoderMap& encoder, int z,
                                  int u, int w, const StochasticKernel& forward,
                                  const StochasticKernel& feedback,
                                  const MemoryUpdate& memory_update);

// Receiver-side chain state: the posterior and memory-pair belief evolved
// jointly along an output history.
struct ReceiverState {
  MessageBelief message;
  MemoryBelief memory;
};

ReceiverState initial_receiver_state(int message_count, int memory_size, int initial_memory);

// Advances both receiver beliefs by one observed output under stage map
// `encoder`. The posterior update runs off the pre-update memory belief.
ReceiverState advance_receiver(const ReceiverState& state, const EncoderMap& encoder, int y,
                               const ChannelPair& channels, const MemoryUpdate& memory_update);

}  // namespace nfdp
