#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "nfdp/belief.hpp"
#include "nfdp/channel.hpp"
#include "nfdp/parallel.hpp"
#include "nfdp/policy.hpp"

namespace nfdp {

struct SolverCaps {
  std::uint64_t action_cap = 1000000;   // stage maps per stage
  std::uint64_t state_cap = 10000000;   // states summed over all layers
};

// One dynamic-program state: what the transmitter knows at the start of a
// stage. The message and own memory are known exactly; the sender belief
// summarizes everything else. `stage` is 1-based; stage horizon+1 is terminal.
struct DPState {
  int stage;
  SenderBelief belief;
  int memory;
  int message;
  std::vector<std::int64_t> key;  // belief key extended by (memory, message)

  DPState(int stage_index, SenderBelief sender_belief, int memory_value, int message_value);
};

// States reachable at one stage, deduplicated by canonical key. The map sends
// a state key to its index in `states`; indices are assigned in the order
// states were first produced, so layers are reproducible.
struct StateLayer {
  std::vector<DPState> states;
  std::map<std::vector<std::int64_t>, std::size_t> index;

  // Index of the state with this key, or npos when absent.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t find(const std::vector<std::int64_t>& key) const;
};

struct ReachableStates {
  std::vector<StateLayer> layers;  // layers[t] holds stage t+1 states
  int horizon = 0;
  int message_count = 0;
  int memory_size = 0;
  std::uint64_t action_count = 0;
};

// Forward pass: starts from one state per message (uniform posterior, pinned
// memory) and closes the layers under every stage map and every feedback
// symbol of positive probability. Throws CapacityError when the action count
// or the cumulative state count exceeds the caps.
ReachableStates enumerate_reachable_states(const ChannelPair& channels, int horizon,
                                           int message_count, int memory_size,
                                           const MemoryUpdate& memory_update, int initial_memory,
                                           const SolverCaps& caps = {},
                                           Execution execution = Execution::Parallel);

// Cost of stopping now: the probability that a maximum-posterior guess is
// wrong, averaged over the belief's atoms.
double expected_terminal_cost(const SenderBelief& belief);

// Terminal cost of a state; validates that the state sits past the horizon.
double terminal_value(const DPState& state, int horizon);

// Values and minimizing actions for every enumerated state. For non-terminal
// layers, argmin[t][i] is the lowest-index stage map attaining the minimum and
// argmin_successors[t][i] lists (feedback symbol, next-layer state index)
// pairs under that map. Terminal entries carry argmin -1 and no successors.
struct ValueTable {
  std::vector<std::vector<double>> values;
  std::vector<std::vector<std::int64_t>> argmin;
  std::vector<std::vector<std::vector<std::pair<int, std::size_t>>>> argmin_successors;
};

// Backward pass over the enumerated layers. Successor states are recomputed
// with the same update code the forward pass used, so their keys are found
// exactly; a missing successor indicates a bug and raises InternalError.
ValueTable backward_induction(const ReachableStates& reachable, const ChannelPair& channels,
                              const MemoryUpdate& memory_update,
                              Execution execution = Execution::Parallel);

struct SolveReport {
  int horizon = 0;
  int message_count = 0;
  std::vector<double> message_values;  // stage-1 value per message
  double averaged_value = 0.0;         // mean of message_values
  // True when every state reached by following the minimizing maps agrees,
  // stage by stage, on a single map index across all message branches. Only
  // then do the per-state minima assemble into one realizable policy.
  bool consistent = false;
  std::vector<std::vector<std::int64_t>> branch_maps;  // per message, per stage
  std::optional<MarkovPolicy> extracted;               // present when consistent
  std::optional<double> extracted_exact_pe;            // exact value of `extracted`
  std::vector<std::size_t> state_counts;               // per layer
  double seconds = 0.0;
};

// Full pipeline: enumerate, run backward induction, walk the minimizing maps
// from each message's initial state, and extract a policy when the walk is
// consistent.
SolveReport solve(const ChannelPair& channels, int horizon, int message_count, int memory_size,
                  const MemoryUpdate& memory_update, int initial_memory,
                  const SolverCaps& caps = {}, Execution execution = Execution::Parallel);

}  // namespace nfdp
