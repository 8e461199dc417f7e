#include "nfdp/dp_solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <limits>
#include <set>
#include <string>
#include <utility>

#include "nfdp/errors.hpp"
#include "nfdp/evaluate.hpp"

namespace nfdp {

namespace {

// Items per parallel work block and blocks per wave. Candidate states are
// generated block-parallel but merged serially in global item order, so the
// layers come out identical for any worker count.
constexpr std::uint64_t kExpandBlock = 64;
constexpr std::uint64_t kExpandWave = 256;

std::vector<std::int64_t> state_key(const SenderBelief& belief, int memory, int message) {
  std::vector<std::int64_t> key = belief.key();
  key.push_back(memory);
  key.push_back(message);
  return key;
}

// P(z | x) marginalized over the channel output; the accumulation order
// matches the branch-weight total inside the sender-belief update, so a zero
// here is exactly the case that update would reject.
std::vector<std::vector<double>> feedback_given_input(const ChannelPair& channels) {
  int X = channels.input_size();
  int Y = channels.output_size();
  int Z = channels.feedback_size();
  std::vector<std::vector<double>> zg(static_cast<std::size_t>(X),
                                      std::vector<double>(static_cast<std::size_t>(Z)));
  for (int x = 0; x < X; ++x)
    for (int z = 0; z < Z; ++z) {
      double total = 0.0;
      for (int y = 0; y < Y; ++y) total += channels.forward(x, y) * channels.feedback(y, z);
      zg[static_cast<std::size_t>(x)][static_cast<std::size_t>(z)] = total;
    }
  return zg;
}

std::vector<EncoderMap> materialize_actions(int message_count, int memory_size, int input_size,
                                            std::uint64_t action_count) {
  std::vector<EncoderMap> actions;
  actions.reserve(static_cast<std::size_t>(action_count));
  for (std::uint64_t a = 0; a < action_count; ++a)
    actions.push_back(encoder_map_from_index(Alphabet(message_count), Alphabet(memory_size),
                                             Alphabet(input_size), a));
  return actions;
}

void check_against(const ChannelPair& channels, int message_count, int memory_size,
                   const MemoryUpdate& memory_update, int initial_memory, const char* where) {
  std::string at(where);
  if (message_count < 2) throw DomainError(at + ": need at least two messages");
  if (memory_size < 1) throw DomainError(at + ": memory alphabet must be non-empty");
  if (initial_memory < 0 || initial_memory >= memory_size)
    throw DomainError(at + ": initial memory outside alphabet");
  if (memory_update.memory_size() != memory_size ||
      memory_update.message_count() != message_count ||
      memory_update.feedback_size() != channels.feedback_size())
    throw ValidationError(at + ": memory update dimensions disagree with the problem");
}

struct Expansion {
  const std::vector<DPState>* sources = nullptr;
  const std::vector<EncoderMap>* actions = nullptr;
  const std::vector<std::vector<double>>* zgiven = nullptr;
  const ChannelPair* channels = nullptr;
  const MemoryUpdate* memory_update = nullptr;
  int next_stage = 0;

  // Successors of one (state, action) item, feedback symbols ascending.
  void candidates(std::uint64_t item, std::vector<DPState>& out) const {
    std::uint64_t action_count = actions->size();
    const DPState& s = (*sources)[static_cast<std::size_t>(item / action_count)];
    const EncoderMap& phi = (*actions)[static_cast<std::size_t>(item % action_count)];
    int x = phi(s.message, s.memory);
    int Z = channels->feedback_size();
    for (int z = 0; z < Z; ++z) {
      if ((*zgiven)[static_cast<std::size_t>(x)][static_cast<std::size_t>(z)] == 0.0) continue;
      SenderBelief next = update_sender_belief(s.belief, phi, z, s.memory, s.message,
                                               channels->forward, channels->feedback,
                                               *memory_update);
      out.emplace_back(next_stage, std::move(next), (*memory_update)(s.memory, z, s.message),
                       s.message);
    }
  }
};

void insert_new(StateLayer& layer, DPState&& state, std::uint64_t state_cap,
                std::uint64_t& total_states, int stage) {
  auto it = layer.index.find(state.key);
  if (it != layer.index.end()) return;
  if (++total_states > state_cap)
    throw CapacityError("enumerate_reachable_states: stage " + std::to_string(stage) +
                        " pushes the state count past cap " + std::to_string(state_cap));
  layer.index.emplace(state.key, layer.states.size());
  layer.states.push_back(std::move(state));
}

}  // namespace

DPState::DPState(int stage_index, SenderBelief sender_belief, int memory_value, int message_value)
    : stage(stage_index),
      belief(std::move(sender_belief)),
      memory(memory_value),
      message(message_value),
      key(state_key(belief, memory_value, message_value)) {
  if (stage < 1) throw DomainError("DPState: stage index is 1-based");
}

std::size_t StateLayer::find(const std::vector<std::int64_t>& key) const {
  auto it = index.find(key);
  return it == index.end() ? npos : it->second;
}

ReachableStates enumerate_reachable_states(const ChannelPair& channels, int horizon,
                                           int message_count, int memory_size,
                                           const MemoryUpdate& memory_update, int initial_memory,
                                           const SolverCaps& caps, Execution execution) {
  if (horizon < 1) throw DomainError("enumerate_reachable_states: horizon must be at least 1");
  check_against(channels, message_count, memory_size, memory_update, initial_memory,
                "enumerate_reachable_states");

  std::uint64_t action_count =
      encoder_map_count(Alphabet(message_count), Alphabet(memory_size),
                        Alphabet(channels.input_size()), caps.action_cap);
  std::vector<EncoderMap> actions =
      materialize_actions(message_count, memory_size, channels.input_size(), action_count);
  std::vector<std::vector<double>> zgiven = feedback_given_input(channels);

  ReachableStates reachable;
  reachable.horizon = horizon;
  reachable.message_count = message_count;
  reachable.memory_size = memory_size;
  reachable.action_count = action_count;
  reachable.layers.resize(static_cast<std::size_t>(horizon) + 1);

  std::uint64_t total_states = 0;
  StateLayer& first = reachable.layers[0];
  for (int w = 0; w < message_count; ++w)
    insert_new(first,
               DPState(1, initial_sender_belief(message_count, memory_size, initial_memory),
                       initial_memory, w),
               caps.state_cap, total_states, 1);

  for (int t = 0; t < horizon; ++t) {
    const StateLayer& layer = reachable.layers[static_cast<std::size_t>(t)];
    StateLayer& next = reachable.layers[static_cast<std::size_t>(t) + 1];
    Expansion expand{&layer.states, &actions, &zgiven, &channels, &memory_update, t + 2};
    std::uint64_t item_count =
        static_cast<std::uint64_t>(layer.states.size()) * action_count;

    if (execution == Execution::Serial) {
      std::vector<DPState> scratch;
      for (std::uint64_t item = 0; item < item_count; ++item) {
        scratch.clear();
        expand.candidates(item, scratch);
        for (DPState& c : scratch)
          insert_new(next, std::move(c), caps.state_cap, total_states, t + 2);
      }
      continue;
    }

    // Parallel: waves of fixed-size blocks, generated concurrently, merged in
    // global item order so the first-encountered representative is the same
    // one the serial pass keeps.
    std::uint64_t wave_items = kExpandBlock * kExpandWave;
    for (std::uint64_t wave = 0; wave < item_count; wave += wave_items) {
      std::uint64_t wave_end = std::min(item_count, wave + wave_items);
      std::int64_t blocks =
          static_cast<std::int64_t>((wave_end - wave + kExpandBlock - 1) / kExpandBlock);
      std::vector<std::vector<DPState>> produced(static_cast<std::size_t>(blocks));
      std::atomic<bool> failed{false};
      std::exception_ptr error;
#pragma omp parallel for schedule(static)
      for (std::int64_t b = 0; b < blocks; ++b) {
        if (failed.load(std::memory_order_relaxed)) continue;
        try {
          std::uint64_t begin = wave + static_cast<std::uint64_t>(b) * kExpandBlock;
          std::uint64_t end = std::min(wave_end, begin + kExpandBlock);
          for (std::uint64_t item = begin; item < end; ++item)
            expand.candidates(item, produced[static_cast<std::size_t>(b)]);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
      if (failed.load()) std::rethrow_exception(error);
      for (std::vector<DPState>& block : produced)
        for (DPState& c : block)
          insert_new(next, std::move(c), caps.state_cap, total_states, t + 2);
    }
  }
  return reachable;
}

double expected_terminal_cost(const SenderBelief& belief) {
  double cost = 0.0;
  for (std::size_t i = 0; i < belief.atom_count(); ++i) {
    const MessageBelief& msg = belief.atom(i).message;
    double best = 0.0;
    for (int w = 0; w < msg.message_count(); ++w) best = std::max(best, msg(w));
    cost += belief.weight(i) * (1.0 - best);
  }
  return cost;
}

double terminal_value(const DPState& state, int horizon) {
  if (state.stage != horizon + 1)
    throw DomainError("terminal_value: state at stage " + std::to_string(state.stage) +
                      " is not terminal for horizon " + std::to_string(horizon));
  return expected_terminal_cost(state.belief);
}

ValueTable backward_induction(const ReachableStates& reachable, const ChannelPair& channels,
                              const MemoryUpdate& memory_update, Execution execution) {
  int horizon = reachable.horizon;
  if (horizon < 1 || reachable.layers.size() != static_cast<std::size_t>(horizon) + 1)
    throw DomainError("backward_induction: reachable set does not match its horizon");
  check_against(channels, reachable.message_count, reachable.memory_size, memory_update, 0,
                "backward_induction");

  std::vector<EncoderMap> actions = materialize_actions(
      reachable.message_count, reachable.memory_size, channels.input_size(),
      reachable.action_count);
  std::vector<std::vector<double>> zgiven = feedback_given_input(channels);
  int Z = channels.feedback_size();

  ValueTable table;
  table.values.resize(reachable.layers.size());
  table.argmin.resize(reachable.layers.size());
  table.argmin_successors.resize(reachable.layers.size());

  const StateLayer& last = reachable.layers[static_cast<std::size_t>(horizon)];
  table.values[static_cast<std::size_t>(horizon)].resize(last.states.size());
  table.argmin[static_cast<std::size_t>(horizon)].assign(last.states.size(), -1);
  table.argmin_successors[static_cast<std::size_t>(horizon)].resize(last.states.size());
  for (std::size_t i = 0; i < last.states.size(); ++i)
    table.values[static_cast<std::size_t>(horizon)][i] =
        terminal_value(last.states[i], horizon);

  for (int t = horizon - 1; t >= 0; --t) {
    const StateLayer& layer = reachable.layers[static_cast<std::size_t>(t)];
    const StateLayer& next = reachable.layers[static_cast<std::size_t>(t) + 1];
    const std::vector<double>& next_values = table.values[static_cast<std::size_t>(t) + 1];
    std::int64_t count = static_cast<std::int64_t>(layer.states.size());
    table.values[static_cast<std::size_t>(t)].resize(layer.states.size());
    table.argmin[static_cast<std::size_t>(t)].resize(layer.states.size());
    table.argmin_successors[static_cast<std::size_t>(t)].resize(layer.states.size());

    auto minimize = [&](std::int64_t i) {
      const DPState& s = layer.states[static_cast<std::size_t>(i)];
      double best = std::numeric_limits<double>::infinity();
      std::int64_t best_action = -1;
      std::vector<std::pair<int, std::size_t>> best_succ;
      std::vector<std::pair<int, std::size_t>> succ;
      for (std::uint64_t a = 0; a < reachable.action_count; ++a) {
        const EncoderMap& phi = actions[static_cast<std::size_t>(a)];
        int x = phi(s.message, s.memory);
        double value = 0.0;
        succ.clear();
        for (int z = 0; z < Z; ++z) {
          double pz = zgiven[static_cast<std::size_t>(x)][static_cast<std::size_t>(z)];
          if (pz == 0.0) continue;
          SenderBelief pushed =
              update_sender_belief(s.belief, phi, z, s.memory, s.message, channels.forward,
                                   channels.feedback, memory_update);
          std::size_t j =
              next.find(state_key(pushed, memory_update(s.memory, z, s.message), s.message));
          if (j == StateLayer::npos)
            throw InternalError("backward_induction: successor missing from the next layer");
          value += pz * next_values[j];
          succ.emplace_back(z, j);
        }
        if (value < best) {
          best = value;
          best_action = static_cast<std::int64_t>(a);
          best_succ = succ;
        }
      }
      table.values[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] = best;
      table.argmin[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] = best_action;
      table.argmin_successors[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] =
          std::move(best_succ);
    };

    if (execution == Execution::Serial) {
      for (std::int64_t i = 0; i < count; ++i) minimize(i);
    } else {
      std::atomic<bool> failed{false};
      std::exception_ptr error;
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < count; ++i) {
        if (failed.load(std::memory_order_relaxed)) continue;
        try {
          minimize(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
      if (failed.load()) std::rethrow_exception(error);
    }
  }
  return table;
}

SolveReport solve(const ChannelPair& channels, int horizon, int message_count, int memory_size,
                  const MemoryUpdate& memory_update, int initial_memory, const SolverCaps& caps,
                  Execution execution) {
  auto start = std::chrono::steady_clock::now();

  ReachableStates reachable = enumerate_reachable_states(
      channels, horizon, message_count, memory_size, memory_update, initial_memory, caps,
      execution);
  ValueTable table = backward_induction(reachable, channels, memory_update, execution);

  SolveReport report;
  report.horizon = horizon;
  report.message_count = message_count;
  for (const StateLayer& layer : reachable.layers) report.state_counts.push_back(layer.states.size());

  report.message_values.resize(static_cast<std::size_t>(message_count));
  double sum = 0.0;
  for (int w = 0; w < message_count; ++w) {
    report.message_values[static_cast<std::size_t>(w)] = table.values[0][static_cast<std::size_t>(w)];
    sum += table.values[0][static_cast<std::size_t>(w)];
  }
  report.averaged_value = sum / static_cast<double>(message_count);

  // Walk the minimizing maps from each message's initial state. The per-state
  // minima assemble into one policy exactly when every visited state of a
  // stage, across all branches, points at the same map.
  report.branch_maps.assign(static_cast<std::size_t>(message_count), {});
  std::vector<std::set<std::int64_t>> stage_choices(static_cast<std::size_t>(horizon));
  for (int w = 0; w < message_count; ++w) {
    std::set<std::size_t> frontier{static_cast<std::size_t>(w)};
    for (int t = 0; t < horizon; ++t) {
      std::set<std::size_t> successors;
      for (std::size_t i : frontier) {
        std::int64_t choice = table.argmin[static_cast<std::size_t>(t)][i];
        stage_choices[static_cast<std::size_t>(t)].insert(choice);
        for (const auto& [z, j] : table.argmin_successors[static_cast<std::size_t>(t)][i])
          successors.insert(j);
      }
      std::size_t lead = *frontier.begin();
      report.branch_maps[static_cast<std::size_t>(w)].push_back(
          table.argmin[static_cast<std::size_t>(t)][lead]);
      frontier = std::move(successors);
    }
  }
  report.consistent = true;
  for (const auto& choices : stage_choices)
    if (choices.size() != 1) report.consistent = false;

  if (report.consistent) {
    std::vector<EncoderMap> maps;
    for (int t = 0; t < horizon; ++t)
      maps.push_back(encoder_map_from_index(Alphabet(message_count), Alphabet(memory_size),
                                            Alphabet(channels.input_size()),
                                            static_cast<std::uint64_t>(
                                                *stage_choices[static_cast<std::size_t>(t)].begin())));
    MarkovPolicy policy(std::move(maps), memory_update, initial_memory);
    try {
      EvalOptions eval;
      eval.execution = execution;
      report.extracted_exact_pe =
          exact_error_probability(policy, channels, MessageBelief::uniform(message_count),
                                  Decoder::TruePosterior, eval)
              .error_probability;
    } catch (const CapacityError&) {
      report.extracted_exact_pe.reset();
    }
    report.extracted = std::move(policy);
  }

  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace nfdp
