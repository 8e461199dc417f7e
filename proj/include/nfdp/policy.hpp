#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nfdp/channel.hpp"

namespace nfdp {

// Stage map phi: (message w, memory u) -> input symbol x. Stored row-major
// with w as the major index.
class EncoderMap {
 public:
  EncoderMap(int message_count, int memory_size, int input_size, std::vector<int> table);

  int operator()(int w, int u) const {
    return table_[static_cast<std::size_t>(w) * memory_size_ + u];
  }

  int message_count() const { return message_count_; }
  int memory_size() const { return memory_size_; }
  int input_size() const { return input_size_; }
  const std::vector<int>& table() const { return table_; }

  bool operator==(const EncoderMap&) const = default;

 private:
  int message_count_;
  int memory_size_;
  int input_size_;
  std::vector<int> table_;
};

// Number of distinct stage maps |X|^(|W|*|U|); throws CapacityError when the
// count exceeds `cap`.
std::uint64_t encoder_map_count(Alphabet messages, Alphabet memory, Alphabet inputs,
                                std::uint64_t cap = 1000000);

// The stage map at position `index` in lexicographic order of the flattened
// (w-major) table; index 0 is the all-zeros map. Random access by index lets
// workers partition the action space into ranges.
EncoderMap encoder_map_from_index(Alphabet messages, Alphabet memory, Alphabet inputs,
                                  std::uint64_t index);

// Lexicographic index of a stage map; inverse of encoder_map_from_index.
std::uint64_t encoder_map_index(const EncoderMap& map);

// Memory transition u' = g(u, z, w), a deterministic table shared by all
// stages. Stored with u as the major index, then z, then w.
class MemoryUpdate {
 public:
  MemoryUpdate(int memory_size, int feedback_size, int message_count, std::vector<int> table);

  int operator()(int u, int z, int w) const {
    return table_[(static_cast<std::size_t>(u) * feedback_size_ + z) * message_count_ + w];
  }

  int memory_size() const { return memory_size_; }
  int feedback_size() const { return feedback_size_; }
  int message_count() const { return message_count_; }
  const std::vector<int>& table() const { return table_; }

  // u' = z: the memory remembers the last feedback symbol. Requires |U| = |Z|.
  static MemoryUpdate last_feedback(int feedback_size, int message_count);
  // |U| = 1: memoryless.
  static MemoryUpdate constant(int feedback_size, int message_count);

  bool operator==(const MemoryUpdate&) const = default;

 private:
  int memory_size_;
  int feedback_size_;
  int message_count_;
  std::vector<int> table_;
};

// A fixed sequence of stage maps driven by a shared memory transition.
struct MarkovPolicy {
  std::vector<EncoderMap> stages;
  MemoryUpdate memory_update;
  int initial_memory = 0;

  MarkovPolicy(std::vector<EncoderMap> stage_maps, MemoryUpdate update, int initial = 0);

  int horizon() const { return static_cast<int>(stages.size()); }
  int message_count() const { return stages.front().message_count(); }
  int memory_size() const { return stages.front().memory_size(); }
  int input_size() const { return stages.front().input_size(); }
};

// Deterministic trajectory of a policy for a given message and feedback
// history: memories[t] is the memory entering stage t+1 (memories[0] is the
// initial memory) and inputs[t] the symbol sent at stage t+1.
struct Replay {
  std::vector<int> memories;  // length = |z_history| + 1
  std::vector<int> inputs;    // length = |z_history| when within horizon
};

Replay replay(const MarkovPolicy& policy, int w, std::span<const int> z_history);

// Encoder with unconstrained feedback dependence: the stage-t symbol is a
// function of the message and the full feedback prefix z_{1..t-1}. The prefix
// is addressed by its base-|Z| index with z_1 as the most significant digit.
class GeneralEncoder {
 public:
  GeneralEncoder(int message_count, int input_size, int feedback_size,
                 std::vector<std::vector<int>> stage_tables);

  int horizon() const { return static_cast<int>(stages_.size()); }
  int message_count() const { return message_count_; }
  int input_size() const { return input_size_; }
  int feedback_size() const { return feedback_size_; }

  // stage: 0-based; prefix_index: base-|Z| index of z_{1..stage}.
  int symbol(int stage, int w, std::uint64_t prefix_index) const {
    return stages_[stage][static_cast<std::size_t>(w) * prefix_count(stage) + prefix_index];
  }

  std::uint64_t prefix_count(int stage) const;  // |Z|^stage

  const std::vector<std::vector<int>>& stage_tables() const { return stages_; }

  bool operator==(const GeneralEncoder&) const = default;

 private:
  int message_count_;
  int input_size_;
  int feedback_size_;
  std::vector<std::vector<int>> stages_;
};

// Embeds a Markov policy into the general representation by replaying the
// memory along every feedback prefix.
GeneralEncoder markov_to_general(const MarkovPolicy& policy);

}  // namespace nfdp
