#include "nfdp/policy.hpp"

#include <string>

#include "nfdp/errors.hpp"

namespace nfdp {

EncoderMap::EncoderMap(int message_count, int memory_size, int input_size, std::vector<int> table)
    : message_count_(message_count),
      memory_size_(memory_size),
      input_size_(input_size),
      table_(std::move(table)) {
  if (message_count_ < 2) throw DomainError("EncoderMap: need at least 2 messages");
  if (memory_size_ < 1 || input_size_ < 1)
    throw DomainError("EncoderMap: alphabet sizes must be at least 1");
  if (table_.size() != static_cast<std::size_t>(message_count_) * memory_size_)
    throw ValidationError("EncoderMap: expected " +
                          std::to_string(static_cast<std::size_t>(message_count_) * memory_size_) +
                          " entries, got " + std::to_string(table_.size()));
  for (int x : table_)
    if (x < 0 || x >= input_size_)
      throw ValidationError("EncoderMap: entry " + std::to_string(x) +
                            " outside input alphabet of size " + std::to_string(input_size_));
}

std::uint64_t encoder_map_count(Alphabet messages, Alphabet memory, Alphabet inputs,
                                std::uint64_t cap) {
  std::uint64_t slots = static_cast<std::uint64_t>(messages.size) * memory.size;
  std::uint64_t count = 1;
  for (std::uint64_t i = 0; i < slots; ++i) {
    if (count > cap / static_cast<std::uint64_t>(inputs.size))
      throw CapacityError("encoder_map_count: |X|^(|W|*|U|) exceeds cap " + std::to_string(cap));
    count *= static_cast<std::uint64_t>(inputs.size);
  }
  return count;
}

EncoderMap encoder_map_from_index(Alphabet messages, Alphabet memory, Alphabet inputs,
                                  std::uint64_t index) {
  int slots = messages.size * memory.size;
  std::vector<int> table(static_cast<std::size_t>(slots), 0);
  // Most significant digit first, so index order equals lexicographic order
  // of the flattened table.
  for (int pos = slots - 1; pos >= 0; --pos) {
    table[static_cast<std::size_t>(pos)] = static_cast<int>(index % inputs.size);
    index /= inputs.size;
  }
  if (index != 0)
    throw DomainError("encoder_map_from_index: index outside the map family");
  return EncoderMap(messages.size, memory.size, inputs.size, std::move(table));
}

std::uint64_t encoder_map_index(const EncoderMap& map) {
  std::uint64_t index = 0;
  for (int x : map.table()) index = index * map.input_size() + static_cast<std::uint64_t>(x);
  return index;
}

MemoryUpdate::MemoryUpdate(int memory_size, int feedback_size, int message_count,
                           std::vector<int> table)
    : memory_size_(memory_size),
      feedback_size_(feedback_size),
      message_count_(message_count),
      table_(std::move(table)) {
  if (memory_size_ < 1 || feedback_size_ < 1 || message_count_ < 2)
    throw DomainError("MemoryUpdate: bad alphabet sizes");
  std::size_t expected =
      static_cast<std::size_t>(memory_size_) * feedback_size_ * message_count_;
  if (table_.size() != expected)
    throw ValidationError("MemoryUpdate: expected " + std::to_string(expected) +
                          " entries, got " + std::to_string(table_.size()));
  for (int u : table_)
    if (u < 0 || u >= memory_size_)
      throw ValidationError("MemoryUpdate: entry " + std::to_string(u) +
                            " outside memory alphabet of size " + std::to_string(memory_size_));
}

MemoryUpdate MemoryUpdate::last_feedback(int feedback_size, int message_count) {
  std::vector<int> table;
  table.reserve(static_cast<std::size_t>(feedback_size) * feedback_size * message_count);
  for (int u = 0; u < feedback_size; ++u)
    for (int z = 0; z < feedback_size; ++z)
      for (int w = 0; w < message_count; ++w) table.push_back(z);
  return MemoryUpdate(feedback_size, feedback_size, message_count, std::move(table));
}

MemoryUpdate MemoryUpdate::constant(int feedback_size, int message_count) {
  std::vector<int> table(static_cast<std::size_t>(feedback_size) * message_count, 0);
  return MemoryUpdate(1, feedback_size, message_count, std::move(table));
}

MarkovPolicy::MarkovPolicy(std::vector<EncoderMap> stage_maps, MemoryUpdate update, int initial)
    : stages(std::move(stage_maps)), memory_update(std::move(update)), initial_memory(initial) {
  if (stages.empty()) throw DomainError("MarkovPolicy: need at least one stage");
  for (const auto& s : stages) {
    if (s.message_count() != stages.front().message_count() ||
        s.memory_size() != stages.front().memory_size() ||
        s.input_size() != stages.front().input_size())
      throw ValidationError("MarkovPolicy: stage maps disagree on alphabet sizes");
  }
  if (memory_update.memory_size() != stages.front().memory_size() ||
      memory_update.message_count() != stages.front().message_count())
    throw ValidationError("MarkovPolicy: memory update dimensions do not match the stage maps");
  if (initial_memory < 0 || initial_memory >= stages.front().memory_size())
    throw DomainError("MarkovPolicy: initial memory outside the memory alphabet");
}

Replay replay(const MarkovPolicy& policy, int w, std::span<const int> z_history) {
  if (w < 0 || w >= policy.message_count())
    throw DomainError("replay: message outside alphabet");
  if (static_cast<int>(z_history.size()) > policy.horizon())
    throw DomainError("replay: feedback history longer than the horizon");
  Replay out;
  out.memories.push_back(policy.initial_memory);
  for (std::size_t t = 0; t < z_history.size(); ++t) {
    int z = z_history[t];
    if (z < 0 || z >= policy.memory_update.feedback_size())
      throw DomainError("replay: feedback symbol outside alphabet");
    int u = out.memories.back();
    out.inputs.push_back(policy.stages[t](w, u));
    out.memories.push_back(policy.memory_update(u, z, w));
  }
  return out;
}

GeneralEncoder::GeneralEncoder(int message_count, int input_size, int feedback_size,
                               std::vector<std::vector<int>> stage_tables)
    : message_count_(message_count),
      input_size_(input_size),
      feedback_size_(feedback_size),
      stages_(std::move(stage_tables)) {
  if (message_count_ < 2) throw DomainError("GeneralEncoder: need at least 2 messages");
  if (input_size_ < 1 || feedback_size_ < 1)
    throw DomainError("GeneralEncoder: alphabet sizes must be at least 1");
  if (stages_.empty()) throw DomainError("GeneralEncoder: need at least one stage");
  for (int t = 0; t < static_cast<int>(stages_.size()); ++t) {
    std::size_t expected = static_cast<std::size_t>(message_count_) * prefix_count(t);
    if (stages_[static_cast<std::size_t>(t)].size() != expected)
      throw ValidationError("GeneralEncoder: stage " + std::to_string(t + 1) + " expects " +
                            std::to_string(expected) + " entries");
    for (int x : stages_[static_cast<std::size_t>(t)])
      if (x < 0 || x >= input_size_)
        throw ValidationError("GeneralEncoder: symbol outside input alphabet");
  }
}

std::uint64_t GeneralEncoder::prefix_count(int stage) const {
  std::uint64_t n = 1;
  for (int s = 0; s < stage; ++s) n *= static_cast<std::uint64_t>(feedback_size_);
  return n;
}

GeneralEncoder markov_to_general(const MarkovPolicy& policy) {
  int zs = policy.memory_update.feedback_size();
  int M = policy.message_count();
  int n = policy.horizon();
  std::vector<std::vector<int>> tables(static_cast<std::size_t>(n));

  // memories[w][i] = memory entering the current stage for message w along
  // the feedback prefix with index i (the transition may depend on w).
  std::vector<std::vector<int>> memories(static_cast<std::size_t>(M),
                                         std::vector<int>{policy.initial_memory});
  for (int t = 0; t < n; ++t) {
    std::size_t prefixes = memories[0].size();
    auto& table = tables[static_cast<std::size_t>(t)];
    table.resize(static_cast<std::size_t>(M) * prefixes);
    for (int w = 0; w < M; ++w) {
      auto& mem_w = memories[static_cast<std::size_t>(w)];
      for (std::size_t i = 0; i < prefixes; ++i)
        table[static_cast<std::size_t>(w) * prefixes + i] = policy.stages[static_cast<std::size_t>(t)](w, mem_w[i]);
      std::vector<int> grown;
      grown.reserve(prefixes * zs);
      for (int u : mem_w)
        for (int z = 0; z < zs; ++z) grown.push_back(policy.memory_update(u, z, w));
      mem_w = std::move(grown);
    }
  }
  return GeneralEncoder(M, policy.input_size(), zs, std::move(tables));
}

}  // namespace nfdp
