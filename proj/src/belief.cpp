#include "nfdp/belief.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "nfdp/errors.hpp"

namespace nfdp {

namespace {

constexpr double kSumTolerance = 1e-9;

void check_distribution(std::span<const double> probs, const char* what) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw ValidationError(std::string(what) + ": negative or non-finite probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance)
    throw ValidationError(std::string(what) + ": probabilities sum to " + std::to_string(sum) +
                          ", expected 1 within 1e-9");
}

}  // namespace

std::vector<std::int64_t> canonical_key(std::span<const double> probs) {
  std::size_t n = probs.size();
  double total = 0.0;
  for (double p : probs) total += p;
  if (!(total > 0.0))
    throw ValidationError("canonical_key: probabilities sum to zero");

  std::vector<std::int64_t> key(n);
  std::vector<double> residual(n);
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double scaled = probs[i] / total * static_cast<double>(kCanonicalGrid);
    key[i] = std::llround(scaled);
    residual[i] = scaled - static_cast<double>(key[i]);
    sum += key[i];
  }
  // Largest-remainder correction: spend the rounding deficit one grid unit at
  // a time so every entry stays within one unit of its exact value and the
  // key always sums to the full grid. Ties resolve to the lowest index.
  std::int64_t deficit = kCanonicalGrid - sum;
  if (deficit != 0) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (deficit > 0) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return residual[a] > residual[b]; });
      for (std::int64_t k = 0; k < deficit; ++k) key[order[static_cast<std::size_t>(k) % n]] += 1;
    } else {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return residual[a] < residual[b]; });
      std::int64_t need = -deficit;
      std::size_t cursor = 0;
      for (std::int64_t k = 0; k < need; ++k) {
        // Never drive an entry negative.
        while (key[order[cursor]] == 0) cursor = (cursor + 1) % n;
        key[order[cursor]] -= 1;
        cursor = (cursor + 1) % n;
      }
    }
  }
  return key;
}

MessageBelief::MessageBelief(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) throw DomainError("MessageBelief: need at least 2 messages");
  check_distribution(probs_, "MessageBelief");
}

MessageBelief MessageBelief::uniform(int message_count) {
  if (message_count < 2) throw DomainError("MessageBelief::uniform: need at least 2 messages");
  return MessageBelief(
      std::vector<double>(static_cast<std::size_t>(message_count), 1.0 / message_count));
}

MemoryBelief::MemoryBelief(int message_count, int memory_size, std::vector<double> joints)
    : message_count_(message_count), memory_size_(memory_size), joints_(std::move(joints)) {
  if (message_count_ < 2) throw DomainError("MemoryBelief: need at least 2 messages");
  if (memory_size_ < 1) throw DomainError("MemoryBelief: memory alphabet must be non-empty");
  std::size_t per_message = static_cast<std::size_t>(memory_size_) * memory_size_;
  if (joints_.size() != static_cast<std::size_t>(message_count_) * per_message)
    throw ValidationError("MemoryBelief: wrong table size");
  for (int w = 0; w < message_count_; ++w)
    check_distribution({joints_.data() + static_cast<std::size_t>(w) * per_message, per_message},
                       "MemoryBelief");
}

MemoryBelief MemoryBelief::initial(int message_count, int memory_size, int initial_memory) {
  if (initial_memory < 0 || initial_memory >= memory_size)
    throw DomainError("MemoryBelief::initial: initial memory outside the alphabet");
  std::size_t per_message = static_cast<std::size_t>(memory_size) * memory_size;
  std::vector<double> joints(static_cast<std::size_t>(message_count) * per_message, 0.0);
  for (int w = 0; w < message_count; ++w)
    joints[static_cast<std::size_t>(w) * per_message +
           static_cast<std::size_t>(initial_memory) * memory_size + initial_memory] = 1.0;
  return MemoryBelief(message_count, memory_size, std::move(joints));
}

std::vector<double> MemoryBelief::current_marginal(int w) const {
  std::vector<double> out(static_cast<std::size_t>(memory_size_), 0.0);
  for (int u = 0; u < memory_size_; ++u)
    for (int v = 0; v < memory_size_; ++v) out[static_cast<std::size_t>(u)] += joint(w, u, v);
  return out;
}

std::vector<double> MemoryBelief::next_marginal(int w) const {
  std::vector<double> out(static_cast<std::size_t>(memory_size_), 0.0);
  for (int u = 0; u < memory_size_; ++u)
    for (int v = 0; v < memory_size_; ++v) out[static_cast<std::size_t>(v)] += joint(w, u, v);
  return out;
}

BeliefAtom::BeliefAtom(MessageBelief msg, MemoryBelief mem)
    : message(std::move(msg)), memory(std::move(mem)) {
  if (message.message_count() != memory.message_count())
    throw ValidationError("BeliefAtom: message counts disagree");
  key = canonical_key(message.probs());
  // Memory components are keyed per hypothesis so the per-message
  // normalization is preserved in the key.
  std::size_t per_message =
      static_cast<std::size_t>(memory.memory_size()) * memory.memory_size();
  for (int w = 0; w < memory.message_count(); ++w) {
    auto part = canonical_key(
        {memory.data().data() + static_cast<std::size_t>(w) * per_message, per_message});
    key.insert(key.end(), part.begin(), part.end());
  }
}

BeliefAtom canonicalize(const BeliefAtom& atom) {
  std::size_t m = static_cast<std::size_t>(atom.message.message_count());
  std::vector<double> msg(m);
  for (std::size_t i = 0; i < m; ++i)
    msg[i] = static_cast<double>(atom.key[i]) / static_cast<double>(kCanonicalGrid);
  std::size_t per_message =
      static_cast<std::size_t>(atom.memory.memory_size()) * atom.memory.memory_size();
  std::vector<double> mem(m * per_message);
  for (std::size_t i = 0; i < m * per_message; ++i)
    mem[i] = static_cast<double>(atom.key[m + i]) / static_cast<double>(kCanonicalGrid);
  return BeliefAtom(MessageBelief(std::move(msg)),
                    MemoryBelief(atom.message.message_count(), atom.memory.memory_size(),
                                 std::move(mem)));
}

SenderBelief::SenderBelief(std::vector<BeliefAtom> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.empty()) throw ValidationError("SenderBelief: no atoms");
  if (atoms_.size() != weights_.size())
    throw ValidationError("SenderBelief: atom/weight count mismatch");
  check_distribution(weights_, "SenderBelief weights");
  for (double w : weights_)
    if (w <= 0.0) throw ValidationError("SenderBelief: weights must be strictly positive");

  // Canonical order: sort by atom key so equal mixtures share a representation.
  std::vector<std::size_t> order(atoms_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return atoms_[a].key < atoms_[b].key; });
  std::vector<BeliefAtom> sorted_atoms;
  sorted_atoms.reserve(atoms_.size());
  std::vector<double> sorted_weights;
  sorted_weights.reserve(weights_.size());
  for (std::size_t i : order) {
    sorted_atoms.push_back(std::move(atoms_[i]));
    sorted_weights.push_back(weights_[i]);
  }
  atoms_ = std::move(sorted_atoms);
  weights_ = std::move(sorted_weights);

  for (std::size_t i = 0; i + 1 < atoms_.size(); ++i)
    if (atoms_[i].key == atoms_[i + 1].key)
      throw ValidationError("SenderBelief: duplicate atoms under canonical key");

  auto weight_key = canonical_key(weights_);
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    key_.insert(key_.end(), atoms_[i].key.begin(), atoms_[i].key.end());
    key_.push_back(weight_key[i]);
  }
}

SenderBelief initial_sender_belief(int message_count, int memory_size, int initial_memory) {
  if (message_count < 2) throw DomainError("initial_sender_belief: need at least 2 messages");
  std::vector<BeliefAtom> atoms;
  atoms.emplace_back(MessageBelief::uniform(message_count),
                     MemoryBelief::initial(message_count, memory_size, initial_memory));
  return SenderBelief(std::move(atoms), {1.0});
}

MessageBelief update_message_belief(const MessageBelief& prev, const MemoryBelief& memory,
                                    const EncoderMap& encoder, int y,
                                    const StochasticKernel& forward) {
  int M = prev.message_count();
  if (memory.message_count() != M || encoder.message_count() != M)
    throw DomainError("update_message_belief: message counts disagree");
  if (memory.memory_size() != encoder.memory_size())
    throw DomainError("update_message_belief: memory sizes disagree");
  if (encoder.input_size() != forward.input_size())
    throw DomainError("update_message_belief: encoder range does not match the channel input");
  if (y < 0 || y >= forward.output_size())
    throw DomainError("update_message_belief: output symbol outside alphabet");

  std::vector<double> post(static_cast<std::size_t>(M));
  double total = 0.0;
  for (int w = 0; w < M; ++w) {
    auto marg = memory.next_marginal(w);
    double likelihood = 0.0;
    for (int u = 0; u < memory.memory_size(); ++u)
      likelihood += marg[static_cast<std::size_t>(u)] * forward(encoder(w, u), y);
    post[static_cast<std::size_t>(w)] = prev(w) * likelihood;
    total += post[static_cast<std::size_t>(w)];
  }
  if (!(total > 0.0))
    throw ImpossibleEvidenceError(
        "update_message_belief: observation y=" + std::to_string(y) +
        " has zero probability under every hypothesis for this stage map");
  for (double& p : post) p /= total;
  return MessageBelief(std::move(post));
}

MemoryBelief update_memory_belief(const MemoryBelief& prev, const EncoderMap& encoder, int y,
                                  const StochasticKernel& forward,
                                  const StochasticKernel& feedback,
                                  const MemoryUpdate& memory_update) {
  int M = prev.message_count();
  int U = prev.memory_size();
  if (encoder.message_count() != M || memory_update.message_count() != M)
    throw DomainError("update_memory_belief: message counts disagree");
  if (encoder.memory_size() != U || memory_update.memory_size() != U)
    throw DomainError("update_memory_belief: memory sizes disagree");
  if (feedback.input_size() != forward.output_size())
    throw DomainError("update_memory_belief: kernel alphabets disagree");
  if (y < 0 || y >= forward.output_size())
    throw DomainError("update_memory_belief: output symbol outside alphabet");

  int Z = feedback.output_size();
  std::size_t per_message = static_cast<std::size_t>(U) * U;
  std::vector<double> joints(static_cast<std::size_t>(M) * per_message, 0.0);
  for (int w = 0; w < M; ++w) {
    auto marg = prev.next_marginal(w);
    double total = 0.0;
    for (int u = 0; u < U; ++u) {
      double base = marg[static_cast<std::size_t>(u)] * forward(encoder(w, u), y);
      if (base == 0.0) continue;
      for (int z = 0; z < Z; ++z) {
        double mass = base * feedback(y, z);
        if (mass == 0.0) continue;
        int u_next = memory_update(u, z, w);
        joints[(static_cast<std::size_t>(w) * U + u) * U + u_next] += mass;
        total += mass;
      }
    }
    if (total > 0.0) {
      for (std::size_t i = 0; i < per_message; ++i)
        joints[static_cast<std::size_t>(w) * per_message + i] /= total;
    } else {
      // The observation rules this hypothesis out, so its pair conditional is
      // 0/0. Install the uniform pair instead: every consumer weights this
      // block by the (now zero) posterior on w, and a fixed choice keeps
      // beliefs that agree on the live hypotheses canonically equal.
      for (std::size_t i = 0; i < per_message; ++i)
        joints[static_cast<std::size_t>(w) * per_message + i] =
            1.0 / static_cast<double>(per_message);
    }
  }
  return MemoryBelief(M, U, std::move(joints));
}

SenderBelief update_sender_belief(const SenderBelief& prev, const EncoderMap& encoder, int z,
                                  int u, int w, const StochasticKernel& forward,
                                  const StochasticKernel& feedback,
                                  const MemoryUpdate& memory_update) {
  if (z < 0 || z >= feedback.output_size())
    throw DomainError("update_sender_belief: feedback symbol outside alphabet");
  if (u < 0 || u >= encoder.memory_size())
    throw DomainError("update_sender_belief: memory outside alphabet");
  if (w < 0 || w >= encoder.message_count())
    throw DomainError("update_sender_belief: message outside alphabet");

  int Y = forward.output_size();
  int x = encoder(w, u);

  // Branch weights depend on the atom only through y: the transmitter knows
  // its own symbol, so the y-likelihood is common to all atoms.
  std::vector<double> branch(static_cast<std::size_t>(Y));
  double total = 0.0;
  for (int y = 0; y < Y; ++y) {
    branch[static_cast<std::size_t>(y)] = forward(x, y) * feedback(y, z);
    total += branch[static_cast<std::size_t>(y)];
  }
  if (!(total > 0.0))
    throw ImpossibleEvidenceError("update_sender_belief: feedback z=" + std::to_string(z) +
                                  " is impossible after sending x=" + std::to_string(x));

  // Deterministic push order (stored atom order, then y ascending) keeps the
  // merge reproducible; output order is canonical by construction.
  std::map<std::vector<std::int64_t>, std::size_t> seen;
  std::vector<BeliefAtom> atoms;
  std::vector<double> weights;
  for (std::size_t i = 0; i < prev.atom_count(); ++i) {
    const BeliefAtom& a = prev.atom(i);
    for (int y = 0; y < Y; ++y) {
      double mass = prev.weight(i) * branch[static_cast<std::size_t>(y)];
      if (mass == 0.0) continue;
      MessageBelief msg = update_message_belief(a.message, a.memory, encoder, y, forward);
      MemoryBelief mem =
          update_memory_belief(a.memory, encoder, y, forward, feedback, memory_update);
      BeliefAtom pushed(std::move(msg), std::move(mem));
      auto it = seen.find(pushed.key);
      if (it == seen.end()) {
        seen.emplace(pushed.key, atoms.size());
        atoms.push_back(std::move(pushed));
        weights.push_back(mass);
      } else {
        weights[it->second] += mass;
      }
    }
  }
  double mass_total = 0.0;
  for (double m : weights) mass_total += m;
  for (double& m : weights) m /= mass_total;
  return SenderBelief(std::move(atoms), std::move(weights));
}

ReceiverState initial_receiver_state(int message_count, int memory_size, int initial_memory) {
  return {MessageBelief::uniform(message_count),
          MemoryBelief::initial(message_count, memory_size, initial_memory)};
}

ReceiverState advance_receiver(const ReceiverState& state, const EncoderMap& encoder, int y,
                               const ChannelPair& channels, const MemoryUpdate& memory_update) {
  MessageBelief msg =
      update_message_belief(state.message, state.memory, encoder, y, channels.forward);
  MemoryBelief mem = update_memory_belief(state.memory, encoder, y, channels.forward,
                                          channels.feedback, memory_update);
  return {std::move(msg), std::move(mem)};
}

}  // namespace nfdp
