#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "nfdp/belief.hpp"
#include "nfdp/channel.hpp"
#include "nfdp/errors.hpp"
#include "nfdp/policy.hpp"
#include "nfdp/rng.hpp"

using namespace nfdp;

TEST_CASE("posterior update is Bayes rule for a one-state memory") {
  MessageBelief prior = MessageBelief::uniform(2);
  MemoryBelief memory = MemoryBelief::initial(2, 1, 0);
  EncoderMap identity_map(2, 1, 2, {0, 1});

  SUBCASE("flip channel") {
    MessageBelief post = update_message_belief(prior, memory, identity_map, 0, make_bsc(0.1));
    CHECK(post(0) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(post(1) == doctest::Approx(0.1).epsilon(1e-12));
  }
  SUBCASE("noiseless channel pins the posterior") {
    MessageBelief post =
        update_message_belief(prior, memory, identity_map, 1, make_identity(2));
    CHECK(post(0) == 0.0);
    CHECK(post(1) == 1.0);
  }
  SUBCASE("constant map carries no information") {
    EncoderMap constant_map(2, 1, 2, {0, 0});
    MessageBelief post = update_message_belief(prior, memory, constant_map, 0, make_bsc(0.1));
    CHECK(post(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(post(1) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("impossible observation raises") {
    MessageBelief dead(std::vector<double>{1.0, 0.0});
    EncoderMap constant_map(2, 1, 2, {0, 0});
    CHECK_THROWS_AS(
        update_message_belief(dead, memory, constant_map, 1, make_identity(2)),
        ImpossibleEvidenceError);
  }
}

TEST_CASE("memory pair marginals") {
  MemoryBelief belief(2, 2, {0.1, 0.2, 0.3, 0.4, 0.25, 0.25, 0.25, 0.25});
  auto current = belief.current_marginal(0);
  auto next = belief.next_marginal(0);
  CHECK(current[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(current[1] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(next[0] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(next[1] == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("posterior update consumes the next-stage memory marginal") {
  // Message 0's memory pair sits at (0, 1): the PREVIOUS transmission came
  // from memory 0 but the CURRENT one comes from memory 1. Under a noiseless
  // channel with phi(0, 1) = 1 the output 1 is certain for message 0 and
  // impossible for message 1, which pins the posterior -- but only if the
  // update reads the second coordinate.
  MessageBelief prior = MessageBelief::uniform(2);
  MemoryBelief memory(2, 2, {0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0});
  EncoderMap map(2, 2, 2, {0, 1, 0, 0});
  MessageBelief post = update_message_belief(prior, memory, map, 1, make_identity(2));
  CHECK(post(0) == 1.0);
  CHECK(post(1) == 0.0);
}

TEST_CASE("memory pair update matches a direct single-step enumeration") {
  int M = 2, U = 2, Z = 2;
  MemoryBelief prev(M, U, {0.1, 0.2, 0.3, 0.4, 0.25, 0.25, 0.25, 0.25});
  EncoderMap map(M, U, 2, {0, 1, 1, 0});
  StochasticKernel forward = make_bsc(0.1);
  StochasticKernel feedback = make_bsc(0.2);
  MemoryUpdate g = MemoryUpdate::last_feedback(Z, M);
  int y = 0;

  MemoryBelief got = update_memory_belief(prev, map, y, forward, feedback, g);

  for (int w = 0; w < M; ++w) {
    // independent re-derivation from the definition
    std::vector<double> marg(static_cast<std::size_t>(U), 0.0);
    for (int a = 0; a < U; ++a)
      for (int u = 0; u < U; ++u) marg[static_cast<std::size_t>(u)] += prev.joint(w, a, u);
    std::vector<double> want(static_cast<std::size_t>(U) * U, 0.0);
    double total = 0.0;
    for (int u = 0; u < U; ++u)
      for (int z = 0; z < Z; ++z) {
        double mass = marg[static_cast<std::size_t>(u)] * forward(map(w, u), y) * feedback(y, z);
        want[static_cast<std::size_t>(u) * U + g(u, z, w)] += mass;
        total += mass;
      }
    for (int u = 0; u < U; ++u)
      for (int v = 0; v < U; ++v)
        CHECK(got.joint(w, u, v) ==
              doctest::Approx(want[static_cast<std::size_t>(u) * U + v] / total).epsilon(1e-12));
  }
}

TEST_CASE("uninformative feedback weights atoms by the output likelihood") {
  SenderBelief prev = initial_sender_belief(2, 1, 0);
  EncoderMap map(2, 1, 2, {0, 1});
  SenderBelief post = update_sender_belief(prev, map, 0, 0, 0, make_bsc(0.1), make_bsc(0.5),
                                           MemoryUpdate::constant(2, 2));
  REQUIRE(post.atom_count() == 2);
  // locate the atom produced by output 0 (posterior 0.9 on message 0)
  bool found = false;
  for (std::size_t i = 0; i < post.atom_count(); ++i) {
    if (std::abs(post.atom(i).message(0) - 0.9) < 1e-9) {
      CHECK(post.weight(i) == doctest::Approx(0.9).epsilon(1e-12));
      found = true;
    } else {
      CHECK(post.atom(i).message(0) == doctest::Approx(0.1).epsilon(1e-9));
      CHECK(post.weight(i) == doctest::Approx(0.1).epsilon(1e-12));
    }
  }
  CHECK(found);
}

TEST_CASE("identity feedback keeps the mixture on a single atom") {
  ChannelPair channels(make_bsc(0.1), make_identity(2));
  MemoryUpdate g = MemoryUpdate::constant(2, 2);
  EncoderMap map(2, 1, 2, {0, 1});
  SenderBelief belief = initial_sender_belief(2, 1, 0);
  ReceiverState receiver = initial_receiver_state(2, 1, 0);
  for (int step = 0; step < 3; ++step) {
    int y = step % 2;
    belief = update_sender_belief(belief, map, y, 0, 0, channels.forward, channels.feedback, g);
    receiver = advance_receiver(receiver, map, y, channels, g);
    REQUIRE(belief.atom_count() == 1);
    CHECK(belief.weight(0) == 1.0);
    for (int w = 0; w < 2; ++w)
      CHECK(std::abs(belief.atom(0).message(w) - receiver.message(w)) <= 1e-12);
  }
}

TEST_CASE("atom count is bounded by the output tree") {
  ChannelPair channels(make_bsc(0.1), make_bsc(0.2));
  MemoryUpdate g = MemoryUpdate::constant(2, 2);
  EncoderMap map(2, 1, 2, {0, 1});
  SenderBelief belief = initial_sender_belief(2, 1, 0);
  std::uint64_t bound = 1;
  for (int step = 0; step < 4; ++step) {
    belief = update_sender_belief(belief, map, 0, 0, 0, channels.forward, channels.feedback, g);
    bound *= 2;  // one branch per channel output
    CHECK(belief.atom_count() <= bound);
  }
}

TEST_CASE("canonical keys absorb jitter and are idempotent") {
  std::vector<double> a{0.3 + 1e-12, 0.7 - 1e-12};
  std::vector<double> b{0.3, 0.7};
  CHECK(canonical_key(a) == canonical_key(b));

  std::int64_t total = 0;
  for (std::int64_t part : canonical_key(b)) total += part;
  CHECK(total == kCanonicalGrid);

  Rng rng(42);
  for (int rep = 0; rep < 200; ++rep) {
    int n = 2 + rng.next_index(5);
    std::vector<double> probs(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (double& p : probs) {
      p = rng.next_double() + 1e-3;
      sum += p;
    }
    for (double& p : probs) p /= sum;
    std::vector<std::int64_t> key = canonical_key(probs);
    std::int64_t key_total = 0;
    std::vector<double> snapped(probs.size());
    for (std::size_t i = 0; i < key.size(); ++i) {
      key_total += key[i];
      snapped[i] = static_cast<double>(key[i]) / static_cast<double>(kCanonicalGrid);
    }
    CHECK(key_total == kCanonicalGrid);
    CHECK(canonical_key(snapped) == key);
  }
}

TEST_CASE("canonicalize is idempotent on atoms") {
  BeliefAtom atom(MessageBelief(std::vector<double>{0.3 + 1e-12, 0.7 - 1e-12}),
                  MemoryBelief(2, 1, {1.0, 1.0}));
  BeliefAtom once = canonicalize(atom);
  BeliefAtom twice = canonicalize(once);
  CHECK(once.key == twice.key);
  CHECK(once.message.probs() == twice.message.probs());
  CHECK(once.memory.data() == twice.memory.data());
  CHECK(atom.key == once.key);
}

TEST_CASE("sender belief construction rules") {
  CHECK_THROWS_AS(initial_sender_belief(1, 1, 0), DomainError);

  BeliefAtom atom(MessageBelief(std::vector<double>{0.4, 0.6}), MemoryBelief(2, 1, {1.0, 1.0}));
  SUBCASE("duplicate atoms are rejected") {
    CHECK_THROWS_AS(SenderBelief({atom, atom}, {0.5, 0.5}), ValidationError);
  }
  SUBCASE("weights must be strictly positive and sum to one") {
    BeliefAtom other(MessageBelief(std::vector<double>{0.2, 0.8}),
                     MemoryBelief(2, 1, {1.0, 1.0}));
    CHECK_THROWS_AS(SenderBelief({atom, other}, {1.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(SenderBelief({atom, other}, {0.7, 0.7}), ValidationError);
  }
  SUBCASE("atoms are ordered by canonical key") {
    BeliefAtom other(MessageBelief(std::vector<double>{0.2, 0.8}),
                     MemoryBelief(2, 1, {1.0, 1.0}));
    SenderBelief belief({atom, other}, {0.5, 0.5});
    CHECK(belief.atom(0).key < belief.atom(1).key);
  }
}

TEST_CASE("impossible feedback raises") {
  // Feedback is the identity, so observing z != y is impossible; sending x=0
  // through the identity forward channel makes y=0 certain and z=1 impossible.
  EncoderMap map(2, 1, 2, {0, 0});
  CHECK_THROWS_AS(update_sender_belief(initial_sender_belief(2, 1, 0), map, 1, 0, 0,
                                       make_identity(2), make_identity(2),
                                       MemoryUpdate::constant(2, 2)),
                  ImpossibleEvidenceError);
}
