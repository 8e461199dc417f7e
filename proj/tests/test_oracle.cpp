#include <cmath>
#include <vector>

#include "doctest.h"
#include "nfdp/channel.hpp"
#include "nfdp/errors.hpp"
#include "nfdp/oracle.hpp"
#include "nfdp/policy.hpp"

using namespace nfdp;

namespace {

MarkovPolicy identity_policy(int horizon) {
  std::vector<EncoderMap> stages(static_cast<std::size_t>(horizon),
                                 EncoderMap(2, 1, 2, {0, 1}));
  return MarkovPolicy(stages, MemoryUpdate::constant(2, 2), 0);
}

}  // namespace

TEST_CASE("brute-force message posterior on one channel use") {
  ChannelPair channels(make_bsc(0.1), make_bsc(0.1));
  MessageBelief post =
      oracle_message_posterior(identity_policy(1), channels, std::vector<int>{0});
  CHECK(post(0) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(post(1) == doctest::Approx(0.1).epsilon(1e-12));

  MessageBelief prior =
      oracle_message_posterior(identity_policy(1), channels, std::vector<int>{});
  CHECK(prior(0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("brute-force memory conditional") {
  ChannelPair channels(make_bsc(0.1), make_bsc(0.2));
  EncoderMap by_message(2, 2, 2, {0, 0, 1, 1});  // input = message, memory ignored
  MarkovPolicy policy({by_message}, MemoryUpdate::last_feedback(2, 2), 0);

  std::vector<double> empty = oracle_memory_conditional(policy, channels, std::vector<int>{}, 0);
  CHECK(empty == std::vector<double>{1.0, 0.0, 0.0, 0.0});

  // After y = 0 the pair is (0, z) with z drawn from the feedback row of 0.
  std::vector<double> after = oracle_memory_conditional(policy, channels, std::vector<int>{0}, 0);
  REQUIRE(after.size() == 4);
  CHECK(after[0] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(after[1] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(after[2] == 0.0);
  CHECK(after[3] == 0.0);
}

TEST_CASE("brute-force sender conditional collapses under noiseless feedback") {
  ChannelPair channels(make_bsc(0.1), make_identity(2));
  SenderBelief belief =
      oracle_sender_conditional(identity_policy(1), channels, std::vector<int>{0}, 0);
  REQUIRE(belief.atom_count() == 1);
  CHECK(std::abs(belief.weight(0) - 1.0) <= 1e-12);
  CHECK(belief.atom(0).message(0) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(belief.atom(0).message(1) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("exhaustive searches on one channel use") {
  ChannelPair channels(make_bsc(0.1), make_bsc(0.1));

  GeneralSearchResult general = exhaustive_general(channels, 1, 2);
  CHECK(general.searched == 4);
  CHECK(general.value == doctest::Approx(0.1).epsilon(1e-12));
  double replayed = exact_error_probability(general.best, channels, MessageBelief::uniform(2))
                        .error_probability;
  CHECK(replayed == general.value);

  MarkovSearchResult markov =
      exhaustive_markov(channels, 1, 2, 1, MemoryUpdate::constant(2, 2), 0);
  CHECK(markov.searched == 4);
  CHECK(markov.value == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("markov optimum never beats the unrestricted optimum") {
  ChannelPair channels(make_bsc(0.1), make_bsc(0.1));
  GeneralSearchResult general = exhaustive_general(channels, 2, 2);
  MarkovSearchResult markov =
      exhaustive_markov(channels, 2, 2, 2, MemoryUpdate::last_feedback(2, 2), 0);
  CHECK(markov.value >= general.value - 1e-12);

  MarkovSearchResult memoryless =
      exhaustive_markov(channels, 2, 2, 1, MemoryUpdate::constant(2, 2), 0);
  CHECK(memoryless.value >= markov.value - 1e-12);
}

TEST_CASE("search results do not depend on the execution mode") {
  ChannelPair channels(make_bsc(0.15), make_bsc(0.25));
  OracleOptions serial;
  serial.execution = Execution::Serial;
  OracleOptions parallel;
  parallel.execution = Execution::Parallel;

  GeneralSearchResult a = exhaustive_general(channels, 2, 2, serial);
  GeneralSearchResult b = exhaustive_general(channels, 2, 2, parallel);
  CHECK(a.value == b.value);
  CHECK(a.best_index == b.best_index);
  CHECK(a.searched == b.searched);

  MemoryUpdate update = MemoryUpdate::last_feedback(2, 2);
  MarkovSearchResult c = exhaustive_markov(channels, 2, 2, 2, update, 0, serial);
  MarkovSearchResult d = exhaustive_markov(channels, 2, 2, 2, update, 0, parallel);
  CHECK(c.value == d.value);
  CHECK(c.best_index == d.best_index);
}

TEST_CASE("search caps abort oversized enumerations") {
  ChannelPair channels(make_bsc(0.1), make_bsc(0.1));
  OracleOptions tiny;
  tiny.strategy_cap = 2;
  CHECK_THROWS_AS(exhaustive_general(channels, 1, 2, tiny), CapacityError);
  CHECK_THROWS_AS(exhaustive_markov(channels, 1, 2, 1, MemoryUpdate::constant(2, 2), 0, tiny),
                  CapacityError);
}
