// Times the serial reference implementations against the parallel kernels and
// checks that both produce the same numbers. --quick shrinks the instances so
// the run doubles as a smoke test.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nfdp/channel.hpp"
#include "nfdp/dp_solver.hpp"
#include "nfdp/evaluate.hpp"
#include "nfdp/oracle.hpp"
#include "nfdp/parallel.hpp"
#include "nfdp/policy.hpp"

using namespace nfdp;

namespace {

struct Row {
  std::string name;
  double serial_seconds = 0.0;
  double parallel_seconds = 0.0;
  bool match = false;
};

double timed(const std::function<void()>& work) {
  auto start = std::chrono::steady_clock::now();
  work();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

MarkovPolicy tracking_policy(int horizon) {
  // Memory follows the last feedback symbol; the map echoes memory for one
  // message and its complement for the other, so beliefs keep branching.
  std::vector<EncoderMap> stages(static_cast<std::size_t>(horizon),
                                 EncoderMap(2, 2, 2, {0, 1, 1, 0}));
  return MarkovPolicy(stages, MemoryUpdate::last_feedback(2, 2), 0);
}

Row bench_exact_pe(bool quick) {
  int horizon = quick ? 10 : 14;
  MarkovPolicy policy = tracking_policy(horizon);
  ChannelPair channels(make_bsc(0.1), make_bsc(0.2));
  MessageBelief prior = MessageBelief::uniform(2);
  EvalOptions serial{.path_cap = 2000000000, .execution = Execution::Serial};
  EvalOptions parallel{.path_cap = 2000000000, .execution = Execution::Parallel};

  double a = 0.0, b = 0.0;
  Row row;
  row.name = "exact error probability (n=" + std::to_string(horizon) + ")";
  row.serial_seconds = timed([&] {
    a = exact_error_probability(policy, channels, prior, Decoder::TruePosterior, serial)
            .error_probability;
  });
  row.parallel_seconds = timed([&] {
    b = exact_error_probability(policy, channels, prior, Decoder::TruePosterior, parallel)
            .error_probability;
  });
  row.match = std::abs(a - b) <= 1e-11;
  return row;
}

Row bench_monte_carlo(bool quick) {
  std::uint64_t trials = quick ? 20000 : 200000;
  MarkovPolicy policy = tracking_policy(10);
  ChannelPair channels(make_bsc(0.1), make_bsc(0.2));
  MonteCarloOptions serial{.execution = Execution::Serial, .block_size = 4096};
  MonteCarloOptions parallel{.execution = Execution::Parallel, .block_size = 4096};

  double a = 0.0, b = 0.0;
  Row row;
  row.name = "monte carlo (" + std::to_string(trials) + " trials)";
  row.serial_seconds = timed(
      [&] { a = monte_carlo_pe(policy, channels, trials, 7, serial).error_probability; });
  row.parallel_seconds = timed(
      [&] { b = monte_carlo_pe(policy, channels, trials, 7, parallel).error_probability; });
  row.match = a == b;  // integer error counts: must agree bitwise
  return row;
}

Row bench_solver(bool quick) {
  int horizon = quick ? 2 : 3;
  ChannelPair channels(make_bsc(0.1), make_bsc(0.2));
  MemoryUpdate update = MemoryUpdate::last_feedback(2, 2);

  double a = 0.0, b = 0.0;
  Row row;
  row.name = "reachable states + backward pass (n=" + std::to_string(horizon) + ")";
  row.serial_seconds = timed([&] {
    ReachableStates reachable =
        enumerate_reachable_states(channels, horizon, 2, 2, update, 0, {}, Execution::Serial);
    ValueTable table = backward_induction(reachable, channels, update, Execution::Serial);
    a = (table.values[0][0] + table.values[0][1]) / 2.0;
  });
  row.parallel_seconds = timed([&] {
    ReachableStates reachable =
        enumerate_reachable_states(channels, horizon, 2, 2, update, 0, {}, Execution::Parallel);
    ValueTable table = backward_induction(reachable, channels, update, Execution::Parallel);
    b = (table.values[0][0] + table.values[0][1]) / 2.0;
  });
  row.match = a == b;  // same merge order: must agree bitwise
  return row;
}

Row bench_search(bool quick) {
  int horizon = quick ? 2 : 3;
  ChannelPair channels(make_bsc(0.1), make_bsc(0.2));
  OracleOptions serial;
  serial.execution = Execution::Serial;
  OracleOptions parallel;
  parallel.execution = Execution::Parallel;

  std::optional<GeneralSearchResult> a, b;
  Row row;
  row.name = "exhaustive strategy search (n=" + std::to_string(horizon) + ")";
  row.serial_seconds = timed([&] { a = exhaustive_general(channels, horizon, 2, serial); });
  row.parallel_seconds = timed([&] { b = exhaustive_general(channels, horizon, 2, parallel); });
  row.match = a->value == b->value && a->best_index == b->best_index;
  return row;
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--quick") == 0) quick = true;

  std::vector<Row> rows;
  rows.push_back(bench_exact_pe(quick));
  rows.push_back(bench_monte_carlo(quick));
  rows.push_back(bench_solver(quick));
  rows.push_back(bench_search(quick));

  std::printf("%-46s %10s %10s %8s %6s\n", "kernel", "serial", "parallel", "speedup", "match");
  bool all_match = true;
  for (const Row& row : rows) {
    double speedup = row.parallel_seconds > 0.0 ? row.serial_seconds / row.parallel_seconds : 0.0;
    std::printf("%-46s %9.3fs %9.3fs %7.2fx %6s\n", row.name.c_str(), row.serial_seconds,
                row.parallel_seconds, speedup, row.match ? "yes" : "NO");
    all_match = all_match && row.match;
  }
  if (!all_match) {
    std::printf("mismatch between serial and parallel results\n");
    return 1;
  }
  return 0;
}
