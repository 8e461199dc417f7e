#include "nfdp/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include "nfdp/belief.hpp"
#include "nfdp/dp_solver.hpp"
#include "nfdp/errors.hpp"
#include "nfdp/oracle.hpp"

namespace nfdp {

namespace {

constexpr double kOracleTol = 1e-9;
constexpr double kCollapseTol = 1e-12;

StochasticKernel random_positive_kernel(int input_size, int output_size, Rng& rng) {
  std::vector<double> rows(static_cast<std::size_t>(input_size) * output_size);
  for (int i = 0; i < input_size; ++i) {
    double sum = 0.0;
    for (int j = 0; j < output_size; ++j) {
      double v = 0.2 + rng.next_double();
      rows[static_cast<std::size_t>(i) * output_size + j] = v;
      sum += v;
    }
    for (int j = 0; j < output_size; ++j)
      rows[static_cast<std::size_t>(i) * output_size + j] /= sum;
  }
  return StochasticKernel(input_size, output_size, std::move(rows));
}

RandomInstance make_random(Rng& rng, bool identity_feedback) {
  int M = 2 + rng.next_index(2);
  int X = 1 + rng.next_index(3);
  int Y = 1 + rng.next_index(3);
  int Z = identity_feedback ? Y : 1 + rng.next_index(3);
  int U = 1 + rng.next_index(3);
  int horizon = 1 + rng.next_index(3);

  StochasticKernel forward = random_positive_kernel(X, Y, rng);
  StochasticKernel feedback =
      identity_feedback ? make_identity(Y) : random_positive_kernel(Y, Z, rng);

  std::vector<int> update_table(static_cast<std::size_t>(U) * Z * M);
  for (int& entry : update_table) entry = rng.next_index(U);
  MemoryUpdate update(U, Z, M, std::move(update_table));

  std::vector<EncoderMap> maps;
  for (int t = 0; t < horizon; ++t) {
    std::vector<int> table(static_cast<std::size_t>(M) * U);
    for (int& entry : table) entry = rng.next_index(X);
    maps.emplace_back(M, U, X, std::move(table));
  }
  int initial = rng.next_index(U);
  return RandomInstance{ChannelPair(std::move(forward), std::move(feedback)),
                        MarkovPolicy(std::move(maps), std::move(update), initial), M};
}

// Calls f with every length-`length` history over {0..base-1}, in ascending
// odometer order; a zero length yields the single empty history.
template <typename F>
void each_history(int base, int length, F&& f) {
  std::vector<int> history(static_cast<std::size_t>(length), 0);
  while (true) {
    f(history);
    int i = length - 1;
    while (i >= 0 && ++history[static_cast<std::size_t>(i)] == base) {
      history[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
  }
}

double atom_distance(const BeliefAtom& a, const BeliefAtom& b) {
  double d = 0.0;
  for (int w = 0; w < a.message.message_count(); ++w)
    d = std::max(d, std::abs(a.message(w) - b.message(w)));
  for (std::size_t i = 0; i < a.memory.data().size(); ++i)
    d = std::max(d, std::abs(a.memory.data()[i] - b.memory.data()[i]));
  return d;
}

// Every atom on one side must have a counterpart on the other with matching
// values and matching weight. Merge discrepancies surface as weight mismatch.
bool beliefs_match(const SenderBelief& got, const SenderBelief& want, double tol,
                   std::string& why) {
  const SenderBelief* sides[2] = {&got, &want};
  for (int direction = 0; direction < 2; ++direction) {
    const SenderBelief& from = *sides[direction];
    const SenderBelief& to = *sides[1 - direction];
    for (std::size_t i = 0; i < from.atom_count(); ++i) {
      double best = 2.0;
      std::size_t at = 0;
      for (std::size_t j = 0; j < to.atom_count(); ++j) {
        double d = atom_distance(from.atom(i), to.atom(j));
        if (d < best) {
          best = d;
          at = j;
        }
      }
      if (best > tol) {
        why = "no counterpart within tolerance (closest " + std::to_string(best) + ")";
        return false;
      }
      if (std::abs(from.weight(i) - to.weight(at)) > tol) {
        why = "weights disagree by " + std::to_string(std::abs(from.weight(i) - to.weight(at)));
        return false;
      }
    }
  }
  return true;
}

std::string history_string(const std::vector<int>& history) {
  std::string out;
  for (int symbol : history) out += std::to_string(symbol);
  return out;
}

}  // namespace

RandomInstance random_instance(Rng& rng) { return make_random(rng, false); }

RandomInstance random_collapse_instance(Rng& rng) { return make_random(rng, true); }

VerifyCheck check_belief_recursions(std::uint64_t instances, std::uint64_t seed) {
  VerifyCheck check;
  check.name = "belief recursions vs path enumeration";
  Rng rng = Rng::derived(seed, 1);
  for (std::uint64_t k = 0; k < instances; ++k) {
    RandomInstance inst = random_instance(rng);
    const MarkovPolicy& policy = inst.policy;
    const ChannelPair& channels = inst.channels;
    int M = inst.message_count;
    int U = policy.memory_size();
    int Y = channels.output_size();
    int Z = channels.feedback_size();
    int horizon = policy.horizon();

    for (int t = 1; t <= horizon; ++t) {
      bool failed = false;
      each_history(Y, t, [&](const std::vector<int>& ys) {
        if (failed) return;
        ReceiverState state = initial_receiver_state(M, U, policy.initial_memory);
        for (int s = 0; s < t; ++s)
          state = advance_receiver(state, policy.stages[static_cast<std::size_t>(s)],
                                   ys[static_cast<std::size_t>(s)], channels,
                                   policy.memory_update);
        MessageBelief posterior = oracle_message_posterior(policy, channels, ys);
        for (int w = 0; w < M; ++w)
          if (std::abs(state.message(w) - posterior(w)) > kOracleTol) failed = true;
        ++check.comparisons;
        for (int w = 0; w < M; ++w) {
          std::vector<double> joint = oracle_memory_conditional(policy, channels, ys, w);
          for (int u = 0; u < U; ++u)
            for (int v = 0; v < U; ++v)
              if (std::abs(state.memory.joint(w, u, v) -
                           joint[static_cast<std::size_t>(u) * U + v]) > kOracleTol)
                failed = true;
          ++check.comparisons;
        }
        if (failed)
          check.detail = "instance " + std::to_string(k) + ": receiver beliefs drift from " +
                         "path enumeration on outputs " + history_string(ys);
      });
      if (failed) return check;
    }

    for (int w = 0; w < M; ++w) {
      for (int t = 1; t <= horizon; ++t) {
        bool failed = false;
        each_history(Z, t, [&](const std::vector<int>& zs) {
          if (failed) return;
          SenderBelief belief = initial_sender_belief(M, U, policy.initial_memory);
          int u = policy.initial_memory;
          for (int s = 0; s < t; ++s) {
            belief = update_sender_belief(belief, policy.stages[static_cast<std::size_t>(s)],
                                          zs[static_cast<std::size_t>(s)], u, w,
                                          channels.forward, channels.feedback,
                                          policy.memory_update);
            u = policy.memory_update(u, zs[static_cast<std::size_t>(s)], w);
          }
          SenderBelief want = oracle_sender_conditional(policy, channels, zs, w);
          std::string why;
          if (!beliefs_match(belief, want, kOracleTol, why)) {
            failed = true;
            check.detail = "instance " + std::to_string(k) + ", message " + std::to_string(w) +
                           ", feedback " + history_string(zs) + ": " + why;
          }
          ++check.comparisons;
        });
        if (failed) return check;
      }
    }
    ++check.instances;
  }
  check.passed = true;
  check.detail = "all prefixes matched to 1e-9";
  return check;
}

VerifyCheck check_noiseless_collapse(std::uint64_t instances, std::uint64_t seed) {
  VerifyCheck check;
  check.name = "identity-feedback collapse to the receiver chain";
  Rng rng = Rng::derived(seed, 2);
  for (std::uint64_t k = 0; k < instances; ++k) {
    RandomInstance inst = random_collapse_instance(rng);
    const MarkovPolicy& policy = inst.policy;
    const ChannelPair& channels = inst.channels;
    int M = inst.message_count;
    int U = policy.memory_size();
    int Y = channels.output_size();
    int horizon = policy.horizon();

    bool failed = false;
    for (int w = 0; w < M && !failed; ++w) {
      each_history(Y, horizon, [&](const std::vector<int>& ys) {
        if (failed) return;
        SenderBelief belief = initial_sender_belief(M, U, policy.initial_memory);
        ReceiverState state = initial_receiver_state(M, U, policy.initial_memory);
        int u = policy.initial_memory;
        for (int s = 0; s < horizon && !failed; ++s) {
          int y = ys[static_cast<std::size_t>(s)];
          const EncoderMap& map = policy.stages[static_cast<std::size_t>(s)];
          belief = update_sender_belief(belief, map, y, u, w, channels.forward,
                                        channels.feedback, policy.memory_update);
          state = advance_receiver(state, map, y, channels, policy.memory_update);
          u = policy.memory_update(u, y, w);
          ++check.comparisons;
          if (belief.atom_count() != 1 || std::abs(belief.weight(0) - 1.0) > kCollapseTol) {
            failed = true;
          } else {
            BeliefAtom receiver_atom(state.message, state.memory);
            if (atom_distance(belief.atom(0), receiver_atom) > kCollapseTol) failed = true;
          }
          if (failed)
            check.detail = "instance " + std::to_string(k) + ", message " + std::to_string(w) +
                           ", outputs " + history_string(ys) + ", stage " + std::to_string(s + 1);
        }
      });
    }
    if (failed) return check;
    ++check.instances;
  }
  check.passed = true;
  check.detail = "single atom equal to the receiver chain at every step, to 1e-12";
  return check;
}

VerifyCheck check_dp_bounds(Execution execution) {
  VerifyCheck check;
  check.name = "dynamic program vs exhaustive searches";
  OracleOptions oracle_options;
  oracle_options.execution = execution;

  auto fail = [&](const std::string& what, double fwd, double bwd, int U, int n) {
    check.detail = what + " (forward flip " + std::to_string(fwd) + ", feedback flip " +
                   std::to_string(bwd) + ", memory " + std::to_string(U) + ", horizon " +
                   std::to_string(n) + ")";
    return check;
  };

  for (double fwd : {0.1, 0.2}) {
    for (double bwd : {0.1, 0.2}) {
      for (int n = 1; n <= 3; ++n) {
        ChannelPair channels(make_bsc(fwd), make_bsc(bwd));
        GeneralSearchResult general = exhaustive_general(channels, n, 2, oracle_options);
        for (int U : {1, 2}) {
          MemoryUpdate update = U == 1 ? MemoryUpdate::constant(2, 2)
                                       : MemoryUpdate::last_feedback(2, 2);
          MarkovSearchResult markov =
              exhaustive_markov(channels, n, 2, U, update, 0, oracle_options);
          SolveReport report = solve(channels, n, 2, U, update, 0, SolverCaps{}, execution);
          ++check.instances;
          check.comparisons += 3;

          if (markov.value < general.value - 1e-12)
            return fail("restricted search beat the unrestricted one", fwd, bwd, U, n);
          if (report.averaged_value > markov.value + 1e-9)
            return fail("backward pass exceeded the restricted optimum", fwd, bwd, U, n);
          for (double v : report.message_values)
            if (v < -1e-12 || v > 1.0 + 1e-12)
              return fail("stage-1 value escaped [0, 1]", fwd, bwd, U, n);
          if (report.consistent) {
            check.comparisons += 3;
            if (std::abs(report.averaged_value - markov.value) > 1e-9)
              return fail("consistent backward pass missed the restricted optimum", fwd, bwd, U,
                          n);
            if (report.averaged_value < general.value - 1e-9)
              return fail("consistent backward pass beat the unrestricted optimum", fwd, bwd, U,
                          n);
            if (!report.extracted_exact_pe.has_value() ||
                std::abs(*report.extracted_exact_pe - report.averaged_value) > 1e-9)
              return fail("extracted policy does not reproduce the averaged value", fwd, bwd, U,
                          n);
          }
        }
      }
    }
  }
  check.passed = true;
  check.detail = "value ordering and extraction held on every fixture";
  return check;
}

VerifyReport run_verification(const VerifyOptions& options) {
  auto start = std::chrono::steady_clock::now();
  VerifyReport report;
  report.checks.push_back(check_belief_recursions(options.instances, options.seed));
  report.checks.push_back(check_noiseless_collapse(options.collapse_instances, options.seed));
  if (options.include_dp) report.checks.push_back(check_dp_bounds(options.execution));
  report.all_passed = true;
  for (const VerifyCheck& check : report.checks)
    if (!check.passed) report.all_passed = false;
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace nfdp
