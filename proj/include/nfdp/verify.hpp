#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nfdp/channel.hpp"
#include "nfdp/parallel.hpp"
#include "nfdp/policy.hpp"
#include "nfdp/rng.hpp"

namespace nfdp {

// A randomly drawn small problem: channels, a fixed policy to chase beliefs
// along, and the message count the policy was built for.
struct RandomInstance {
  ChannelPair channels;
  MarkovPolicy policy;
  int message_count;
};

// Strictly positive kernels (entries 0.2 + uniform, rows normalized), so
// every observation history has positive probability under every hypothesis
// and the recursive updates never meet impossible evidence.
RandomInstance random_instance(Rng& rng);

// Same construction with the feedback pipe forced to the exact identity.
RandomInstance random_collapse_instance(Rng& rng);

struct VerifyCheck {
  std::string name;
  std::uint64_t instances = 0;
  std::uint64_t comparisons = 0;
  bool passed = false;
  std::string detail;  // summary, or the first failure
};

// Chains every recursive belief update along every observation history of the
// instance and compares against independent path-enumeration answers at every
// prefix, to 1e-9.
VerifyCheck check_belief_recursions(std::uint64_t instances, std::uint64_t seed);

// With identity feedback the transmitter-side mixture must stay a single atom
// equal to the receiver's own chained beliefs, to 1e-12.
VerifyCheck check_noiseless_collapse(std::uint64_t instances, std::uint64_t seed);

// Runs the dynamic program against both exhaustive searches on a grid of
// small binary fixtures and checks the ordering between the three values,
// plus the exactness of the extracted policy whenever the backward pass is
// consistent.
VerifyCheck check_dp_bounds(Execution execution = Execution::Parallel);

struct VerifyOptions {
  std::uint64_t instances = 100;
  std::uint64_t collapse_instances = 50;
  std::uint64_t seed = 20240801;
  bool include_dp = true;
  Execution execution = Execution::Parallel;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_passed = false;
  double seconds = 0.0;
};

VerifyReport run_verification(const VerifyOptions& options = {});

}  // namespace nfdp
