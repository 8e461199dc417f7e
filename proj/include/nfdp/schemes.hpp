#pragma once

#include <cstdint>
#include <vector>

#include "nfdp/channel.hpp"
#include "nfdp/evaluate.hpp"
#include "nfdp/policy.hpp"

namespace nfdp {

// Probability distribution over channel inputs with cumulative lookups, used
// both as a capacity-achieving input and as the quantization grid for the
// posterior-matching transmitter.
class InputDistribution {
 public:
  explicit InputDistribution(std::vector<double> probs);

  static InputDistribution uniform(int input_size);

  int size() const { return static_cast<int>(probs_.size()); }
  double operator()(int x) const { return probs_[static_cast<std::size_t>(x)]; }
  const std::vector<double>& probs() const { return probs_; }

  // Mass strictly below symbol x.
  double cumulative_below(int x) const;
  // First symbol of positive probability whose inclusive cumulative mass
  // exceeds `coordinate`; the quantile map of the distribution.
  int inverse_cumulative(double coordinate) const;

  bool operator==(const InputDistribution&) const = default;

 private:
  std::vector<double> probs_;
  std::vector<double> cumulative_;  // inclusive prefix sums
};

struct CapacityResult {
  InputDistribution input;
  double capacity_bits = 0.0;  // the lower bound at termination
  int iterations = 0;
  double lower_bits = 0.0;
  double upper_bits = 0.0;
};

// Alternating maximization of mutual information over input distributions.
// Starts from the uniform input; stops when the sandwich bounds pinch to
// `tolerance` bits. Throws ConvergenceError when the iteration budget runs
// out first.
CapacityResult blahut_arimoto(const StochasticKernel& forward, double tolerance = 1e-9,
                              int max_iterations = 10000);

// Feedback-blind baseline: every stage sends the message index itself.
// Requires the input alphabet to cover the messages.
GeneralEncoder repetition_scheme(int message_count, int horizon, int input_size,
                                 int feedback_size);

// One stage of a simulated transmission as the transmitter saw it: the symbol
// choices plus the belief coordinates that produced them. `atom_count` is the
// transmitter belief's support size before this stage's update; `pmf_value`
// the probability the guiding posterior put on the true message; `coordinate`
// its cumulative midpoint.
struct TraceStep {
  int x = 0;
  int y = 0;
  int z = 0;
  double coordinate = 0.0;
  double pmf_value = 0.0;
  std::size_t atom_count = 0;

  bool operator==(const TraceStep&) const = default;
};

struct SchemeTrace {
  int message = 0;
  std::vector<TraceStep> steps;
  int decoded = 0;

  bool operator==(const SchemeTrace&) const = default;
};

struct PmsOptions {
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  bool dump_traces = false;        // keep per-trial traces (first max_traces)
  std::uint64_t max_traces = 32;
};

struct SchemeRunResult {
  EvaluationResult estimate;
  std::vector<SchemeTrace> traces;
};

// Posterior matching over a channel whose feedback pipe is the identity: the
// transmitter tracks the receiver posterior exactly, maps the true message's
// cumulative midpoint through the input quantile function, and the receiver
// decodes by maximum posterior. Throws ValidationError unless the feedback
// kernel is exactly the identity.
SchemeRunResult pms_noiseless(const ChannelPair& channels, int message_count, int horizon,
                              const InputDistribution& input, const PmsOptions& options = {});

// Posterior matching with a noisy feedback pipe: the transmitter tracks a
// mixture over receiver beliefs, draws one support atom, and steers by that
// atom's posterior; the decode chains the receiver belief along the realized
// stage maps. With an identity feedback kernel the mixture stays a single
// atom and the run reproduces pms_noiseless step for step.
SchemeRunResult pms_noisy(const ChannelPair& channels, int message_count, int horizon,
                          const InputDistribution& input, const PmsOptions& options = {});

}  // namespace nfdp
