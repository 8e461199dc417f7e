#include "nfdp/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "nfdp/belief.hpp"
#include "nfdp/errors.hpp"
#include "nfdp/rng.hpp"

namespace nfdp {

namespace {

constexpr double kLn2 = 0.6931471805599453;

bool is_exact_identity(const StochasticKernel& kernel) {
  if (kernel.input_size() != kernel.output_size()) return false;
  for (int i = 0; i < kernel.input_size(); ++i)
    for (int j = 0; j < kernel.output_size(); ++j)
      if (kernel(i, j) != (i == j ? 1.0 : 0.0)) return false;
  return true;
}

// Midpoint coordinates of every message under `pmf`, mapped through the input
// quantile function. Returns the realized stage map table (memory size 1) and
// fills `coordinates` with each message's cumulative midpoint.
std::vector<int> midpoint_map(const std::vector<double>& pmf, const InputDistribution& input,
                              std::vector<double>& coordinates) {
  std::vector<int> table(pmf.size());
  coordinates.resize(pmf.size());
  double below = 0.0;
  for (std::size_t w = 0; w < pmf.size(); ++w) {
    coordinates[w] = below + pmf[w] / 2.0;
    table[w] = input.inverse_cumulative(coordinates[w]);
    below += pmf[w];
  }
  return table;
}

EvaluationResult tally(std::uint64_t errors, std::uint64_t trials, const char* method) {
  EvaluationResult result;
  result.error_probability = static_cast<double>(errors) / static_cast<double>(trials);
  result.std_error = std::sqrt(result.error_probability * (1.0 - result.error_probability) /
                               static_cast<double>(trials));
  result.trials = trials;
  result.decoder = Decoder::RecursiveBelief;
  result.method = method;
  return result;
}

void check_pms_arguments(const ChannelPair& channels, int message_count, int horizon,
                         const InputDistribution& input, const PmsOptions& options,
                         const char* where) {
  std::string at(where);
  if (message_count < 2) throw DomainError(at + ": need at least two messages");
  if (horizon < 1) throw DomainError(at + ": horizon must be at least 1");
  if (input.size() != channels.input_size())
    throw ValidationError(at + ": input distribution size disagrees with the channel");
  if (options.trials == 0) throw DomainError(at + ": need at least one trial");
}

}  // namespace

InputDistribution::InputDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw ValidationError("InputDistribution: no symbols");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw ValidationError("InputDistribution: entries must be finite and non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("InputDistribution: entries sum to " + std::to_string(sum) +
                          ", expected 1");
  for (double& p : probs_) p /= sum;
  cumulative_.resize(probs_.size());
  double run = 0.0;
  for (std::size_t x = 0; x < probs_.size(); ++x) {
    run += probs_[x];
    cumulative_[x] = run;
  }
}

InputDistribution InputDistribution::uniform(int input_size) {
  if (input_size < 1) throw DomainError("InputDistribution: alphabet must be non-empty");
  return InputDistribution(
      std::vector<double>(static_cast<std::size_t>(input_size), 1.0 / input_size));
}

double InputDistribution::cumulative_below(int x) const {
  if (x < 0 || x >= size()) throw DomainError("InputDistribution: symbol outside alphabet");
  return x == 0 ? 0.0 : cumulative_[static_cast<std::size_t>(x) - 1];
}

int InputDistribution::inverse_cumulative(double coordinate) const {
  int last_positive = -1;
  for (int x = 0; x < size(); ++x) {
    if (probs_[static_cast<std::size_t>(x)] == 0.0) continue;
    last_positive = x;
    if (cumulative_[static_cast<std::size_t>(x)] > coordinate) return x;
  }
  return last_positive;  // coordinate at or past the total mass
}

CapacityResult blahut_arimoto(const StochasticKernel& forward, double tolerance,
                              int max_iterations) {
  if (max_iterations < 1) throw DomainError("blahut_arimoto: need an iteration budget");
  if (!(tolerance > 0.0)) throw DomainError("blahut_arimoto: tolerance must be positive");
  int X = forward.input_size();
  int Y = forward.output_size();

  std::vector<double> p(static_cast<std::size_t>(X), 1.0 / X);
  std::vector<double> r(static_cast<std::size_t>(Y));
  std::vector<double> divergence(static_cast<std::size_t>(X));

  for (int iteration = 1; iteration <= max_iterations; ++iteration) {
    for (int y = 0; y < Y; ++y) {
      double total = 0.0;
      for (int x = 0; x < X; ++x) total += p[static_cast<std::size_t>(x)] * forward(x, y);
      r[static_cast<std::size_t>(y)] = total;
    }
    // D(Q(.|x) || r) in nats; infinite only for symbols of zero weight whose
    // rows reach outputs the current mixture never produces.
    for (int x = 0; x < X; ++x) {
      double d = 0.0;
      for (int y = 0; y < Y; ++y) {
        double q = forward(x, y);
        if (q == 0.0) continue;
        double ry = r[static_cast<std::size_t>(y)];
        if (ry == 0.0) {
          d = std::numeric_limits<double>::infinity();
          break;
        }
        d += q * std::log(q / ry);
      }
      divergence[static_cast<std::size_t>(x)] = d;
    }
    double lower = 0.0;
    double upper = -std::numeric_limits<double>::infinity();
    for (int x = 0; x < X; ++x) {
      if (p[static_cast<std::size_t>(x)] > 0.0)
        lower += p[static_cast<std::size_t>(x)] * divergence[static_cast<std::size_t>(x)];
      upper = std::max(upper, divergence[static_cast<std::size_t>(x)]);
    }
    double lower_bits = lower / kLn2;
    double upper_bits = upper / kLn2;
    if (upper_bits - lower_bits <= tolerance) {
      CapacityResult result{InputDistribution(p), lower_bits, iteration, lower_bits, upper_bits};
      return result;
    }
    double total = 0.0;
    for (int x = 0; x < X; ++x) {
      p[static_cast<std::size_t>(x)] *= std::exp(divergence[static_cast<std::size_t>(x)]);
      total += p[static_cast<std::size_t>(x)];
    }
    for (double& px : p) px /= total;
  }
  throw ConvergenceError("blahut_arimoto: bounds did not pinch to " + std::to_string(tolerance) +
                         " bits within " + std::to_string(max_iterations) + " iterations");
}

GeneralEncoder repetition_scheme(int message_count, int horizon, int input_size,
                                 int feedback_size) {
  if (message_count < 1 || input_size < message_count)
    throw DomainError("repetition_scheme: input alphabet must cover the messages");
  if (horizon < 1) throw DomainError("repetition_scheme: horizon must be at least 1");
  if (feedback_size < 1) throw DomainError("repetition_scheme: feedback alphabet is empty");

  std::vector<std::vector<int>> tables(static_cast<std::size_t>(horizon));
  std::uint64_t prefixes = 1;
  for (int t = 0; t < horizon; ++t) {
    std::uint64_t entries = static_cast<std::uint64_t>(message_count) * prefixes;
    if (entries > 10000000)
      throw CapacityError("repetition_scheme: stage table would exceed 1e7 entries");
    std::vector<int>& table = tables[static_cast<std::size_t>(t)];
    table.resize(static_cast<std::size_t>(entries));
    for (int w = 0; w < message_count; ++w)
      for (std::uint64_t prefix = 0; prefix < prefixes; ++prefix)
        table[static_cast<std::size_t>(w) * prefixes + prefix] = w;
    prefixes *= static_cast<std::uint64_t>(feedback_size);
  }
  return GeneralEncoder(message_count, input_size, feedback_size, std::move(tables));
}

SchemeRunResult pms_noiseless(const ChannelPair& channels, int message_count, int horizon,
                              const InputDistribution& input, const PmsOptions& options) {
  check_pms_arguments(channels, message_count, horizon, input, options, "pms_noiseless");
  if (!is_exact_identity(channels.feedback))
    throw ValidationError("pms_noiseless: feedback kernel must be the exact identity");

  SchemeRunResult run;
  std::uint64_t errors = 0;
  std::vector<double> pi;
  std::vector<double> coordinates;
  for (std::uint64_t trial = 0; trial < options.trials; ++trial) {
    Rng rng = Rng::derived(options.seed, trial);
    int w = rng.next_index(message_count);
    pi.assign(static_cast<std::size_t>(message_count), 1.0 / message_count);

    SchemeTrace trace;
    trace.message = w;
    bool keep = options.dump_traces && trial < options.max_traces;
    for (int t = 0; t < horizon; ++t) {
      std::vector<int> table = midpoint_map(pi, input, coordinates);
      int x = table[static_cast<std::size_t>(w)];
      int y = sample(channels.forward, x, rng);
      int z = sample(channels.feedback, y, rng);
      if (keep)
        trace.steps.push_back(TraceStep{x, y, z, coordinates[static_cast<std::size_t>(w)],
                                        pi[static_cast<std::size_t>(w)], 1});
      double total = 0.0;
      for (int v = 0; v < message_count; ++v) {
        pi[static_cast<std::size_t>(v)] *=
            channels.forward(table[static_cast<std::size_t>(v)], y);
        total += pi[static_cast<std::size_t>(v)];
      }
      for (double& mass : pi) mass /= total;
    }
    int decoded = ml_decode(MessageBelief(pi));
    if (decoded != w) ++errors;
    if (keep) {
      trace.decoded = decoded;
      run.traces.push_back(std::move(trace));
    }
  }
  run.estimate = tally(errors, options.trials, "pms_noiseless");
  return run;
}

SchemeRunResult pms_noisy(const ChannelPair& channels, int message_count, int horizon,
                          const InputDistribution& input, const PmsOptions& options) {
  check_pms_arguments(channels, message_count, horizon, input, options, "pms_noisy");

  MemoryUpdate memoryless = MemoryUpdate::constant(channels.feedback_size(), message_count);

  SchemeRunResult run;
  std::uint64_t errors = 0;
  std::vector<double> coordinates;
  for (std::uint64_t trial = 0; trial < options.trials; ++trial) {
    Rng rng = Rng::derived(options.seed, trial);
    int w = rng.next_index(message_count);
    SenderBelief belief = initial_sender_belief(message_count, 1, 0);
    ReceiverState receiver = initial_receiver_state(message_count, 1, 0);

    SchemeTrace trace;
    trace.message = w;
    bool keep = options.dump_traces && trial < options.max_traces;
    for (int t = 0; t < horizon; ++t) {
      std::size_t atom_count = belief.atom_count();
      std::size_t pick = 0;
      if (atom_count > 1) {
        // Inverse-CDF draw over atom weights; a single atom costs no draw so
        // the stream stays aligned with the noiseless run.
        double c = rng.next_double();
        double cum = 0.0;
        for (std::size_t i = 0; i < atom_count; ++i) {
          cum += belief.weight(i);
          pick = i;
          if (cum > c) break;
        }
      }
      const MessageBelief& guide = belief.atom(pick).message;
      std::vector<int> table = midpoint_map(guide.probs(), input, coordinates);
      EncoderMap map(message_count, 1, channels.input_size(), table);
      int x = map(w, 0);
      int y = sample(channels.forward, x, rng);
      int z = sample(channels.feedback, y, rng);
      if (keep)
        trace.steps.push_back(TraceStep{x, y, z, coordinates[static_cast<std::size_t>(w)],
                                        guide(w), atom_count});
      belief = update_sender_belief(belief, map, z, 0, w, channels.forward, channels.feedback,
                                    memoryless);
      receiver = advance_receiver(receiver, map, y, channels, memoryless);
    }
    int decoded = ml_decode(receiver.message);
    if (decoded != w) ++errors;
    if (keep) {
      trace.decoded = decoded;
      run.traces.push_back(std::move(trace));
    }
  }
  run.estimate = tally(errors, options.trials, "pms_noisy");
  return run;
}

}  // namespace nfdp
