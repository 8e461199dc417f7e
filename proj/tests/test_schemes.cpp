#include <cmath>
#include <vector>

#include "doctest.h"
#include "nfdp/channel.hpp"
#include "nfdp/errors.hpp"
#include "nfdp/evaluate.hpp"
#include "nfdp/schemes.hpp"

using namespace nfdp;

namespace {

double binary_entropy(double p) {
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

}  // namespace

TEST_CASE("input distribution lookups") {
  InputDistribution uniform = InputDistribution::uniform(2);
  CHECK(uniform.cumulative_below(0) == 0.0);
  CHECK(uniform.cumulative_below(1) == 0.5);
  CHECK(uniform.inverse_cumulative(0.25) == 0);
  CHECK(uniform.inverse_cumulative(0.75) == 1);

  InputDistribution gappy({0.5, 0.0, 0.5});
  CHECK(gappy.inverse_cumulative(0.3) == 0);
  CHECK(gappy.inverse_cumulative(0.6) == 2);  // skips the zero-probability symbol
  CHECK(gappy.inverse_cumulative(0.5) == 2);

  CHECK_THROWS_AS(InputDistribution({0.6, 0.5}), ValidationError);
  CHECK_THROWS_AS(InputDistribution({1.5, -0.5}), ValidationError);
  CHECK_THROWS_AS(uniform.cumulative_below(2), DomainError);
}

TEST_CASE("capacity of symmetric binary channels") {
  for (double eps : {0.05, 0.1, 0.2}) {
    CapacityResult r = blahut_arimoto(make_bsc(eps));
    CHECK(r.capacity_bits == doctest::Approx(1.0 - binary_entropy(eps)).epsilon(1e-9));
    CHECK(r.iterations == 1);  // the uniform start is already optimal
    CHECK(r.input(0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.upper_bits - r.lower_bits <= 1e-9);
  }
  CHECK(blahut_arimoto(make_identity(2)).capacity_bits == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(blahut_arimoto(make_bsc(0.5)).capacity_bits == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("capacity of an asymmetric channel") {
  StochasticKernel z_channel = StochasticKernel::from_rows({{1.0, 0.0}, {0.5, 0.5}});
  CapacityResult r = blahut_arimoto(z_channel, 1e-9);
  CHECK(r.capacity_bits == doctest::Approx(std::log2(1.25)).epsilon(1e-6));
  CHECK(r.iterations > 1);
  CHECK(r.input(0) > r.input(1));  // the clean symbol carries more mass

  CHECK_THROWS_AS(blahut_arimoto(z_channel, 1e-12, 1), ConvergenceError);
}

TEST_CASE("repetition baseline") {
  GeneralEncoder rep = repetition_scheme(2, 3, 2, 2);
  CHECK(rep.horizon() == 3);
  for (int t = 0; t < 3; ++t)
    for (int w = 0; w < 2; ++w)
      for (std::uint64_t p = 0; p < rep.prefix_count(t); ++p) CHECK(rep.symbol(t, w, p) == w);

  ChannelPair channels(make_bsc(0.1), make_bsc(0.1));
  double pe = exact_error_probability(repetition_scheme(2, 2, 2, 2), channels,
                                      MessageBelief::uniform(2))
                  .error_probability;
  CHECK(pe == doctest::Approx(0.1).epsilon(1e-12));

  CHECK_THROWS_AS(repetition_scheme(3, 1, 2, 2), DomainError);
}

TEST_CASE("posterior matching over a clean feedback pipe") {
  ChannelPair channels(make_bsc(0.1), make_identity(2));
  InputDistribution input = InputDistribution::uniform(2);

  PmsOptions options;
  options.trials = 20000;
  options.seed = 5;
  options.dump_traces = true;
  options.max_traces = 8;
  SchemeRunResult run = pms_noiseless(channels, 2, 1, input, options);

  CHECK(run.estimate.method == "pms_noiseless");
  CHECK(run.estimate.trials == 20000);
  REQUIRE(run.estimate.std_error.has_value());
  // One binary stage of posterior matching sends the message index, so the
  // exact value is the crossover probability.
  CHECK(std::abs(run.estimate.error_probability - 0.1) <=
        4.0 * *run.estimate.std_error + 1e-12);

  REQUIRE(run.traces.size() == 8);
  for (const SchemeTrace& trace : run.traces) {
    REQUIRE(trace.steps.size() == 1);
    const TraceStep& step = trace.steps[0];
    CHECK(step.atom_count == 1);
    CHECK(step.coordinate == doctest::Approx(trace.message == 0 ? 0.25 : 0.75).epsilon(1e-12));
    CHECK(step.pmf_value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(step.x == trace.message);
  }

  CHECK_THROWS_AS(pms_noiseless(ChannelPair(make_bsc(0.1), make_bsc(0.2)), 2, 1, input, options),
                  ValidationError);
}

TEST_CASE("noisy-pipe posterior matching reduces to the clean-pipe scheme") {
  ChannelPair channels(make_bsc(0.15), make_identity(2));
  InputDistribution input = InputDistribution::uniform(2);
  PmsOptions options;
  options.trials = 3000;
  options.seed = 11;
  options.dump_traces = true;
  options.max_traces = 16;

  for (int message_count : {2, 4}) {
    int horizon = message_count == 2 ? 3 : 2;
    SchemeRunResult clean = pms_noiseless(channels, message_count, horizon, input, options);
    SchemeRunResult mixed = pms_noisy(channels, message_count, horizon, input, options);
    CHECK(mixed.estimate.error_probability == clean.estimate.error_probability);
    REQUIRE(mixed.traces.size() == clean.traces.size());
    for (std::size_t i = 0; i < clean.traces.size(); ++i) CHECK(mixed.traces[i] == clean.traces[i]);
  }
}

TEST_CASE("noisy-pipe posterior matching runs on a noisy pipe") {
  ChannelPair channels(make_bsc(0.1), make_bsc(0.2));
  InputDistribution input = InputDistribution::uniform(2);
  PmsOptions options;
  options.trials = 5000;
  options.seed = 23;
  options.dump_traces = true;
  options.max_traces = 4;

  SchemeRunResult run = pms_noisy(channels, 2, 3, input, options);
  CHECK(run.estimate.method == "pms_noisy");
  CHECK(run.estimate.error_probability >= 0.0);
  CHECK(run.estimate.error_probability <= 1.0);
  CHECK(run.traces.size() == 4);
  for (const SchemeTrace& trace : run.traces) {
    REQUIRE(trace.steps.size() == 3);
    for (const TraceStep& step : trace.steps) {
      CHECK(step.atom_count >= 1);
      CHECK(step.coordinate > 0.0);
      CHECK(step.coordinate < 1.0);
      CHECK(step.pmf_value > 0.0);
    }
  }

  SchemeRunResult replay = pms_noisy(channels, 2, 3, input, options);
  CHECK(replay.estimate.error_probability == run.estimate.error_probability);
}
