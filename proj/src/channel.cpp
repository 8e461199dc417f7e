#include "nfdp/channel.hpp"

#include <cmath>
#include <string>

#include "nfdp/errors.hpp"

namespace nfdp {

namespace {
constexpr double kIngestTolerance = 1e-9;
}

Alphabet::Alphabet(int s) : size(s) {
  if (s < 1) throw DomainError("Alphabet: size must be at least 1, got " + std::to_string(s));
}

StochasticKernel::StochasticKernel(int input_size, int output_size, std::vector<double> row_major)
    : input_size_(input_size), output_size_(output_size), probs_(std::move(row_major)) {
  if (input_size_ < 1 || output_size_ < 1)
    throw DomainError("StochasticKernel: alphabet sizes must be at least 1");
  if (probs_.size() != static_cast<std::size_t>(input_size_) * output_size_)
    throw ValidationError("StochasticKernel: expected " +
                          std::to_string(static_cast<std::size_t>(input_size_) * output_size_) +
                          " entries, got " + std::to_string(probs_.size()));
  for (int i = 0; i < input_size_; ++i) {
    double sum = 0.0;
    for (int j = 0; j < output_size_; ++j) {
      double p = probs_[static_cast<std::size_t>(i) * output_size_ + j];
      if (!(p >= 0.0) || !std::isfinite(p))
        throw ValidationError("StochasticKernel: row " + std::to_string(i) +
                              " has a negative or non-finite entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kIngestTolerance)
      throw ValidationError("StochasticKernel: row " + std::to_string(i) + " sums to " +
                            std::to_string(sum) + ", expected 1 within 1e-9");
    for (int j = 0; j < output_size_; ++j)
      probs_[static_cast<std::size_t>(i) * output_size_ + j] /= sum;
  }
}

StochasticKernel StochasticKernel::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ValidationError("StochasticKernel: no rows given");
  std::size_t width = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * width);
  for (const auto& r : rows) {
    if (r.size() != width)
      throw ValidationError("StochasticKernel: ragged rows (expected width " +
                            std::to_string(width) + ")");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return StochasticKernel(static_cast<int>(rows.size()), static_cast<int>(width), std::move(flat));
}

std::span<const double> StochasticKernel::row(int input) const {
  if (input < 0 || input >= input_size_)
    throw DomainError("StochasticKernel::row: input symbol " + std::to_string(input) +
                      " outside alphabet of size " + std::to_string(input_size_));
  return {probs_.data() + static_cast<std::size_t>(input) * output_size_,
          static_cast<std::size_t>(output_size_)};
}

bool StochasticKernel::strictly_positive() const {
  for (double p : probs_)
    if (p <= 0.0) return false;
  return true;
}

StochasticKernel make_bsc(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0))
    throw DomainError("make_bsc: crossover must lie in [0, 1], got " + std::to_string(eps));
  return StochasticKernel(2, 2, {1.0 - eps, eps, eps, 1.0 - eps});
}

StochasticKernel make_identity(int n) {
  if (n < 1) throw DomainError("make_identity: alphabet size must be at least 1");
  std::vector<double> flat(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) flat[static_cast<std::size_t>(i) * n + i] = 1.0;
  return StochasticKernel(n, n, std::move(flat));
}

ChannelPair::ChannelPair(StochasticKernel fwd, StochasticKernel bwd)
    : forward(std::move(fwd)), feedback(std::move(bwd)) {
  if (feedback.input_size() != forward.output_size())
    throw ValidationError("ChannelPair: feedback input alphabet (" +
                          std::to_string(feedback.input_size()) +
                          ") must match forward output alphabet (" +
                          std::to_string(forward.output_size()) + ")");
}

int sample(const StochasticKernel& kernel, int input, Rng& rng) {
  auto r = kernel.row(input);
  double u = rng.next_double();
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < r.size(); ++j) {
    acc += r[j];
    if (u < acc) return static_cast<int>(j);
  }
  return static_cast<int>(r.size()) - 1;
}

}  // namespace nfdp
