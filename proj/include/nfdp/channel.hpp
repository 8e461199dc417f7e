#pragma once

#include <span>
#include <vector>

#include "nfdp/rng.hpp"

namespace nfdp {

// Finite alphabet {0, ..., size-1}.
struct Alphabet {
  int size = 0;
  explicit Alphabet(int s);
};

// Row-stochastic matrix: rows are conditional distributions over the output
// alphabet given the input symbol. Rows must sum to 1 within 1e-9 on ingestion
// and are renormalized, so every stored row sums to 1 within 1e-12.
class StochasticKernel {
 public:
  StochasticKernel(int input_size, int output_size, std::vector<double> row_major);

  static StochasticKernel from_rows(const std::vector<std::vector<double>>& rows);

  int input_size() const { return input_size_; }
  int output_size() const { return output_size_; }

  double operator()(int input, int output) const {
    return probs_[static_cast<std::size_t>(input) * output_size_ + output];
  }

  std::span<const double> row(int input) const;

  const std::vector<double>& data() const { return probs_; }

  bool strictly_positive() const;

 private:
  int input_size_;
  int output_size_;
  std::vector<double> probs_;
};

// Binary symmetric channel with crossover probability eps in [0, 1].
StochasticKernel make_bsc(double eps);

// Noiseless n-ary channel (identity matrix).
StochasticKernel make_identity(int n);

// Forward link X -> Y and feedback link Y -> Z. The feedback kernel's input
// alphabet must match the forward kernel's output alphabet.
struct ChannelPair {
  StochasticKernel forward;
  StochasticKernel feedback;
  ChannelPair(StochasticKernel fwd, StochasticKernel bwd);

  int input_size() const { return forward.input_size(); }
  int output_size() const { return forward.output_size(); }
  int feedback_size() const { return feedback.output_size(); }
};

// Draws one output symbol from the kernel row for `input`.
// Inverse-CDF walk over the row, so the draw consumes exactly one uniform.
int sample(const StochasticKernel& kernel, int input, Rng& rng);

}  // namespace nfdp
