#pragma once

#include <cstdint>
#include <functional>

namespace agglab {

struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::uint64_t samples = 0;

  // |mean - expected| <= 3 standard_error, with a small absolute floor for
  // zero-variance estimators.
  bool within_three_se(double expected) const;
};

// Sample mean of f(k) for k in [0, samples). Draws are split into a fixed
// number of contiguous chunks that run in parallel and are merged in chunk
// order, so the result does not depend on the thread count.
MeanEstimate monte_carlo_mean(std::uint64_t samples, const std::function<double(std::uint64_t)>& f);

}  // namespace agglab
