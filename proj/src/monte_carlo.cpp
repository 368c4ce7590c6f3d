#include "agglab/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "agglab/parallel.hpp"

namespace agglab {

namespace {

constexpr std::uint64_t kChunks = 64;

struct Moments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
};

// Chan et al. pairwise combination of running moments.
Moments merge(const Moments& a, const Moments& b) {
  if (a.count == 0.0) return b;
  if (b.count == 0.0) return a;
  Moments out;
  out.count = a.count + b.count;
  const double delta = b.mean - a.mean;
  out.mean = a.mean + delta * b.count / out.count;
  out.m2 = a.m2 + b.m2 + delta * delta * a.count * b.count / out.count;
  return out;
}

}  // namespace

bool MeanEstimate::within_three_se(double expected) const {
  return std::abs(mean - expected) <= 3.0 * standard_error + 1e-12;
}

MeanEstimate monte_carlo_mean(std::uint64_t samples,
                              const std::function<double(std::uint64_t)>& f) {
  if (samples < 2) throw std::invalid_argument("monte_carlo_mean needs at least 2 samples");
  const std::uint64_t chunks = std::min(kChunks, samples);
  std::vector<Moments> parts(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const std::uint64_t begin = samples * c / chunks;
    const std::uint64_t end = samples * (c + 1) / chunks;
    Moments m;
    for (std::uint64_t k = begin; k < end; ++k) {
      const double x = f(k);
      m.count += 1.0;
      const double d = x - m.mean;
      m.mean += d / m.count;
      m.m2 += d * (x - m.mean);
    }
    parts[c] = m;
  });
  Moments total;
  for (const Moments& m : parts) total = merge(total, m);
  MeanEstimate out;
  out.samples = samples;
  out.mean = total.mean;
  out.standard_error = std::sqrt(total.m2 / (total.count - 1.0) / total.count);
  return out;
}

}  // namespace agglab
