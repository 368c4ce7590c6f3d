#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "agglab/aggregation_rules.hpp"
#include "agglab/lp.hpp"
#include "agglab/polynomial.hpp"

namespace agglab {

enum class MinimaxDomain { Continuous, Grid };
enum class MinimaxMethod { ClosedForm, Simplex, Remez };

std::string to_string(MinimaxDomain domain);
std::string to_string(MinimaxMethod method);

struct AlternationPoint {
  double t = 0.0;
  int sign = 1;  // +1 or -1

  friend bool operator==(const AlternationPoint&, const AlternationPoint&) = default;
};

// Optimal polynomial p with p(0) = 1 and deg p <= d minimizing max |p| over
// the domain, with an equioscillation certificate.
struct MinimaxResult {
  int n = 0;
  int d = 0;
  double value = 0.0;  // max |p| over the domain
  PolySpec poly;
  std::vector<AlternationPoint> alternation;
  MinimaxDomain domain = MinimaxDomain::Grid;
  MinimaxMethod method = MinimaxMethod::Simplex;
  int iterations = 0;
};

// Raised when a solver cannot produce a certified optimum.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a result fails independent certificate validation.
class CertificateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 2 / (q^d + q^-d) with q = (sqrt(n) + 1) / (sqrt(n) - 1). Requires n >= 2.
double closed_form_value(int n, int d);

// T_d(m(x)) / T_d(m(0)) with m(x) = (2x - (n + 1)) / (n - 1), on [1, n].
PolySpec transformed_chebyshev(int n, int d);
// ((n - 1) cos(k pi / d) + (n + 1)) / 2 for k = d, ..., 0 (ascending).
std::vector<double> transformed_chebyshev_extrema(int n, int d);

// The continuous optimum: transformed Chebyshev polynomial with its d + 1
// alternating extrema.
MinimaxResult continuous_minimax(int n, int d);

struct SolverOptions {
  MinimaxMethod method = MinimaxMethod::Simplex;
  lp::PivotRule pivot = lp::PivotRule::Bland;
  // Start the simplex from the alternating basis at the rounded Chebyshev
  // extrema instead of running phase one.
  bool warm_start = true;
  // Also run the other solver and require agreement within 1e-9.
  bool cross_check = false;
  // Fall back to the other solver when the first fails validation.
  bool fallback = true;
  int max_iterations = 0;
};

inline constexpr int kMaxDiscreteN = 2000;

// Exact optimum over the grid {1, ..., n}; requires 1 <= d < n <= kMaxDiscreteN.
// The returned certificate is always validated.
MinimaxResult discrete_minimax(int n, int d, const SolverOptions& options = {});

struct CertificateCheck {
  bool valid = true;
  std::string reason;
};

// Independent validation of a grid result: d + 1 strictly increasing
// integers in [1, n] with alternating signs, each attaining the value to a
// relative 1e-9, max |p| over the grid at most value * (1 + 1e-9), and
// p(0) = 1. Together these bound the true optimum from both sides.
CertificateCheck check_certificate(const MinimaxResult& result);
// Throws CertificateError when check_certificate fails.
void validate_certificate(const MinimaxResult& result);

// Lexicographically smallest alternating sequence of d + 1 grid points where
// |p| attains value within a relative 1e-9. Empty when none exists.
std::vector<AlternationPoint> extract_certificate(const PolySpec& p, int n, int d, double value);

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Squared-error sandwich: upper = closed_form^2, lower = (1 - d^2/(n-1))^2 upper,
// with the factor clamped at 0.
Bounds bounds(int n, int d);

// 4 exp(-4d / (sqrt(n) + 1)).
double large_d_bound(int n, int d);

enum class Regime { Small, Critical, Large };
std::string to_string(Regime regime);

struct RegimeReport {
  Regime regime = Regime::Small;
  double ratio = 0.0;  // d / sqrt(n)
  Bounds bounds;
  double one_minus_lower = 0.0;
  double d_squared_over_n = 0.0;
  double large_d_bound = 0.0;
};

// Small when d / sqrt(n) < 0.5, large when > 2, critical in between.
RegimeReport regime(int n, int d);

// Worst-case error of a symmetric intersection rule: max over t in [n] of
// (1 - p(t))^2.
double rule_error_equivalence(const SymmetricRule& rule, int n);

}  // namespace agglab
