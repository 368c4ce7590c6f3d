#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "agglab/monte_carlo.hpp"
#include "agglab/query_dag.hpp"

namespace agglab::harness {

enum class OutputFormat { Csv, Json };

std::string to_string(OutputFormat format);
OutputFormat output_format_from_string(const std::string& name);

struct ExperimentConfig {
  std::string experiment;
  std::vector<int> ns;
  std::vector<int> ds;  // explicit d values; empty means 1..d_max
  int d_max = 0;        // 0 picks the experiment's default
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 1;
  std::string out;
  OutputFormat format = OutputFormat::Csv;
  bool monte_carlo = false;

  // Throws std::invalid_argument on empty ranges or zero samples.
  void validate() const;
};

// Raised when an emitted row breaks lower <= discrete <= upper.
class SandwichViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kCurveMaxN = 2000;
inline constexpr int kCurveMaxD = 30;

// One row of an error-versus-degree curve. Errors are squared values:
// error_upper = closed_form_value^2, discrete_optimum = discrete_minimax^2.
// mc_estimate is the Monte Carlo error ratio of the transformed Chebyshev
// rule on a unit signal at its worst subset size.
struct CurvePoint {
  int n = 0;
  int d = 0;
  double error_lower = 0.0;
  double error_upper = 0.0;
  std::optional<double> discrete_optimum;  // empty above the solver cap
  std::optional<double> mc_estimate;
  std::optional<double> mc_stderr;
};

// Default grid: n in {100, 400, 1600, 6400}, d = 1..ceil(2 sqrt(n)) with d < n.
std::vector<std::pair<int, int>> curve_grid(const ExperimentConfig& config);
// Rows ordered by (n, d). Each row passes check_curve_point before it is returned.
std::vector<CurvePoint> run_curves(const ExperimentConfig& config);
void check_curve_point(const CurvePoint& point);
std::string format_curves(const std::vector<CurvePoint>& points, OutputFormat format);

struct BudgetRow {
  int n = 0;
  int d = 0;
  double analytic = 0.0;  // 1 - d/n
  double exact = 0.0;     // randomized difference rule at the singleton adversary
  std::string exact_method;
  MeanEstimate mc;
  bool passed = false;
};

// Rows for each d (1..n-1 when ds is empty). exact is computed from the
// enumerated rule when C(n, d) <= kMaxBudgetAtoms, else from miss_probability.
inline constexpr double kMaxBudgetAtoms = 5000;
std::vector<BudgetRow> run_query_budget(int n, const std::vector<int>& ds,
                                        std::uint64_t samples, std::uint64_t seed);
std::string format_query_budget(const std::vector<BudgetRow>& rows, OutputFormat format);

// Standard queries Q1..Qn against Y plus "Q", agent 1's expectation of Q2.
QueryDag common_signal_dag(int n);

struct CommonSignalReport {
  int n = 0;
  std::uint64_t samples = 0;
  double exact_error = 0.0;       // error ratio of sum Y_i - (n-1) Q
  MeanEstimate mc_mse;            // Monte Carlo E[(A - Y)^2]
  double max_residual = 0.0;      // max |A - Y| over all draws
  ComplexityReport complexity;
  double fixed_rule_error = 0.0;  // worst case of weight 2/(n+1) on each Y_i
  double fixed_rule_reference = 0.0;  // closed_form_value(n, 1)^2
  std::vector<double> variances;
  double precision_mse = 0.0;
  double fixed_mse = 0.0;
  std::vector<std::string> failures;
  bool passed() const { return failures.empty(); }
};

// Empty variances pick 1 for every agent except the last, which gets 4.
CommonSignalReport run_common_signal(int n, std::uint64_t samples, std::uint64_t seed,
                                     std::vector<double> variances = {});
std::string format_common_signal(const CommonSignalReport& report, OutputFormat format);

enum class Suite { Constructions, Minimax, Incentives, All };

std::string to_string(Suite suite);
Suite suite_from_string(const std::string& name);

struct CheckResult {
  std::string suite;
  std::string name;
  std::vector<std::string> ops;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  std::vector<std::string> uncovered_ops;  // filled for Suite::All only
  int failed() const;
  bool passed() const { return failed() == 0 && uncovered_ops.empty(); }
};

// Every operation the library exposes, as "module.op".
const std::vector<std::string>& operation_manifest();

VerifyReport run_verify(Suite suite, std::uint64_t samples, std::uint64_t seed);
std::string format_verify(const VerifyReport& report, OutputFormat format);

}  // namespace agglab::harness
