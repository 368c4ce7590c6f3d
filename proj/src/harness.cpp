#include "agglab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "agglab/aggregation_rules.hpp"
#include "agglab/io.hpp"
#include "agglab/minimax.hpp"
#include "agglab/parallel.hpp"
#include "agglab/query_families.hpp"
#include "agglab/rng.hpp"

namespace agglab::harness {

std::string to_string(OutputFormat format) {
  return format == OutputFormat::Json ? "json" : "csv";
}

OutputFormat output_format_from_string(const std::string& name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  throw std::invalid_argument("unknown output format '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (samples < 1) throw std::invalid_argument("sample count must be at least 1");
  if (d_max < 0) throw std::invalid_argument("d-max must be nonnegative");
  for (int n : ns) {
    if (n < 2) throw std::invalid_argument(fmt::format("n = {} is below 2", n));
  }
  for (int d : ds) {
    if (d < 1) throw std::invalid_argument(fmt::format("d = {} is below 1", d));
  }
}

namespace {

std::string number(double x) { return fmt::format("{:.17g}", x); }

std::string optional_number(const std::optional<double>& x) {
  return x ? number(*x) : std::string();
}

io::Json optional_json(const std::optional<double>& x) {
  return x ? io::Json(*x) : io::Json(nullptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// Curves

std::vector<std::pair<int, int>> curve_grid(const ExperimentConfig& config) {
  config.validate();
  std::vector<int> ns = config.ns.empty() ? std::vector<int>{100, 400, 1600, 6400} : config.ns;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  std::vector<std::pair<int, int>> grid;
  for (int n : ns) {
    std::vector<int> ds = config.ds;
    if (ds.empty()) {
      const int top = config.d_max > 0 ? config.d_max
                                       : static_cast<int>(std::ceil(2.0 * std::sqrt(double(n))));
      for (int d = 1; d <= top; ++d) ds.push_back(d);
    }
    std::sort(ds.begin(), ds.end());
    ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
    for (int d : ds) {
      if (d < n) grid.emplace_back(n, d);
    }
  }
  if (grid.empty()) throw std::invalid_argument("curve grid is empty");
  return grid;
}

void check_curve_point(const CurvePoint& p) {
  constexpr double kTol = 1e-9;
  if (!(p.error_lower <= p.error_upper + kTol)) {
    throw SandwichViolation(fmt::format("n={} d={}: lower {} exceeds upper {}", p.n, p.d,
                                        p.error_lower, p.error_upper));
  }
  if (p.discrete_optimum) {
    const double v = *p.discrete_optimum;
    if (!(p.error_lower <= v + kTol) || !(v <= p.error_upper + kTol)) {
      throw SandwichViolation(fmt::format("n={} d={}: discrete optimum {} outside [{}, {}]", p.n,
                                          p.d, v, p.error_lower, p.error_upper));
    }
  }
  if (p.d == 1) {
    const double n = p.n;
    const double a = (n - 1.0) * (n - 1.0) / ((n + 1.0) * (n + 1.0));
    const double b = 1.0 - 4.0 * n / ((n + 1.0) * (n + 1.0));
    if (std::abs(p.error_upper - a) > 1e-12 || std::abs(a - b) > 1e-12) {
      throw SandwichViolation(fmt::format("n={} d=1: upper {} disagrees with (n-1)^2/(n+1)^2 = {}",
                                          p.n, p.error_upper, a));
    }
  }
}

std::vector<CurvePoint> run_curves(const ExperimentConfig& config) {
  const auto grid = curve_grid(config);
  if (config.monte_carlo && config.samples < 2) {
    throw std::invalid_argument("Monte Carlo needs at least 2 samples");
  }
  std::vector<CurvePoint> points(grid.size());
  const CounterRng rng(config.seed);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto [n, d] = grid[i];
    CurvePoint& p = points[i];
    p.n = n;
    p.d = d;
    const Bounds b = bounds(n, d);
    p.error_lower = b.lower;
    p.error_upper = b.upper;
  }
  parallel_for(grid.size(), [&](std::size_t i) {
    CurvePoint& p = points[i];
    if (p.n <= kCurveMaxN && p.d <= kCurveMaxD) {
      const double v = discrete_minimax(p.n, p.d).value;
      p.discrete_optimum = v * v;
    }
  });
  if (config.monte_carlo) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CurvePoint& p = points[i];
      const PolySpec hat = transformed_chebyshev(p.n, p.d);
      double worst = 0.0;
      for (int t = 1; t <= p.n; ++t) worst = std::max(worst, std::abs(hat(t)));
      // The rule puts 1 - hat(t) on a size-t signal, so A - Y = -hat(t) X.
      const auto stream = static_cast<std::uint32_t>(i + 1);
      MeanEstimate est = monte_carlo_mean(config.samples, [&](std::uint64_t k) {
        const double x = rng.normal_pair(stream, k, 0)[0];
        const double r = worst * x;
        return r * r;
      });
      p.mc_estimate = est.mean;
      p.mc_stderr = est.standard_error;
    }
  }
  for (const CurvePoint& p : points) check_curve_point(p);
  return points;
}

std::string format_curves(const std::vector<CurvePoint>& points, OutputFormat format) {
  if (format == OutputFormat::Json) {
    io::Json rows = io::Json::array();
    for (const CurvePoint& p : points) {
      rows.push_back({{"n", p.n},
                      {"d", p.d},
                      {"error_lower", p.error_lower},
                      {"error_upper", p.error_upper},
                      {"discrete_optimum", optional_json(p.discrete_optimum)},
                      {"mc_estimate", optional_json(p.mc_estimate)},
                      {"mc_stderr", optional_json(p.mc_stderr)}});
    }
    return rows.dump(2) + "\n";
  }
  std::string out = "n,d,error_lower,error_upper,discrete_optimum,mc_estimate,mc_stderr\n";
  for (const CurvePoint& p : points) {
    out += fmt::format("{},{},{},{},{},{},{}\n", p.n, p.d, number(p.error_lower),
                       number(p.error_upper), optional_number(p.discrete_optimum),
                       optional_number(p.mc_estimate), optional_number(p.mc_stderr));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Query budget

std::vector<BudgetRow> run_query_budget(int n, const std::vector<int>& ds_in,
                                        std::uint64_t samples, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("query budget needs n >= 2");
  if (samples < 2) throw std::invalid_argument("query budget needs at least 2 samples");
  std::vector<int> ds = ds_in;
  if (ds.empty()) {
    ds.resize(static_cast<std::size_t>(n - 1));
    std::iota(ds.begin(), ds.end(), 1);
  }
  for (int d : ds) {
    if (d < 1 || d >= n) throw std::invalid_argument(fmt::format("need 1 <= d < n, got d = {}", d));
  }
  const CounterRng rng(seed);
  std::vector<BudgetRow> rows;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    const int d = ds[r];
    BudgetRow row;
    row.n = n;
    row.d = d;
    row.analytic = 1.0 - static_cast<double>(d) / n;
    if (n <= kMaxAgents && binomial(n, d) <= kMaxBudgetAtoms) {
      std::vector<SubsetMask> singles;
      for (int i = 1; i <= n; ++i) singles.push_back(SubsetMask::singleton(i, n));
      const Universe universe = make_universe(std::move(singles), n);
      row.exact = expected_error_ratio(randomized_difference_rule(n, d, universe),
                                       adversarial_singleton_model(n));
      row.exact_method = "enumeration";
    } else {
      row.exact = miss_probability(n, d, 1);
      row.exact_method = "miss-probability";
    }
    // Each draw picks a uniform d-subset (partial Fisher-Yates) and unit
    // Gaussian singletons; the rule recovers exactly the chosen agents' signals.
    const auto stream = static_cast<std::uint32_t>(2 * r + 1);
    row.mc = monte_carlo_mean(samples, [&](std::uint64_t k) {
      std::vector<int> agents(static_cast<std::size_t>(n));
      std::iota(agents.begin(), agents.end(), 0);
      for (int i = 0; i < d; ++i) {
        const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i),
                                                      stream + 1, k, static_cast<std::uint32_t>(i)));
        std::swap(agents[i], agents[j]);
      }
      double missed = 0.0;
      for (int i = d; i < n; ++i) {
        const int a = agents[i];
        missed += rng.normal_pair(stream, k, static_cast<std::uint32_t>(a / 2))[a % 2];
      }
      return missed * missed / n;
    });
    row.passed = std::abs(row.exact - row.analytic) <= 1e-12 && row.mc.within_three_se(row.analytic);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_query_budget(const std::vector<BudgetRow>& rows, OutputFormat format) {
  if (format == OutputFormat::Json) {
    io::Json out = io::Json::array();
    for (const BudgetRow& r : rows) {
      out.push_back({{"n", r.n},
                     {"d", r.d},
                     {"analytic", r.analytic},
                     {"exact", r.exact},
                     {"exact_method", r.exact_method},
                     {"mc_estimate", r.mc.mean},
                     {"mc_stderr", r.mc.standard_error},
                     {"samples", r.mc.samples},
                     {"passed", r.passed}});
    }
    return out.dump(2) + "\n";
  }
  std::string out = "n,d,analytic,exact,exact_method,mc_estimate,mc_stderr,samples,passed\n";
  for (const BudgetRow& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.n, r.d, number(r.analytic),
                       number(r.exact), r.exact_method, number(r.mc.mean),
                       number(r.mc.standard_error), r.mc.samples, r.passed ? 1 : 0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Common signal

QueryDag common_signal_dag(int n) {
  if (n < 2) throw std::invalid_argument("common-signal example needs n >= 2");
  QueryDag dag = standard_query_set(n, common_signal_universe(n));
  dag.add_query("Q", 1, {{"Q2", 1.0}});
  return dag;
}

CommonSignalReport run_common_signal(int n, std::uint64_t samples, std::uint64_t seed,
                                     std::vector<double> variances) {
  if (n < 2) throw std::invalid_argument("common-signal example needs n >= 2");
  if (samples < 2) throw std::invalid_argument("common-signal example needs at least 2 samples");
  if (variances.empty()) {
    variances.assign(static_cast<std::size_t>(n), 1.0);
    variances.back() = 4.0;
  }
  if (static_cast<int>(variances.size()) != n) {
    throw std::invalid_argument("need one variance per agent");
  }

  CommonSignalReport rep;
  rep.n = n;
  rep.samples = samples;
  rep.variances = variances;

  DeterministicRule rule{common_signal_dag(n), {}};
  for (int i = 1; i <= n; ++i) rule.weights[fmt::format("Q{}", i)] = 1.0;
  rule.weights["Q"] = -(n - 1.0);
  const SignalModel model = common_signal_model(std::vector<double>(n, 1.0), 1.0);
  const LinearForm aggregate = rule.output();
  rep.exact_error = error_ratio(model, aggregate);
  if (!aggregate.approx_equal(LinearForm::target(n, model.support()), 1e-12)) {
    rep.failures.push_back("reconstruction is not symbolically equal to Y");
  }

  // Evaluate every query on each draw and aggregate the realized answers.
  const Universe& support = model.support();
  std::vector<std::pair<double, std::vector<double>>> weighted;
  for (const auto& [id, beta] : rule.weights) {
    weighted.emplace_back(beta, dense_coefficients(rule.dag.value_of(id), support));
  }
  const Sampler sampler(model, seed, 1);
  auto residual = [&](std::uint64_t k) {
    std::vector<double> x(support.size());
    const double y = sampler.draw_into(k, x);
    double a = 0.0;
    for (const auto& [beta, coeffs] : weighted) {
      double q = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) q += coeffs[j] * x[j];
      a += beta * q;
    }
    return a - y;
  };
  rep.mc_mse = monte_carlo_mean(samples, [&](std::uint64_t k) {
    const double r = residual(k);
    return r * r;
  });
  constexpr std::uint64_t kChunks = 64;
  std::vector<double> chunk_max(kChunks, 0.0);
  parallel_for(kChunks, [&](std::size_t c) {
    for (std::uint64_t k = samples * c / kChunks; k < samples * (c + 1) / kChunks; ++k) {
      chunk_max[c] = std::max(chunk_max[c], std::abs(residual(k)));
    }
  });
  rep.max_residual = *std::max_element(chunk_max.begin(), chunk_max.end());
  if (!(rep.max_residual < 1e-10)) {
    rep.failures.push_back(fmt::format("max reconstruction residual {} >= 1e-10", rep.max_residual));
  }

  rep.complexity = complexity(rule.dag);
  if (rep.complexity.query_c != n + 1 || rep.complexity.order_c != 2 ||
      rep.complexity.agent_c != 2) {
    rep.failures.push_back(fmt::format("complexity ({}, {}, {}) differs from ({}, 2, 2)",
                                       rep.complexity.query_c, rep.complexity.order_c,
                                       rep.complexity.agent_c, n + 1));
  }

  const double w = 2.0 / (n + 1.0);
  rep.fixed_rule_error = worst_case_error(fixed_weight_rule(n, w).output(),
                                          common_signal_universe(n)).value;
  const double cf = closed_form_value(n, 1);
  rep.fixed_rule_reference = cf * cf;
  const double expected = (n - 1.0) * (n - 1.0) / ((n + 1.0) * (n + 1.0));
  if (std::abs(rep.fixed_rule_error - expected) > 1e-12 ||
      std::abs(rep.fixed_rule_reference - expected) > 1e-12) {
    rep.failures.push_back(fmt::format("fixed-rule error {} (closed form {}) differs from {}",
                                       rep.fixed_rule_error, rep.fixed_rule_reference, expected));
  }

  const SignalModel weighted_model = common_signal_model(variances, 1.0);
  rep.precision_mse = exact_mse(weighted_model, precision_weighted_rule(variances).output());
  rep.fixed_mse = exact_mse(weighted_model, fixed_weight_rule(n, w).output());
  if (rep.precision_mse > rep.fixed_mse + 1e-12) {
    rep.failures.push_back(fmt::format("precision-weighted MSE {} exceeds fixed-weight MSE {}",
                                       rep.precision_mse, rep.fixed_mse));
  }
  return rep;
}

std::string format_common_signal(const CommonSignalReport& r, OutputFormat format) {
  if (format == OutputFormat::Json) {
    io::Json out = {{"n", r.n},
                    {"samples", r.samples},
                    {"exact_error", r.exact_error},
                    {"mc_mse", r.mc_mse.mean},
                    {"mc_mse_stderr", r.mc_mse.standard_error},
                    {"max_residual", r.max_residual},
                    {"query_c", r.complexity.query_c},
                    {"order_c", r.complexity.order_c},
                    {"agent_c", r.complexity.agent_c},
                    {"fixed_rule_error", r.fixed_rule_error},
                    {"fixed_rule_reference", r.fixed_rule_reference},
                    {"variances", r.variances},
                    {"precision_mse", r.precision_mse},
                    {"fixed_mse", r.fixed_mse},
                    {"failures", r.failures},
                    {"passed", r.passed()}};
    return out.dump(2) + "\n";
  }
  std::string out =
      "n,samples,exact_error,mc_mse,mc_mse_stderr,max_residual,query_c,order_c,agent_c,"
      "fixed_rule_error,fixed_rule_reference,precision_mse,fixed_mse,passed\n";
  out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.n, r.samples,
                     number(r.exact_error), number(r.mc_mse.mean),
                     number(r.mc_mse.standard_error), number(r.max_residual),
                     r.complexity.query_c, r.complexity.order_c, r.complexity.agent_c,
                     number(r.fixed_rule_error), number(r.fixed_rule_reference),
                     number(r.precision_mse), number(r.fixed_mse), r.passed() ? 1 : 0);
  return out;
}

}  // namespace agglab::harness
