#include "agglab/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <fmt/format.h>

#include "agglab/faults.hpp"

namespace agglab {

std::string to_string(MinimaxDomain domain) {
  return domain == MinimaxDomain::Continuous ? "continuous" : "grid";
}

std::string to_string(MinimaxMethod method) {
  switch (method) {
    case MinimaxMethod::ClosedForm:
      return "closed_form";
    case MinimaxMethod::Simplex:
      return "simplex";
    case MinimaxMethod::Remez:
      return "remez";
  }
  return "unknown";
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::Small:
      return "small";
    case Regime::Critical:
      return "critical";
    case Regime::Large:
      return "large";
  }
  return "unknown";
}

namespace {

constexpr double kAttainTolerance = 1e-9;
constexpr double kConstraintTolerance = 1e-9;

void check_n(int n) {
  if (n < 2) throw std::invalid_argument(fmt::format("minimax needs n >= 2, got {}", n));
}

void check_degree(int d) {
  if (d < 1) throw std::invalid_argument(fmt::format("minimax needs d >= 1, got {}", d));
}

double map_to_unit(int n, double x) { return (2.0 * x - (n + 1.0)) / (n - 1.0); }

struct LeveledPoly {
  PolySpec poly;
  double value = 0.0;
};

// The polynomial taking sign_i * level at node_i, rescaled so that p(0) = 1.
LeveledPoly leveled_poly(std::vector<double> nodes, const std::vector<int>& signs, double level,
                         int n) {
  std::vector<double> values(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) values[i] = signs[i] * level;
  PolySpec raw = PolySpec::interpolating(nodes, values, 1.0, n);
  const double at_zero = raw(0.0);
  if (!std::isfinite(at_zero) || !(at_zero > 0.0)) {
    throw SolverError("solver polynomial is not positive at 0");
  }
  for (double& v : values) v /= at_zero;
  const double value = std::abs(values.front());
  return {PolySpec::interpolating(std::move(nodes), std::move(values), 1.0, n,
                                  PolyConstraint::ValueAtZeroIsOne),
          value};
}

std::vector<double> initial_reference(int n, int d);

// ---------------------------------------------------------------------------
// Simplex route: the L1 dual of the grid LP.
//   min sum_t (u_t + v_t)  s.t.  sum_t (u_t - v_t) phi_k(t) = phi_k(0),  u, v >= 0
// with phi_k = T_k(m(t)). Its optimum is 1 / (optimal value) and the
// multipliers are the coefficients of p / value.

MinimaxResult solve_simplex(int n, int d, const SolverOptions& options) {
  const int rows = d + 1;
  lp::Problem problem;
  problem.rows = rows;
  problem.cols = 2 * n;
  problem.a.assign(static_cast<std::size_t>(rows) * problem.cols, 0.0);
  problem.b.assign(static_cast<std::size_t>(rows), 0.0);
  problem.c.assign(static_cast<std::size_t>(problem.cols), 1.0);
  for (int k = 0; k < rows; ++k) {
    problem.b[k] = chebyshev_T(k, map_to_unit(n, 0.0));
    for (int t = 1; t <= n; ++t) {
      const double phi = chebyshev_T(k, map_to_unit(n, t));
      problem.at(k, t - 1) = phi;
      problem.at(k, n + t - 1) = -phi;
    }
  }
  // Start from alternating columns at the rounded Chebyshev extrema. The
  // weights solving the equality system there are the Lagrange basis values
  // at 0, whose signs alternate, so this basis is primal feasible.
  lp::Options lp_options;
  lp_options.pivot = options.pivot;
  lp_options.max_iterations = options.max_iterations;
  auto start = options.warm_start ? initial_reference(n, d) : std::vector<double>{};
  for (std::size_t i = 0; i < start.size(); ++i) {
    const int col = static_cast<int>(start[i]) - 1;
    lp_options.initial_basis.push_back(i % 2 == 0 ? col : n + col);
  }
  lp::Solution sol = lp::solve(problem, lp_options);
  if (sol.status != lp::Status::Optimal) {
    throw SolverError(fmt::format("simplex stopped with status {} after {} iterations (n={}, d={})",
                                  lp::to_string(sol.status), sol.iterations, n, d));
  }
  if (!(sol.objective > 0.0) || !std::isfinite(sol.objective)) {
    throw SolverError("simplex returned a non-positive objective");
  }
  // Basic columns have zero reduced cost, so p = P / P(0) attains
  // +-1/objective there: u columns give +, v columns give -.
  std::vector<std::pair<double, int>> points;
  for (int col : sol.basis) {
    points.emplace_back(col < n ? col + 1 : col - n + 1, col < n ? 1 : -1);
  }
  std::sort(points.begin(), points.end());
  std::vector<double> nodes;
  std::vector<int> signs;
  for (const auto& [t, s] : points) {
    nodes.push_back(t);
    signs.push_back(s);
  }
  LeveledPoly lp = leveled_poly(std::move(nodes), signs, 1.0 / sol.objective, n);
  MinimaxResult out;
  out.n = n;
  out.d = d;
  out.value = lp.value;
  out.poly = std::move(lp.poly);
  out.method = MinimaxMethod::Simplex;
  out.iterations = sol.iterations;
  return out;
}

// ---------------------------------------------------------------------------
// Remez route: discrete single-point exchange on the grid.

struct Reference {
  std::vector<double> x;
  std::vector<double> weights;  // barycentric, scaled
  double h = 0.0;
};

void prepare(Reference& ref) {
  const std::size_t m = ref.x.size();
  std::vector<double> log_w(m, 0.0);
  std::vector<double> sign(m, 1.0);
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      log_w[i] -= std::log(std::abs(ref.x[i] - ref.x[j]));
      if (j > i) sign[i] = -sign[i];
    }
    max_log = std::max(max_log, log_w[i]);
  }
  ref.weights.resize(m);
  for (std::size_t i = 0; i < m; ++i) ref.weights[i] = sign[i] * std::exp(log_w[i] - max_log);

  // |l_i(0)| = prod_{j != i} x_j / |x_i - x_j|, summed in log space.
  std::vector<double> log_l(m, 0.0);
  double max_l = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      log_l[i] += std::log(ref.x[j]) - std::log(std::abs(ref.x[i] - ref.x[j]));
    }
    max_l = std::max(max_l, log_l[i]);
  }
  double s = 0.0;
  for (double l : log_l) s += std::exp(l - max_l);
  ref.h = std::exp(-max_l) / s;
}

double reference_value(const Reference& ref, std::size_t i) {
  return (i % 2 == 0 ? 1.0 : -1.0) * ref.h;
}

double evaluate(const Reference& ref, double t) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < ref.x.size(); ++i) {
    const double diff = t - ref.x[i];
    if (diff == 0.0) return reference_value(ref, i);
    const double w = ref.weights[i] / diff;
    num += w * reference_value(ref, i);
    den += w;
  }
  return num / den;
}

std::vector<double> initial_reference(int n, int d) {
  auto extrema = transformed_chebyshev_extrema(n, d);
  std::vector<double> x(extrema.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(std::round(extrema[i]), 1.0, double(n));
  for (std::size_t i = 1; i < x.size(); ++i) x[i] = std::max(x[i], x[i - 1] + 1.0);
  for (std::size_t i = x.size(); i-- > 0;) {
    const double cap = n - static_cast<double>(x.size() - 1 - i);
    x[i] = std::min(x[i], cap);
    if (i + 1 < x.size()) x[i] = std::min(x[i], x[i + 1] - 1.0);
  }
  return x;
}

MinimaxResult solve_remez(int n, int d, const SolverOptions& options) {
  Reference ref;
  ref.x = initial_reference(n, d);
  const int max_iterations = options.max_iterations > 0 ? options.max_iterations : 200 * (d + 1) + 200;
  int iteration = 0;
  for (;; ++iteration) {
    if (iteration >= max_iterations) {
      throw SolverError(fmt::format("Remez exchange did not converge in {} steps (n={}, d={})",
                                    max_iterations, n, d));
    }
    prepare(ref);
    double worst = 0.0;
    double worst_t = 0.0;
    double worst_p = 0.0;
    for (int t = 1; t <= n; ++t) {
      const double p = evaluate(ref, t);
      if (std::abs(p) > worst) {
        worst = std::abs(p);
        worst_t = t;
        worst_p = p;
      }
    }
    if (worst <= ref.h * (1.0 + 1e-13)) break;

    // Single-point exchange keeping the signs alternating.
    auto& x = ref.x;
    const auto pos = std::lower_bound(x.begin(), x.end(), worst_t) - x.begin();
    const auto sign_at = [&](std::ptrdiff_t i) { return i % 2 == 0 ? 1.0 : -1.0; };
    const double s = worst_p > 0 ? 1.0 : -1.0;
    if (pos == 0) {
      if (sign_at(0) == s) {
        x[0] = worst_t;
      } else {
        x.pop_back();
        x.insert(x.begin(), worst_t);
      }
    } else if (pos == static_cast<std::ptrdiff_t>(x.size())) {
      const std::ptrdiff_t last = pos - 1;
      if (sign_at(last) == s) {
        x[last] = worst_t;
      } else {
        x.erase(x.begin());
        x.push_back(worst_t);
      }
    } else {
      // worst_t lies strictly between x[pos - 1] and x[pos].
      if (sign_at(pos - 1) == s) {
        x[pos - 1] = worst_t;
      } else {
        x[pos] = worst_t;
      }
    }
  }

  std::vector<int> signs;
  for (std::size_t i = 0; i < ref.x.size(); ++i) signs.push_back(i % 2 == 0 ? 1 : -1);
  LeveledPoly lp = leveled_poly(ref.x, signs, ref.h, n);
  MinimaxResult out;
  out.n = n;
  out.d = d;
  out.value = lp.value;
  out.poly = std::move(lp.poly);
  out.method = MinimaxMethod::Remez;
  out.iterations = iteration;
  return out;
}

void inject_faults(MinimaxResult& r) {
  using faults::Fault;
  if (faults::is_active(Fault::SkewMinimaxValue)) r.value *= 0.99;
  if (faults::is_active(Fault::PerturbMinimaxPoly)) r.poly = r.poly.shifted(0.01 * r.value);
  if (faults::is_active(Fault::ShiftCertificatePoint) && !r.alternation.empty()) {
    // Some grids attain the optimum at two adjacent points; skip those so the
    // moved point really stops attaining.
    const double floor = r.value * (1.0 - kAttainTolerance);
    for (AlternationPoint& a : r.alternation) {
      const double to = a.t < r.n ? a.t + 1.0 : a.t - 1.0;
      if (std::abs(r.poly(to)) < floor) {
        a.t = to;
        break;
      }
    }
  }
}

MinimaxResult run_method(int n, int d, MinimaxMethod method, const SolverOptions& options) {
  MinimaxResult r = method == MinimaxMethod::Remez ? solve_remez(n, d, options)
                                                   : solve_simplex(n, d, options);
  r.domain = MinimaxDomain::Grid;
  r.alternation = extract_certificate(r.poly, n, d, r.value);
  inject_faults(r);
  return r;
}

MinimaxMethod other(MinimaxMethod m) {
  return m == MinimaxMethod::Remez ? MinimaxMethod::Simplex : MinimaxMethod::Remez;
}

}  // namespace

double closed_form_value(int n, int d) {
  check_n(n);
  if (d < 0) throw std::invalid_argument("closed_form_value: negative degree");
  const double r = std::sqrt(static_cast<double>(n));
  const double log_q = std::log((r + 1.0) / (r - 1.0));
  // 2 / (q^d + q^-d) = 1 / cosh(d log q)
  return 1.0 / std::cosh(d * log_q);
}

PolySpec transformed_chebyshev(int n, int d) {
  check_n(n);
  if (d < 0) throw std::invalid_argument("transformed_chebyshev: negative degree");
  std::vector<double> coeffs(static_cast<std::size_t>(d) + 1, 0.0);
  coeffs[d] = 1.0 / chebyshev_T_hyperbolic(d, map_to_unit(n, 0.0));
  return PolySpec(std::move(coeffs), 1.0, n, PolyConstraint::ValueAtZeroIsOne);
}

std::vector<double> transformed_chebyshev_extrema(int n, int d) {
  check_n(n);
  check_degree(d);
  std::vector<double> out;
  for (int k = d; k >= 0; --k) {
    out.push_back(((n - 1.0) * std::cos(k * std::numbers::pi / d) + (n + 1.0)) / 2.0);
  }
  return out;
}

MinimaxResult continuous_minimax(int n, int d) {
  check_n(n);
  check_degree(d);
  MinimaxResult out;
  out.n = n;
  out.d = d;
  out.value = closed_form_value(n, d);
  out.poly = transformed_chebyshev(n, d);
  out.domain = MinimaxDomain::Continuous;
  out.method = MinimaxMethod::ClosedForm;
  for (double x : transformed_chebyshev_extrema(n, d)) {
    out.alternation.push_back({x, out.poly(x) > 0 ? 1 : -1});
  }
  return out;
}

MinimaxResult discrete_minimax(int n, int d, const SolverOptions& options) {
  check_n(n);
  check_degree(d);
  if (d >= n) {
    throw std::invalid_argument(fmt::format(
        "discrete minimax needs d < n (got d={}, n={}); at d >= n the optimum is 0", d, n));
  }
  if (n > kMaxDiscreteN) {
    throw std::invalid_argument(fmt::format("discrete minimax limited to n <= {}", kMaxDiscreteN));
  }
  if (options.method == MinimaxMethod::ClosedForm) {
    throw std::invalid_argument("discrete minimax needs the simplex or Remez method");
  }

  std::string failure;
  auto attempt = [&](MinimaxMethod method) -> std::optional<MinimaxResult> {
    try {
      MinimaxResult r = run_method(n, d, method, options);
      CertificateCheck check = check_certificate(r);
      if (check.valid) return r;
      failure += fmt::format("{}: {}; ", to_string(method), check.reason);
    } catch (const SolverError& e) {
      failure += fmt::format("{}: {}; ", to_string(method), e.what());
    }
    return std::nullopt;
  };

  std::optional<MinimaxResult> result = attempt(options.method);
  if (!result && options.fallback) result = attempt(other(options.method));
  if (!result) {
    throw CertificateError(fmt::format("no certified optimum for n={}, d={}: {}", n, d, failure));
  }
  if (options.cross_check) {
    MinimaxResult second = run_method(n, d, other(options.method), options);
    validate_certificate(second);
    if (std::abs(second.value - result->value) > 1e-9) {
      throw SolverError(fmt::format("simplex and Remez disagree for n={}, d={}: {} vs {}", n, d,
                                    result->value, second.value));
    }
  }
  return *result;
}

std::vector<AlternationPoint> extract_certificate(const PolySpec& p, int n, int d, double value) {
  if (!(value > 0.0)) return {};
  const double threshold = value * (1.0 - kAttainTolerance);
  std::vector<AlternationPoint> attained;
  for (int t = 1; t <= n; ++t) {
    const double v = p(t);
    if (std::abs(v) >= threshold && std::abs(v) > 1e-10 * value) {
      attained.push_back({static_cast<double>(t), v > 0 ? 1 : -1});
    }
  }
  std::vector<AlternationPoint> best;
  for (int first_sign : {1, -1}) {
    std::vector<AlternationPoint> seq;
    int want = first_sign;
    for (const AlternationPoint& a : attained) {
      if (static_cast<int>(seq.size()) == d + 1) break;
      if (a.sign == want) {
        seq.push_back(a);
        want = -want;
      }
    }
    if (static_cast<int>(seq.size()) < d + 1) continue;
    auto key = [](const std::vector<AlternationPoint>& s) {
      std::vector<double> k;
      for (const auto& a : s) k.push_back(a.t);
      return k;
    };
    if (best.empty() || key(seq) < key(best)) best = std::move(seq);
  }
  return best;
}

CertificateCheck check_certificate(const MinimaxResult& r) {
  auto fail = [](std::string why) { return CertificateCheck{false, std::move(why)}; };
  if (!(r.value > 0.0) || !std::isfinite(r.value)) return fail("value is not positive and finite");
  if (static_cast<int>(r.alternation.size()) != r.d + 1) {
    return fail(fmt::format("certificate has {} points, expected {}", r.alternation.size(), r.d + 1));
  }
  if (r.poly.degree() > r.d) return fail("polynomial degree exceeds d");
  const double at_zero = r.poly(0.0);
  if (std::abs(at_zero - 1.0) > kConstraintTolerance) {
    return fail(fmt::format("p(0) = {} instead of 1", at_zero));
  }
  const bool grid = r.domain == MinimaxDomain::Grid;
  for (std::size_t i = 0; i < r.alternation.size(); ++i) {
    const AlternationPoint& a = r.alternation[i];
    if (a.t < 1.0 || a.t > r.n) return fail(fmt::format("point {} outside [1, {}]", a.t, r.n));
    if (grid && a.t != std::floor(a.t)) return fail(fmt::format("point {} is not an integer", a.t));
    if (i > 0 && !(a.t > r.alternation[i - 1].t)) return fail("points are not strictly increasing");
    if (a.sign != 1 && a.sign != -1) return fail("sign is not +1 or -1");
    if (i > 0 && a.sign == r.alternation[i - 1].sign) return fail("signs do not alternate");
    const double v = r.poly(a.t);
    if (std::abs(v - a.sign * r.value) > kAttainTolerance * r.value) {
      return fail(fmt::format("p({}) = {} does not attain {}{}", a.t, v, a.sign > 0 ? "+" : "-",
                              r.value));
    }
  }
  double worst = 0.0;
  double worst_t = 0.0;
  auto visit = [&](double t) {
    const double v = std::abs(r.poly(t));
    if (v > worst) {
      worst = v;
      worst_t = t;
    }
  };
  if (grid) {
    for (int t = 1; t <= r.n; ++t) visit(t);
  } else {
    const int samples = 64 * r.n + 64 * r.d + 1024;
    for (int k = 0; k <= samples; ++k) visit(1.0 + (r.n - 1.0) * k / samples);
  }
  if (worst > r.value * (1.0 + kAttainTolerance)) {
    return fail(fmt::format("|p({})| = {} exceeds the claimed optimum {}", worst_t, worst, r.value));
  }
  return {};
}

void validate_certificate(const MinimaxResult& result) {
  CertificateCheck check = check_certificate(result);
  if (!check.valid) {
    throw CertificateError(fmt::format("certificate rejected for n={}, d={}: {}", result.n,
                                       result.d, check.reason));
  }
}

Bounds bounds(int n, int d) {
  check_n(n);
  check_degree(d);
  const double upper = std::pow(closed_form_value(n, d), 2);
  const double factor = std::max(0.0, 1.0 - static_cast<double>(d) * d / (n - 1.0));
  return Bounds{std::min(upper, factor * factor * upper), upper};
}

double large_d_bound(int n, int d) {
  check_n(n);
  return 4.0 * std::exp(-4.0 * d / (std::sqrt(static_cast<double>(n)) + 1.0));
}

RegimeReport regime(int n, int d) {
  check_n(n);
  check_degree(d);
  if (d >= n) throw std::invalid_argument("regime needs d < n");
  RegimeReport out;
  out.ratio = d / std::sqrt(static_cast<double>(n));
  out.regime = out.ratio < 0.5 ? Regime::Small : (out.ratio > 2.0 ? Regime::Large : Regime::Critical);
  out.bounds = bounds(n, d);
  out.one_minus_lower = 1.0 - out.bounds.lower;
  out.d_squared_over_n = static_cast<double>(d) * d / n;
  out.large_d_bound = large_d_bound(n, d);
  return out;
}

double rule_error_equivalence(const SymmetricRule& rule, int n) {
  if (n < 1) throw std::invalid_argument("rule_error_equivalence needs n >= 1");
  double worst = 0.0;
  for (int t = 1; t <= n; ++t) {
    const double miss = 1.0 - rule.polynomial_at(t);
    worst = std::max(worst, miss * miss);
  }
  return worst;
}

}  // namespace agglab
