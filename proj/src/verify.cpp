#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include <fmt/format.h>

#include "agglab/aggregation_rules.hpp"
#include "agglab/faults.hpp"
#include "agglab/harness.hpp"
#include "agglab/io.hpp"
#include "agglab/minimax.hpp"
#include "agglab/query_families.hpp"
#include "agglab/rng.hpp"

namespace agglab::harness {

std::string to_string(Suite suite) {
  switch (suite) {
    case Suite::Constructions:
      return "constructions";
    case Suite::Minimax:
      return "minimax";
    case Suite::Incentives:
      return "incentives";
    case Suite::All:
      return "all";
  }
  return "unknown";
}

Suite suite_from_string(const std::string& name) {
  if (name == "constructions") return Suite::Constructions;
  if (name == "minimax") return Suite::Minimax;
  if (name == "incentives") return Suite::Incentives;
  if (name == "all") return Suite::All;
  throw std::invalid_argument("unknown suite '" + name + "'");
}

int VerifyReport::failed() const {
  return static_cast<int>(
      std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed; }));
}

const std::vector<std::string>& operation_manifest() {
  static const std::vector<std::string> ops = {
      "signal_model.condition_on_agent",
      "signal_model.posterior_expectation",
      "signal_model.exact_mse",
      "signal_model.error_ratio",
      "signal_model.worst_case_error",
      "signal_model.sample",
      "query_dag.validate",
      "query_dag.complexity",
      "query_dag.payment",
      "query_dag.truthfulness_check",
      "query_families.iter_query",
      "query_families.intersection_set",
      "query_families.diff_query",
      "query_families.difference_set",
      "query_families.rewrite_to_intersection",
      "aggregation_rules.random_expert",
      "aggregation_rules.optimal_intersection_rule",
      "aggregation_rules.optimal_difference_rule",
      "aggregation_rules.randomized_difference_rule",
      "aggregation_rules.adversarial_singleton_model",
      "aggregation_rules.symmetrize",
      "aggregation_rules.rule_from_polynomial",
      "aggregation_rules.precision_weighted_rule",
      "minimax.chebyshev_T",
      "minimax.transformed_chebyshev",
      "minimax.closed_form_value",
      "minimax.discrete_minimax",
      "minimax.bounds",
      "minimax.regime",
      "minimax.rule_error_equivalence",
      "harness_cli.cmd_common_signal",
      "harness_cli.cmd_curves",
      "harness_cli.cmd_query_budget",
      "harness_cli.cmd_verify",
  };
  return ops;
}

namespace {

class CheckFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw CheckFailed(what);
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

struct Check {
  Suite suite;
  std::string name;
  std::vector<std::string> ops;
  std::function<std::string()> body;
};

LinearForm form(int n, std::initializer_list<std::pair<std::initializer_list<int>, double>> terms) {
  LinearForm f(n);
  for (const auto& [agents, c] : terms) f.add_term(SubsetMask::from_agents(agents, n), c);
  return f;
}

// Random acyclic linear DAG: node k targets Y or earlier nodes with small
// integer weights.
QueryDag random_dag(int n, int nodes, const CounterRng& rng, std::uint64_t index) {
  QueryDag dag(n, full_universe(n));
  std::uint32_t slot = 0;
  auto pick = [&](std::uint64_t bound) { return rng.below(bound, 7, index, slot++); };
  for (int k = 0; k < nodes; ++k) {
    std::vector<PaymentTarget> targets;
    if (k == 0 || pick(3) == 0) targets.push_back({kSinkId, 1.0});
    if (k > 0) {
      const int count = 1 + static_cast<int>(pick(std::min(3, k)));
      std::set<int> chosen;
      for (int c = 0; c < count; ++c) chosen.insert(static_cast<int>(pick(k)));
      for (int j : chosen) {
        static constexpr double kAlphas[] = {-2.0, -1.0, 1.0, 2.0};
        targets.push_back({fmt::format("N{}", j), kAlphas[pick(4)]});
      }
    }
    dag.add_query(fmt::format("N{}", k), 1 + static_cast<int>(pick(n)), std::move(targets));
  }
  return dag;
}

QueryDag three_query_dag(int n) {
  QueryDag dag(n, full_universe(n));
  dag.add_query("Q1", 1, {{kSinkId, 1.0}});
  dag.add_query("Q2", 2, {{kSinkId, 1.0}});
  dag.add_query("Q3", 3, {{"Q1", -1.0}, {"Q2", 2.0}});
  return dag;
}

std::vector<Check> constructions(std::uint64_t samples, std::uint64_t seed) {
  std::vector<Check> out;
  const Suite s = Suite::Constructions;

  out.push_back({s, "conditioning-is-idempotent-restriction", {"signal_model.condition_on_agent"}, [] {
    const int n = 2;
    LinearForm a = form(n, {{{1}, 1.0}, {{1, 2}, 1.0}, {{2}, 1.0}});
    LinearForm c = condition_on_agent(a, 1);
    expect(c.approx_equal(form(n, {{{1}, 1.0}, {{1, 2}, 1.0}})), "E[X1+X12+X2 | S1] != X1+X12");
    const CounterRng rng(11);
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
      LinearForm f(5);
      for (std::uint32_t t = 0; t < 12; ++t) {
        f.add_term(SubsetMask(static_cast<std::uint32_t>(1 + rng.below(31, 1, trial, t))),
                   rng.uniform(2, trial, t) - 0.5);
      }
      for (int i = 1; i <= 5; ++i) {
        LinearForm once = condition_on_agent(f, i);
        expect(condition_on_agent(once, i).approx_equal(once), "conditioning not idempotent");
        for (const auto& [mask, coeff] : once.terms()) {
          expect(mask.contains(i), "conditioning kept a term without the agent");
        }
      }
    }
    return std::string("idempotent on 250 random forms");
  }});

  out.push_back({s, "posterior-is-sum-of-observed", {"signal_model.posterior_expectation"}, [] {
    for (int n = 1; n <= 6; ++n) {
      const Universe u = full_universe(n);
      for (int i = 1; i <= n; ++i) {
        LinearForm y = posterior_expectation(n, i, u);
        for (std::uint32_t bits = 1; bits < (1U << n); ++bits) {
          const bool has = (bits >> (i - 1)) & 1U;
          expect(y.coeff(SubsetMask(bits)) == (has ? 1.0 : 0.0),
                 fmt::format("Y_{} wrong on mask {}", i, bits));
        }
      }
    }
    return std::string("n <= 6 against bit enumeration");
  }});

  out.push_back({s, "exact-error-examples", {"signal_model.exact_mse", "signal_model.error_ratio"}, [] {
    const int n = 2;
    SignalModel m = SignalModel::unit(n, full_universe(n));
    expect(close(exact_mse(m, posterior_expectation(m, 1)), 1.0, 1e-15), "MSE of Y_1 != 1");
    expect(exact_mse(m, LinearForm::target(n, m.support())) == 0.0, "MSE of Y != 0");
    SignalModel singles = adversarial_singleton_model(4);
    expect(close(exact_mse(singles, LinearForm(4)), 4.0, 1e-15), "MSE of zero form != 4");
    expect(close(error_ratio(singles, LinearForm(4)), 1.0, 1e-15), "error of prior mean != 1");
    SignalModel two = adversarial_singleton_model(2);
    expect(close(error_ratio(two, posterior_expectation(two, 1)), 0.5, 1e-15), "random expert baseline");
    return std::string("closed-form cases");
  }});

  out.push_back({s, "symmetric-worst-case-by-size", {"signal_model.worst_case_error"}, [] {
    const int n = 3;
    SymmetricRule rule{1, {2.0 / (n + 1.0)}};
    const Universe u = full_universe(n);
    WorstCase wc = worst_case_error(symmetric_intersection_rule(rule, n, u).output(), u);
    expect(close(wc.value, 0.25, 1e-15), fmt::format("value {} != 0.25", wc.value));
    std::set<int> sizes;
    for (SubsetMask t : wc.argmax) sizes.insert(t.size());
    expect(sizes == std::set<int>{1, 3}, "argmax sizes differ from {1, 3}");
    return std::string("value 0.25 at sizes 1 and 3");
  }});

  out.push_back({s, "sampled-variance-matches", {"signal_model.sample"}, [samples, seed] {
    const int n = 3;
    std::map<SubsetMask, SignalSpec> specs;
    specs[SubsetMask::from_agents({1}, n)] = SignalSpec::gaussian(1.0);
    specs[SubsetMask::from_agents({1, 2}, n)] = SignalSpec::rademacher(2.0);
    specs[SubsetMask::from_agents({2, 3}, n)] = SignalSpec{0.0, SignalFamily::PointMassZero};
    SignalModel m(n, specs);
    SampleDraw one = sample(m, seed);
    expect(one.value(SubsetMask::from_agents({2, 3}, n)) == 0.0, "point mass drew nonzero");
    Sampler sampler(m, seed, 3);
    std::vector<double> x(m.support().size());
    MeanEstimate var = monte_carlo_mean(samples, [&](std::uint64_t k) {
      const double y = sampler.draw_into(k, x);
      return y * y;
    });
    expect(var.within_three_se(m.total_variance()),
           fmt::format("E[Y^2] = {} +- {} vs {}", var.mean, var.standard_error, m.total_variance()));
    return fmt::format("E[Y^2] = {:.5f} +- {:.5f}", var.mean, var.standard_error);
  }});

  out.push_back({s, "figure-dags-validate-with-complexity", {"query_dag.validate", "query_dag.complexity"}, [] {
    for (int n = 1; n <= 6; ++n) {
      QueryDag a = standard_query_set(n, full_universe(n));
      expect(validate(a).valid(), "standard set invalid");
      ComplexityReport c = complexity(a);
      expect(c.query_c == n && c.order_c == 1 && c.agent_c == 1, "standard set complexity");
      if (n >= 2) {
        ComplexityReport b = complexity(predict_others_set(n, full_universe(n)));
        expect(b.order_c == 2 && b.agent_c == n, "predict-others complexity");
      }
    }
    ComplexityReport exact = complexity(standard_query_set(4, full_universe(4)), ComplexityMode::Exact);
    expect(exact.exact && exact.order_c == 1 && exact.agent_c == 1, "exact standard complexity");
    return std::string("n <= 6");
  }});

  out.push_back({s, "violations-are-reported", {"query_dag.validate"}, [] {
    const int n = 2;
    QueryDag cyc(n, full_universe(n));
    cyc.add_query("A", 1, {{"B", 1.0}});
    cyc.add_query("B", 2, {{"A", 1.0}});
    expect(validate(cyc).has(ViolationKind::Cycle), "cycle not reported");
    QueryDag bad(3, full_universe(3));
    bad.add_query("Q1", 1, {{kSinkId, 1.0}});
    bad.add_query("Q2", 2, {{kSinkId, 1.0}});
    LinearForm wrong = condition_on_agent(-1.0 * bad.value_of("Q1") + 3.0 * bad.value_of("Q2"), 3);
    bad.add_query_with_value("Q3", 3, {{"Q1", -1.0}, {"Q2", 2.0}}, wrong);
    expect(validate(bad).has(ViolationKind::Inconsistent), "inconsistent value not reported");
    return std::string("cycle and inconsistency caught");
  }});

  out.push_back({s, "quadratic-payment", {"query_dag.payment"}, [] {
    QueryDag dag = three_query_dag(3);
    const QueryNode& q3 = dag.node("Q3");
    const double q1 = 0.7, q2 = -0.4, r = 0.25;
    const double target = -q1 + 2.0 * q2;
    expect(close(payment(q3, target, {{"Q1", q1}, {"Q2", q2}}), 1.0, 1e-15), "exact report != 1");
    expect(close(payment(q3, r, {{"Q1", q1}, {"Q2", q2}}), 1.0 - (r - target) * (r - target), 1e-15),
           "payment formula");
    return std::string("Q3 payment against -Q1 + 2 Q2");
  }});

  out.push_back({s, "iterated-expectation-is-intersection", {"query_families.iter_query"}, [] {
    const int n = 4;
    const Universe u = full_universe(n);
    std::vector<int> order = {1, 2, 3};
    do {
      InterQuery q = iter_query(n, order, u);
      expect(q.value.approx_equal(inter_form(n, SubsetMask::from_agents({1, 2, 3}, n), u)),
             "iter depends on order");
    } while (std::next_permutation(order.begin(), order.end()));
    InterQuery full = iter_query(3, {1, 2, 3}, full_universe(3));
    expect(full.value.size() == 1 && full.value.coeff(SubsetMask::all(3)) == 1.0, "iter(1,2,3) != X123");
    return std::string("all orders of {1,2,3}");
  }});

  out.push_back({s, "intersection-set-shape", {"query_families.intersection_set"}, [] {
    for (int n = 1; n <= 6; ++n) {
      for (int d = 1; d <= n; ++d) {
        IntersectionSet set = intersection_set(n, d, full_universe(n));
        double count = 0.0;
        for (int k = 1; k <= d; ++k) count += binomial(n, k);
        expect(static_cast<double>(set.queries.size()) == count, "query count");
        expect(validate(set.dag).valid(), "canonical DAG invalid");
        ComplexityReport c = complexity(set.dag);
        expect(c.order_c <= d && c.agent_c <= d, "order/agent above d");
      }
    }
    return std::string("n <= 6, all d");
  }});

  out.push_back({s, "difference-queries-partition", {"query_families.diff_query", "query_families.difference_set"}, [] {
    const Universe u2 = full_universe(2);
    DiffQuery q = diff_query(2, {1, 2}, u2);
    expect(q.value.approx_equal(form(2, {{{2}, 1.0}})), "diff(1,2) != X2");
    DiffQuery r = diff_query(3, {2, 3}, full_universe(3));
    expect(r.value.approx_equal(form(3, {{{3}, 1.0}, {{1, 3}, 1.0}})), "diff(2,3)");
    for (int n = 1; n <= 7; ++n) {
      const Universe u = full_universe(n);
      for (int len = 1; len <= n; ++len) {
        std::vector<int> order;
        for (int i = n; i > n - len; --i) order.push_back(i);
        DifferenceSet set = difference_set(n, order, u);
        expect(validate(set.dag).valid(), "difference DAG invalid");
        LinearForm sum(n);
        for (const DiffQuery& dq : set.queries) sum += dq.value;
        const SubsetMask covered = SubsetMask::from_agents(order, n);
        for (SubsetMask t : u) {
          expect(sum.coeff(t) == (t.intersects(covered) ? 1.0 : 0.0), "prefix sum is not the cover");
        }
      }
    }
    return std::string("cover identity for n <= 7");
  }});

  out.push_back({s, "rewrite-preserves-values", {"query_families.rewrite_to_intersection"}, [seed] {
    const int n = 4;
    QueryDag dag = three_query_dag(n);
    auto exp = rewrite_to_intersection(dag);
    InterExpansion q3 = {{SubsetMask::from_agents({1, 3}, n), -1.0}, {SubsetMask::from_agents({2, 3}, n), 2.0}};
    expect(exp.at("Q3") == q3, "Q3 expansion differs from -inter{1,3} + 2 inter{2,3}");
    const CounterRng rng(seed);
    for (std::uint64_t k = 0; k < 40; ++k) {
      const int m = 2 + static_cast<int>(k % 7);
      QueryDag r = random_dag(2 + static_cast<int>(k % 5), m, rng, k);
      auto e = rewrite_to_intersection(r);
      for (const QueryNode& node : r.nodes()) {
        expect(inter_expansion_form(r.n(), e.at(node.id), r.universe()).approx_equal(*node.value),
               "rewritten value differs on " + node.id);
      }
    }
    return std::string("three-query example plus 40 random DAGs");
  }});

  out.push_back({s, "optimal-rules-recover-Y", {"aggregation_rules.optimal_intersection_rule", "aggregation_rules.optimal_difference_rule"}, [] {
    for (int n = 1; n <= 8; ++n) {
      const Universe u = full_universe(n);
      const LinearForm y = LinearForm::target(n, u);
      expect(optimal_intersection_rule(n).output().approx_equal(y),
             fmt::format("intersection rule misses Y at n = {}", n));
      expect(optimal_difference_rule(n, u).output().approx_equal(y),
             fmt::format("difference rule misses Y at n = {}", n));
    }
    return std::string("n <= 8");
  }});

  out.push_back({s, "random-expert-error", {"aggregation_rules.random_expert", "aggregation_rules.adversarial_singleton_model"}, [] {
    for (int n = 1; n <= 8; ++n) {
      std::vector<SubsetMask> singles;
      for (int i = 1; i <= n; ++i) singles.push_back(SubsetMask::singleton(i, n));
      const Universe u = make_universe(singles, n);
      const double e = expected_error_ratio(random_expert(n, u), adversarial_singleton_model(n));
      expect(close(e, 1.0 - 1.0 / n, 1e-14), fmt::format("n = {}: {}", n, e));
    }
    return std::string("1 - 1/n for n <= 8");
  }});

  out.push_back({s, "budget-error-is-linear", {"aggregation_rules.randomized_difference_rule"}, [] {
    for (int n = 2; n <= 7; ++n) {
      const Universe u = full_universe(n);
      for (int d = 1; d < n; ++d) {
        RandomizedRule rule = randomized_difference_rule(n, d, u);
        RandomizedWorstCase wc = randomized_worst_case(rule);
        expect(close(wc.value, 1.0 - static_cast<double>(d) / n, 1e-12),
               fmt::format("n={} d={}: {}", n, d, wc.value));
        expect(close(expected_error_ratio(rule, adversarial_singleton_model(n)), wc.value, 1e-12),
               "singleton adversary does not attain");
      }
    }
    return std::string("n <= 7, all d");
  }});

  out.push_back({s, "symmetrize-never-hurts", {"aggregation_rules.symmetrize"}, [seed] {
    const int n = 3;
    InterExpansion w;
    w[SubsetMask::from_agents({1}, n)] = 1.0;
    w[SubsetMask::from_agents({2}, n)] = 0.0;
    w[SubsetMask::from_agents({3}, n)] = 0.0;
    SymmetricRule r = symmetrize(w, n, 1);
    expect(close(r.betas[0], 1.0 / 3.0, 1e-15), "beta_1 != 1/3");
    const CounterRng rng(seed);
    for (std::uint64_t k = 0; k < 60; ++k) {
      const int m = 2 + static_cast<int>(k % 5);
      const int d = 1 + static_cast<int>(k % m);
      const Universe u = full_universe(m);
      InterExpansion weights;
      std::uint32_t slot = 0;
      for (SubsetMask sm : subsets_up_to_size(m, d)) weights[sm] = 2.0 * rng.uniform(5, k, slot++) - 0.5;
      const double before = worst_case_error(inter_expansion_form(m, weights, u), u).value;
      SymmetricRule sym = symmetrize(weights, m, d);
      const double after = worst_case_error(symmetric_intersection_rule(sym, m, u).output(), u).value;
      expect(after <= before * (1.0 + 1e-12) + 1e-12, fmt::format("symmetrized {} > original {}", after, before));
    }
    return std::string("60 random weightings");
  }});

  out.push_back({s, "binomial-basis-round-trip", {"aggregation_rules.rule_from_polynomial"}, [] {
    const double id[] = {0.0, 1.0};
    SymmetricRule lin = rule_from_polynomial(PolySpec::from_monomial(id, 0.0, 10.0, PolyConstraint::ValueAtZeroIsZero), 3);
    expect(close(lin.betas[0], 1.0, 1e-12) && close(lin.betas[1], 0.0, 1e-12), "p(t) = t");
    const double sq[] = {0.0, 0.0, 1.0};
    SymmetricRule quad = rule_from_polynomial(PolySpec::from_monomial(sq, 0.0, 10.0, PolyConstraint::ValueAtZeroIsZero), 2);
    expect(close(quad.betas[0], 1.0, 1e-12) && close(quad.betas[1], 2.0, 1e-12), "p(t) = t^2");
    for (int d = 1; d <= 8; ++d) {
      SymmetricRule r{d, {}};
      for (int k = 1; k <= d; ++k) r.betas.push_back(std::pow(-0.5, k) + 0.1 * k);
      SymmetricRule back = rule_from_polynomial(polynomial_of_rule(r, 0.0, d), d);
      for (int k = 0; k < d; ++k) expect(close(back.betas[k], r.betas[k], 1e-9), "round trip");
    }
    return std::string("d <= 8");
  }});

  out.push_back({s, "precision-weighting", {"aggregation_rules.precision_weighted_rule"}, [] {
    for (int n = 2; n <= 8; ++n) {
      DeterministicRule eq = precision_weighted_rule(std::vector<double>(n, 1.0));
      for (const auto& [id, w] : eq.weights) expect(close(w, 2.0 / (n + 1.0), 1e-14), "equal variances");
    }
    const std::vector<double> v = {1.0, 1.0, 1.0, 4.0};
    SignalModel m = common_signal_model(v, 1.0);
    const double p = exact_mse(m, precision_weighted_rule(v).output());
    const double f = exact_mse(m, fixed_weight_rule(4, 0.4).output());
    expect(p <= f, fmt::format("precision {} > fixed {}", p, f));
    return fmt::format("MSE {:.6f} vs fixed {:.6f}", p, f);
  }});

  return out;
}

std::vector<Check> minimax_checks() {
  std::vector<Check> out;
  const Suite s = Suite::Minimax;

  out.push_back({s, "chebyshev-values", {"minimax.chebyshev_T"}, [] {
    expect(chebyshev_T(0, 0.3) == 1.0 && chebyshev_T(1, 0.3) == 0.3, "T0, T1");
    expect(close(chebyshev_T(2, 0.5), -0.5, 1e-15), "T2(0.5)");
    expect(close(chebyshev_T(3, -2.0), -26.0, 1e-12), "T3(-2)");
    for (int d = 0; d <= 20; ++d) {
      for (double x : {1.0, 1.1, 2.5, -1.3, -4.0}) {
        const double a = chebyshev_T(d, x), b = chebyshev_T_hyperbolic(d, x);
        expect(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a)), "recurrence vs cosh");
      }
    }
    return std::string("recurrence and hyperbolic forms agree");
  }});

  out.push_back({s, "transformed-chebyshev", {"minimax.transformed_chebyshev", "minimax.closed_form_value"}, [] {
    expect(close(closed_form_value(9, 1), 0.8, 1e-15), "n=9 d=1");
    expect(close(closed_form_value(9, 2), 2.0 / 4.25, 1e-15), "n=9 d=2");
    expect(close(closed_form_value(4, 1), 0.6, 1e-15), "n=4 d=1");
    for (int n : {2, 5, 9, 40}) {
      for (int d = 1; d <= 8; ++d) {
        PolySpec p = transformed_chebyshev(n, d);
        expect(close(p(0.0), 1.0, 1e-12), "p(0) != 1");
        double top = 0.0;
        for (int i = 0; i <= 4000; ++i) top = std::max(top, std::abs(p(1.0 + (n - 1.0) * i / 4000.0)));
        const double cf = closed_form_value(n, d);
        expect(top <= cf * (1 + 1e-9) && top >= cf * (1 - 1e-6), "max on [1,n] != closed form");
        for (double x : transformed_chebyshev_extrema(n, d)) {
          expect(close(std::abs(p(x)), cf, 1e-9 * std::max(1.0, cf)), "extremum not attained");
        }
      }
    }
    return std::string("normalization, extrema and value");
  }});

  out.push_back({s, "exact-small-d-cases", {"minimax.discrete_minimax"}, [] {
    int equal = 0, strict = 0;
    for (int n = 3; n <= 30; ++n) {
      for (int d = 1; d <= std::min(3, n - 1); ++d) {
        const double v = discrete_minimax(n, d).value;
        const double cf = closed_form_value(n, d);
        const bool exact = d == 1 || (d == 2 && n % 2 == 1) || (d == 3 && n % 4 == 1);
        if (exact) {
          expect(close(v, cf, 1e-9), fmt::format("n={} d={} should match closed form", n, d));
          ++equal;
        } else {
          expect(v < cf - 1e-9, fmt::format("n={} d={} should be strictly below", n, d));
          ++strict;
        }
      }
    }
    return fmt::format("{} equal, {} strict", equal, strict);
  }});

  out.push_back({s, "sandwich-and-certificates", {"minimax.bounds", "minimax.discrete_minimax"}, [] {
    int solves = 0;
    for (int n = 5; n <= 40; ++n) {
      for (int d = 1; d <= std::min(n - 1, 12); ++d) {
        MinimaxResult r = discrete_minimax(n, d);
        validate_certificate(r);
        const Bounds b = bounds(n, d);
        const double sq = r.value * r.value;
        expect(b.lower <= sq + 1e-9 && sq <= b.upper + 1e-9, fmt::format("sandwich n={} d={}", n, d));
        expect(r.value > 1e-12, "optimum not positive");
        ++solves;
      }
    }
    for (int d : {200, 400, 800}) {
      expect(bounds(10000, d).upper <= large_d_bound(10000, d), "large-d bound");
    }
    return fmt::format("{} certified solves", solves);
  }});

  out.push_back({s, "corrupted-solver-is-caught", {"minimax.discrete_minimax"}, [] {
    for (auto f : {faults::Fault::SkewMinimaxValue, faults::Fault::PerturbMinimaxPoly,
                   faults::Fault::ShiftCertificatePoint}) {
      faults::ScopedFault guard(f);
      bool caught = false;
      try {
        discrete_minimax(13, 3);
      } catch (const CertificateError&) {
        caught = true;
      }
      expect(caught, "fault " + faults::to_string(f) + " slipped past certificate validation");
    }
    return std::string("3 seeded solver defects rejected");
  }});

  out.push_back({s, "regime-classification", {"minimax.regime"}, [] {
    expect(regime(10000, 10).regime == Regime::Small, "n=1e4 d=10");
    expect(regime(10000, 100).regime == Regime::Critical, "d = sqrt(n)");
    RegimeReport large = regime(10000, 1000);
    expect(large.regime == Regime::Large && large.bounds.upper <= large.large_d_bound, "n=1e4 d=1e3");
    return std::string("small, critical, large");
  }});

  out.push_back({s, "rule-error-equivalence", {"minimax.rule_error_equivalence"}, [] {
    expect(rule_error_equivalence(SymmetricRule{1, {0.0}}, 5) == 1.0, "zero rule");
    for (int n = 3; n <= 12; ++n) {
      const Universe u = full_universe(n);
      for (int d = 1; d < n && d <= 4; ++d) {
        PolySpec hat = transformed_chebyshev(n, d);
        SymmetricRule rule = rule_from_polynomial(hat.one_minus(), d);
        double grid = 0.0;
        for (int t = 1; t <= n; ++t) grid = std::max(grid, hat(t) * hat(t));
        const double e = rule_error_equivalence(rule, n);
        expect(close(e, grid, 1e-9), "equivalence vs grid max");
        const double v = discrete_minimax(n, d).value;
        expect(e >= v * v - 1e-12, "Chebyshev rule beats the optimum");
        const double w = worst_case_error(symmetric_intersection_rule(rule, n, u).output(), u).value;
        expect(close(e, w, 1e-9), "equivalence vs explicit worst case");
      }
    }
    return std::string("n <= 12, d <= 4");
  }});

  out.push_back({s, "d1-matches-fixed-weight", {"minimax.discrete_minimax", "minimax.closed_form_value"}, [] {
    for (int n = 2; n <= 200; ++n) {
      const double v = discrete_minimax(n, 1).value;
      const double a = (n - 1.0) * (n - 1.0) / ((n + 1.0) * (n + 1.0));
      expect(close(v * v, a, 1e-10) && close(a, 1.0 - 4.0 * n / ((n + 1.0) * (n + 1.0)), 1e-12),
             fmt::format("n = {}", n));
    }
    return std::string("n <= 200");
  }});

  return out;
}

std::vector<Check> incentives(std::uint64_t samples, std::uint64_t seed) {
  std::vector<Check> out;
  const int n = 3;
  struct Figure {
    std::string name;
    std::function<QueryDag()> make;
  };
  const std::vector<Figure> figures = {
      {"standard", [] { return standard_query_set(n, full_universe(n)); }},
      {"predict-others", [] { return predict_others_set(n, full_universe(n)); }},
      {"iterated-chain", [] { return iterated_chain(n, 1, 2, 2, full_universe(n)); }},
  };
  for (std::size_t f = 0; f < figures.size(); ++f) {
    out.push_back({Suite::Incentives, "truthful-gap-" + figures[f].name, {"query_dag.truthfulness_check"},
                   [=] {
                     QueryDag dag = figures[f].make();
                     SignalModel model = SignalModel::unit(n, full_universe(n));
                     TruthfulnessReport r =
                         truthfulness_check(dag, model, {0.25, 0.5, 1.0}, samples, seed + f);
                     double worst = 0.0;
                     for (const TruthfulnessEntry& e : r.entries) {
                       expect(e.passed, fmt::format("node {} delta {}: gap {} +- {}", e.node,
                                                    e.delta, e.gap, e.gap_stderr));
                       worst = std::max(worst, std::abs(e.gap - e.delta * e.delta));
                     }
                     return fmt::format("{} entries, max |gap - delta^2| = {:.2e}",
                                        r.entries.size(), worst);
                   }});
  }
  return out;
}

std::vector<Check> harness_checks(std::uint64_t samples, std::uint64_t seed) {
  std::vector<Check> out;
  const Suite s = Suite::All;
  const std::uint64_t small = std::min<std::uint64_t>(samples, 200'000);
  out.push_back({s, "common-signal-example", {"harness_cli.cmd_common_signal"}, [small, seed] {
    for (int n : {2, 5}) {
      CommonSignalReport r = run_common_signal(n, small, seed);
      expect(r.passed(), r.failures.empty() ? "" : r.failures.front());
    }
    return std::string("n in {2, 5}");
  }});
  out.push_back({s, "curves-sandwich", {"harness_cli.cmd_curves"}, [] {
    ExperimentConfig cfg;
    cfg.ns = {20, 50};
    auto points = run_curves(cfg);
    expect(points.size() == 9 + 15, fmt::format("{} rows", points.size()));
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (points[i].n == points[i - 1].n) {
        expect(points[i].error_upper < points[i - 1].error_upper, "upper bound not decreasing in d");
      }
    }
    return fmt::format("{} rows", points.size());
  }});
  out.push_back({s, "query-budget-linear", {"harness_cli.cmd_query_budget"}, [small, seed] {
    auto rows = run_query_budget(10, {5, 9}, small, seed);
    expect(rows[0].analytic == 0.5 && close(rows[0].exact, 0.5, 1e-12), "n=10 d=5 is not 0.5");
    expect(close(rows[1].exact, 0.1, 1e-15), "d = n-1 is not 1/n");
    for (const BudgetRow& r : rows) expect(r.passed, fmt::format("d = {}", r.d));
    return std::string("n = 10");
  }});
  return out;
}

}  // namespace

VerifyReport run_verify(Suite suite, std::uint64_t samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("verify needs at least 2 samples");
  std::vector<Check> checks;
  auto append = [&](std::vector<Check> more) {
    for (Check& c : more) checks.push_back(std::move(c));
  };
  if (suite == Suite::Constructions || suite == Suite::All) append(constructions(samples, seed));
  if (suite == Suite::Minimax || suite == Suite::All) append(minimax_checks());
  if (suite == Suite::Incentives || suite == Suite::All) append(incentives(samples, seed));
  if (suite == Suite::All) append(harness_checks(samples, seed));

  VerifyReport report;
  std::set<std::string> covered = {"harness_cli.cmd_verify"};
  for (Check& c : checks) {
    CheckResult r{to_string(c.suite), c.name, c.ops, false, ""};
    try {
      r.detail = c.body();
      r.passed = true;
    } catch (const std::exception& e) {
      r.detail = e.what();
    }
    covered.insert(c.ops.begin(), c.ops.end());
    report.checks.push_back(std::move(r));
  }
  if (suite == Suite::All) {
    for (const std::string& op : operation_manifest()) {
      if (!covered.count(op)) report.uncovered_ops.push_back(op);
    }
  }
  return report;
}

std::string format_verify(const VerifyReport& report, OutputFormat format) {
  if (format == OutputFormat::Json) {
    io::Json checks = io::Json::array();
    for (const CheckResult& c : report.checks) {
      checks.push_back({{"suite", c.suite},
                        {"name", c.name},
                        {"ops", c.ops},
                        {"passed", c.passed},
                        {"detail", c.detail}});
    }
    io::Json out = {{"checks", std::move(checks)},
                    {"failed", report.failed()},
                    {"uncovered_ops", report.uncovered_ops},
                    {"passed", report.passed()}};
    return out.dump(2) + "\n";
  }
  std::string out = "suite,check,passed,detail\n";
  for (const CheckResult& c : report.checks) {
    std::string detail = c.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    out += fmt::format("{},{},{},{}\n", c.suite, c.name, c.passed ? 1 : 0, detail);
  }
  return out;
}

}  // namespace agglab::harness
