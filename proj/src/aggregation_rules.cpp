#include "agglab/aggregation_rules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "agglab/faults.hpp"

namespace agglab {

namespace {

std::size_t universe_index(const Universe& universe, SubsetMask t) {
  auto it = std::lower_bound(universe.begin(), universe.end(), t);
  if (it == universe.end() || *it != t) {
    throw std::out_of_range("subset " + t.to_string() + " outside the universe");
  }
  return static_cast<std::size_t>(it - universe.begin());
}

// Aggregate coefficients of a rule, dense over its DAG's universe.
std::vector<double> dense_output(const DeterministicRule& rule) {
  const Universe& u = rule.dag.universe();
  std::vector<double> acc(u.size(), 0.0);
  for (const auto& [id, beta] : rule.weights) {
    if (!std::isfinite(beta)) throw std::invalid_argument("non-finite weight on '" + id + "'");
    if (beta == 0.0) continue;
    const QueryNode& q = rule.dag.node(id);
    if (!q.value) throw std::logic_error("weighted node '" + id + "' has no value");
    for (const auto& [t, c] : q.value->terms()) acc[universe_index(u, t)] += beta * c;
  }
  return acc;
}

LinearForm form_from_dense(int n, const Universe& u, const std::vector<double>& acc) {
  std::vector<LinearForm::Term> terms;
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (acc[j] != 0.0) terms.emplace_back(u[j], acc[j]);
  }
  return LinearForm(n, std::move(terms));
}

// Binomial coefficient C(t, k) for real t.
double binomial_real(double t, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= (t - i) / (i + 1);
  return out;
}

}  // namespace

LinearForm DeterministicRule::output() const {
  return form_from_dense(dag.n(), dag.universe(), dense_output(*this));
}

RandomizedRule::RandomizedRule(std::vector<RuleAtom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("randomized rule needs at least one atom");
  double total = 0.0;
  for (const RuleAtom& a : atoms_) {
    if (!(a.p > 0.0) || !std::isfinite(a.p)) {
      throw std::invalid_argument("atom probabilities must be positive");
    }
    if (a.rule.dag.n() != atoms_.front().rule.dag.n()) {
      throw std::invalid_argument("atoms disagree on the number of agents");
    }
    total += a.p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument(fmt::format("atom probabilities sum to {}, not 1", total));
  }
}

double SymmetricRule::polynomial_at(double t) const {
  double out = 0.0;
  for (int k = 1; k <= static_cast<int>(betas.size()); ++k) {
    out += betas[k - 1] * binomial_real(t, k);
  }
  return out;
}

double mobius_weight(SubsetMask s) {
  if (s.empty()) throw std::invalid_argument("Mobius weight of the empty set");
  double w = 0.0;
  const std::uint32_t bits = s.bits();
  for (std::uint32_t t = bits;; t = (t - 1) & bits) {
    if (t == 0) break;
    const int gap = s.size() - std::popcount(t);
    w += (gap % 2 == 0) ? 1.0 : -1.0;
  }
  return faults::is_active(faults::Fault::FlipMobiusSign) ? -w : w;
}

RandomizedRule random_expert(int n, const Universe& universe) {
  check_agent_count(n);
  std::vector<RuleAtom> atoms;
  for (int i = 1; i <= n; ++i) {
    QueryDag dag(n, universe);
    std::string id = fmt::format("Q{}", i);
    dag.add_query(id, i, {{kSinkId, 1.0}});
    atoms.push_back(RuleAtom{1.0 / n, DeterministicRule{std::move(dag), {{id, 1.0}}}});
  }
  return RandomizedRule(std::move(atoms));
}

DeterministicRule optimal_intersection_rule(int n) {
  check_agent_count(n);
  if (n > kMaxFullEnumeration) {
    throw std::invalid_argument(
        fmt::format("optimal intersection rule limited to n <= {}", kMaxFullEnumeration));
  }
  IntersectionSet set = intersection_set(n, n, full_universe(n));
  std::map<std::string, double> weights;
  for (const auto& [s, id] : set.ids) weights[id] = mobius_weight(s);
  return DeterministicRule{std::move(set.dag), std::move(weights)};
}

DeterministicRule optimal_difference_rule(int n, const Universe& universe) {
  check_agent_count(n);
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[i] = i + 1;
  DifferenceSet set = difference_set(n, order, universe);
  std::map<std::string, double> weights;
  for (const QueryNode& q : set.dag.nodes()) weights[q.id] = 1.0;
  return DeterministicRule{std::move(set.dag), std::move(weights)};
}

RandomizedRule randomized_difference_rule(int n, int d, const Universe& universe) {
  check_agent_count(n);
  if (d < 1 || d >= n) {
    throw std::invalid_argument(fmt::format("randomized difference rule needs 1 <= d < n (d={}, n={})", d, n));
  }
  const double p = 1.0 / binomial(n, d);
  std::vector<RuleAtom> atoms;
  for (SubsetMask s : subsets_up_to_size(n, d)) {
    if (s.size() != d) continue;
    DifferenceSet set = difference_set(n, s.agents(), universe);
    std::map<std::string, double> weights;
    for (const QueryNode& q : set.dag.nodes()) weights[q.id] = 1.0;
    atoms.push_back(RuleAtom{p, DeterministicRule{std::move(set.dag), std::move(weights)}});
  }
  return RandomizedRule(std::move(atoms));
}

double miss_probability(int n, int d, int t) {
  if (d < 0 || d > n || t < 0 || t > n) {
    throw std::invalid_argument("miss_probability: arguments out of range");
  }
  if (t + d > n) return 0.0;
  return binomial(n - t, d) / binomial(n, d);
}

SignalModel adversarial_singleton_model(int n) {
  check_agent_count(n);
  std::vector<SubsetMask> support;
  for (int i = 1; i <= n; ++i) support.push_back(SubsetMask::singleton(i, n));
  return SignalModel::unit(n, support);
}

SignalModel size_class_model(int n, int t, const Universe& universe) {
  std::vector<SubsetMask> support;
  for (SubsetMask s : universe) {
    if (s.size() == t) support.push_back(s);
  }
  if (support.empty()) {
    throw std::invalid_argument(fmt::format("universe has no subset of size {}", t));
  }
  return SignalModel::unit(n, support);
}

std::vector<SignalModel> candidate_witness_models(int n, const Universe& universe) {
  std::vector<SignalModel> out{adversarial_singleton_model(n)};
  for (int t = 1; t <= n; ++t) {
    bool occupied = std::any_of(universe.begin(), universe.end(),
                                [t](SubsetMask s) { return s.size() == t; });
    if (occupied) out.push_back(size_class_model(n, t, universe));
  }
  return out;
}

double expected_error_ratio(const RandomizedRule& rule, const SignalModel& model) {
  double total = 0.0;
  for (const RuleAtom& a : rule.atoms()) total += a.p * error_ratio(model, a.rule.output());
  return total;
}

RandomizedWorstCase randomized_worst_case(const RandomizedRule& rule) {
  const Universe& u = rule.atoms().front().rule.dag.universe();
  std::vector<double> expected(u.size(), 0.0);
  for (const RuleAtom& a : rule.atoms()) {
    if (a.rule.dag.universe() != u) {
      throw std::invalid_argument("atoms of a randomized rule must share one universe");
    }
    auto c = dense_output(a.rule);
    for (std::size_t j = 0; j < u.size(); ++j) expected[j] += a.p * (1.0 - c[j]) * (1.0 - c[j]);
  }
  RandomizedWorstCase out;
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (u[j].empty()) continue;
    if (expected[j] > out.value + 1e-15) {
      out.value = expected[j];
      out.argmax.clear();
    }
    if (std::abs(expected[j] - out.value) <= 1e-15) out.argmax.push_back(u[j]);
  }
  if (out.argmax.empty()) throw std::invalid_argument("randomized_worst_case: empty universe");
  return out;
}

DeterministicRule determinize(const RandomizedRule& rule) {
  const QueryDag& first = rule.atoms().front().rule.dag;
  DeterministicRule out{QueryDag(first.n(), first.universe()), {}};
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const RuleAtom& a = rule.atoms()[k];
    if (a.rule.dag.universe() != first.universe()) {
      throw std::invalid_argument("atoms of a randomized rule must share one universe");
    }
    const std::string prefix = fmt::format("a{}/", k);
    for (const QueryNode& q : a.rule.dag.nodes()) {
      std::vector<PaymentTarget> targets;
      for (const PaymentTarget& t : q.targets) {
        targets.push_back({t.id == kSinkId ? t.id : prefix + t.id, t.alpha});
      }
      if (!q.value) throw std::logic_error("atom node '" + q.id + "' has no value");
      out.dag.add_query_with_value(prefix + q.id, q.agent, std::move(targets), *q.value);
    }
    for (const auto& [id, beta] : a.rule.weights) out.weights[prefix + id] = a.p * beta;
  }
  return out;
}

SymmetricRule symmetrize(const InterExpansion& weights, int n, int d) {
  check_agent_count(n);
  if (d < 1 || d > n) throw std::invalid_argument("symmetrize: order out of range");
  std::vector<double> sum(static_cast<std::size_t>(d), 0.0);
  std::vector<double> count(static_cast<std::size_t>(d), 0.0);
  for (const auto& [s, w] : weights) {
    if (s.empty() || !s.fits(n)) throw std::invalid_argument("symmetrize: invalid subset key");
    if (s.size() > d) {
      throw std::invalid_argument("symmetrize: weight on " + s.to_string() + " exceeds order d");
    }
    sum[s.size() - 1] += w;
    count[s.size() - 1] += 1.0;
  }
  SymmetricRule out{d, std::vector<double>(static_cast<std::size_t>(d), 0.0)};
  for (int k = 1; k <= d; ++k) {
    if (count[k - 1] != binomial(n, k)) {
      throw std::invalid_argument(
          fmt::format("symmetrize: size class {} has {} of {} weights", k, count[k - 1],
                      binomial(n, k)));
    }
    out.betas[k - 1] = sum[k - 1] / count[k - 1];
  }
  return out;
}

DeterministicRule symmetric_intersection_rule(const SymmetricRule& rule, int n,
                                              const Universe& universe) {
  if (static_cast<int>(rule.betas.size()) != rule.d) {
    throw std::invalid_argument("symmetric rule has the wrong number of betas");
  }
  IntersectionSet set = intersection_set(n, rule.d, universe);
  std::map<std::string, double> weights;
  for (const auto& [s, id] : set.ids) weights[id] = rule.betas[s.size() - 1];
  return DeterministicRule{std::move(set.dag), std::move(weights)};
}

SymmetricRule rule_from_polynomial(const PolySpec& p, int d) {
  if (d < 1) throw std::invalid_argument("rule_from_polynomial: d must be positive");
  const std::vector<double> coeffs = p.chebyshev_coeffs();
  int degree = p.degree();
  while (degree > 0 && coeffs[degree] == 0.0) --degree;
  if (degree > d) {
    throw std::invalid_argument(fmt::format("polynomial degree {} exceeds d = {}", degree, d));
  }
  if (std::abs(p(0.0)) > 1e-10) {
    throw std::invalid_argument(fmt::format("rule polynomial needs p(0) = 0, got {}", p(0.0)));
  }
  std::vector<double> values(static_cast<std::size_t>(d) + 1);
  for (int j = 0; j <= d; ++j) values[j] = p(j);
  SymmetricRule out{d, std::vector<double>(static_cast<std::size_t>(d), 0.0)};
  // Finite differences at 0: beta_k = sum_j (-1)^(k-j) C(k, j) p(j).
  for (int k = 1; k <= d; ++k) {
    double beta = 0.0;
    for (int j = 0; j <= k; ++j) {
      beta += (((k - j) % 2 == 0) ? 1.0 : -1.0) * binomial(k, j) * values[j];
    }
    out.betas[k - 1] = beta;
  }
  return out;
}

PolySpec polynomial_of_rule(const SymmetricRule& rule, double lo, double hi) {
  const int d = std::max(rule.d, 1);
  const int points = d + 1;
  std::vector<double> f(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double theta = std::numbers::pi * (k + 0.5) / points;
    const double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * std::cos(theta);
    f[k] = rule.polynomial_at(x);
  }
  std::vector<double> coeffs(static_cast<std::size_t>(points), 0.0);
  for (int j = 0; j < points; ++j) {
    double s = 0.0;
    for (int k = 0; k < points; ++k) {
      s += f[k] * std::cos(j * std::numbers::pi * (k + 0.5) / points);
    }
    coeffs[j] = (j == 0 ? 1.0 : 2.0) * s / points;
  }
  return PolySpec(std::move(coeffs), lo, hi, PolyConstraint::ValueAtZeroIsZero);
}

Universe common_signal_universe(int n) {
  Universe u;
  for (int i = 1; i <= n; ++i) u.push_back(SubsetMask::singleton(i, n));
  u.push_back(SubsetMask::all(n));
  return make_universe(std::move(u), n);
}

SignalModel common_signal_model(const std::vector<double>& private_variances,
                                double common_variance) {
  const int n = static_cast<int>(private_variances.size());
  if (n < 2) throw std::invalid_argument("common-signal model needs n >= 2");
  check_agent_count(n);
  std::map<SubsetMask, SignalSpec> specs;
  for (int i = 1; i <= n; ++i) {
    specs[SubsetMask::singleton(i, n)] = SignalSpec::gaussian(private_variances[i - 1]);
  }
  specs[SubsetMask::all(n)] = SignalSpec::gaussian(common_variance);
  return SignalModel(n, std::move(specs));
}

DeterministicRule precision_weighted_rule(const std::vector<double>& variances) {
  const int n = static_cast<int>(variances.size());
  check_agent_count(n);
  double tau = 0.0;
  for (double v : variances) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("precision weighting needs positive finite variances");
    }
    tau += 1.0 / v;
  }
  DeterministicRule rule{standard_query_set(n, common_signal_universe(n)), {}};
  const double scale = n * (n - 1.0) / (n + 1.0);
  for (int i = 1; i <= n; ++i) {
    const double tau_i = 1.0 / variances[i - 1];
    rule.weights[fmt::format("Q{}", i)] = 1.0 - scale * tau_i / tau;
  }
  return rule;
}

DeterministicRule fixed_weight_rule(int n, double w) {
  check_agent_count(n);
  DeterministicRule rule{standard_query_set(n, common_signal_universe(n)), {}};
  for (int i = 1; i <= n; ++i) rule.weights[fmt::format("Q{}", i)] = w;
  return rule;
}

}  // namespace agglab
