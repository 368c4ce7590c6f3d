#pragma once

#include <map>
#include <string>
#include <vector>

#include "agglab/polynomial.hpp"
#include "agglab/query_dag.hpp"
#include "agglab/query_families.hpp"

namespace agglab {

// A query DAG plus a linear aggregation function sum_Q beta_Q * Q.
struct DeterministicRule {
  QueryDag dag;
  std::map<std::string, double> weights;

  // Symbolic aggregate sum_Q beta_Q value(Q). Throws if a weight names an
  // unknown node or a weighted node has no value.
  LinearForm output() const;
};

struct RuleAtom {
  double p = 0.0;
  DeterministicRule rule;
};

// A distribution over deterministic rules.
class RandomizedRule {
 public:
  // Probabilities must be positive and sum to 1 within 1e-12.
  explicit RandomizedRule(std::vector<RuleAtom> atoms);

  const std::vector<RuleAtom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  int n() const { return atoms_.front().rule.dag.n(); }

 private:
  std::vector<RuleAtom> atoms_;
};

// A symmetric intersection rule: weight betas[k-1] on every inter(S) with |S| = k.
struct SymmetricRule {
  int d = 0;
  std::vector<double> betas;

  // p(t) = sum_k beta_k * C(t, k), the coefficient the rule puts on any X_T
  // with |T| = t.
  double polynomial_at(double t) const;
};

// Mobius weight of inter(S) in the optimal intersection rule, computed as
// the literal alternating sum over nonempty T subset of S.
double mobius_weight(SubsetMask s);

// Uniform mixture of the n single-query rules Y_i.
RandomizedRule random_expert(int n, const Universe& universe);

// Mobius-weighted intersection queries of every order; n <= kMaxFullEnumeration.
DeterministicRule optimal_intersection_rule(int n);

// The difference set of (1, ..., n) with unit weights.
DeterministicRule optimal_difference_rule(int n, const Universe& universe);

// Uniform mixture over all d-agent subsets; each atom is the difference set
// of the subset in ascending order with unit weights. Requires 1 <= d < n.
RandomizedRule randomized_difference_rule(int n, int d, const Universe& universe);

// Probability that a random d-subset of [n] misses a fixed t-subset.
double miss_probability(int n, int d, int t);

// Unit variance on each singleton, zero elsewhere.
SignalModel adversarial_singleton_model(int n);

// Unit variance on every subset of size t in the universe.
SignalModel size_class_model(int n, int t, const Universe& universe);

// The singleton adversary plus one size-class model per occupied size.
std::vector<SignalModel> candidate_witness_models(int n, const Universe& universe);

// E over atoms of error_ratio(model, atom output).
double expected_error_ratio(const RandomizedRule& rule, const SignalModel& model);

struct RandomizedWorstCase {
  double value = 0.0;
  std::vector<SubsetMask> argmax;
};

// max over T in the universe of E_atoms[(1 - c_T)^2]. Every model's expected
// error ratio is a variance-weighted average of these terms, so this is the
// exact worst case over all models on the universe.
RandomizedWorstCase randomized_worst_case(const RandomizedRule& rule);

// Union of the atoms' DAGs (node ids prefixed "a<k>/") weighted by p * beta.
// Its output is the probability-weighted mean of the atom outputs.
DeterministicRule determinize(const RandomizedRule& rule);

// beta_k = mean of the weights over all |S| = k. Every S with |S| <= d must
// carry a weight.
SymmetricRule symmetrize(const InterExpansion& weights, int n, int d);

// Intersection rule of order rule.d putting betas[|S|-1] on every inter(S).
DeterministicRule symmetric_intersection_rule(const SymmetricRule& rule, int n,
                                              const Universe& universe);

// Inverts p(t) = sum_k beta_k C(t, k). Requires deg p <= d and p(0) = 0.
SymmetricRule rule_from_polynomial(const PolySpec& p, int d);
// The polynomial sum_k beta_k C(t, k), represented on [lo, hi].
PolySpec polynomial_of_rule(const SymmetricRule& rule, double lo, double hi);

// The singletons plus [n].
Universe common_signal_universe(int n);

// Common-signal model: private X_{i} with the given variances, plus a common
// signal on [n] observed by everyone.
SignalModel common_signal_model(const std::vector<double>& private_variances,
                                double common_variance);

// Weights alpha_i = 1 - n((n-1)/(n+1)) tau_i / tau on Y_i, tau_i = 1/variance_i.
// The DAG is the standard query set over the common-signal universe.
DeterministicRule precision_weighted_rule(const std::vector<double>& variances);

// Weight w on every Y_i over the common-signal universe.
DeterministicRule fixed_weight_rule(int n, double w);

}  // namespace agglab
