#include <cmath>

#include <gtest/gtest.h>

#include "agglab/aggregation_rules.hpp"
#include "agglab/faults.hpp"
#include "agglab/minimax.hpp"
#include "agglab/rng.hpp"

namespace agglab {
namespace {

TEST(Mobius, AlternatingSign) {
  for (int n = 1; n <= 10; ++n) {
    for (SubsetMask s : full_universe(std::min(n, 10))) {
      EXPECT_EQ(mobius_weight(s), s.size() % 2 == 1 ? 1.0 : -1.0);
    }
  }
  EXPECT_THROW(mobius_weight(SubsetMask()), std::invalid_argument);
}

TEST(OptimalRules, RecoverTargetExactly) {
  for (int n = 1; n <= 7; ++n) {
    const Universe u = full_universe(n);
    const LinearForm y = LinearForm::target(n, u);
    LinearForm a = optimal_intersection_rule(n).output();
    LinearForm b = optimal_difference_rule(n, u).output();
    EXPECT_EQ(a.max_abs_difference(y), 0.0) << n;
    EXPECT_EQ(b.max_abs_difference(y), 0.0) << n;
    SignalModel m = SignalModel::unit(n, u);
    EXPECT_EQ(error_ratio(m, a), 0.0);
  }
}

TEST(OptimalRules, FlippedMobiusSignIsWrong) {
  faults::ScopedFault fault(faults::Fault::FlipMobiusSign);
  const int n = 3;
  LinearForm a = optimal_intersection_rule(n).output();
  EXPECT_GT(a.max_abs_difference(LinearForm::target(n, full_universe(n))), 1.0);
}

TEST(DeterministicRule, OutputValidation) {
  const Universe u = full_universe(2);
  DeterministicRule r{standard_query_set(2, u), {{"Q1", 0.5}, {"Q2", 0.5}}};
  LinearForm out = r.output();
  EXPECT_EQ(out.coeff(SubsetMask(1)), 0.5);
  EXPECT_EQ(out.coeff(SubsetMask(3)), 1.0);
  r.weights["ghost"] = 1.0;
  EXPECT_ANY_THROW(r.output());
}

TEST(RandomizedRule, RejectsBadProbabilities) {
  const Universe u = full_universe(2);
  DeterministicRule r{standard_query_set(2, u), {{"Q1", 1.0}}};
  using Atoms = std::vector<RuleAtom>;
  EXPECT_THROW(RandomizedRule(Atoms{}), std::invalid_argument);
  EXPECT_THROW(RandomizedRule(Atoms{{0.5, r}}), std::invalid_argument);
  EXPECT_THROW(RandomizedRule(Atoms{{-0.5, r}, {1.5, r}}), std::invalid_argument);
  EXPECT_NO_THROW(RandomizedRule(Atoms{{0.25, r}, {0.75, r}}));
}

TEST(RandomExpert, ErrorIsOneMinusOneOverN) {
  for (int n = 2; n <= 7; ++n) {
    RandomizedRule rule = random_expert(n, full_universe(n));
    RandomizedWorstCase w = randomized_worst_case(rule);
    EXPECT_NEAR(w.value, 1.0 - 1.0 / n, 1e-12);
    EXPECT_NEAR(expected_error_ratio(rule, adversarial_singleton_model(n)), 1.0 - 1.0 / n, 1e-12);
  }
}

TEST(MissProbability, MatchesCounting) {
  for (int n = 1; n <= 10; ++n) {
    for (int d = 0; d <= n; ++d) {
      for (int t = 0; t <= n; ++t) {
        // Count d-subsets of [n] disjoint from {1..t} by enumeration.
        double hits = 0.0, total = 0.0;
        for (std::uint32_t s = 0; s < (1U << n); ++s) {
          if (std::popcount(s) != d) continue;
          total += 1.0;
          if ((s & ((1U << t) - 1)) == 0) hits += 1.0;
        }
        EXPECT_NEAR(miss_probability(n, d, t), hits / total, 1e-15);
      }
    }
  }
}

TEST(RandomizedDifference, ErrorIsOneMinusDOverN) {
  for (int n = 2; n <= 7; ++n) {
    const Universe u = full_universe(n);
    for (int d = 1; d < n; ++d) {
      RandomizedRule rule = randomized_difference_rule(n, d, u);
      EXPECT_NEAR(static_cast<double>(rule.size()), binomial(n, d), 0.0);
      RandomizedWorstCase w = randomized_worst_case(rule);
      EXPECT_NEAR(w.value, 1.0 - static_cast<double>(d) / n, 1e-12);
      EXPECT_EQ(w.argmax.size(), static_cast<std::size_t>(n));
      for (SubsetMask t : w.argmax) EXPECT_EQ(t.size(), 1);
      for (const SignalModel& m : candidate_witness_models(n, u)) {
        EXPECT_LE(expected_error_ratio(rule, m), w.value + 1e-12);
      }
      // Each T is missed by a random d-subset with the counting probability.
      for (int t = 1; t <= n; ++t) {
        EXPECT_NEAR(expected_error_ratio(rule, size_class_model(n, t, u)), miss_probability(n, d, t),
                    1e-12);
      }
    }
  }
  EXPECT_THROW(randomized_difference_rule(3, 3, full_universe(3)), std::invalid_argument);
}

TEST(Determinize, OutputIsTheMean) {
  const int n = 4;
  const Universe u = full_universe(n);
  RandomizedRule rule = randomized_difference_rule(n, 2, u);
  DeterministicRule det = determinize(rule);
  LinearForm mean(n);
  for (const RuleAtom& a : rule.atoms()) mean.add_scaled(a.rule.output(), a.p);
  EXPECT_TRUE(det.output().approx_equal(mean));
  EXPECT_TRUE(validate(det.dag).valid());
  EXPECT_TRUE(det.dag.contains("a0/D(1)"));
  // Averaging first can only help (Jensen).
  const SignalModel m = adversarial_singleton_model(n);
  EXPECT_LE(error_ratio(m, det.output()), expected_error_ratio(rule, m) + 1e-12);
}

TEST(Symmetrize, AveragesEachClass) {
  const int n = 4, d = 2;
  InterExpansion w;
  double sum1 = 0.0, sum2 = 0.0;
  const CounterRng rng(3);
  std::uint32_t slot = 0;
  for (SubsetMask s : subsets_up_to_size(n, d)) {
    w[s] = rng.uniform(0, 0, slot++);
    (s.size() == 1 ? sum1 : sum2) += w[s];
  }
  SymmetricRule r = symmetrize(w, n, d);
  EXPECT_NEAR(r.betas[0], sum1 / 4.0, 1e-15);
  EXPECT_NEAR(r.betas[1], sum2 / 6.0, 1e-15);
  w.erase(w.begin());
  EXPECT_THROW(symmetrize(w, n, d), std::invalid_argument);
}

TEST(Symmetrize, NeverIncreasesWorstCase) {
  const int n = 5, d = 3;
  const Universe u = full_universe(n);
  const CounterRng rng(4);
  for (std::uint64_t k = 0; k < 20; ++k) {
    InterExpansion w;
    std::uint32_t slot = 0;
    for (SubsetMask s : subsets_up_to_size(n, d)) w[s] = rng.normal_pair(0, k, slot++)[0];
    const double before = worst_case_error(inter_expansion_form(n, w, u), u).value;
    SymmetricRule sym = symmetrize(w, n, d);
    const double after = rule_error_equivalence(sym, n);
    EXPECT_LE(after, before * (1 + 1e-12) + 1e-12);
    EXPECT_NEAR(worst_case_error(symmetric_intersection_rule(sym, n, u).output(), u).value, after,
                1e-9 * std::max(1.0, after));
  }
}

TEST(SymmetricRule, PolynomialRoundTrip) {
  SymmetricRule r{3, {0.5, -0.25, 0.125}};
  for (int t = 0; t <= 6; ++t) {
    const double direct = 0.5 * binomial(t, 1) - 0.25 * binomial(t, 2) + 0.125 * binomial(t, 3);
    EXPECT_NEAR(r.polynomial_at(t), direct, 1e-14);
  }
  PolySpec p = polynomial_of_rule(r, 1.0, 10.0);
  for (double x : {0.0, 1.0, 2.5, 7.0, 10.0}) EXPECT_NEAR(p(x), r.polynomial_at(x), 1e-11);
  SymmetricRule back = rule_from_polynomial(p, 3);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(back.betas[k], r.betas[k], 1e-10);
  EXPECT_THROW(rule_from_polynomial(p, 2), std::invalid_argument);
  EXPECT_THROW(rule_from_polynomial(p.shifted(1.0), 3), std::invalid_argument);
}

TEST(CommonSignal, PrecisionWeighting) {
  const int n = 5;
  // Equal variances reduce to the fixed weight 2 / (n + 1).
  DeterministicRule eq = precision_weighted_rule(std::vector<double>(n, 2.0));
  for (const auto& [id, w] : eq.weights) EXPECT_NEAR(w, 2.0 / (n + 1), 1e-15);
  std::vector<double> v = {1.0, 1.0, 2.0, 4.0, 0.5};
  SignalModel m = common_signal_model(v, 1.0);
  EXPECT_EQ(m.support(), common_signal_universe(n));
  // Both rules put total weight 2n / (n + 1) on the common signal, so the
  // comparison reduces to the harmonic-arithmetic mean inequality.
  const double precise = exact_mse(m, precision_weighted_rule(v).output());
  const double uniform = exact_mse(m, fixed_weight_rule(n, 2.0 / (n + 1)).output());
  double tau = 0.0, sum_v = 0.0;
  for (double x : v) {
    tau += 1.0 / x;
    sum_v += x;
  }
  const double r = (n - 1.0) / (n + 1.0);
  const double common = std::pow(1.0 - 2.0 * n / (n + 1.0), 2);
  EXPECT_NEAR(precise, r * r * n * n / tau + common, 1e-12);
  EXPECT_NEAR(uniform, r * r * sum_v + common, 1e-12);
  EXPECT_LE(precise, uniform);
  const double fixed = worst_case_error(fixed_weight_rule(n, 2.0 / (n + 1)).output(),
                                        common_signal_universe(n)).value;
  EXPECT_NEAR(fixed, std::pow((n - 1.0) / (n + 1.0), 2), 1e-15);
  EXPECT_THROW(precision_weighted_rule({1.0, 0.0}), std::invalid_argument);
}

}  // namespace
}  // namespace agglab
