#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "agglab/faults.hpp"
#include "agglab/minimax.hpp"

namespace agglab {
namespace {

// Grid optimum by brute force over references: for d + 1 grid points the best
// p with p(0) = 1 has max |p| = 1 / sum_j |l_j(0)| on them, and the grid
// optimum is the largest such value over all references.
double reference_oracle(int n, int d) {
  long double best = 0.0L;
  std::vector<int> ref(static_cast<std::size_t>(d) + 1);
  std::function<void(int, int)> pick = [&](int pos, int start) {
    if (pos == d + 1) {
      long double norm = 0.0L;
      for (int j = 0; j <= d; ++j) {
        long double l = 1.0L;
        for (int k = 0; k <= d; ++k) {
          if (k != j) l *= static_cast<long double>(-ref[k]) / (ref[j] - ref[k]);
        }
        norm += std::fabs(l);
      }
      best = std::max(best, 1.0L / norm);
      return;
    }
    for (int t = start; t <= n - (d - pos); ++t) {
      ref[pos] = t;
      pick(pos + 1, t + 1);
    }
  };
  pick(0, 1);
  return static_cast<double>(best);
}

TEST(ClosedForm, MatchesDefinition) {
  for (int n : {2, 3, 10, 101, 5000}) {
    const double r = std::sqrt(static_cast<double>(n));
    const double q = (r + 1.0) / (r - 1.0);
    for (int d = 0; d <= 12; ++d) {
      EXPECT_NEAR(closed_form_value(n, d), 2.0 / (std::pow(q, d) + std::pow(q, -d)), 1e-14);
    }
    EXPECT_NEAR(closed_form_value(n, 1), (n - 1.0) / (n + 1.0), 1e-15);
  }
  EXPECT_THROW(closed_form_value(1, 1), std::invalid_argument);
}

TEST(TransformedChebyshev, EquioscillatesOnInterval) {
  for (int n : {5, 30, 400}) {
    for (int d = 1; d <= 8; ++d) {
      PolySpec p = transformed_chebyshev(n, d);
      const double v = closed_form_value(n, d);
      EXPECT_NEAR(p(0.0), 1.0, 1e-12);
      for (double x = 1.0; x <= n; x += (n - 1.0) / 997.0) EXPECT_LE(std::abs(p(x)), v * (1 + 1e-12));
      auto ext = transformed_chebyshev_extrema(n, d);
      ASSERT_EQ(ext.size(), static_cast<std::size_t>(d) + 1);
      EXPECT_NEAR(ext.front(), 1.0, 1e-12);
      EXPECT_NEAR(ext.back(), n, 1e-12 * n);
      MinimaxResult c = continuous_minimax(n, d);
      for (std::size_t k = 0; k < ext.size(); ++k) {
        EXPECT_NEAR(std::abs(p(ext[k])), v, 1e-12);
        if (k > 0) EXPECT_EQ(c.alternation[k].sign, -c.alternation[k - 1].sign);
      }
      EXPECT_EQ(c.domain, MinimaxDomain::Continuous);
    }
  }
}

TEST(Discrete, AgreesWithReferenceOracle) {
  for (int n = 2; n <= 14; ++n) {
    for (int d = 1; d < n && d <= 5; ++d) {
      MinimaxResult r = discrete_minimax(n, d);
      EXPECT_NEAR(r.value, reference_oracle(n, d), 1e-10) << n << " " << d;
      EXPECT_TRUE(check_certificate(r).valid);
    }
  }
}

TEST(Discrete, CertificatesAlternateOnTheGrid) {
  for (int n : {7, 20, 61, 250}) {
    for (int d = 1; d < n && d <= 20; d += 3) {
      MinimaxResult r = discrete_minimax(n, d);
      ASSERT_EQ(r.alternation.size(), static_cast<std::size_t>(d) + 1);
      for (std::size_t k = 0; k < r.alternation.size(); ++k) {
        const AlternationPoint& a = r.alternation[k];
        EXPECT_EQ(a.t, std::round(a.t));
        EXPECT_GE(a.t, 1.0);
        EXPECT_LE(a.t, n);
        EXPECT_NEAR(std::abs(r.poly(a.t)), r.value, 1e-9 * r.value);
        EXPECT_EQ(r.poly(a.t) > 0 ? 1 : -1, a.sign);
        if (k > 0) {
          EXPECT_LT(r.alternation[k - 1].t, a.t);
          EXPECT_EQ(a.sign, -r.alternation[k - 1].sign);
        }
      }
      double worst = 0.0;
      for (int t = 1; t <= n; ++t) worst = std::max(worst, std::abs(r.poly(t)));
      EXPECT_LE(worst, r.value * (1 + 1e-9));
      EXPECT_NEAR(r.poly(0.0), 1.0, 1e-9);
    }
  }
}

TEST(Discrete, PivotRulesAgreeFromColdStart) {
  for (int n = 3; n <= 40; ++n) {
    for (int d = 1; d < n && d <= 6; ++d) {
      std::vector<MinimaxResult> results;
      for (auto rule : {lp::PivotRule::Bland, lp::PivotRule::ReverseBland, lp::PivotRule::Dantzig}) {
        SolverOptions o;
        o.pivot = rule;
        o.warm_start = false;
        o.fallback = false;
        results.push_back(discrete_minimax(n, d, o));
      }
      for (std::size_t k = 1; k < results.size(); ++k) {
        EXPECT_NEAR(results[k].value, results[0].value, 1e-12);
        for (double x = 1.0; x <= n; x += 0.5) {
          EXPECT_NEAR(results[k].poly(x), results[0].poly(x), 1e-8) << n << " " << d << " " << x;
        }
        EXPECT_EQ(results[k].alternation, results[0].alternation);
      }
    }
  }
}

TEST(Discrete, PivotRulesAgreeFromWarmStart) {
  for (int n : {61, 100, 250, 500}) {
    for (int d : {2, 5, 11, 20}) {
      std::vector<double> values;
      for (auto rule : {lp::PivotRule::Bland, lp::PivotRule::ReverseBland, lp::PivotRule::Dantzig}) {
        SolverOptions o;
        o.pivot = rule;
        o.fallback = false;
        values.push_back(discrete_minimax(n, d, o).value);
      }
      EXPECT_NEAR(values[1], values[0], 1e-12 * std::max(1.0, values[0]));
      EXPECT_NEAR(values[2], values[0], 1e-12 * std::max(1.0, values[0]));
    }
  }
}

TEST(Discrete, SimplexAndRemezAgree) {
  for (int n : {5, 17, 60, 333}) {
    for (int d = 1; d < n && d <= 15; d += 2) {
      SolverOptions o;
      o.cross_check = true;
      MinimaxResult s = discrete_minimax(n, d, o);
      o.method = MinimaxMethod::Remez;
      o.fallback = false;
      o.cross_check = false;
      MinimaxResult r = discrete_minimax(n, d, o);
      EXPECT_EQ(r.method, MinimaxMethod::Remez);
      EXPECT_NEAR(r.value, s.value, 1e-9);
      EXPECT_EQ(r.alternation, s.alternation);
    }
  }
}

TEST(Discrete, MonotoneInNAndD) {
  for (int n = 3; n <= 50; ++n) {
    double prev = 1.0;
    for (int d = 1; d < n && d <= 10; ++d) {
      const double v = discrete_minimax(n, d).value;
      EXPECT_LE(v, prev * (1 + 1e-12));
      EXPECT_LT(v, closed_form_value(n, d) * (1 + 1e-9));
      EXPECT_GT(v, 1e-12);
      if (d < n - 1) EXPECT_LE(v, discrete_minimax(n + 1, d).value * (1 + 1e-12));
      prev = v;
    }
  }
}

TEST(Discrete, SmallDegreeExactCases) {
  for (int n = 3; n <= 25; ++n) {
    for (int d = 1; d <= 3 && d < n; ++d) {
      const double disc = discrete_minimax(n, d).value;
      const double closed = closed_form_value(n, d);
      const bool equal = d == 1 || (d == 2 && n % 2 == 1) || (d == 3 && n % 4 == 1);
      if (equal) {
        EXPECT_NEAR(disc, closed, 1e-9) << n << " " << d;
      } else {
        EXPECT_LT(disc, closed - 1e-9) << n << " " << d;
      }
    }
  }
}

TEST(Discrete, RejectsBadArguments) {
  EXPECT_THROW(discrete_minimax(5, 5), std::invalid_argument);
  EXPECT_THROW(discrete_minimax(5, 0), std::invalid_argument);
  EXPECT_THROW(discrete_minimax(kMaxDiscreteN + 1, 3), std::invalid_argument);
  SolverOptions o;
  o.method = MinimaxMethod::ClosedForm;
  EXPECT_THROW(discrete_minimax(5, 2, o), std::invalid_argument);
}

TEST(Certificate, TamperingIsCaught) {
  const MinimaxResult good = discrete_minimax(40, 6);
  ASSERT_TRUE(check_certificate(good).valid);

  MinimaxResult a = good;
  a.alternation[2].sign = -a.alternation[2].sign;
  EXPECT_FALSE(check_certificate(a).valid);

  // Move a point to the interior grid point where |p| is smallest between
  // its neighbours; a plain +1 can land on a second attaining point.
  MinimaxResult b = good;
  double low = b.alternation[3].t;
  for (double t = b.alternation[2].t + 1; t < b.alternation[4].t; t += 1.0) {
    if (std::abs(b.poly(t)) < std::abs(b.poly(low))) low = t;
  }
  b.alternation[3].t = low;
  EXPECT_FALSE(check_certificate(b).valid);

  MinimaxResult c = good;
  c.value *= 0.999;
  EXPECT_FALSE(check_certificate(c).valid);

  MinimaxResult e = good;
  e.alternation.pop_back();
  EXPECT_FALSE(check_certificate(e).valid);

  MinimaxResult f = good;
  f.poly = f.poly.scaled(1.001);
  EXPECT_FALSE(check_certificate(f).valid);
  EXPECT_THROW(validate_certificate(f), CertificateError);

  auto again = extract_certificate(good.poly, 40, 6, good.value);
  EXPECT_EQ(again, good.alternation);
  EXPECT_TRUE(extract_certificate(good.poly, 40, 6, good.value * 1.5).empty());
}

TEST(Certificate, CorruptedSolverIsRejected) {
  for (auto fault : {faults::Fault::SkewMinimaxValue, faults::Fault::PerturbMinimaxPoly,
                     faults::Fault::ShiftCertificatePoint}) {
    faults::ScopedFault scoped(fault);
    for (auto [n, d] : {std::pair{9, 2}, std::pair{50, 7}, std::pair{300, 17}}) {
      EXPECT_THROW(discrete_minimax(n, d), CertificateError) << faults::to_string(fault);
    }
  }
  EXPECT_NO_THROW(discrete_minimax(9, 2));
}

TEST(Bounds, SandwichShape) {
  for (int n : {5, 26, 100, 2000}) {
    for (int d = 1; d < n && d <= 30; ++d) {
      Bounds b = bounds(n, d);
      const double upper = std::pow(closed_form_value(n, d), 2);
      EXPECT_DOUBLE_EQ(b.upper, upper);
      const double factor = std::max(0.0, 1.0 - static_cast<double>(d) * d / (n - 1.0));
      EXPECT_NEAR(b.lower, factor * factor * upper, 1e-15);
      EXPECT_LE(b.lower, b.upper);
    }
  }
  EXPECT_EQ(bounds(26, 5).lower, 0.0);
}

TEST(Bounds, LargeDegreeExponential) {
  for (int d : {200, 400, 800}) {
    EXPECT_NEAR(large_d_bound(10000, d), 4.0 * std::exp(-4.0 * d / 101.0), 1e-15);
    EXPECT_LE(bounds(10000, d).upper, large_d_bound(10000, d));
  }
}

TEST(Regime, Thresholds) {
  EXPECT_EQ(regime(10000, 49).regime, Regime::Small);
  EXPECT_EQ(regime(10000, 50).regime, Regime::Critical);
  EXPECT_EQ(regime(10000, 200).regime, Regime::Critical);
  EXPECT_EQ(regime(10000, 201).regime, Regime::Large);
  RegimeReport r = regime(400, 4);
  EXPECT_DOUBLE_EQ(r.ratio, 0.2);
  EXPECT_DOUBLE_EQ(r.d_squared_over_n, 0.04);
  EXPECT_NEAR(r.one_minus_lower, 1.0 - r.bounds.lower, 1e-15);
  EXPECT_EQ(to_string(Regime::Large), "large");
}

TEST(RuleEquivalence, OptimalPolynomialGivesOptimalRule) {
  for (int n = 3; n <= 12; ++n) {
    for (int d = 1; d < n && d <= 4; ++d) {
      MinimaxResult r = discrete_minimax(n, d);
      SymmetricRule rule = rule_from_polynomial(r.poly.one_minus(), d);
      EXPECT_NEAR(rule_error_equivalence(rule, n), r.value * r.value, 1e-9);
      DeterministicRule det = symmetric_intersection_rule(rule, n, full_universe(n));
      EXPECT_NEAR(worst_case_error(det.output(), full_universe(n)).value, r.value * r.value, 1e-9);
    }
  }
}

}  // namespace
}  // namespace agglab
