// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "agglab/aggregation_rules.hpp"
#include "agglab/faults.hpp"
#include "agglab/harness.hpp"
#include "agglab/minimax.hpp"
#include "agglab/monte_carlo.hpp"
#include "agglab/parallel.hpp"
#include "agglab/query_families.hpp"
#include "agglab/rng.hpp"

namespace {

using namespace agglab;

struct Outcome {
  bool passed = true;
  std::string detail;
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      if (failures.size() < 5) failures.push_back(what);
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Independent grid certificate check: alternation, attainment and global
// bound recomputed from the polynomial alone.
std::string audit_grid_result(const MinimaxResult& r) {
  if (r.alternation.size() != static_cast<std::size_t>(r.d) + 1) return "wrong number of points";
  double prev = 0.0;
  for (std::size_t k = 0; k < r.alternation.size(); ++k) {
    const AlternationPoint& a = r.alternation[k];
    if (a.t != std::floor(a.t) || a.t < 1 || a.t > r.n) return fmt::format("point {} off the grid", a.t);
    if (k > 0 && !(a.t > prev)) return "points not increasing";
    if (k > 0 && a.sign != -r.alternation[k - 1].sign) return "signs do not alternate";
    const double v = r.poly(a.t);
    if ((v > 0 ? 1 : -1) != a.sign) return fmt::format("sign mismatch at {}", a.t);
    if (std::abs(std::abs(v) - r.value) > 1e-9 * r.value) return fmt::format("|p({})| != value", a.t);
    prev = a.t;
  }
  for (int t = 1; t <= r.n; ++t) {
    if (std::abs(r.poly(t)) > r.value * (1 + 1e-9)) return fmt::format("|p({})| exceeds value", t);
  }
  if (std::abs(r.poly(0.0) - 1.0) > 1e-9) return "p(0) != 1";
  return {};
}

// Every discrete solve made during the run, audited as it is produced.
struct SolveLog {
  std::mutex mu;
  int solves = 0;
  int audit_failures = 0;
  double min_value = 1.0;
  std::vector<std::string> notes;

  MinimaxResult solve(int n, int d) {
    MinimaxResult r = discrete_minimax(n, d);
    std::string problem = audit_grid_result(r);
    std::lock_guard lock(mu);
    ++solves;
    min_value = std::min(min_value, r.value);
    if (!problem.empty()) {
      ++audit_failures;
      if (notes.size() < 5) notes.push_back(fmt::format("n={} d={}: {}", n, d, problem));
    }
    return r;
  }
};

SolveLog solve_log;

Outcome optimal_aggregation() {
  Outcome o;
  const auto start = Clock::now();
  for (int n = 1; n <= 12; ++n) {
    const Universe u = full_universe(n);
    const LinearForm y = LinearForm::target(n, u);
    LinearForm a = optimal_intersection_rule(n).output();
    LinearForm b = optimal_difference_rule(n, u).output();
    for (SubsetMask t : u) {
      o.require(std::abs(a.coeff(t) - 1.0) <= 1e-12, fmt::format("intersection n={} T={}", n, t.to_string()));
      o.require(std::abs(b.coeff(t) - 1.0) <= 1e-12, fmt::format("difference n={} T={}", n, t.to_string()));
    }
    o.require(a.size() == u.size() && b.size() == u.size(), fmt::format("extra terms at n={}", n));
  }
  const double elapsed = seconds_since(start);
  o.require(elapsed < 10.0, fmt::format("took {:.1f} s", elapsed));
  o.detail = fmt::format("n = 1..12, {:.2f} s", elapsed);
  return o;
}

Outcome query_budget(std::uint64_t samples) {
  Outcome o;
  int cases = 0;
  for (int n = 2; n <= 12; ++n) {
    const Universe u = full_universe(n);
    const auto witnesses = candidate_witness_models(n, u);
    for (int d = 1; d < n; ++d) {
      const double expected = 1.0 - static_cast<double>(d) / n;
      RandomizedRule rule = randomized_difference_rule(n, d, u);
      RandomizedWorstCase w = randomized_worst_case(rule);
      o.require(std::abs(w.value - expected) <= 1e-12, fmt::format("n={} d={} worst {}", n, d, w.value));
      const double singleton = expected_error_ratio(rule, adversarial_singleton_model(n));
      o.require(std::abs(singleton - expected) <= 1e-12, fmt::format("n={} d={} singleton {}", n, d, singleton));
      for (const SignalModel& m : witnesses) {
        const double e = expected_error_ratio(rule, m);
        o.require(e <= expected + 1e-12, fmt::format("n={} d={} witness beats bound: {}", n, d, e));
      }
      ++cases;
    }
  }

  // Simulate the rule itself: pick an atom, draw the singleton signals,
  // evaluate the atom's aggregate.
  const int n = 6, d = 3;
  RandomizedRule rule = randomized_difference_rule(n, d, full_universe(n));
  const SignalModel model = adversarial_singleton_model(n);
  std::vector<std::vector<double>> coeffs;
  for (const RuleAtom& a : rule.atoms()) coeffs.push_back(dense_coefficients(a.rule.output(), model.support()));
  const Sampler sampler(model, 17, 0);
  const CounterRng pick(17);
  MeanEstimate mc = monte_carlo_mean(samples, [&](std::uint64_t k) {
    std::array<double, 6> x{};
    const double y = sampler.draw_into(k, x);
    const std::vector<double>& c = coeffs[pick.below(coeffs.size(), 1, k)];
    double a = 0.0;
    for (int j = 0; j < n; ++j) a += c[j] * x[j];
    return (a - y) * (a - y) / model.total_variance();
  });
  o.require(mc.within_three_se(0.5), fmt::format("MC {} +- {}", mc.mean, mc.standard_error));
  o.detail = fmt::format("{} (n, d) cases exact; MC n=6 d=3: {:.5f} +- {:.5f} ({} samples)", cases,
                         mc.mean, mc.standard_error, samples);
  return o;
}

Outcome sandwich() {
  Outcome o;
  std::vector<std::pair<int, int>> cases;
  std::vector<int> ns;
  for (int n = 5; n <= 60; ++n) ns.push_back(n);
  for (int n : {100, 250, 500}) ns.push_back(n);
  for (int n : ns) {
    for (int d = 1; d <= std::min(n - 1, 25); ++d) cases.emplace_back(n, d);
  }
  const auto start = Clock::now();
  std::vector<std::string> bad(cases.size());
  parallel_for(cases.size(), [&](std::size_t i) {
    auto [n, d] = cases[i];
    try {
      const double v = solve_log.solve(n, d).value;
      const Bounds b = bounds(n, d);
      const double sq = v * v;
      if (!(b.lower <= sq + 1e-9 && sq <= b.upper + 1e-9)) {
        bad[i] = fmt::format("n={} d={}: {} not in [{}, {}]", n, d, sq, b.lower, b.upper);
      }
    } catch (const std::exception& e) {
      bad[i] = fmt::format("n={} d={}: {}", n, d, e.what());
    }
  });
  const double elapsed = seconds_since(start);
  for (const std::string& b : bad) o.require(b.empty(), b);
  o.require(elapsed < 60.0, fmt::format("took {:.1f} s", elapsed));
  o.detail = fmt::format("{} (n, d) pairs, {:.2f} s", cases.size(), elapsed);
  return o;
}

Outcome exact_small_degree() {
  Outcome o;
  int equal = 0, strict = 0;
  double tightest = 1.0;
  for (int n = 2; n <= 60; ++n) {
    for (int d = 1; d <= 3 && d < n; ++d) {
      const double disc = solve_log.solve(n, d).value;
      const double closed = closed_form_value(n, d);
      const bool predicted = d == 1 || (d == 2 && n % 2 == 1) || (d == 3 && n % 4 == 1);
      if (predicted) {
        o.require(std::abs(disc - closed) <= 1e-9, fmt::format("n={} d={} expected equality: {} vs {}", n, d, disc, closed));
        ++equal;
      } else {
        o.require(closed - disc > 1e-9, fmt::format("n={} d={} expected strict gap: {} vs {}", n, d, disc, closed));
        tightest = std::min(tightest, closed - disc);
        ++strict;
      }
    }
  }
  o.detail = fmt::format("{} equalities, {} strict (smallest gap {:.3e})", equal, strict, tightest);
  return o;
}

Outcome weak_lower_bound() {
  Outcome o;
  o.require(solve_log.solves > 0, "no solves recorded");
  o.require(solve_log.min_value > 1e-12, fmt::format("smallest optimum {}", solve_log.min_value));
  o.detail = fmt::format("{} solves, smallest optimum {:.3e}", solve_log.solves, solve_log.min_value);
  return o;
}

Outcome certificates() {
  Outcome o;
  o.require(solve_log.audit_failures == 0, fmt::format("{} audits failed", solve_log.audit_failures));
  for (const std::string& note : solve_log.notes) o.require(false, note);

  // Corrupted results must be rejected by both the library check and the audit.
  int caught = 0, tampered = 0;
  const MinimaxResult good = discrete_minimax(60, 9);
  std::vector<std::function<void(MinimaxResult&)>> corruptions = {
      [](MinimaxResult& r) { r.value *= 0.99; },
      [](MinimaxResult& r) { r.poly = r.poly.shifted(0.01 * r.value); },
      [](MinimaxResult& r) {
        // Smallest |p| strictly between the neighbouring points.
        double low = r.alternation[4].t;
        for (double t = r.alternation[3].t + 1; t < r.alternation[5].t; t += 1.0) {
          if (std::abs(r.poly(t)) < std::abs(r.poly(low))) low = t;
        }
        r.alternation[4].t = low;
      },
      [](MinimaxResult& r) { r.alternation[2].sign = -r.alternation[2].sign; },
  };
  for (const auto& corrupt : corruptions) {
    MinimaxResult bad = good;
    corrupt(bad);
    ++tampered;
    const bool lib = !check_certificate(bad).valid;
    const bool audit = !audit_grid_result(bad).empty();
    o.require(lib && audit, fmt::format("tampering {} not caught (library {}, audit {})", tampered, lib, audit));
    if (lib && audit) ++caught;
  }

  // A solver corrupted from inside must never hand back a result.
  int faulted = 0;
  for (auto fault : {faults::Fault::SkewMinimaxValue, faults::Fault::PerturbMinimaxPoly,
                     faults::Fault::ShiftCertificatePoint}) {
    faults::ScopedFault scoped(fault);
    for (auto [n, d] : {std::pair{9, 2}, std::pair{60, 9}, std::pair{500, 25}}) {
      bool rejected = false;
      try {
        discrete_minimax(n, d);
      } catch (const CertificateError&) {
        rejected = true;
      }
      o.require(rejected, fmt::format("{} slipped through at n={} d={}", faults::to_string(fault), n, d));
      if (rejected) ++faulted;
    }
  }
  o.detail = fmt::format("{} solves audited; {}/{} tampered results and {}/9 faulty solves rejected",
                         solve_log.solves, caught, tampered, faulted);
  return o;
}

Outcome degree_one() {
  Outcome o;
  for (int n = 2; n <= 500; ++n) {
    const double v = solve_log.solve(n, 1).value;
    const double a = std::pow((n - 1.0) / (n + 1.0), 2);
    const double b = 1.0 - 4.0 * n / ((n + 1.0) * (n + 1.0));
    o.require(std::abs(v * v - a) <= 1e-10 && std::abs(a - b) <= 1e-10,
              fmt::format("n={}: {} {} {}", n, v * v, a, b));
    if (n <= kMaxAgents) {
      const double fixed = worst_case_error(fixed_weight_rule(n, 2.0 / (n + 1)).output(),
                                            common_signal_universe(n)).value;
      o.require(std::abs(fixed - a) <= 1e-10, fmt::format("fixed-weight rule n={}: {}", n, fixed));
    }
  }
  o.detail = "n = 2..500; fixed-weight rule matched for n <= 24";
  return o;
}

Outcome incentives(std::uint64_t samples) {
  Outcome o;
  const int n = 3;
  const Universe u = full_universe(n);
  const SignalModel model = SignalModel::unit(n, u);
  const std::vector<std::pair<std::string, QueryDag>> figures = {
      {"standard", standard_query_set(n, u)},
      {"predict-others", predict_others_set(n, u)},
      {"iterated-chain", iterated_chain(n, 1, 2, 2, u)},
  };
  int entries = 0, exact = 0;
  double worst_z = 0.0;
  for (std::size_t f = 0; f < figures.size(); ++f) {
    TruthfulnessReport r = truthfulness_check(figures[f].second, model, {0.25, 0.5, 1.0}, samples, 100 + f);
    for (const TruthfulnessEntry& e : r.entries) {
      const double dev = std::abs(e.gap - e.delta * e.delta);
      const bool ok = dev <= 3.0 * e.gap_stderr + 1e-12;
      o.require(ok, fmt::format("{} node {} delta {}: gap {} +- {}", figures[f].first, e.node, e.delta,
                                e.gap, e.gap_stderr));
      // Nodes whose report is a fixed function of the target have a constant
      // gap; their standard error is rounding noise.
      if (e.gap_stderr > 1e-9) {
        worst_z = std::max(worst_z, dev / e.gap_stderr);
      } else {
        ++exact;
      }
      ++entries;
    }
  }
  o.detail = fmt::format("{} (node, delta) entries at {} samples, largest |z| = {:.2f} ({} with constant gap)",
                         entries, samples, worst_z, exact);
  return o;
}

Outcome common_signal(std::uint64_t samples) {
  Outcome o;
  std::string detail;
  for (int n : {2, 5, 10}) {
    harness::CommonSignalReport r = harness::run_common_signal(n, samples, 7);
    o.require(r.max_residual < 1e-10, fmt::format("n={} residual {}", n, r.max_residual));
    o.require(r.complexity.query_c == n + 1 && r.complexity.order_c == 2 && r.complexity.agent_c == 2,
              fmt::format("n={} complexity ({}, {}, {})", n, r.complexity.query_c, r.complexity.order_c,
                          r.complexity.agent_c));
    for (const std::string& f : r.failures) o.require(false, fmt::format("n={}: {}", n, f));
    detail += fmt::format("{}n={} residual {:.1e} complexity ({},{},{})", detail.empty() ? "" : "; ", n,
                          r.max_residual, r.complexity.query_c, r.complexity.order_c, r.complexity.agent_c);
  }
  o.detail = detail;
  return o;
}

// Coefficients of every node by dense evaluation over all subsets, with Y = 1.
std::map<std::string, std::vector<double>> dense_values(const QueryDag& dag) {
  const std::size_t size = std::size_t{1} << dag.n();
  std::map<std::string, std::vector<double>> values;
  values[kSinkId] = std::vector<double>(size, 1.0);
  values[kSinkId][0] = 0.0;
  bool progress = true;
  while (progress) {
    progress = false;
    for (const QueryNode& q : dag.nodes()) {
      if (values.count(q.id)) continue;
      bool ready = true;
      for (const PaymentTarget& t : q.targets) ready = ready && values.count(t.id);
      if (!ready) continue;
      std::vector<double> v(size, 0.0);
      for (std::uint32_t s = 1; s < size; ++s) {
        if (!((s >> (q.agent - 1)) & 1U)) continue;
        for (const PaymentTarget& t : q.targets) v[s] += t.alpha * values[t.id][s];
      }
      values[q.id] = std::move(v);
      progress = true;
    }
  }
  return values;
}

Outcome rewriting() {
  Outcome o;
  const int n = 4;
  QueryDag ex(n, full_universe(n));
  ex.add_query("Q1", 1, {{kSinkId, 1.0}});
  ex.add_query("Q2", 2, {{kSinkId, 1.0}});
  ex.add_query("Q3", 3, {{"Q1", -1.0}, {"Q2", 2.0}});
  auto expansion = rewrite_to_intersection(ex);
  auto S = [n](std::initializer_list<int> a) { return SubsetMask::from_agents(a, n); };
  o.require(expansion.at("Q1") == InterExpansion{{S({1}), 1.0}}, "Q1 expansion");
  o.require(expansion.at("Q2") == InterExpansion{{S({2}), 1.0}}, "Q2 expansion");
  o.require(expansion.at("Q3") == InterExpansion{{S({1, 3}), -1.0}, {S({2, 3}), 2.0}}, "Q3 expansion");
  InterExpansion total;
  for (const auto& [id, e] : expansion) {
    for (const auto& [s, c] : e) total[s] += c;
  }
  const LinearForm beta = inter_expansion_form(n, total, ex.universe());
  // Expected coefficient by the class T & {1,2,3}.
  const std::map<std::uint32_t, double> pattern = {{0b000, 0}, {0b100, 0}, {0b101, 0}, {0b001, 1},
                                                   {0b010, 1}, {0b011, 2}, {0b110, 3}, {0b111, 3}};
  for (SubsetMask t : ex.universe()) {
    const double want = pattern.at(t.bits() & 0b111U);
    o.require(beta.coeff(t) == want, fmt::format("beta{} = {}, want {}", t.to_string(), beta.coeff(t), want));
  }

  // Random linear DAGs: expansions against a dense evaluation of the node values.
  const CounterRng rng(2024);
  int nodes_checked = 0;
  for (std::uint64_t k = 0; k < 200; ++k) {
    std::uint32_t slot = 0;
    const int m = 2 + static_cast<int>(rng.below(7, 0, k, slot++));  // n in 2..8
    const int count = 1 + static_cast<int>(rng.below(8, 0, k, slot++));
    QueryDag dag(m, full_universe(m));
    for (int v = 0; v < count; ++v) {
      std::vector<PaymentTarget> targets;
      if (v == 0 || rng.uniform(0, k, slot++) < 0.4) targets.push_back({kSinkId, 1.0 + static_cast<double>(rng.below(3, 0, k, slot++))});
      for (int j = 0; j < v; ++j) {
        if (rng.uniform(0, k, slot++) < 0.3) {
          targets.push_back({fmt::format("N{}", j), static_cast<double>(rng.below(7, 0, k, slot++)) - 3.0});
        }
      }
      if (targets.empty()) targets.push_back({kSinkId, 1.0});
      dag.add_query(fmt::format("N{}", v), 1 + static_cast<int>(rng.below(m, 0, k, slot++)), std::move(targets));
    }
    auto dense = dense_values(dag);
    auto exp = rewrite_to_intersection(dag);
    for (const QueryNode& q : dag.nodes()) {
      const std::vector<double>& want = dense.at(q.id);
      for (std::uint32_t t = 1; t < want.size(); ++t) {
        double got = 0.0;
        for (const auto& [s, c] : exp.at(q.id)) {
          if ((s.bits() & ~t) == 0) got += c;
        }
        o.require(std::abs(got - want[t]) <= 1e-9 * std::max(1.0, std::abs(want[t])),
                  fmt::format("dag {} node {} T={:#x}: {} vs {}", k, q.id, t, got, want[t]));
      }
      ++nodes_checked;
    }
  }
  o.detail = fmt::format("three-query example pattern exact; 200 random DAGs, {} nodes preserved", nodes_checked);
  return o;
}

Outcome large_degree() {
  Outcome o;
  const int n = 10000;
  std::string detail;
  for (int d : {200, 400, 800}) {
    const double upper = bounds(n, d).upper;
    const long double r = std::sqrt(static_cast<long double>(n));
    const long double log_q = std::log((r + 1) / (r - 1));
    const long double direct = 1.0L / std::cosh(d * log_q);
    const double bound = 4.0 * std::exp(-4.0 * d / (std::sqrt(double(n)) + 1.0));
    o.require(std::abs(upper - static_cast<double>(direct * direct)) <= 1e-12 * upper,
              fmt::format("d={} upper {} vs {}", d, upper, static_cast<double>(direct * direct)));
    o.require(upper <= bound, fmt::format("d={}: {} > {}", d, upper, bound));
    o.require(std::abs(large_d_bound(n, d) - bound) <= 1e-15 * bound, fmt::format("d={} bound value", d));
    detail += fmt::format("{}d={} {:.3e} <= {:.3e}", detail.empty() ? "" : "; ", d, upper, bound);
  }
  o.detail = detail;
  return o;
}

}  // namespace

int main() {
  constexpr std::uint64_t kSamples = 1'000'000;
  struct Criterion {
    std::string name;
    std::function<Outcome()> run;
  };
  // Order matters: criteria 5 and 6 summarize the solves made by 3, 4 and 7.
  const std::vector<Criterion> criteria = {
      {"1 optimal-aggregation", optimal_aggregation},
      {"2 query-budget", [] { return query_budget(kSamples); }},
      {"3 minimax-sandwich", sandwich},
      {"4 exact-small-degree", exact_small_degree},
      {"7 degree-one-cross-check", degree_one},
      {"5 weak-lower-bound", weak_lower_bound},
      {"6 equioscillation-certificates", certificates},
      {"8 incentives", [] { return incentives(kSamples); }},
      {"9 common-signal", [] { return common_signal(100'000); }},
      {"10 rewriting", rewriting},
      {"large-degree-bound", large_degree},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto start = Clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.passed = false;
      o.failures.push_back(std::string("exception: ") + e.what());
    }
    fmt::print("{} criterion {}: {} [{:.2f} s]\n", o.passed ? "PASS" : "FAIL", c.name, o.detail,
               seconds_since(start));
    for (const std::string& f : o.failures) fmt::print("    {}\n", f);
    std::fflush(stdout);
    if (!o.passed) ++failed;
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
