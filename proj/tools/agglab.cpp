#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "agglab/faults.hpp"
#include "agglab/harness.hpp"
#include "agglab/io.hpp"
#include "agglab/minimax.hpp"

namespace {

using namespace agglab;
using harness::OutputFormat;

constexpr int kExitChecksFailed = 1;
constexpr int kExitError = 2;

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    io::write_text(out, text);
  }
}

struct Common {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, Common& c, const std::string& default_format) {
  c.format = default_format;
  cmd->add_option("--samples", c.samples, "Monte Carlo samples")->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--out", c.out, "Write results here instead of stdout");
  cmd->add_option("--format", c.format, "Output format")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "json"}));
}

std::vector<int> d_list(const std::vector<int>& ds, int d_max, int n) {
  if (!ds.empty()) return ds;
  std::vector<int> out;
  const int top = d_max > 0 ? std::min(d_max, n - 1) : n - 1;
  for (int d = 1; d <= top; ++d) out.push_back(d);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust forecast aggregation: query DAGs, aggregation rules and Chebyshev minimax"};
  app.require_subcommand(1);

  std::string inject;
  app.add_option("--inject", inject, "Activate a named fault")
      ->group("")
      ->check(CLI::IsMember([] {
        std::vector<std::string> names;
        for (auto f : faults::all()) names.push_back(faults::to_string(f));
        return names;
      }()));

  // common-signal
  Common cs;
  int cs_n = 5;
  std::vector<double> cs_variances;
  auto* cmd_cs = app.add_subcommand("common-signal", "Shared common-signal example end to end");
  cmd_cs->add_option("--n", cs_n, "Number of agents")->capture_default_str()->check(CLI::Range(2, 24));
  cmd_cs->add_option("--variances", cs_variances,
                     "Private variances for the precision-weighting comparison");
  add_common(cmd_cs, cs, "json");

  // curves
  Common cv;
  std::vector<int> cv_n, cv_d;
  int cv_d_max = 0;
  bool cv_mc = false;
  auto* cmd_cv = app.add_subcommand("curves", "Error bounds and grid optimum versus degree");
  cmd_cv->add_option("--n", cv_n, "Agent counts (default 100 400 1600 6400)");
  cmd_cv->add_option("--d", cv_d, "Degrees (default 1..ceil(2 sqrt(n)))");
  cmd_cv->add_option("--d-max", cv_d_max, "Largest degree when --d is absent");
  cmd_cv->add_flag("--mc", cv_mc, "Add a Monte Carlo check of the Chebyshev rule per row");
  add_common(cmd_cv, cv, "csv");

  // query-budget
  Common qb;
  int qb_n = 10;
  std::vector<int> qb_d;
  int qb_d_max = 0;
  auto* cmd_qb = app.add_subcommand("query-budget", "Randomized difference rule error versus budget");
  cmd_qb->add_option("--n", qb_n, "Number of agents")->capture_default_str()->check(CLI::Range(2, 100000));
  cmd_qb->add_option("--d", qb_d, "Budgets (default 1..n-1)");
  cmd_qb->add_option("--d-max", qb_d_max, "Largest budget when --d is absent");
  add_common(cmd_qb, qb, "csv");

  // minimax
  Common mm;
  int mm_n = 0, mm_d = 0;
  std::string mm_method = "simplex";
  bool mm_cross = false;
  auto* cmd_mm = app.add_subcommand("minimax", "Certified grid minimax polynomial");
  cmd_mm->add_option("--n", mm_n, "Grid size")->required()->check(CLI::Range(2, kMaxDiscreteN));
  cmd_mm->add_option("--d", mm_d, "Degree")->required()->check(CLI::PositiveNumber);
  cmd_mm->add_option("--method", mm_method, "Solver")
      ->capture_default_str()
      ->check(CLI::IsMember({"simplex", "remez"}));
  cmd_mm->add_flag("--cross-check", mm_cross, "Also run the other solver and compare");
  add_common(cmd_mm, mm, "json");

  // verify
  Common vf;
  std::string suite = "all";
  auto* cmd_vf = app.add_subcommand("verify", "Run invariant suites");
  cmd_vf->add_option("suite", suite, "constructions, minimax, incentives or all")
      ->capture_default_str()
      ->check(CLI::IsMember({"constructions", "minimax", "incentives", "all"}));
  add_common(cmd_vf, vf, "csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!inject.empty()) faults::set(*faults::from_string(inject));

    if (cmd_cs->parsed()) {
      auto report = harness::run_common_signal(cs_n, cs.samples, cs.seed, cs_variances);
      emit(harness::format_common_signal(report, harness::output_format_from_string(cs.format)),
           cs.out);
      for (const auto& f : report.failures) fmt::print(stderr, "FAIL: {}\n", f);
      return report.passed() ? 0 : kExitChecksFailed;
    }

    if (cmd_cv->parsed()) {
      harness::ExperimentConfig config;
      config.experiment = "curves";
      config.ns = cv_n;
      config.ds = cv_d;
      config.d_max = cv_d_max;
      config.samples = cv.samples;
      config.seed = cv.seed;
      config.out = cv.out;
      config.format = harness::output_format_from_string(cv.format);
      config.monte_carlo = cv_mc;
      try {
        auto points = harness::run_curves(config);
        emit(harness::format_curves(points, config.format), config.out);
      } catch (const harness::SandwichViolation& e) {
        fmt::print(stderr, "aborted: {}\n", e.what());
        return kExitChecksFailed;
      }
      return 0;
    }

    if (cmd_qb->parsed()) {
      auto rows = harness::run_query_budget(qb_n, d_list(qb_d, qb_d_max, qb_n), qb.samples, qb.seed);
      emit(harness::format_query_budget(rows, harness::output_format_from_string(qb.format)),
           qb.out);
      bool ok = true;
      for (const auto& r : rows) {
        if (!r.passed) {
          ok = false;
          fmt::print(stderr, "FAIL: n={} d={} exact={} mc={} +- {}\n", r.n, r.d, r.exact,
                     r.mc.mean, r.mc.standard_error);
        }
      }
      return ok ? 0 : kExitChecksFailed;
    }

    if (cmd_mm->parsed()) {
      SolverOptions options;
      options.method = mm_method == "remez" ? MinimaxMethod::Remez : MinimaxMethod::Simplex;
      options.cross_check = mm_cross;
      MinimaxResult r;
      try {
        r = discrete_minimax(mm_n, mm_d, options);
      } catch (const CertificateError& e) {
        fmt::print(stderr, "certificate rejected: {}\n", e.what());
        return kExitChecksFailed;
      }
      if (mm.format == "json") {
        emit(io::to_json(r).dump(2) + "\n", mm.out);
      } else {
        const Bounds b = bounds(r.n, r.d);
        std::string cert;
        for (const auto& p : r.alternation) {
          cert += fmt::format("{}{}:{}", cert.empty() ? "" : " ", p.t, p.sign);
        }
        emit(fmt::format("n,d,value,value_squared,lower,upper,certificate\n"
                         "{},{},{:.17g},{:.17g},{:.17g},{:.17g},{}\n",
                         r.n, r.d, r.value, r.value * r.value, b.lower, b.upper, cert),
             mm.out);
      }
      return 0;
    }

    if (cmd_vf->parsed()) {
      auto report = harness::run_verify(harness::suite_from_string(suite), vf.samples, vf.seed);
      emit(harness::format_verify(report, harness::output_format_from_string(vf.format)), vf.out);
      for (const auto& c : report.checks) {
        if (!c.passed) fmt::print(stderr, "FAIL {}/{}: {}\n", c.suite, c.name, c.detail);
      }
      for (const auto& op : report.uncovered_ops) fmt::print(stderr, "UNCOVERED {}\n", op);
      fmt::print(stderr, "verify {}: {} checks, {} failed\n", suite, report.checks.size(),
                 report.failed());
      return report.passed() ? 0 : kExitChecksFailed;
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitError;
  }
  return kExitError;
}
