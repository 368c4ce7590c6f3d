#pragma once

#include <string>
#include <vector>

namespace agglab::lp {

// Entering/leaving variable selection for the tableau simplex.
//   Bland         smallest eligible index (anti-cycling)
//   ReverseBland  largest eligible index (also anti-cycling)
//   Dantzig       most negative reduced cost; switches to Bland after a run
//                 of degenerate pivots
enum class PivotRule { Bland, ReverseBland, Dantzig };

std::string to_string(PivotRule rule);

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(Status status);

// min c^T x  subject to  A x = b,  x >= 0.  A is row-major rows x cols.
struct Problem {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;

  double& at(int r, int col) { return a[static_cast<std::size_t>(r) * cols + col]; }
  double at(int r, int col) const { return a[static_cast<std::size_t>(r) * cols + col]; }
};

struct Solution {
  Status status = Status::IterationLimit;
  double objective = 0.0;
  std::vector<double> x;      // primal solution, size cols
  std::vector<double> y;      // equality multipliers: B^T y = c_B
  std::vector<int> basis;     // basic column per row
  int iterations = 0;
  bool warm_started = false;
};

struct Options {
  PivotRule pivot = PivotRule::Bland;
  int max_iterations = 0;  // 0 picks 50 * (rows + cols)
  double tolerance = 1e-10;
  // Optional starting basis (one column per row). Used when it is
  // nonsingular and primal feasible; otherwise phase one runs from scratch.
  std::vector<int> initial_basis;
  // Pivots between refactorizations of the tableau from the original data.
  int refactor_interval = 32;
};

// Dense tableau simplex with phase one on artificials when no feasible
// starting basis is given. The tableau is rebuilt from the original data
// periodically and before declaring optimality, so x and y carry no
// accumulated pivoting error.
Solution solve(const Problem& problem, const Options& options = {});

}  // namespace agglab::lp
