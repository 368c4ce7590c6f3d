#include "agglab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace agglab::lp {

std::string to_string(PivotRule rule) {
  switch (rule) {
    case PivotRule::Bland:
      return "bland";
    case PivotRule::ReverseBland:
      return "reverse-bland";
    case PivotRule::Dantzig:
      return "dantzig";
  }
  return "unknown";
}

std::string to_string(Status status) {
  switch (status) {
    case Status::Optimal:
      return "optimal";
    case Status::Infeasible:
      return "infeasible";
    case Status::Unbounded:
      return "unbounded";
    case Status::IterationLimit:
      return "iteration_limit";
  }
  return "unknown";
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kPivotTolerance = 1e-9;
constexpr int kDegenerateRunLimit = 50;

// Revised-tableau optimizer over a fixed problem and a mutable basis.
class Optimizer {
 public:
  Optimizer(const Problem& problem, std::vector<int>& basis, const Options& options,
            int& iterations, int max_iterations)
      : p_(problem),
        a_(Eigen::Map<const RowMatrix>(problem.a.data(), problem.rows, problem.cols)),
        basis_(basis),
        options_(options),
        iterations_(iterations),
        max_iterations_(max_iterations) {}

  // Recomputes the tableau, basic solution and reduced costs from the
  // original data. Returns false when the basis matrix is singular.
  bool rebuild() {
    const int m = p_.rows;
    Eigen::MatrixXd bmat(m, m);
    Eigen::VectorXd cb(m);
    for (int i = 0; i < m; ++i) {
      bmat.col(i) = a_.col(basis_[i]);
      cb(i) = p_.c[basis_[i]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(bmat);
    if (lu.rank() < m) return false;
    tableau_ = lu.solve(Eigen::MatrixXd(a_));
    xb_ = lu.solve(Eigen::Map<const Eigen::VectorXd>(p_.b.data(), m));
    y_ = bmat.transpose().fullPivLu().solve(cb);
    reduced_ = Eigen::Map<const Eigen::VectorXd>(p_.c.data(), p_.cols) - a_.transpose() * y_;
    // Reduced costs carry rounding proportional to |A^T y|.
    reduced_tolerance_ = options_.tolerance * (1.0 + (a_.transpose() * y_).cwiseAbs().maxCoeff());
    for (int i = 0; i < m; ++i) reduced_(basis_[i]) = 0.0;
    since_rebuild_ = 0;
    return true;
  }

  Status run(int allowed_cols) {
    if (!rebuild()) throw std::runtime_error("lp::solve: singular basis");
    PivotRule rule = options_.pivot;
    int degenerate_run = 0;
    for (;;) {
      if (since_rebuild_ >= options_.refactor_interval && !rebuild()) {
        throw std::runtime_error("lp::solve: basis became singular");
      }
      const int enter = choose_entering(rule, allowed_cols);
      if (enter < 0) {
        if (since_rebuild_ == 0) return Status::Optimal;
        if (!rebuild()) throw std::runtime_error("lp::solve: basis became singular");
        continue;
      }
      if (iterations_ >= max_iterations_) return Status::IterationLimit;

      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < p_.rows; ++i) {
        const double a = tableau_(i, enter);
        if (a <= kPivotTolerance) continue;
        const double ratio = std::max(0.0, xb_(i)) / a;
        const double slack = 1e-12 * std::max(1.0, std::abs(best));
        if (leave < 0 || ratio < best - slack) {
          best = ratio;
          leave = i;
        } else if (ratio <= best + slack && prefer_leaving(rule, basis_[i], basis_[leave])) {
          leave = i;
        }
      }
      if (leave < 0) {
        if (since_rebuild_ == 0) return Status::Unbounded;
        if (!rebuild()) throw std::runtime_error("lp::solve: basis became singular");
        continue;
      }

      if (rule == PivotRule::Dantzig) {
        degenerate_run = best <= 1e-14 ? degenerate_run + 1 : 0;
        if (degenerate_run > kDegenerateRunLimit) rule = PivotRule::Bland;
      }
      pivot(leave, enter);
      ++iterations_;
    }
  }

  void pivot(int row, int col) {
    const double piv = tableau_(row, col);
    tableau_.row(row) /= piv;
    xb_(row) /= piv;
    for (int r = 0; r < p_.rows; ++r) {
      if (r == row) continue;
      const double f = tableau_(r, col);
      if (f == 0.0) continue;
      tableau_.row(r) -= f * tableau_.row(row);
      xb_(r) -= f * xb_(row);
    }
    const double rc = reduced_(col);
    reduced_ -= rc * tableau_.row(row).transpose();
    basis_[static_cast<std::size_t>(row)] = col;
    ++since_rebuild_;
  }

  double entry(int row, int col) const { return tableau_(row, col); }
  const Eigen::VectorXd& basic_values() const { return xb_; }
  const Eigen::VectorXd& multipliers() const { return y_; }

 private:
  int choose_entering(PivotRule rule, int allowed_cols) const {
    const double tol = reduced_tolerance_;
    int chosen = -1;
    double most_negative = -tol;
    for (int j = 0; j < allowed_cols; ++j) {
      const int col = rule == PivotRule::ReverseBland ? allowed_cols - 1 - j : j;
      const double r = reduced_(col);
      if (r >= -tol) continue;
      if (rule != PivotRule::Dantzig) return col;
      if (r < most_negative) {
        most_negative = r;
        chosen = col;
      }
    }
    return chosen;
  }

  static bool prefer_leaving(PivotRule rule, int candidate, int incumbent) {
    return rule == PivotRule::ReverseBland ? candidate > incumbent : candidate < incumbent;
  }

  const Problem& p_;
  Eigen::Map<const RowMatrix> a_;
  std::vector<int>& basis_;
  const Options& options_;
  int& iterations_;
  int max_iterations_;
  Eigen::MatrixXd tableau_;
  Eigen::VectorXd xb_;
  Eigen::VectorXd y_;
  Eigen::VectorXd reduced_;
  int since_rebuild_ = 0;
  double reduced_tolerance_ = 0.0;
};

bool usable_start(const Problem& problem, const std::vector<int>& basis) {
  if (static_cast<int>(basis.size()) != problem.rows) return false;
  std::vector<bool> seen(static_cast<std::size_t>(problem.cols), false);
  for (int b : basis) {
    if (b < 0 || b >= problem.cols || seen[b]) return false;
    seen[b] = true;
  }
  return true;
}

// Phase one: finds a feasible basis of the original columns, or reports
// infeasibility.
Status phase_one(const Problem& problem, std::vector<int>& basis, const Options& options,
                 int& iterations, int max_iterations) {
  const int m = problem.rows;
  const int n = problem.cols;
  Problem aug;
  aug.rows = m;
  aug.cols = n + m;
  aug.a.assign(static_cast<std::size_t>(m) * aug.cols, 0.0);
  aug.b.resize(m);
  aug.c.assign(static_cast<std::size_t>(aug.cols), 0.0);
  double b_norm = 0.0;
  for (int i = 0; i < m; ++i) {
    const double sign = problem.b[i] < 0 ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) aug.at(i, j) = sign * problem.at(i, j);
    aug.at(i, n + i) = 1.0;
    aug.b[i] = sign * problem.b[i];
    aug.c[n + i] = 1.0;
    b_norm += std::abs(problem.b[i]);
  }
  basis.resize(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;
  Optimizer opt(aug, basis, options, iterations, max_iterations);
  Status status = opt.run(aug.cols);
  if (status == Status::IterationLimit) return status;
  if (status != Status::Optimal) return Status::Infeasible;
  double infeasibility = 0.0;
  for (int i = 0; i < m; ++i) {
    if (basis[i] >= n) infeasibility += std::max(0.0, opt.basic_values()(i));
  }
  if (infeasibility > 1e-9 * std::max(1.0, b_norm)) return Status::Infeasible;
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    int col = -1;
    for (int j = 0; j < n && col < 0; ++j) {
      if (std::find(basis.begin(), basis.end(), j) == basis.end() &&
          std::abs(opt.entry(i, j)) > kPivotTolerance) {
        col = j;
      }
    }
    if (col < 0) throw std::runtime_error("lp::solve: equality constraints are rank deficient");
    opt.pivot(i, col);
  }
  return Status::Optimal;
}

}  // namespace

Solution solve(const Problem& problem, const Options& options) {
  const int m = problem.rows;
  const int n = problem.cols;
  if (m <= 0 || n <= 0) throw std::invalid_argument("lp::solve: empty problem");
  if (problem.a.size() != static_cast<std::size_t>(m) * n ||
      problem.b.size() != static_cast<std::size_t>(m) ||
      problem.c.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("lp::solve: inconsistent dimensions");
  }
  const int max_iterations = options.max_iterations > 0 ? options.max_iterations : 50 * (m + n);

  Solution out;
  std::vector<int> basis;
  if (usable_start(problem, options.initial_basis)) {
    basis = options.initial_basis;
    Optimizer probe(problem, basis, options, out.iterations, max_iterations);
    if (probe.rebuild()) {
      const auto& xb = probe.basic_values();
      out.warm_started = xb.minCoeff() >= -1e-9 * std::max(1.0, xb.cwiseAbs().maxCoeff());
    }
  }
  if (!out.warm_started) {
    Status status = phase_one(problem, basis, options, out.iterations, max_iterations);
    if (status != Status::Optimal) {
      out.status = status;
      return out;
    }
  }

  Optimizer opt(problem, basis, options, out.iterations, max_iterations);
  out.status = opt.run(n);
  out.basis = basis;
  if (out.status != Status::Optimal) return out;

  const Eigen::VectorXd& xb = opt.basic_values();
  const Eigen::VectorXd& y = opt.multipliers();
  out.x.assign(static_cast<std::size_t>(n), 0.0);
  out.objective = 0.0;
  for (int i = 0; i < m; ++i) {
    out.x[basis[i]] = xb(i);
    out.objective += problem.c[basis[i]] * xb(i);
  }
  out.y.assign(y.data(), y.data() + m);
  return out;
}

}  // namespace agglab::lp
