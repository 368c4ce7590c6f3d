#pragma once

#include <span>
#include <vector>

namespace agglab {

// Chebyshev polynomial of the first kind T_d(x), three-term recurrence.
double chebyshev_T(int d, double x);
// T_d(x) for |x| >= 1 via cosh(d * arcosh|x|) * sign(x)^d.
double chebyshev_T_hyperbolic(int d, double x);

enum class PolyConstraint { None, ValueAtZeroIsOne, ValueAtZeroIsZero };

// A real polynomial of degree <= d, in one of two representations:
//
//  * Chebyshev coefficients in m(x) = (2x - (lo + hi)) / (hi - lo), which
//    keeps evaluation on [lo, hi] well conditioned;
//  * values at d + 1 distinct nodes, evaluated in Lagrange form. Grid
//    minimax solutions use this form because their values on the grid can
//    be many orders of magnitude below their size between grid points.
//
// The monomial form in x is produced on request for export.
class PolySpec {
 public:
  PolySpec() = default;
  PolySpec(std::vector<double> chebyshev_coeffs, double lo, double hi,
           PolyConstraint constraint = PolyConstraint::None);

  static PolySpec from_monomial(std::span<const double> coeffs, double lo, double hi,
                                PolyConstraint constraint = PolyConstraint::None);
  // The unique polynomial of degree <= nodes.size() - 1 through the points.
  static PolySpec interpolating(std::vector<double> nodes, std::vector<double> values, double lo,
                                double hi, PolyConstraint constraint = PolyConstraint::None);

  double operator()(double x) const;

  // Formal degree (number of coefficients or nodes, minus one).
  int degree() const;
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  PolyConstraint constraint() const { return constraint_; }
  bool is_interpolating() const { return !nodes_.empty(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& node_values() const { return values_; }

  // Chebyshev coefficients on [lo, hi] (computed for the interpolating form).
  std::vector<double> chebyshev_coeffs() const;
  // Coefficients a_k of sum_k a_k x^k.
  std::vector<double> monomial() const;

  // |p(0) - target| for the tagged constraint (0 if untagged).
  double constraint_residual() const;

  PolySpec scaled(double factor) const;
  // p + c, untagged.
  PolySpec shifted(double c) const;
  // 1 - p, with the constraint tag swapped between the two p(0) forms.
  PolySpec one_minus() const;

 private:
  double map(double x) const { return (2.0 * x - (lo_ + hi_)) / (hi_ - lo_); }

  std::vector<double> cheb_{0.0};
  std::vector<double> nodes_;
  std::vector<double> values_;
  double lo_ = -1.0;
  double hi_ = 1.0;
  PolyConstraint constraint_ = PolyConstraint::None;
};

}  // namespace agglab
