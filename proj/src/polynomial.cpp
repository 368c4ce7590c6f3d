#include "agglab/polynomial.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace agglab {

double chebyshev_T(int d, double x) {
  if (d < 0) throw std::invalid_argument("chebyshev_T: negative degree");
  if (d == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < d; ++k) {
    double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double chebyshev_T_hyperbolic(int d, double x) {
  if (d < 0) throw std::invalid_argument("chebyshev_T_hyperbolic: negative degree");
  if (std::abs(x) < 1.0) {
    throw std::domain_error("chebyshev_T_hyperbolic requires |x| >= 1");
  }
  double mag = std::cosh(d * std::acosh(std::abs(x)));
  return (x < 0 && d % 2 == 1) ? -mag : mag;
}

PolySpec::PolySpec(std::vector<double> chebyshev_coeffs, double lo, double hi,
                   PolyConstraint constraint)
    : cheb_(std::move(chebyshev_coeffs)), lo_(lo), hi_(hi), constraint_(constraint) {
  if (cheb_.empty()) cheb_.push_back(0.0);
  if (!(hi_ > lo_)) throw std::invalid_argument("PolySpec: empty interval");
}

PolySpec PolySpec::from_monomial(std::span<const double> coeffs, double lo, double hi,
                                 PolyConstraint constraint) {
  if (!(hi > lo)) throw std::invalid_argument("PolySpec: empty interval");
  // x = a*m + b
  const double a = 0.5 * (hi - lo);
  const double b = 0.5 * (hi + lo);
  std::vector<double> acc{0.0};
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    // acc <- acc * (a*m + b) + c, in the Chebyshev basis.
    std::vector<double> next(acc.size() + 1, 0.0);
    for (std::size_t k = 0; k < acc.size(); ++k) {
      next[k] += b * acc[k];
      if (k == 0) {
        next[1] += a * acc[0];
      } else {
        next[k + 1] += 0.5 * a * acc[k];
        next[k - 1] += 0.5 * a * acc[k];
      }
    }
    next[0] += *it;
    acc = std::move(next);
  }
  if (coeffs.empty()) acc = {0.0};
  acc.resize(std::max<std::size_t>(coeffs.size(), 1));
  return PolySpec(std::move(acc), lo, hi, constraint);
}

double PolySpec::operator()(double x) const {
  if (is_interpolating()) {
    const std::size_t m = nodes_.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (x == nodes_[i]) return values_[i];
    }
    for (std::size_t i = 0; i < m; ++i) {
      double l = 1.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (j != i) l *= (x - nodes_[j]) / (nodes_[i] - nodes_[j]);
      }
      sum += values_[i] * l;
    }
    return sum;
  }
  const double m = map(x);
  double b1 = 0.0;
  double b2 = 0.0;
  for (std::size_t k = cheb_.size(); k-- > 1;) {
    double b0 = cheb_[k] + 2.0 * m * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return cheb_[0] + m * b1 - b2;
}

int PolySpec::degree() const {
  return static_cast<int>(is_interpolating() ? nodes_.size() : cheb_.size()) - 1;
}

std::vector<double> PolySpec::chebyshev_coeffs() const {
  if (!is_interpolating()) return cheb_;
  // Interpolate at degree + 1 first-kind Chebyshev points, then a cosine transform.
  const int points = degree() + 1;
  std::vector<double> f(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double theta = std::numbers::pi * (k + 0.5) / points;
    f[k] = (*this)(0.5 * (lo_ + hi_) + 0.5 * (hi_ - lo_) * std::cos(theta));
  }
  std::vector<double> coeffs(static_cast<std::size_t>(points), 0.0);
  for (int j = 0; j < points; ++j) {
    double s = 0.0;
    for (int k = 0; k < points; ++k) s += f[k] * std::cos(j * std::numbers::pi * (k + 0.5) / points);
    coeffs[j] = (j == 0 ? 1.0 : 2.0) * s / points;
  }
  return coeffs;
}

PolySpec PolySpec::interpolating(std::vector<double> nodes, std::vector<double> values, double lo,
                                 double hi, PolyConstraint constraint) {
  if (nodes.empty() || nodes.size() != values.size()) {
    throw std::invalid_argument("PolySpec::interpolating: need matching nonempty nodes and values");
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (nodes[i] == nodes[j]) throw std::invalid_argument("PolySpec::interpolating: repeated node");
    }
  }
  PolySpec p({0.0}, lo, hi, constraint);
  p.nodes_ = std::move(nodes);
  p.values_ = std::move(values);
  return p;
}

std::vector<double> PolySpec::monomial() const {
  if (is_interpolating()) {
    return PolySpec(chebyshev_coeffs(), lo_, hi_).monomial();
  }
  // m = alpha*x + beta
  const double alpha = 2.0 / (hi_ - lo_);
  const double beta = -(lo_ + hi_) / (hi_ - lo_);
  const std::size_t deg = cheb_.size() - 1;
  std::vector<double> out(deg + 1, 0.0);
  std::vector<double> t_prev{1.0};  // T_0
  std::vector<double> t_cur{beta, alpha};  // T_1
  out[0] += cheb_[0];
  if (deg >= 1) {
    out[0] += cheb_[1] * beta;
    out[1] += cheb_[1] * alpha;
  }
  for (std::size_t k = 1; k < deg; ++k) {
    std::vector<double> t_next(k + 2, 0.0);
    for (std::size_t j = 0; j < t_cur.size(); ++j) {
      t_next[j] += 2.0 * beta * t_cur[j];
      t_next[j + 1] += 2.0 * alpha * t_cur[j];
    }
    for (std::size_t j = 0; j < t_prev.size(); ++j) t_next[j] -= t_prev[j];
    for (std::size_t j = 0; j < t_next.size(); ++j) out[j] += cheb_[k + 1] * t_next[j];
    t_prev = std::move(t_cur);
    t_cur = std::move(t_next);
  }
  return out;
}

double PolySpec::constraint_residual() const {
  switch (constraint_) {
    case PolyConstraint::ValueAtZeroIsOne:
      return std::abs((*this)(0.0) - 1.0);
    case PolyConstraint::ValueAtZeroIsZero:
      return std::abs((*this)(0.0));
    case PolyConstraint::None:
      break;
  }
  return 0.0;
}

PolySpec PolySpec::scaled(double factor) const {
  if (is_interpolating()) {
    std::vector<double> v = values_;
    for (double& x : v) x *= factor;
    return interpolating(nodes_, std::move(v), lo_, hi_);
  }
  std::vector<double> c = cheb_;
  for (double& v : c) v *= factor;
  return PolySpec(std::move(c), lo_, hi_, PolyConstraint::None);
}

PolySpec PolySpec::shifted(double c) const {
  if (is_interpolating()) {
    std::vector<double> v = values_;
    for (double& x : v) x += c;
    return interpolating(nodes_, std::move(v), lo_, hi_);
  }
  std::vector<double> coeffs = cheb_;
  coeffs[0] += c;
  return PolySpec(std::move(coeffs), lo_, hi_, PolyConstraint::None);
}

PolySpec PolySpec::one_minus() const {
  PolySpec out = scaled(-1.0).shifted(1.0);
  if (constraint_ == PolyConstraint::ValueAtZeroIsOne) out.constraint_ = PolyConstraint::ValueAtZeroIsZero;
  if (constraint_ == PolyConstraint::ValueAtZeroIsZero) out.constraint_ = PolyConstraint::ValueAtZeroIsOne;
  return out;
}

}  // namespace agglab
