#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "agglab/rng.hpp"
#include "agglab/subset.hpp"

namespace agglab {

enum class SignalFamily { Gaussian, RademacherScaled, PointMassZero };

std::string to_string(SignalFamily family);
SignalFamily signal_family_from_string(const std::string& name);

// Distribution of one mean-zero signal X_T. Only the variance enters any
// error computation; the family matters for sampling alone.
struct SignalSpec {
  double variance = 0.0;
  SignalFamily family = SignalFamily::PointMassZero;

  static SignalSpec gaussian(double variance) { return {variance, SignalFamily::Gaussian}; }
  static SignalSpec rademacher(double variance) {
    return {variance, SignalFamily::RademacherScaled};
  }

  friend bool operator==(const SignalSpec&, const SignalSpec&) = default;
};

struct SampleDraw;

// Sparse linear combination sum_T c_T X_T, kept sorted by mask with no
// stored zeros.
class LinearForm {
 public:
  using Term = std::pair<SubsetMask, double>;

  explicit LinearForm(int n);
  LinearForm(int n, std::vector<Term> terms);

  // Coefficient 1 on every subset of the universe: the target Y.
  static LinearForm target(int n, const Universe& universe);

  int n() const { return n_; }
  double coeff(SubsetMask t) const;
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  LinearForm& add_term(SubsetMask t, double c);
  LinearForm& add_scaled(const LinearForm& other, double factor);
  LinearForm& operator+=(const LinearForm& other) { return add_scaled(other, 1.0); }
  LinearForm& operator-=(const LinearForm& other) { return add_scaled(other, -1.0); }
  LinearForm& operator*=(double factor);

  friend LinearForm operator+(LinearForm a, const LinearForm& b) { return a += b; }
  friend LinearForm operator-(LinearForm a, const LinearForm& b) { return a -= b; }
  friend LinearForm operator*(double f, LinearForm a) { return a *= f; }

  // Coefficient-wise comparison with |a - b| <= tol * max(1, |a|, |b|).
  bool approx_equal(const LinearForm& other, double tol = 1e-12) const;
  double max_abs_difference(const LinearForm& other) const;

  double evaluate(const SampleDraw& draw) const;

  std::string to_string() const;

 private:
  int n_;
  std::vector<Term> terms_;
};

// An instance of the partial-information model: independent mean-zero
// signals X_T indexed by subsets of [n]. Absent subsets have variance 0.
class SignalModel {
 public:
  SignalModel(int n, std::map<SubsetMask, SignalSpec> specs);

  // Unit-variance Gaussian signal on each listed subset.
  static SignalModel unit(int n, const std::vector<SubsetMask>& support);

  int n() const { return n_; }
  const std::map<SubsetMask, SignalSpec>& specs() const { return specs_; }
  double variance(SubsetMask t) const;
  double total_variance() const { return total_variance_; }
  // Subsets with positive variance, ascending.
  const Universe& support() const { return support_; }

  SignalModel permuted(std::span<const int> perm) const;

 private:
  int n_;
  std::map<SubsetMask, SignalSpec> specs_;
  Universe support_;
  double total_variance_ = 0.0;
};

// One joint realization of the signals in a model's support.
struct SampleDraw {
  std::vector<std::pair<SubsetMask, double>> realizations;  // sorted by mask
  double y = 0.0;

  double value(SubsetMask t) const;
};

// Draws realizations of a model. Draw k is a pure function of (seed, stream, k).
class Sampler {
 public:
  Sampler(const SignalModel& model, std::uint64_t seed, std::uint32_t stream = 0);

  const Universe& support() const { return support_; }
  // Fills out[j] with the realization of support()[j] for draw k; returns y.
  double draw_into(std::uint64_t k, std::span<double> out) const;
  SampleDraw draw(std::uint64_t k) const;

 private:
  Universe support_;
  std::vector<double> sigma_;
  std::vector<SignalFamily> family_;
  CounterRng rng_;
  std::uint32_t stream_;
};

SampleDraw sample(const SignalModel& model, std::uint64_t seed);

// Dense coefficient vector of a form aligned with a universe (missing -> 0).
std::vector<double> dense_coefficients(const LinearForm& form, const Universe& universe);

// E[form | S_i]: keeps the terms whose subset contains agent i.
LinearForm condition_on_agent(const LinearForm& form, int agent);
// Y_i = sum over T in the universe with i in T of X_T.
LinearForm posterior_expectation(int n, int agent, const Universe& universe);
LinearForm posterior_expectation(const SignalModel& model, int agent);

// L(A) = sum_T (1 - c_T)^2 Var(X_T).
double exact_mse(const SignalModel& model, const LinearForm& approx);
// L(A) / Var(Y).
double error_ratio(const SignalModel& model, const LinearForm& approx);

struct WorstCase {
  double value = 0.0;
  std::vector<SubsetMask> argmax;  // subsets attaining the value
  SignalModel witness;             // unit variance on each argmax subset
};

// max over the universe of (1 - c_T)^2, attained by concentrating variance on
// the maximizing subsets.
WorstCase worst_case_error(const LinearForm& approx, const Universe& universe);

struct SizeWorstCase {
  double value = 0.0;
  std::vector<int> argmax_sizes;
};

// Same for a coefficient that depends only on |T|: coeff_by_size[t] for
// t = 1..n (index 0 unused).
SizeWorstCase worst_case_error_by_size(std::span<const double> coeff_by_size);

}  // namespace agglab
