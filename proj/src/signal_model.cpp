#include "agglab/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace agglab {

std::string to_string(SignalFamily family) {
  switch (family) {
    case SignalFamily::Gaussian:
      return "gaussian";
    case SignalFamily::RademacherScaled:
      return "rademacher";
    case SignalFamily::PointMassZero:
      return "point_mass_zero";
  }
  return "unknown";
}

SignalFamily signal_family_from_string(const std::string& name) {
  if (name == "gaussian") return SignalFamily::Gaussian;
  if (name == "rademacher") return SignalFamily::RademacherScaled;
  if (name == "point_mass_zero") return SignalFamily::PointMassZero;
  throw std::invalid_argument("unknown signal family '" + name + "'");
}

// ---------------------------------------------------------------------------
// LinearForm

namespace {

bool term_less(const LinearForm::Term& a, SubsetMask b) { return a.first < b; }

}  // namespace

LinearForm::LinearForm(int n) : n_(n) { check_agent_count(n); }

LinearForm::LinearForm(int n, std::vector<Term> terms) : n_(n) {
  check_agent_count(n);
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.first < b.first; });
  for (const auto& [t, c] : terms) {
    if (!t.fits(n)) {
      throw std::invalid_argument(fmt::format("subset {} exceeds {} agents", t.to_string(), n));
    }
    if (!std::isfinite(c)) throw std::invalid_argument("non-finite coefficient");
    if (!terms_.empty() && terms_.back().first == t) {
      terms_.back().second += c;
    } else {
      terms_.emplace_back(t, c);
    }
  }
  std::erase_if(terms_, [](const Term& x) { return x.second == 0.0; });
}

LinearForm LinearForm::target(int n, const Universe& universe) {
  std::vector<Term> terms;
  terms.reserve(universe.size());
  for (SubsetMask t : universe) {
    if (!t.empty()) terms.emplace_back(t, 1.0);
  }
  return LinearForm(n, std::move(terms));
}

double LinearForm::coeff(SubsetMask t) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), t, term_less);
  return (it != terms_.end() && it->first == t) ? it->second : 0.0;
}

LinearForm& LinearForm::add_term(SubsetMask t, double c) {
  if (!t.fits(n_)) {
    throw std::invalid_argument(fmt::format("subset {} exceeds {} agents", t.to_string(), n_));
  }
  auto it = std::lower_bound(terms_.begin(), terms_.end(), t, term_less);
  if (it != terms_.end() && it->first == t) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  } else if (c != 0.0) {
    terms_.insert(it, {t, c});
  }
  return *this;
}

LinearForm& LinearForm::add_scaled(const LinearForm& other, double factor) {
  if (other.n_ != n_) throw std::invalid_argument("LinearForm: agent counts differ");
  if (factor == 0.0 || other.terms_.empty()) return *this;
  std::vector<Term> merged;
  merged.reserve(terms_.size() + other.terms_.size());
  auto a = terms_.begin();
  auto b = other.terms_.begin();
  while (a != terms_.end() || b != other.terms_.end()) {
    if (b == other.terms_.end() || (a != terms_.end() && a->first < b->first)) {
      merged.push_back(*a++);
    } else if (a == terms_.end() || b->first < a->first) {
      merged.emplace_back(b->first, factor * b->second);
      ++b;
    } else {
      double c = a->second + factor * b->second;
      if (c != 0.0) merged.emplace_back(a->first, c);
      ++a;
      ++b;
    }
  }
  terms_ = std::move(merged);
  return *this;
}

LinearForm& LinearForm::operator*=(double factor) {
  if (factor == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [t, c] : terms_) c *= factor;
  return *this;
}

double LinearForm::max_abs_difference(const LinearForm& other) const {
  LinearForm diff = *this;
  diff.add_scaled(other, -1.0);
  double worst = 0.0;
  for (const auto& [t, c] : diff.terms_) worst = std::max(worst, std::abs(c));
  return worst;
}

bool LinearForm::approx_equal(const LinearForm& other, double tol) const {
  if (other.n_ != n_) return false;
  auto a = terms_.begin();
  auto b = other.terms_.begin();
  auto close = [tol](double x, double y) {
    return std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)});
  };
  while (a != terms_.end() || b != other.terms_.end()) {
    if (b == other.terms_.end() || (a != terms_.end() && a->first < b->first)) {
      if (!close(a->second, 0.0)) return false;
      ++a;
    } else if (a == terms_.end() || b->first < a->first) {
      if (!close(0.0, b->second)) return false;
      ++b;
    } else {
      if (!close(a->second, b->second)) return false;
      ++a;
      ++b;
    }
  }
  return true;
}

double LinearForm::evaluate(const SampleDraw& draw) const {
  double s = 0.0;
  auto r = draw.realizations.begin();
  for (const auto& [t, c] : terms_) {
    while (r != draw.realizations.end() && r->first < t) ++r;
    if (r == draw.realizations.end()) break;
    if (r->first == t) s += c * r->second;
  }
  return s;
}

std::string LinearForm::to_string() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (const auto& [t, c] : terms_) {
    if (!s.empty()) s += " + ";
    s += fmt::format("{}*X{}", c, t.to_string());
  }
  return s;
}

// ---------------------------------------------------------------------------
// SignalModel

SignalModel::SignalModel(int n, std::map<SubsetMask, SignalSpec> specs) : n_(n) {
  check_agent_count(n);
  for (auto& [t, spec] : specs) {
    if (!t.fits(n)) {
      throw std::invalid_argument(fmt::format("subset {} exceeds {} agents", t.to_string(), n));
    }
    if (!std::isfinite(spec.variance) || spec.variance < 0.0) {
      throw std::invalid_argument(
          fmt::format("variance of X{} must be finite and nonnegative", t.to_string()));
    }
    if (spec.family == SignalFamily::PointMassZero && spec.variance != 0.0) {
      throw std::invalid_argument("point-mass-zero signal with positive variance");
    }
    if (spec.variance == 0.0) spec.family = SignalFamily::PointMassZero;
    if (t.empty() && spec.variance > 0.0) {
      throw std::invalid_argument("the empty subset carries the zero signal");
    }
    if (spec.variance > 0.0) {
      support_.push_back(t);
      total_variance_ += spec.variance;
    }
  }
  if (support_.empty()) {
    throw std::invalid_argument("signal model needs at least one positive-variance signal");
  }
  specs_ = std::move(specs);
}

SignalModel SignalModel::unit(int n, const std::vector<SubsetMask>& support) {
  std::map<SubsetMask, SignalSpec> specs;
  for (SubsetMask t : support) specs[t] = SignalSpec::gaussian(1.0);
  return SignalModel(n, std::move(specs));
}

double SignalModel::variance(SubsetMask t) const {
  auto it = specs_.find(t);
  return it == specs_.end() ? 0.0 : it->second.variance;
}

SignalModel SignalModel::permuted(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != n_) {
    throw std::invalid_argument("permutation length differs from agent count");
  }
  std::map<SubsetMask, SignalSpec> out;
  for (const auto& [t, spec] : specs_) {
    std::uint32_t bits = 0;
    for (int a : t.agents()) bits |= 1U << (perm[a - 1] - 1);
    out[SubsetMask(bits)] = spec;
  }
  return SignalModel(n_, std::move(out));
}

double SampleDraw::value(SubsetMask t) const {
  auto it = std::lower_bound(
      realizations.begin(), realizations.end(), t,
      [](const std::pair<SubsetMask, double>& a, SubsetMask b) { return a.first < b; });
  return (it != realizations.end() && it->first == t) ? it->second : 0.0;
}

// ---------------------------------------------------------------------------
// Sampling

Sampler::Sampler(const SignalModel& model, std::uint64_t seed, std::uint32_t stream)
    : support_(model.support()), rng_(seed), stream_(stream) {
  sigma_.reserve(support_.size());
  family_.reserve(support_.size());
  for (SubsetMask t : support_) {
    const SignalSpec& spec = model.specs().at(t);
    sigma_.push_back(std::sqrt(spec.variance));
    family_.push_back(spec.family);
  }
}

double Sampler::draw_into(std::uint64_t k, std::span<double> out) const {
  double y = 0.0;
  for (std::size_t j = 0; j < support_.size(); j += 2) {
    auto z = rng_.normal_pair(stream_, k, static_cast<std::uint32_t>(j / 2));
    auto u = rng_.uniform_pair(stream_, k, static_cast<std::uint32_t>(j / 2) | 0x80000000U);
    for (std::size_t h = 0; h < 2 && j + h < support_.size(); ++h) {
      double x = 0.0;
      switch (family_[j + h]) {
        case SignalFamily::Gaussian:
          x = sigma_[j + h] * z[h];
          break;
        case SignalFamily::RademacherScaled:
          x = u[h] < 0.5 ? -sigma_[j + h] : sigma_[j + h];
          break;
        case SignalFamily::PointMassZero:
          break;
      }
      out[j + h] = x;
      y += x;
    }
  }
  return y;
}

SampleDraw Sampler::draw(std::uint64_t k) const {
  std::vector<double> buf(support_.size());
  SampleDraw d;
  d.y = draw_into(k, buf);
  d.realizations.reserve(buf.size());
  for (std::size_t j = 0; j < buf.size(); ++j) d.realizations.emplace_back(support_[j], buf[j]);
  // y must equal the sum of the stored realizations exactly.
  d.y = 0.0;
  for (const auto& r : d.realizations) d.y += r.second;
  return d;
}

SampleDraw sample(const SignalModel& model, std::uint64_t seed) {
  return Sampler(model, seed).draw(0);
}

std::vector<double> dense_coefficients(const LinearForm& form, const Universe& universe) {
  std::vector<double> out(universe.size(), 0.0);
  auto u = universe.begin();
  for (const auto& [t, c] : form.terms()) {
    u = std::lower_bound(u, universe.end(), t);
    if (u == universe.end()) break;
    if (*u == t) out[static_cast<std::size_t>(u - universe.begin())] = c;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Operations

LinearForm condition_on_agent(const LinearForm& form, int agent) {
  check_agent_index(agent, form.n());
  std::vector<LinearForm::Term> kept;
  kept.reserve(form.size());
  for (const auto& term : form.terms()) {
    if (term.first.contains(agent)) kept.push_back(term);
  }
  return LinearForm(form.n(), std::move(kept));
}

LinearForm posterior_expectation(int n, int agent, const Universe& universe) {
  check_agent_index(agent, n);
  std::vector<LinearForm::Term> terms;
  for (SubsetMask t : universe) {
    if (t.contains(agent)) terms.emplace_back(t, 1.0);
  }
  return LinearForm(n, std::move(terms));
}

LinearForm posterior_expectation(const SignalModel& model, int agent) {
  return posterior_expectation(model.n(), agent, model.support());
}

double exact_mse(const SignalModel& model, const LinearForm& approx) {
  if (approx.n() != model.n()) {
    throw std::invalid_argument("exact_mse: approximator and model disagree on n");
  }
  double s = 0.0;
  for (SubsetMask t : model.support()) {
    double g = 1.0 - approx.coeff(t);
    s += g * g * model.variance(t);
  }
  return s;
}

double error_ratio(const SignalModel& model, const LinearForm& approx) {
  const double total = model.total_variance();
  if (!(total > 0.0)) throw std::invalid_argument("error_ratio: zero total variance");
  return exact_mse(model, approx) / total;
}

WorstCase worst_case_error(const LinearForm& approx, const Universe& universe) {
  double best = -1.0;
  std::vector<SubsetMask> argmax;
  for (SubsetMask t : universe) {
    if (t.empty()) continue;
    double g = 1.0 - approx.coeff(t);
    double v = g * g;
    if (v > best) {
      best = v;
      argmax.assign(1, t);
    } else if (v == best) {
      argmax.push_back(t);
    }
  }
  if (argmax.empty()) throw std::invalid_argument("worst_case_error: empty universe");
  SignalModel witness = SignalModel::unit(approx.n(), argmax);
  return WorstCase{best, std::move(argmax), std::move(witness)};
}

SizeWorstCase worst_case_error_by_size(std::span<const double> coeff_by_size) {
  if (coeff_by_size.size() < 2) {
    throw std::invalid_argument("worst_case_error_by_size: no subset sizes");
  }
  SizeWorstCase out{-1.0, {}};
  for (std::size_t t = 1; t < coeff_by_size.size(); ++t) {
    double g = 1.0 - coeff_by_size[t];
    double v = g * g;
    if (v > out.value) {
      out.value = v;
      out.argmax_sizes.assign(1, static_cast<int>(t));
    } else if (v == out.value) {
      out.argmax_sizes.push_back(static_cast<int>(t));
    }
  }
  return out;
}

}  // namespace agglab
