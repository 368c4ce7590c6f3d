#include "agglab/query_dag.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "agglab/parallel.hpp"

namespace agglab {

QueryDag::QueryDag(int n, Universe universe)
    : n_(n), universe_(make_universe(std::move(universe), n)), sink_(LinearForm::target(n, universe_)) {}

std::optional<std::size_t> QueryDag::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const QueryNode& QueryDag::node(const std::string& id) const {
  auto idx = index_of(id);
  if (!idx) throw std::out_of_range("unknown query node '" + id + "'");
  return nodes_[*idx];
}

const LinearForm& QueryDag::value_of(const std::string& id) const {
  if (id == kSinkId) return sink_;
  const QueryNode& q = node(id);
  if (!q.value) throw std::logic_error("query node '" + id + "' has no value yet");
  return *q.value;
}

LinearForm QueryDag::derived_value(const QueryNode& node) const {
  check_agent_index(node.agent, n_);
  LinearForm sum(n_);
  for (const PaymentTarget& t : node.targets) sum.add_scaled(value_of(t.id), t.alpha);
  return condition_on_agent(sum, node.agent);
}

const QueryNode& QueryDag::add_query(std::string id, int agent,
                                     std::vector<PaymentTarget> targets) {
  if (id == kSinkId) throw std::invalid_argument("query id 'Y' is reserved for the sink");
  if (index_.count(id) != 0) throw std::invalid_argument("duplicate query id '" + id + "'");
  QueryNode q{std::move(id), agent, std::move(targets), std::nullopt};
  bool ready = agent >= 1 && agent <= n_;
  for (const PaymentTarget& t : q.targets) {
    if (t.id == kSinkId) continue;
    auto idx = index_of(t.id);
    if (!idx || !nodes_[*idx].value) ready = false;
  }
  if (ready) q.value = derived_value(q);
  index_[q.id] = nodes_.size();
  nodes_.push_back(std::move(q));
  return nodes_.back();
}

const QueryNode& QueryDag::add_query_with_value(std::string id, int agent,
                                                std::vector<PaymentTarget> targets,
                                                LinearForm value) {
  if (value.n() != n_) throw std::invalid_argument("query value has the wrong agent count");
  if (id == kSinkId) throw std::invalid_argument("query id 'Y' is reserved for the sink");
  if (index_.count(id) != 0) throw std::invalid_argument("duplicate query id '" + id + "'");
  index_[id] = nodes_.size();
  nodes_.push_back(QueryNode{std::move(id), agent, std::move(targets), std::move(value)});
  return nodes_.back();
}

void QueryDag::derive_values() {
  bool progress = true;
  while (progress) {
    progress = false;
    for (QueryNode& q : nodes_) {
      if (q.value) continue;
      if (q.agent < 1 || q.agent > n_) {
        throw std::invalid_argument(fmt::format("query '{}' has agent {} outside [1, {}]", q.id,
                                                q.agent, n_));
      }
      bool ready = true;
      for (const PaymentTarget& t : q.targets) {
        if (t.id == kSinkId) continue;
        auto idx = index_of(t.id);
        if (!idx) throw std::invalid_argument("query '" + q.id + "' targets unknown '" + t.id + "'");
        if (!nodes_[*idx].value) ready = false;
      }
      if (ready) {
        q.value = derived_value(q);
        progress = true;
      }
    }
  }
  for (const QueryNode& q : nodes_) {
    if (!q.value) throw std::invalid_argument("cannot derive value of '" + q.id + "': cycle");
  }
}

// ---------------------------------------------------------------------------
// Validation

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::AgentOutOfRange:
      return "agent_out_of_range";
    case ViolationKind::UnknownTarget:
      return "unknown_target";
    case ViolationKind::NoTargets:
      return "no_targets";
    case ViolationKind::Cycle:
      return "cycle";
    case ViolationKind::Unreachable:
      return "unreachable";
    case ViolationKind::MissingValue:
      return "missing_value";
    case ViolationKind::Inconsistent:
      return "inconsistent";
  }
  return "unknown";
}

bool ValidationReport::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

namespace {

// Adjacency over node indices; -1 stands for the sink.
std::vector<std::vector<int>> adjacency(const QueryDag& dag) {
  std::vector<std::vector<int>> adj(dag.size());
  for (std::size_t i = 0; i < dag.size(); ++i) {
    for (const PaymentTarget& t : dag.nodes()[i].targets) {
      if (t.id == kSinkId) {
        adj[i].push_back(-1);
      } else if (auto idx = dag.index_of(t.id)) {
        adj[i].push_back(static_cast<int>(*idx));
      }
    }
  }
  return adj;
}

// Indices of nodes lying on some cycle.
std::vector<bool> nodes_on_cycles(const std::vector<std::vector<int>>& adj) {
  const std::size_t m = adj.size();
  // Tarjan's strongly connected components.
  std::vector<int> index(m, -1), low(m, 0);
  std::vector<bool> on_stack(m, false), cyclic(m, false);
  std::vector<int> stack;
  int counter = 0;
  std::function<void(int)> strong = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int w : adj[v]) {
      if (w < 0) continue;
      if (index[w] < 0) {
        strong(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<int> comp;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
      } while (w != v);
      bool self_loop = std::find(adj[v].begin(), adj[v].end(), v) != adj[v].end();
      if (comp.size() > 1 || self_loop) {
        for (int c : comp) cyclic[c] = true;
      }
    }
  };
  for (std::size_t v = 0; v < m; ++v) {
    if (index[v] < 0) strong(static_cast<int>(v));
  }
  return cyclic;
}

bool is_acyclic(const std::vector<std::vector<int>>& adj) {
  auto cyc = nodes_on_cycles(adj);
  return std::none_of(cyc.begin(), cyc.end(), [](bool b) { return b; });
}

}  // namespace

ValidationReport validate(const QueryDag& dag) {
  ValidationReport report;
  auto add = [&](ViolationKind k, const std::string& node, std::string msg) {
    report.violations.push_back(Violation{k, node, std::move(msg)});
  };

  for (const QueryNode& q : dag.nodes()) {
    if (q.agent < 1 || q.agent > dag.n()) {
      add(ViolationKind::AgentOutOfRange, q.id,
          fmt::format("agent {} outside [1, {}]", q.agent, dag.n()));
    }
    if (q.targets.empty()) {
      add(ViolationKind::NoTargets, q.id, "node has no payment target, so Y is not the unique sink");
    }
    for (const PaymentTarget& t : q.targets) {
      if (t.id != kSinkId && !dag.contains(t.id)) {
        add(ViolationKind::UnknownTarget, q.id, "targets unknown node '" + t.id + "'");
      }
    }
  }

  auto adj = adjacency(dag);
  auto cyclic = nodes_on_cycles(adj);
  for (std::size_t i = 0; i < dag.size(); ++i) {
    if (cyclic[i]) add(ViolationKind::Cycle, dag.nodes()[i].id, "node lies on a directed cycle");
  }

  // Reverse reachability from the sink.
  std::vector<bool> reaches(dag.size(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < dag.size(); ++i) {
      if (reaches[i]) continue;
      for (int w : adj[i]) {
        if (w < 0 || reaches[static_cast<std::size_t>(w)]) {
          reaches[i] = true;
          changed = true;
          break;
        }
      }
    }
  }
  for (std::size_t i = 0; i < dag.size(); ++i) {
    if (!reaches[i]) add(ViolationKind::Unreachable, dag.nodes()[i].id, "node does not reach Y");
  }

  for (const QueryNode& q : dag.nodes()) {
    if (!q.value) {
      add(ViolationKind::MissingValue, q.id, "node value could not be derived");
      continue;
    }
    if (q.agent < 1 || q.agent > dag.n()) continue;
    bool targets_known = std::all_of(q.targets.begin(), q.targets.end(), [&](const PaymentTarget& t) {
      return t.id == kSinkId || (dag.contains(t.id) && dag.node(t.id).value.has_value());
    });
    if (!targets_known) continue;
    LinearForm expected = dag.derived_value(q);
    if (!q.value->approx_equal(expected, 1e-12)) {
      add(ViolationKind::Inconsistent, q.id,
          fmt::format("value differs from E[targets | S_{}] by up to {}", q.agent,
                      q.value->max_abs_difference(expected)));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Complexity

namespace {

void require_structurally_valid(const QueryDag& dag) {
  auto report = validate(dag);
  for (const Violation& v : report.violations) {
    if (v.kind != ViolationKind::Inconsistent) {
      throw std::invalid_argument(
          fmt::format("query DAG invalid at '{}': {}", v.node, v.message));
    }
  }
}

struct GraphMeasures {
  int max_order = 0;
  int max_agents = 0;
  std::vector<int> order;
  std::vector<std::uint32_t> agents;
};

GraphMeasures measure(const std::vector<std::vector<int>>& adj, const std::vector<int>& agent_of) {
  const std::size_t m = adj.size();
  GraphMeasures g;
  g.order.assign(m, -1);
  g.agents.assign(m, 0);
  std::function<void(int)> visit = [&](int v) {
    if (g.order[v] >= 0) return;
    int best = 0;
    std::uint32_t set = 1U << (agent_of[v] - 1);
    for (int w : adj[v]) {
      if (w < 0) {
        best = std::max(best, 1);
      } else {
        visit(w);
        best = std::max(best, g.order[w] + 1);
        set |= g.agents[w];
      }
    }
    g.order[v] = best;
    g.agents[v] = set;
  };
  for (std::size_t v = 0; v < m; ++v) {
    visit(static_cast<int>(v));
    g.max_order = std::max(g.max_order, g.order[v]);
    g.max_agents = std::max(g.max_agents, std::popcount(g.agents[v]));
  }
  return g;
}

std::vector<int> agents_of(const QueryDag& dag) {
  std::vector<int> a;
  a.reserve(dag.size());
  for (const QueryNode& q : dag.nodes()) a.push_back(q.agent);
  return a;
}

// True when target lies in the column span of basis (least squares residual).
bool in_span(const Eigen::MatrixXd& basis, const Eigen::VectorXd& target) {
  const double scale = std::max(1.0, target.norm());
  if (target.norm() <= 1e-12) return true;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
  Eigen::VectorXd coef = qr.solve(target);
  return (basis * coef - target).norm() <= 1e-9 * scale;
}

ComplexityReport exact_complexity(const QueryDag& dag) {
  const std::size_t m = dag.size();
  if (m > kMaxExactQueries) {
    throw std::invalid_argument(fmt::format(
        "exact complexity search refused for {} queries (limit {})", m, kMaxExactQueries));
  }
  const Universe& u = dag.universe();
  auto dense = [&](const LinearForm& f) {
    auto v = dense_coefficients(f, u);
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
  };

  // Pool entry j < m is node j; entry m is the sink.
  const std::size_t pool = m + 1;
  std::vector<std::vector<std::vector<int>>> candidates(m);
  for (std::size_t q = 0; q < m; ++q) {
    const QueryNode& node = dag.nodes()[q];
    Eigen::VectorXd target = dense(*node.value);
    std::vector<Eigen::VectorXd> cols(pool);
    for (std::size_t j = 0; j < pool; ++j) {
      const LinearForm& src = j == m ? dag.sink_value() : *dag.nodes()[j].value;
      cols[j] = dense(condition_on_agent(src, node.agent));
    }
    std::vector<std::uint32_t> minimal;
    std::vector<std::uint32_t> masks;
    for (std::uint32_t s = 1; s < (1U << pool); ++s) {
      if (s & (1U << q)) continue;  // no self loops
      masks.push_back(s);
    }
    std::stable_sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
      return std::popcount(a) < std::popcount(b);
    });
    for (std::uint32_t s : masks) {
      bool dominated = std::any_of(minimal.begin(), minimal.end(),
                                   [s](std::uint32_t mm) { return (mm & ~s) == 0; });
      if (dominated) continue;
      Eigen::MatrixXd basis(target.size(), std::popcount(s));
      int c = 0;
      for (std::size_t j = 0; j < pool; ++j) {
        if (s & (1U << j)) basis.col(c++) = cols[j];
      }
      if (in_span(basis, target)) minimal.push_back(s);
    }
    for (std::uint32_t s : minimal) {
      std::vector<int> set;
      for (std::size_t j = 0; j < pool; ++j) {
        if (s & (1U << j)) set.push_back(j == m ? -1 : static_cast<int>(j));
      }
      candidates[q].push_back(std::move(set));
    }
    if (candidates[q].empty()) {
      throw std::logic_error("node '" + node.id + "' is not elicitable from any target set");
    }
  }

  double combos = 1.0;
  for (const auto& c : candidates) combos *= static_cast<double>(c.size());
  if (combos > 5e6) {
    throw std::invalid_argument(
        fmt::format("exact complexity search space too large ({:.0f} graphs)", combos));
  }

  auto agent_of = agents_of(dag);
  ComplexityReport best{static_cast<int>(m), std::numeric_limits<int>::max(),
                        std::numeric_limits<int>::max(), true};
  std::vector<std::vector<int>> adj(m);
  std::function<void(std::size_t)> search = [&](std::size_t q) {
    if (q == m) {
      if (!is_acyclic(adj)) return;
      GraphMeasures g = measure(adj, agent_of);
      best.order_c = std::min(best.order_c, g.max_order);
      best.agent_c = std::min(best.agent_c, g.max_agents);
      return;
    }
    for (const auto& set : candidates[q]) {
      adj[q] = set;
      search(q + 1);
    }
  };
  search(0);
  if (best.order_c == std::numeric_limits<int>::max()) {
    throw std::logic_error("no acyclic graph elicits the query set");
  }
  return best;
}

}  // namespace

std::map<std::string, int> node_orders(const QueryDag& dag) {
  require_structurally_valid(dag);
  auto g = measure(adjacency(dag), agents_of(dag));
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < dag.size(); ++i) out[dag.nodes()[i].id] = g.order[i];
  return out;
}

std::map<std::string, int> node_agent_counts(const QueryDag& dag) {
  require_structurally_valid(dag);
  auto g = measure(adjacency(dag), agents_of(dag));
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < dag.size(); ++i) {
    out[dag.nodes()[i].id] = std::popcount(g.agents[i]);
  }
  return out;
}

ComplexityReport complexity(const QueryDag& dag, ComplexityMode mode) {
  require_structurally_valid(dag);
  if (dag.size() == 0) throw std::invalid_argument("complexity of an empty query set");
  if (mode == ComplexityMode::Exact) {
    auto report = validate(dag);
    if (!report.valid()) {
      throw std::invalid_argument("exact complexity needs consistent node values");
    }
    return exact_complexity(dag);
  }
  auto g = measure(adjacency(dag), agents_of(dag));
  return ComplexityReport{static_cast<int>(dag.size()), g.max_order, g.max_agents, false};
}

// ---------------------------------------------------------------------------
// Payments

double payment(const QueryNode& node, double report,
               const std::map<std::string, double>& target_realizations) {
  double target = 0.0;
  for (const PaymentTarget& t : node.targets) {
    auto it = target_realizations.find(t.id);
    if (it == target_realizations.end()) {
      throw std::invalid_argument("payment for '" + node.id + "': missing realization of '" +
                                  t.id + "'");
    }
    target += t.alpha * it->second;
  }
  double e = report - target;
  return 1.0 - e * e;
}

bool TruthfulnessReport::all_passed() const {
  return !entries.empty() &&
         std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

TruthfulnessReport truthfulness_check(const QueryDag& dag, const SignalModel& model,
                                      const std::vector<double>& perturbations,
                                      std::uint64_t samples, std::uint64_t seed) {
  if (dag.n() != model.n()) throw std::invalid_argument("DAG and model disagree on n");
  if (samples < 2) throw std::invalid_argument("truthfulness_check needs at least 2 samples");
  auto report = validate(dag);
  if (!report.valid()) {
    throw std::invalid_argument("truthfulness_check: query DAG is not valid");
  }
  for (SubsetMask t : model.support()) {
    if (!std::binary_search(dag.universe().begin(), dag.universe().end(), t)) {
      throw std::invalid_argument("model signal X" + t.to_string() +
                                  " lies outside the DAG's universe");
    }
  }

  const Universe& support = model.support();
  const std::size_t dim = support.size();
  struct Prepared {
    std::vector<double> report;
    std::vector<double> target;
  };
  std::vector<Prepared> prepared;
  for (const QueryNode& q : dag.nodes()) {
    LinearForm target(dag.n());
    for (const PaymentTarget& t : q.targets) target.add_scaled(dag.value_of(t.id), t.alpha);
    prepared.push_back({dense_coefficients(*q.value, support), dense_coefficients(target, support)});
  }

  TruthfulnessReport out;
  out.samples = samples;
  const std::size_t pairs = dag.size() * perturbations.size();
  out.entries.resize(pairs);
  parallel_for(pairs, [&](std::size_t p) {
    const std::size_t qi = p / perturbations.size();
    const double delta = perturbations[p % perturbations.size()];
    Sampler sampler(model, seed, static_cast<std::uint32_t>(p + 1));
    std::vector<double> x(dim);
    double sum_truth = 0.0, sum_pert = 0.0, mean = 0.0, m2 = 0.0;
    for (std::uint64_t k = 0; k < samples; ++k) {
      sampler.draw_into(k, x);
      double r = 0.0, tau = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        r += prepared[qi].report[j] * x[j];
        tau += prepared[qi].target[j] * x[j];
      }
      double truth = 1.0 - (r - tau) * (r - tau);
      double pert = 1.0 - (r + delta - tau) * (r + delta - tau);
      sum_truth += truth;
      sum_pert += pert;
      double diff = truth - pert;
      double dm = diff - mean;
      mean += dm / static_cast<double>(k + 1);
      m2 += dm * (diff - mean);
    }
    const double count = static_cast<double>(samples);
    TruthfulnessEntry& e = out.entries[p];
    e.node = dag.nodes()[qi].id;
    e.delta = delta;
    e.truthful_payment = sum_truth / count;
    e.perturbed_payment = sum_pert / count;
    e.gap = mean;
    e.gap_stderr = std::sqrt(m2 / (count - 1.0) / count);
    const double band = 3.0 * e.gap_stderr + 1e-12;
    e.passed = e.gap >= -band && std::abs(e.gap - delta * delta) <= band;
  });
  return out;
}

}  // namespace agglab
