#include "agglab/query_families.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "agglab/faults.hpp"

namespace agglab {

namespace {

void check_order(int n, const std::vector<int>& order) {
  if (order.empty()) throw std::invalid_argument("agent list must be nonempty");
  SubsetMask seen;
  for (int a : order) {
    check_agent_index(a, n);
    if (seen.contains(a)) {
      throw std::invalid_argument(fmt::format("agent {} repeated in list", a));
    }
    seen = seen.with(a);
  }
}

std::vector<std::size_t> topological_order(const QueryDag& dag) {
  const std::size_t m = dag.size();
  std::vector<int> pending(m, 0);
  std::vector<std::vector<std::size_t>> dependents(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (const PaymentTarget& t : dag.nodes()[i].targets) {
      if (t.id == kSinkId) continue;
      auto idx = dag.index_of(t.id);
      if (!idx) throw std::invalid_argument("unknown target '" + t.id + "'");
      ++pending[i];
      dependents[*idx].push_back(i);
    }
  }
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < m; ++i) {
    if (pending[i] == 0) order.push_back(i);
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (std::size_t d : dependents[order[k]]) {
      if (--pending[d] == 0) order.push_back(d);
    }
  }
  if (order.size() != m) throw std::invalid_argument("query graph has a cycle");
  return order;
}

}  // namespace

LinearForm inter_form(int n, SubsetMask s, const Universe& universe) {
  if (s.empty()) throw std::invalid_argument("inter(S) needs a nonempty S");
  if (!s.fits(n)) throw std::invalid_argument("subset does not fit n agents");
  std::vector<LinearForm::Term> terms;
  for (SubsetMask t : universe) {
    if (s.is_subset_of(t)) terms.emplace_back(t, 1.0);
  }
  return LinearForm(n, std::move(terms));
}

InterQuery iter_query(int n, const std::vector<int>& order, const Universe& universe) {
  check_order(n, order);
  LinearForm value = LinearForm::target(n, universe);
  SubsetMask s;
  for (int a : order) {
    value = condition_on_agent(value, a);
    s = s.with(a);
  }
  return InterQuery{s, std::move(value)};
}

std::string inter_id(SubsetMask s) { return "I" + s.to_string(); }

IntersectionSet intersection_set(int n, int d, const Universe& universe) {
  check_agent_count(n);
  if (d < 1 || d > n) {
    throw std::invalid_argument(fmt::format("intersection order d={} outside [1, {}]", d, n));
  }
  IntersectionSet out{{}, {}, QueryDag(n, universe)};
  for (SubsetMask s : subsets_up_to_size(n, d)) {
    const int agent = s.max_agent();
    const SubsetMask rest = s.without(agent);
    const std::string id = inter_id(s);
    std::string target = rest.empty() ? kSinkId : out.ids.at(rest);
    LinearForm value = inter_form(n, s, out.dag.universe());
    out.dag.add_query_with_value(id, agent, {{target, 1.0}}, value);
    out.ids.emplace(s, id);
    out.queries.push_back(InterQuery{s, std::move(value)});
  }
  return out;
}

LinearForm diff_closed_form(int n, const std::vector<int>& prefix, const Universe& universe) {
  check_order(n, prefix);
  const int last = prefix.back();
  SubsetMask earlier;
  for (std::size_t k = 0; k + 1 < prefix.size(); ++k) earlier = earlier.with(prefix[k]);
  std::vector<LinearForm::Term> terms;
  for (SubsetMask t : universe) {
    if (t.contains(last) && !t.intersects(earlier)) terms.emplace_back(t, 1.0);
  }
  return LinearForm(n, std::move(terms));
}

namespace {

// Inductive construction of all prefix values at once, sharing the running
// sum of earlier prefixes.
std::vector<LinearForm> diff_values(int n, const std::vector<int>& order, const Universe& universe) {
  check_order(n, order);
  const LinearForm y = LinearForm::target(n, universe);
  LinearForm earlier_sum(n);
  std::vector<LinearForm> values;
  values.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const bool broken = faults::is_active(faults::Fault::BreakDiffInduction);
    LinearForm v = condition_on_agent(broken ? y : y - earlier_sum, order[k]);
    std::vector<int> prefix(order.begin(), order.begin() + static_cast<long>(k) + 1);
    LinearForm closed = diff_closed_form(n, prefix, universe);
    if (!v.approx_equal(closed, 1e-12)) {
      throw std::logic_error(fmt::format("diff({}) disagrees with its closed form",
                                         fmt::join(prefix, ",")));
    }
    earlier_sum += v;
    values.push_back(std::move(v));
  }
  return values;
}

}  // namespace

DiffQuery diff_query(int n, const std::vector<int>& order, const Universe& universe) {
  auto values = diff_values(n, order, universe);
  return DiffQuery{order, std::move(values.back())};
}

std::string diff_id(const std::vector<int>& prefix) {
  return fmt::format("D({})", fmt::join(prefix, ","));
}

DifferenceSet difference_set(int n, const std::vector<int>& order, const Universe& universe,
                             const std::string& id_prefix) {
  auto values = diff_values(n, order, universe);
  DifferenceSet out{{}, QueryDag(n, universe)};
  std::vector<std::string> ids;
  for (std::size_t k = 0; k < order.size(); ++k) {
    std::vector<int> prefix(order.begin(), order.begin() + static_cast<long>(k) + 1);
    std::vector<PaymentTarget> targets{{kSinkId, 1.0}};
    for (const std::string& e : ids) targets.push_back({e, -1.0});
    ids.push_back(id_prefix + diff_id(prefix));
    out.dag.add_query_with_value(ids.back(), order[k], std::move(targets), values[k]);
    out.queries.push_back(DiffQuery{std::move(prefix), std::move(values[k])});
  }
  return out;
}

QueryDag standard_query_set(int n, const Universe& universe) {
  check_agent_count(n);
  QueryDag dag(n, universe);
  for (int i = 1; i <= n; ++i) dag.add_query(fmt::format("Q{}", i), i, {{kSinkId, 1.0}});
  return dag;
}

QueryDag predict_others_set(int n, const Universe& universe) {
  check_agent_count(n);
  if (n < 2) throw std::invalid_argument("predict_others_set needs n >= 2");
  QueryDag dag(n, universe);
  std::vector<PaymentTarget> others;
  for (int i = 1; i < n; ++i) {
    dag.add_query(fmt::format("Q{}", i), i, {{kSinkId, 1.0}});
    others.push_back({fmt::format("Q{}", i), 1.0});
  }
  dag.add_query(fmt::format("Q{}", n), n, std::move(others));
  return dag;
}

QueryDag iterated_chain(int n, int agent_i, int agent_j, int m, const Universe& universe) {
  check_agent_index(agent_i, n);
  check_agent_index(agent_j, n);
  if (agent_i == agent_j) throw std::invalid_argument("iterated chain needs two distinct agents");
  if (m < 1) throw std::invalid_argument("iterated chain needs m >= 1");
  QueryDag dag(n, universe);
  std::string previous = kSinkId;
  for (int k = 1; k <= 2 * m; ++k) {
    std::string id = fmt::format("C{}", k);
    dag.add_query(id, k % 2 == 1 ? agent_i : agent_j, {{previous, 1.0}});
    previous = std::move(id);
  }
  return dag;
}

std::map<std::string, InterExpansion> rewrite_to_intersection(const QueryDag& dag) {
  std::map<std::string, InterExpansion> out;
  for (std::size_t idx : topological_order(dag)) {
    const QueryNode& q = dag.nodes()[idx];
    check_agent_index(q.agent, dag.n());
    InterExpansion coeffs;
    for (const PaymentTarget& t : q.targets) {
      if (t.id == kSinkId) {
        coeffs[SubsetMask::singleton(q.agent, dag.n())] += t.alpha;
        continue;
      }
      for (const auto& [s, c] : out.at(t.id)) coeffs[s.with(q.agent)] += t.alpha * c;
    }
    std::erase_if(coeffs, [](const auto& kv) { return kv.second == 0.0; });
    if (q.value) {
      LinearForm expanded = inter_expansion_form(dag.n(), coeffs, dag.universe());
      if (!expanded.approx_equal(*q.value, 1e-9)) {
        throw std::logic_error("node '" + q.id +
                               "' is not the linear query its payment targets define");
      }
    }
    out.emplace(q.id, std::move(coeffs));
  }
  return out;
}

LinearForm inter_expansion_form(int n, const InterExpansion& expansion, const Universe& universe) {
  LinearForm out(n);
  for (const auto& [s, c] : expansion) out.add_scaled(inter_form(n, s, universe), c);
  return out;
}

}  // namespace agglab
