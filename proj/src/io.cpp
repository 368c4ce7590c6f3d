#include "agglab/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace agglab::io {

Json subset_to_json(SubsetMask s) { return Json(s.agents()); }

SubsetMask subset_from_json(const Json& j, int n) {
  if (!j.is_array()) throw std::invalid_argument("subset must be a list of agents");
  return SubsetMask::from_agents(j.get<std::vector<int>>(), n);
}

Json to_json(const SignalModel& model) {
  Json signals = Json::array();
  for (const auto& [mask, spec] : model.specs()) {
    signals.push_back({{"subset", subset_to_json(mask)},
                       {"variance", spec.variance},
                       {"family", to_string(spec.family)}});
  }
  return {{"n", model.n()}, {"signals", std::move(signals)}};
}

SignalModel signal_model_from_json(const Json& j) {
  const int n = j.at("n").get<int>();
  check_agent_count(n);
  std::map<SubsetMask, SignalSpec> specs;
  for (const Json& s : j.at("signals")) {
    SubsetMask mask = subset_from_json(s.at("subset"), n);
    SignalSpec spec;
    spec.variance = s.at("variance").get<double>();
    spec.family = signal_family_from_string(s.value("family", std::string("gaussian")));
    if (!specs.emplace(mask, spec).second) {
      throw std::invalid_argument("signal X" + mask.to_string() + " listed twice");
    }
  }
  return SignalModel(n, std::move(specs));
}

Json to_json(const QueryDag& dag) {
  Json universe = Json::array();
  for (SubsetMask s : dag.universe()) universe.push_back(subset_to_json(s));
  Json nodes = Json::array();
  for (const QueryNode& q : dag.nodes()) {
    Json targets = Json::array();
    for (const PaymentTarget& t : q.targets) targets.push_back({{"id", t.id}, {"alpha", t.alpha}});
    nodes.push_back({{"id", q.id}, {"agent", q.agent}, {"targets", std::move(targets)}});
  }
  return {{"n", dag.n()}, {"universe", std::move(universe)}, {"nodes", std::move(nodes)}};
}

QueryDag query_dag_from_json(const Json& j) {
  const int n = j.at("n").get<int>();
  check_agent_count(n);
  Universe universe;
  if (j.contains("universe")) {
    std::vector<SubsetMask> subsets;
    for (const Json& s : j.at("universe")) subsets.push_back(subset_from_json(s, n));
    universe = make_universe(std::move(subsets), n);
  } else if (n <= kMaxFullEnumeration) {
    universe = full_universe(n);
  } else {
    throw std::invalid_argument("DAG with n > 16 needs an explicit universe");
  }
  QueryDag dag(n, std::move(universe));
  for (const Json& node : j.at("nodes")) {
    std::vector<PaymentTarget> targets;
    for (const Json& t : node.at("targets")) {
      targets.push_back({t.at("id").get<std::string>(), t.value("alpha", 1.0)});
    }
    dag.add_query(node.at("id").get<std::string>(), node.at("agent").get<int>(),
                  std::move(targets));
  }
  dag.derive_values();
  return dag;
}

Json to_json(const DeterministicRule& rule) {
  Json weights = Json::object();
  for (const auto& [id, beta] : rule.weights) weights[id] = beta;
  return {{"dag", to_json(rule.dag)}, {"weights", std::move(weights)}};
}

DeterministicRule deterministic_rule_from_json(const Json& j) {
  DeterministicRule rule{query_dag_from_json(j.at("dag")), {}};
  for (const auto& [id, beta] : j.at("weights").items()) {
    if (!rule.dag.contains(id)) throw std::invalid_argument("weight on unknown query '" + id + "'");
    rule.weights[id] = beta.get<double>();
  }
  return rule;
}

Json to_json(const RandomizedRule& rule) {
  Json atoms = Json::array();
  for (const RuleAtom& a : rule.atoms()) atoms.push_back({{"p", a.p}, {"rule", to_json(a.rule)}});
  return {{"atoms", std::move(atoms)}};
}

RandomizedRule randomized_rule_from_json(const Json& j) {
  std::vector<RuleAtom> atoms;
  for (const Json& a : j.at("atoms")) {
    atoms.push_back({a.at("p").get<double>(), deterministic_rule_from_json(a.at("rule"))});
  }
  return RandomizedRule(std::move(atoms));
}

Json to_json(const MinimaxResult& result) {
  const Bounds b = bounds(result.n, result.d);
  Json certificate = Json::array();
  for (const AlternationPoint& p : result.alternation) {
    if (result.domain == MinimaxDomain::Grid) {
      certificate.push_back({static_cast<long long>(p.t), p.sign});
    } else {
      certificate.push_back({p.t, p.sign});
    }
  }
  return {{"n", result.n},
          {"d", result.d},
          {"domain", to_string(result.domain)},
          {"method", to_string(result.method)},
          {"value", result.value},
          {"value_squared", result.value * result.value},
          {"lower", b.lower},
          {"upper", b.upper},
          {"certificate", std::move(certificate)},
          {"poly", result.poly.monomial()}};
}

Json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return Json::parse(in);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace agglab::io
