#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "agglab/aggregation_rules.hpp"
#include "agglab/minimax.hpp"
#include "agglab/query_dag.hpp"
#include "agglab/signal_model.hpp"

namespace agglab::io {

using Json = nlohmann::ordered_json;

// Subsets travel as sorted 1-based agent lists.
Json subset_to_json(SubsetMask s);
SubsetMask subset_from_json(const Json& j, int n);

// {"n": int, "signals": [{"subset": [...], "variance": x, "family": "gaussian"}]}
Json to_json(const SignalModel& model);
SignalModel signal_model_from_json(const Json& j);

// {"n": int, "universe": [[...], ...], "nodes": [{"id", "agent", "targets": [{"id", "alpha"}]}]}
// "universe" is optional on input and defaults to every nonempty subset when
// n <= 16. Node values are always re-derived, never read.
Json to_json(const QueryDag& dag);
QueryDag query_dag_from_json(const Json& j);

// {"dag": {...}, "weights": {id: beta}}
Json to_json(const DeterministicRule& rule);
DeterministicRule deterministic_rule_from_json(const Json& j);
// {"atoms": [{"p": x, "rule": {...}}]}
Json to_json(const RandomizedRule& rule);
RandomizedRule randomized_rule_from_json(const Json& j);

// {n, d, value, value_squared, lower, upper, certificate: [[t, sign]], poly: [monomial coeffs]}
Json to_json(const MinimaxResult& result);

Json read_file(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace agglab::io
