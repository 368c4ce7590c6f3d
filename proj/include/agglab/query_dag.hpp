#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agglab/signal_model.hpp"

namespace agglab {

// Identifier of the distinguished sink node (the target Y).
inline const std::string kSinkId = "Y";

struct PaymentTarget {
  std::string id;  // another query node, or kSinkId
  double alpha = 1.0;
};

// A query answered by one agent: the agent's expectation of
// sum_j alpha_j * target_j. The agent is paid 1 - (r - sum_j alpha_j target_j)^2.
struct QueryNode {
  std::string id;
  int agent = 0;
  std::vector<PaymentTarget> targets;
  std::optional<LinearForm> value;  // symbolic output; derived if absent
};

// Query nodes plus the sink Y, over a declared universe of subsets.
class QueryDag {
 public:
  QueryDag(int n, Universe universe);

  int n() const { return n_; }
  const Universe& universe() const { return universe_; }
  const std::vector<QueryNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  const QueryNode& node(const std::string& id) const;
  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  std::optional<std::size_t> index_of(const std::string& id) const;

  // The sink's symbolic value: coefficient 1 on every subset of the universe.
  const LinearForm& sink_value() const { return sink_; }
  // Value of a node or the sink; throws if the node has no value yet.
  const LinearForm& value_of(const std::string& id) const;

  // Inserts a node. When all targets already carry values and no value is
  // given, the value is derived immediately.
  const QueryNode& add_query(std::string id, int agent, std::vector<PaymentTarget> targets);
  // Inserts a node with a stated value, to be checked by validate().
  const QueryNode& add_query_with_value(std::string id, int agent,
                                        std::vector<PaymentTarget> targets, LinearForm value);
  // Fills in every missing value in dependency order. Throws if a cycle or a
  // dangling target prevents it.
  void derive_values();

  // E[sum_j alpha_j value(target_j) | S_agent] from the current target values.
  LinearForm derived_value(const QueryNode& node) const;

 private:
  int n_;
  Universe universe_;
  LinearForm sink_;
  std::vector<QueryNode> nodes_;
  std::map<std::string, std::size_t> index_;
};

// Duplicate and reserved ids are rejected on insertion rather than reported.
enum class ViolationKind {
  AgentOutOfRange,
  UnknownTarget,
  NoTargets,
  Cycle,
  Unreachable,
  MissingValue,
  Inconsistent,
};

std::string to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string node;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool valid() const { return violations.empty(); }
  bool has(ViolationKind kind) const;
};

// Checks the DAG-elicitability conditions for linear queries: acyclic, Y the
// unique sink, every node reaches Y, and each node's value equals the
// conditional expectation of its payment target.
ValidationReport validate(const QueryDag& dag);

enum class ComplexityMode { Canonical, Exact };

struct ComplexityReport {
  int query_c = 0;
  int order_c = 0;
  int agent_c = 0;
  bool exact = false;
};

// Canonical mode measures the given graph (an upper bound on the minimum over
// eliciting graphs). Exact mode searches all graphs eliciting the same query
// values; refused above kMaxExactQueries nodes.
inline constexpr std::size_t kMaxExactQueries = 10;
ComplexityReport complexity(const QueryDag& dag, ComplexityMode mode = ComplexityMode::Canonical);

// Per-node longest path to Y and reachable-agent count on the given graph.
std::map<std::string, int> node_orders(const QueryDag& dag);
std::map<std::string, int> node_agent_counts(const QueryDag& dag);

// Quadratic score 1 - (report - sum_j alpha_j * realization_j)^2.
double payment(const QueryNode& node, double report,
               const std::map<std::string, double>& target_realizations);

struct TruthfulnessEntry {
  std::string node;
  double delta = 0.0;
  double truthful_payment = 0.0;   // mean payment for the truthful report
  double perturbed_payment = 0.0;  // mean payment for truth + delta
  double gap = 0.0;                // truthful - perturbed
  double gap_stderr = 0.0;
  bool passed = false;             // gap >= -3se and |gap - delta^2| <= 3se
};

struct TruthfulnessReport {
  std::vector<TruthfulnessEntry> entries;
  std::uint64_t samples = 0;
  bool all_passed() const;
};

// Monte Carlo check that each node's truthful report beats truth + delta in
// expected payment. Every (node, delta) pair uses its own RNG stream.
TruthfulnessReport truthfulness_check(const QueryDag& dag, const SignalModel& model,
                                      const std::vector<double>& perturbations,
                                      std::uint64_t samples, std::uint64_t seed);

}  // namespace agglab
