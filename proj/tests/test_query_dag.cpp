#include <cmath>

#include <gtest/gtest.h>

#include "agglab/query_dag.hpp"
#include "agglab/query_families.hpp"

namespace agglab {
namespace {

QueryDag three_query_dag(int n) {
  QueryDag dag(n, full_universe(n));
  dag.add_query("Q1", 1, {{kSinkId, 1.0}});
  dag.add_query("Q2", 2, {{kSinkId, 1.0}});
  dag.add_query("Q3", 3, {{"Q1", -1.0}, {"Q2", 2.0}});
  return dag;
}

TEST(QueryDag, DerivesValuesOnInsert) {
  QueryDag dag = three_query_dag(3);
  const Universe u = full_universe(3);
  EXPECT_TRUE(dag.value_of("Q1").approx_equal(posterior_expectation(3, 1, u)));
  // Q3 = E[-Y1 + 2 Y2 | S3] = -(X13 + X123) + 2 (X23 + X123).
  LinearForm expected(3, {{SubsetMask::from_agents({1, 3}, 3), -1.0},
                          {SubsetMask::from_agents({2, 3}, 3), 2.0},
                          {SubsetMask::all(3), 1.0}});
  EXPECT_TRUE(dag.value_of("Q3").approx_equal(expected));
  EXPECT_TRUE(dag.sink_value().approx_equal(LinearForm::target(3, u)));
  EXPECT_TRUE(validate(dag).valid());
  EXPECT_EQ(dag.index_of("Q2"), std::optional<std::size_t>(1));
  EXPECT_FALSE(dag.index_of("nope"));
  EXPECT_THROW(dag.node("nope"), std::out_of_range);
}

TEST(QueryDag, RejectsDuplicateAndReservedIds) {
  QueryDag dag(2, full_universe(2));
  dag.add_query("A", 1, {{kSinkId, 1.0}});
  EXPECT_THROW(dag.add_query("A", 2, {{kSinkId, 1.0}}), std::invalid_argument);
  EXPECT_THROW(dag.add_query(kSinkId, 2, {{kSinkId, 1.0}}), std::invalid_argument);
}

TEST(QueryDag, DeferredTargetsResolveInOrder) {
  QueryDag dag(2, full_universe(2));
  dag.add_query("B", 2, {{"A", 1.0}});
  dag.add_query("A", 1, {{kSinkId, 1.0}});
  EXPECT_THROW(dag.value_of("B"), std::logic_error);
  dag.derive_values();
  EXPECT_TRUE(dag.value_of("B").approx_equal(LinearForm(2, {{SubsetMask(3), 1.0}})));
  EXPECT_TRUE(validate(dag).valid());
}

TEST(Validate, ReportsEachViolationKind) {
  QueryDag cyc(2, full_universe(2));
  cyc.add_query("A", 1, {{"B", 1.0}});
  cyc.add_query("B", 2, {{"A", 1.0}});
  EXPECT_TRUE(validate(cyc).has(ViolationKind::Cycle));
  EXPECT_THROW(cyc.derive_values(), std::invalid_argument);

  QueryDag dangling(2, full_universe(2));
  dangling.add_query("A", 1, {{"ghost", 1.0}});
  EXPECT_TRUE(validate(dangling).has(ViolationKind::UnknownTarget));

  QueryDag bad_agent(2, full_universe(2));
  bad_agent.add_query_with_value("A", 3, {{kSinkId, 1.0}}, LinearForm(2));
  EXPECT_TRUE(validate(bad_agent).has(ViolationKind::AgentOutOfRange));

  QueryDag empty_targets(2, full_universe(2));
  empty_targets.add_query_with_value("A", 1, {}, LinearForm(2));
  EXPECT_TRUE(validate(empty_targets).has(ViolationKind::NoTargets));

  QueryDag wrong = three_query_dag(3);
  QueryDag stated(3, full_universe(3));
  stated.add_query("Q1", 1, {{kSinkId, 1.0}});
  stated.add_query_with_value("Q2", 2, {{kSinkId, 1.0}}, wrong.value_of("Q1"));
  ValidationReport r = validate(stated);
  EXPECT_TRUE(r.has(ViolationKind::Inconsistent));
  EXPECT_EQ(r.violations.front().node, "Q2");
  EXPECT_FALSE(to_string(ViolationKind::Inconsistent).empty());
}

TEST(Complexity, CanonicalFigures) {
  for (int n = 1; n <= 6; ++n) {
    ComplexityReport a = complexity(standard_query_set(n, full_universe(n)));
    EXPECT_EQ(a.query_c, n);
    EXPECT_EQ(a.order_c, 1);
    EXPECT_EQ(a.agent_c, 1);
    EXPECT_FALSE(a.exact);
  }
  ComplexityReport b = complexity(predict_others_set(3, full_universe(3)));
  EXPECT_EQ(b.query_c, 3);
  EXPECT_EQ(b.order_c, 2);
  EXPECT_EQ(b.agent_c, 3);
  ComplexityReport c = complexity(iterated_chain(3, 1, 2, 2, full_universe(3)));
  EXPECT_EQ(c.query_c, 4);
  EXPECT_EQ(c.order_c, 4);
  EXPECT_EQ(c.agent_c, 2);
  auto orders = node_orders(three_query_dag(3));
  EXPECT_EQ(orders.at("Q1"), 1);
  EXPECT_EQ(orders.at("Q3"), 2);
  EXPECT_EQ(node_agent_counts(three_query_dag(3)).at("Q3"), 3);
}

TEST(Complexity, ExactSearch) {
  ComplexityReport a = complexity(standard_query_set(3, full_universe(3)), ComplexityMode::Exact);
  EXPECT_TRUE(a.exact);
  EXPECT_EQ(a.order_c, 1);
  EXPECT_EQ(a.agent_c, 1);
  ComplexityReport b = complexity(predict_others_set(3, full_universe(3)), ComplexityMode::Exact);
  EXPECT_EQ(b.order_c, 2);
  EXPECT_EQ(b.agent_c, 3);
  // The chain's last node may target the other copy of inter{1,2}, saving one level.
  ComplexityReport c = complexity(iterated_chain(3, 1, 2, 2, full_universe(3)), ComplexityMode::Exact);
  EXPECT_EQ(c.order_c, 3);
  EXPECT_EQ(c.agent_c, 2);
  IntersectionSet big = intersection_set(4, 4, full_universe(4));
  EXPECT_THROW(complexity(big.dag, ComplexityMode::Exact), std::invalid_argument);
}

TEST(Payment, QuadraticScore) {
  QueryDag dag = three_query_dag(3);
  const QueryNode& q3 = dag.node("Q3");
  EXPECT_DOUBLE_EQ(payment(q3, -0.5, {{"Q1", 0.5}, {"Q2", 0.0}}), 1.0);
  EXPECT_DOUBLE_EQ(payment(q3, 0.5, {{"Q1", 0.5}, {"Q2", 0.0}}), 0.0);
  EXPECT_DOUBLE_EQ(payment(dag.node("Q1"), 2.0, {{kSinkId, 1.5}}), 0.75);
  EXPECT_THROW(payment(q3, 0.0, {{"Q1", 0.5}}), std::invalid_argument);
}

TEST(Truthfulness, GapIsDeltaSquared) {
  QueryDag dag = three_query_dag(3);
  SignalModel model = SignalModel::unit(3, full_universe(3));
  TruthfulnessReport r = truthfulness_check(dag, model, {0.5, 1.0}, 100000, 3);
  EXPECT_EQ(r.entries.size(), 6U);
  EXPECT_TRUE(r.all_passed());
  for (const auto& e : r.entries) {
    EXPECT_NEAR(e.gap, e.delta * e.delta, 3.0 * e.gap_stderr + 1e-12) << e.node;
    EXPECT_NEAR(e.truthful_payment - e.perturbed_payment, e.gap, 1e-9);
  }
  TruthfulnessReport again = truthfulness_check(dag, model, {0.5, 1.0}, 100000, 3);
  EXPECT_EQ(again.entries.front().gap, r.entries.front().gap);
  EXPECT_THROW(truthfulness_check(dag, model, {0.5}, 1, 3), std::invalid_argument);
}

}  // namespace
}  // namespace agglab
