#pragma once

#include <map>
#include <string>
#include <vector>

#include "agglab/query_dag.hpp"

namespace agglab {

// inter(S) = sum over T in the universe with S subset of T of X_T.
struct InterQuery {
  SubsetMask s;
  LinearForm value;
};

// Agent i_k's expectation of Y given the signals that none of i_1..i_{k-1} see.
struct DiffQuery {
  std::vector<int> prefix;
  LinearForm value;
};

// Closed form of inter(S) over a universe.
LinearForm inter_form(int n, SubsetMask s, const Universe& universe);

// Iterated expectation: agent L[k-1]'s expectation of ... of agent L[0]'s
// expectation of Y. Computed by repeated conditioning.
InterQuery iter_query(int n, const std::vector<int>& order, const Universe& universe);

struct IntersectionSet {
  std::vector<InterQuery> queries;  // ordered by (|S|, mask)
  std::map<SubsetMask, std::string> ids;
  QueryDag dag;
};

// Node id used for inter(S) in the canonical DAG, e.g. "I{1,3}".
std::string inter_id(SubsetMask s);

// All inter(S) with 1 <= |S| <= d. Node inter(S) is answered by max(S) and
// scored against inter(S minus max(S)), or Y when |S| = 1.
IntersectionSet intersection_set(int n, int d, const Universe& universe);

// Closed form: coefficient 1 on T containing the last agent of the list and
// none of the earlier ones.
LinearForm diff_closed_form(int n, const std::vector<int>& prefix, const Universe& universe);

// Builds diff(L) from the inductive definition and checks it against the
// closed form; throws std::logic_error on mismatch.
DiffQuery diff_query(int n, const std::vector<int>& order, const Universe& universe);

struct DifferenceSet {
  std::vector<DiffQuery> queries;  // one per prefix of L
  QueryDag dag;
};

// Node id for the prefix ending at position k, e.g. "D(2,1)".
std::string diff_id(const std::vector<int>& prefix);

// Prefix queries of L. Q_{i_k} is scored against Y (alpha 1) and every earlier
// Q_{i_l} (alpha -1). The id prefix namespaces nodes when several sets share a DAG.
DifferenceSet difference_set(int n, const std::vector<int>& order, const Universe& universe,
                             const std::string& id_prefix = "");

// Y_1..Y_n, each scored against Y. Nodes "Q1".."Qn".
QueryDag standard_query_set(int n, const Universe& universe);

// Q_1..Q_{n-1} scored against Y; Q_n scored against all of them, so that
// Q_n = E[sum_{j<n} Y_j | S_n].
QueryDag predict_others_set(int n, const Universe& universe);

// Alternating chain of 2m nodes: the first (agent i) is scored against Y and
// each later node against its predecessor, with agents alternating i, j.
QueryDag iterated_chain(int n, int agent_i, int agent_j, int m, const Universe& universe);

// Coefficients c_S with value(Q) = sum_S c_S inter(S), for every node.
using InterExpansion = std::map<SubsetMask, double>;
std::map<std::string, InterExpansion> rewrite_to_intersection(const QueryDag& dag);

// sum_S c_S inter(S) as a linear form over a universe.
LinearForm inter_expansion_form(int n, const InterExpansion& expansion, const Universe& universe);

}  // namespace agglab
