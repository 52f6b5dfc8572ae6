#pragma once

#include <qjo/catalog.hpp>
#include <qjo/joingraph.hpp>
#include <qjo/qubo.hpp>

namespace qjo {

/// Coefficients of the time-indexed join-order QUBO.
struct EncodingWeights
{
    double cost_weight = 1.0;      ///< scales the log-cardinality bias of each (edge, step)
    double adjacency_weight = 1.0; ///< reward for consecutive steps whose joins share a relation
    double penalty_factor = 2.0;   ///< penalty P = penalty_factor * largest |objective coefficient|
    double min_penalty = 1.0;      ///< floor for P when every objective coefficient vanishes
};

/// Bijection between QUBO variables and (edge, step) pairs: variable = edge * steps + (step - 1), step in
/// 1..steps.
class VarMap
{
    public:
    VarMap(std::size_t edges, std::size_t steps) : edges_(edges), steps_(steps) {}

    std::size_t edges() const { return edges_; }
    std::size_t steps() const { return steps_; }
    std::size_t size() const { return edges_ * steps_; }

    Var var(std::size_t edge, std::size_t step) const;
    std::size_t edge_of(Var v) const { return v / steps_; }
    std::size_t step_of(Var v) const { return v % steps_ + 1; }

    private:
    std::size_t edges_;
    std::size_t steps_;
};

struct JoinOrderEncoding
{
    Qubo qubo;                      ///< constraint + objective
    Qubo penalty;                   ///< constraint terms only; zero exactly on H1/H2-feasible assignments
    VarMap varmap;
    double penalty_weight;          ///< P
    std::vector<double> edge_log_cardinality; ///< ln of each base edge's pair cardinality
};

/// Encodes join ordering over `graph` as a QUBO.
///   H1: P * (sum_e x[e,t] - 1)^2 for each step t (exactly one join per step)
///   H2: P * x[e,t] * x[e,t'] for t < t' (each join at most once)
///   objective: cost_weight * ln(card(e)) * (n - t) on x[e,t], and -adjacency_weight on x[e,t] x[f,t+1] when e and
///   f share a relation.
/// Connectivity is left to decode_and_repair.
JoinOrderEncoding encode_join_order(const Catalog &catalog, const QuerySpec &query, const JoinGraph &graph,
                                    const EncodingWeights &weights = {});

struct DecodeReport
{
    std::size_t selected = 0;           ///< variables set to one
    std::size_t skipped_duplicates = 0; ///< selected edge already applied at an earlier step
    std::size_t skipped_redundant = 0;  ///< selected edge inside one component
    std::size_t greedy_added = 0;       ///< edges added by the repair pass
    std::size_t h1_violations = 0;      ///< steps without exactly one selected edge
    std::size_t h2_violations = 0;      ///< edges selected at more than one step

    std::size_t repairs() const { return skipped_duplicates + skipped_redundant + greedy_added; }
    std::size_t constraint_violations() const { return h1_violations + h2_violations; }
};

struct DecodedPlan
{
    PlanTree plan;
    JoinOrderSequence sequence; ///< the edges actually applied, always a spanning sequence
    DecodeReport report;
    double cost;
};

/// Applies selected edges in step order, skipping duplicates and cycle-closing edges, then completes the tree by
/// repeatedly adding the edge whose joined result is smallest. Always yields a valid plan for a connected query.
DecodedPlan decode_and_repair(const VarMap &varmap, const JoinGraph &graph, const CostModel &model,
                              const Assignment &s);

}
