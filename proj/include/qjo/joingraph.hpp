#pragma once

#include <qjo/catalog.hpp>
#include <qjo/plan_tree.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qjo {

/// A join predicate pair of the query. Parallel predicates on the same relation pair collapse into one edge.
struct BaseEdge
{
    std::size_t left;  ///< query-local index, name(left) < name(right)
    std::size_t right; ///< query-local index
    std::vector<std::size_t> predicates; ///< catalog predicate indices

    RelSet relations() const { return RelSet(1) << left | RelSet(1) << right; }
};

/// Join graph of one query plus its line graph. Nodes of the line graph are base edges (candidate binary joins);
/// two nodes are linked when their joins share a relation.
class JoinGraph
{
    public:
    JoinGraph(std::vector<std::string> relations, std::vector<BaseEdge> edges);

    std::size_t relation_count() const { return relations_.size(); }
    const std::vector<std::string> & relations() const { return relations_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<BaseEdge> & edges() const { return edges_; }
    const BaseEdge & edge(std::size_t e) const { return edges_.at(e); }
    std::optional<std::size_t> edge_between(std::size_t u, std::size_t v) const;
    std::string edge_label(std::size_t e) const; ///< "a-b"

    /// Line-graph links (e, f) with e < f.
    const std::vector<std::pair<std::size_t, std::size_t>> & op_adjacency() const { return op_links_; }
    std::size_t degree(std::size_t relation) const;

    private:
    std::vector<std::string> relations_;
    std::vector<BaseEdge> edges_;
    std::vector<std::pair<std::size_t, std::size_t>> op_links_;
};

/// Ordered list of base-edge ids; a complete sequence has relation_count() - 1 entries.
struct JoinOrderSequence
{
    std::vector<std::size_t> edges;

    friend bool operator==(const JoinOrderSequence &, const JoinOrderSequence &) = default;
};

struct ViolationReport
{
    std::vector<std::size_t> duplicate_steps; ///< 0-based positions
    std::vector<std::size_t> unknown_steps;
    std::vector<std::size_t> redundant_steps; ///< edge closes a cycle
    bool spanning_tree = false;

    std::size_t violation_count() const
    {
        return duplicate_steps.size() + unknown_steps.size() + redundant_steps.size();
    }
};

/// Edges sorted by relation-name pair; deterministic for a given query.
JoinGraph build_join_graph(const QuerySpec &query, const Catalog &catalog);

ViolationReport validate_plan(const JoinGraph &graph, const JoinOrderSequence &sequence);

/// Join sequence that rebuilds `plan` bottom-up (post-order). Throws std::invalid_argument if some join in the plan
/// has no predicate between its inputs.
JoinOrderSequence sequence_from_plan(const JoinGraph &graph, const PlanTree &plan);

/// Bushy plan built by applying each edge of a spanning sequence as a merge of the two components it connects.
PlanTree plan_from_sequence(const JoinGraph &graph, const JoinOrderSequence &sequence);

struct OraclePlan
{
    PlanTree plan;
    double cost;
};

inline constexpr std::size_t kDefaultOracleLimit = 12;

/// Exact C_out-optimal bushy plan without cross products, by dynamic programming over connected subsets. On equal
/// cost the lexicographically smaller `PlanTree::to_string()` wins. Throws std::invalid_argument above `limit`.
OraclePlan dp_optimal_plan(const Catalog &catalog, const QuerySpec &query,
                           std::size_t limit = kDefaultOracleLimit);

}
