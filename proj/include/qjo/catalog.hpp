#pragma once

#include <qjo/plan_tree.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qjo {

/// Malformed workload document (bad JSON, missing keys, wrong types).
struct ParseError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Well-formed document that violates a catalog or query invariant.
struct ValidationError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct Relation
{
    std::string name;
    double cardinality; ///< >= 1
};

struct Predicate
{
    std::string left;
    std::string right;
    double selectivity; ///< in (0, 1]
};

/// Base-table statistics: relation cardinalities and join predicate selectivities.
class Catalog
{
    public:
    Catalog() = default;
    Catalog(std::vector<Relation> relations, std::vector<Predicate> predicates);

    const std::vector<Relation> & relations() const { return relations_; }
    const std::vector<Predicate> & predicates() const { return predicates_; }

    std::optional<std::size_t> find(std::string_view name) const;
    const Relation & relation(std::string_view name) const;

    private:
    std::vector<Relation> relations_;
    std::vector<Predicate> predicates_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct QuerySpec
{
    std::string id;
    std::vector<std::string> relations;
    std::vector<std::size_t> predicates; ///< indices into Catalog::predicates()
};

struct Workload
{
    Catalog catalog;
    std::vector<QuerySpec> queries;

    const QuerySpec & query(std::string_view id) const;
};

/// Parses and validates a JSON workload document. Throws ParseError or ValidationError.
Workload load_workload(std::string_view text);
Workload load_workload_file(const std::string &path);

/// Canonical serialization: fixed key order, two-space indent, trailing newline.
std::string serialize_workload(const Workload &workload);

/// Checks the query against the catalog: known relations, internal predicates, at least two relations and a
/// connected predicate graph. Throws ValidationError.
void validate_query(const Catalog &catalog, const QuerySpec &query);

/// Bit set over the query-local relation indices (position in QuerySpec::relations).
using RelSet = std::uint64_t;

inline constexpr std::size_t kMaxQueryRelations = 64;

/// Per-query view of the catalog with relation names resolved to local indices. Prices relation subsets under the
/// independence assumption and plans under the C_out model (sum of intermediate result sizes).
class CostModel
{
    public:
    struct LocalPredicate
    {
        std::size_t left;
        std::size_t right;
        double selectivity;
        std::size_t catalog_index;
    };

    CostModel(const Catalog &catalog, const QuerySpec &query);

    std::size_t relation_count() const { return names_.size(); }
    const std::string & name(std::size_t i) const { return names_[i]; }
    const std::vector<std::string> & names() const { return names_; }
    std::size_t index_of(std::string_view name) const;
    double cardinality(std::size_t i) const { return cardinalities_[i]; }
    const std::vector<LocalPredicate> & predicates() const { return predicates_; }
    RelSet neighbors(std::size_t i) const { return adjacency_[i]; }
    RelSet all() const;

    bool connected(RelSet subset) const;

    /// max(1, product of cardinalities times product of internal selectivities). Throws std::invalid_argument on an
    /// empty, foreign or disconnected subset.
    double estimate(RelSet subset) const;
    /// As `estimate` but skips the connectivity check; for hot loops whose subsets are connected by construction.
    double estimate_unchecked(RelSet subset) const;

    RelSet relations_of(const PlanTree &plan) const;
    /// Throws std::invalid_argument if the plan's leaves are not exactly the query's relations.
    double cost(const PlanTree &plan) const;

    private:
    std::vector<std::string> names_;
    std::vector<double> cardinalities_;
    std::vector<LocalPredicate> predicates_;
    std::vector<RelSet> adjacency_;
};

double estimate_cardinality(const Catalog &catalog, const QuerySpec &query,
                            const std::vector<std::string> &subset);
double plan_cost(const Catalog &catalog, const QuerySpec &query, const PlanTree &plan);

}
