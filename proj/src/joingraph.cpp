#include <qjo/joingraph.hpp>

#include <algorithm>
#include <bit>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>


using namespace qjo;


namespace {

struct DisjointSets
{
    std::vector<std::size_t> parent;

    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    std::size_t find(std::size_t x)
    {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
};

}


JoinGraph::JoinGraph(std::vector<std::string> relations, std::vector<BaseEdge> edges)
    : relations_(std::move(relations))
    , edges_(std::move(edges))
{
    for (std::size_t e = 0; e != edges_.size(); ++e) {
        for (std::size_t f = e + 1; f != edges_.size(); ++f) {
            if (edges_[e].relations() & edges_[f].relations())
                op_links_.emplace_back(e, f);
        }
    }
}

std::optional<std::size_t> JoinGraph::edge_between(std::size_t u, std::size_t v) const
{
    RelSet pair = RelSet(1) << u | RelSet(1) << v;
    for (std::size_t e = 0; e != edges_.size(); ++e)
        if (edges_[e].relations() == pair) return e;
    return std::nullopt;
}

std::string JoinGraph::edge_label(std::size_t e) const
{
    const BaseEdge &edge = edges_.at(e);
    return relations_[edge.left] + "-" + relations_[edge.right];
}

std::size_t JoinGraph::degree(std::size_t relation) const
{
    std::size_t d = 0;
    for (const auto &e : edges_)
        d += (e.left == relation or e.right == relation);
    return d;
}

JoinGraph qjo::build_join_graph(const QuerySpec &query, const Catalog &catalog)
{
    CostModel model(catalog, query);
    std::map<std::pair<std::string, std::string>, BaseEdge> by_names;
    for (const auto &p : model.predicates()) {
        std::size_t l = p.left, r = p.right;
        if (model.name(r) < model.name(l)) std::swap(l, r);
        auto key = std::make_pair(model.name(l), model.name(r));
        auto [it, inserted] = by_names.try_emplace(key, BaseEdge{l, r, {}});
        it->second.predicates.push_back(p.catalog_index);
    }
    std::vector<BaseEdge> edges;
    edges.reserve(by_names.size());
    for (auto &[key, edge] : by_names) {
        std::sort(edge.predicates.begin(), edge.predicates.end());
        edges.push_back(std::move(edge));
    }
    return JoinGraph(query.relations, std::move(edges));
}

ViolationReport qjo::validate_plan(const JoinGraph &graph, const JoinOrderSequence &sequence)
{
    ViolationReport report;
    DisjointSets sets(graph.relation_count());
    std::vector<bool> used(graph.edge_count(), false);
    std::size_t merges = 0;
    for (std::size_t step = 0; step != sequence.edges.size(); ++step) {
        std::size_t e = sequence.edges[step];
        if (e >= graph.edge_count()) {
            report.unknown_steps.push_back(step);
            continue;
        }
        if (used[e]) {
            report.duplicate_steps.push_back(step);
            continue;
        }
        used[e] = true;
        std::size_t a = sets.find(graph.edge(e).left);
        std::size_t b = sets.find(graph.edge(e).right);
        if (a == b) {
            report.redundant_steps.push_back(step);
            continue;
        }
        sets.parent[a] = b;
        ++merges;
    }
    report.spanning_tree = report.violation_count() == 0 and merges + 1 == graph.relation_count();
    return report;
}

JoinOrderSequence qjo::sequence_from_plan(const JoinGraph &graph, const PlanTree &plan)
{
    JoinOrderSequence seq;
    auto index_of = [&](const std::string &name) {
        auto it = std::find(graph.relations().begin(), graph.relations().end(), name);
        if (it == graph.relations().end())
            throw std::invalid_argument("plan leaf '" + name + "' is not a query relation");
        return static_cast<std::size_t>(it - graph.relations().begin());
    };
    auto walk = [&](auto &&self, const PlanTree &node) -> RelSet {
        if (node.is_leaf()) return RelSet(1) << index_of(node.relation());
        RelSet l = self(self, node.left());
        RelSet r = self(self, node.right());
        if (l & r) throw std::invalid_argument("plan mentions a relation twice");
        for (std::size_t e = 0; e != graph.edge_count(); ++e) {
            const BaseEdge &edge = graph.edge(e);
            bool crosses = ((l >> edge.left & 1) and (r >> edge.right & 1)) or
                           ((r >> edge.left & 1) and (l >> edge.right & 1));
            if (crosses) {
                seq.edges.push_back(e);
                return l | r;
            }
        }
        throw std::invalid_argument("plan contains a cross product");
    };
    walk(walk, plan);
    return seq;
}

PlanTree qjo::plan_from_sequence(const JoinGraph &graph, const JoinOrderSequence &sequence)
{
    const std::size_t n = graph.relation_count();
    DisjointSets sets(n);
    std::vector<PlanTree> trees;
    std::vector<std::size_t> sizes(n, 1);
    trees.reserve(n);
    for (const auto &name : graph.relations()) trees.push_back(PlanTree::leaf(name));

    for (std::size_t e : sequence.edges) {
        if (e >= graph.edge_count()) throw std::invalid_argument("sequence references an unknown edge");
        std::size_t a = sets.find(graph.edge(e).left);
        std::size_t b = sets.find(graph.edge(e).right);
        if (a == b) throw std::invalid_argument("sequence edge closes a cycle");
        // larger input on the left; on a tie the side holding the edge's first relation
        if (sizes[b] > sizes[a]) std::swap(a, b);
        trees[a] = PlanTree::join(trees[a], trees[b]);
        sizes[a] += sizes[b];
        sets.parent[b] = a;
    }
    std::size_t root = sets.find(0);
    if (sizes[root] != n) throw std::invalid_argument("sequence does not span the join graph");
    return trees[root];
}

OraclePlan qjo::dp_optimal_plan(const Catalog &catalog, const QuerySpec &query, std::size_t limit)
{
    CostModel model(catalog, query);
    const std::size_t n = model.relation_count();
    if (n > limit)
        throw std::invalid_argument("query '" + query.id + "' has " + std::to_string(n) +
                                    " relations; the DP oracle is limited to " + std::to_string(limit));

    struct Entry
    {
        double cost = std::numeric_limits<double>::infinity();
        RelSet left = 0;
        std::string text; ///< canonical plan string, for tie-breaking
    };
    const std::size_t subsets = std::size_t(1) << n;
    std::vector<Entry> table(subsets);
    std::vector<bool> connected(subsets, false);
    for (RelSet s = 1; s != subsets; ++s) connected[s] = model.connected(s);
    for (std::size_t i = 0; i != n; ++i) {
        table[RelSet(1) << i].cost = 0.0;
        table[RelSet(1) << i].text = model.name(i);
    }

    for (RelSet s = 1; s != subsets; ++s) {
        if (std::popcount(s) < 2 or not connected[s]) continue;
        const double card = model.estimate_unchecked(s);
        Entry &best = table[s];
        // every non-empty proper subset, so both orientations of each split are considered
        for (RelSet l = (s - 1) & s; l; l = (l - 1) & s) {
            RelSet r = s & ~l;
            if (not connected[l] or not connected[r]) continue;
            double cost = card + table[l].cost + table[r].cost;
            if (cost > best.cost) continue;
            std::string text = "(" + table[l].text + " " + table[r].text + ")";
            if (cost < best.cost or text < best.text) {
                best.cost = cost;
                best.left = l;
                best.text = std::move(text);
            }
        }
    }

    auto build = [&](auto &&self, RelSet s) -> PlanTree {
        if (std::popcount(s) == 1) return PlanTree::leaf(model.name(std::countr_zero(s)));
        RelSet l = table[s].left;
        return PlanTree::join(self(self, l), self(self, s & ~l));
    };
    RelSet all = model.all();
    return {build(build, all), table[all].cost};
}
