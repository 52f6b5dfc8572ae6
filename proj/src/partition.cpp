#include <qjo/decomp.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>


using namespace qjo;


namespace {

std::vector<std::size_t> members(RelSet s)
{
    std::vector<std::size_t> out;
    for (; s; s &= s - 1) out.push_back(std::size_t(std::countr_zero(s)));
    return out;
}

/// Edge weights between relations (number of base edges, always 0 or 1).
struct RelationAdjacency
{
    std::vector<RelSet> adj;

    explicit RelationAdjacency(const JoinGraph &graph) : adj(graph.relation_count(), 0)
    {
        for (const auto &e : graph.edges()) {
            adj[e.left] |= RelSet(1) << e.right;
            adj[e.right] |= RelSet(1) << e.left;
        }
    }

    int w(std::size_t u, std::size_t v) const { return (adj[u] >> v) & 1 ? 1 : 0; }
    int into(std::size_t u, RelSet s) const { return std::popcount(adj[u] & s); }
};

std::size_t cut_of(const RelationAdjacency &g, RelSet a, RelSet b)
{
    std::size_t cut = 0;
    for (auto u : members(a)) cut += std::size_t(g.into(u, b));
    return cut;
}

/// Kernighan-Lin passes until no positive-gain prefix of swaps remains.
void kl_refine(const RelationAdjacency &g, RelSet &a, RelSet &b)
{
    for (;;) {
        RelSet ta = a, tb = b, locked = 0;
        std::vector<std::pair<std::size_t, std::size_t>> swaps;
        std::vector<int> gains;
        const std::size_t steps = std::min(std::popcount(a), std::popcount(b));
        for (std::size_t step = 0; step < steps; ++step) {
            int best = std::numeric_limits<int>::min();
            std::size_t bu = 0, bv = 0;
            for (auto u : members(ta & ~locked)) {
                const int du = g.into(u, tb) - g.into(u, ta);
                for (auto v : members(tb & ~locked)) {
                    const int dv = g.into(v, ta) - g.into(v, tb);
                    const int gain = du + dv - 2 * g.w(u, v);
                    if (gain > best) { best = gain; bu = u; bv = v; }
                }
            }
            ta = (ta & ~(RelSet(1) << bu)) | RelSet(1) << bv;
            tb = (tb & ~(RelSet(1) << bv)) | RelSet(1) << bu;
            locked |= RelSet(1) << bu | RelSet(1) << bv;
            swaps.emplace_back(bu, bv);
            gains.push_back(best);
        }
        int running = 0, best_total = 0;
        std::size_t best_prefix = 0;
        for (std::size_t k = 0; k < gains.size(); ++k) {
            running += gains[k];
            if (running > best_total) { best_total = running; best_prefix = k + 1; }
        }
        if (best_prefix == 0) return;
        for (std::size_t k = 0; k < best_prefix; ++k) {
            const auto [u, v] = swaps[k];
            a = (a & ~(RelSet(1) << u)) | RelSet(1) << v;
            b = (b & ~(RelSet(1) << v)) | RelSet(1) << u;
        }
    }
}

std::vector<std::size_t> bfs_order(const RelationAdjacency &g, RelSet subset, std::size_t root)
{
    std::vector<std::size_t> order{root};
    RelSet seen = RelSet(1) << root;
    for (std::size_t head = 0; head < order.size(); ++head)
        for (auto v : members(g.adj[order[head]] & subset & ~seen)) {
            seen |= RelSet(1) << v;
            order.push_back(v);
        }
    for (auto v : members(subset & ~seen)) order.push_back(v);
    return order;
}

std::vector<std::size_t> incident_edges(const JoinGraph &graph, RelSet relations)
{
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < graph.edge_count(); ++e)
        if (graph.edge(e).relations() & relations) out.push_back(e);
    return out;
}

}


std::size_t Partitioning::part_of_private(Var v) const
{
    if (is_shared(v)) throw std::invalid_argument("variable is shared between parts");
    for (std::size_t p = 0; p < parts.size(); ++p)
        if (std::binary_search(parts[p].variables.begin(), parts[p].variables.end(), v)) return p;
    throw std::out_of_range("variable belongs to no part");
}

bool Partitioning::is_shared(Var v) const
{
    return std::binary_search(shared.begin(), shared.end(), v);
}


std::size_t qjo::cut_size(const JoinGraph &graph, RelSet a, RelSet b)
{
    return cut_of(RelationAdjacency(graph), a, b);
}

std::pair<RelSet, RelSet> qjo::bisect_relations(const JoinGraph &graph, RelSet relations)
{
    if (std::popcount(relations) < 2) throw std::invalid_argument("bisection needs at least two relations");
    const RelationAdjacency g(graph);
    const auto nodes = members(relations);
    const std::size_t half = nodes.size() / 2;

    std::optional<std::pair<RelSet, RelSet>> best;
    std::size_t best_cut = std::numeric_limits<std::size_t>::max();
    for (auto root : nodes) {
        const auto order = bfs_order(g, relations, root);
        RelSet a = 0;
        for (std::size_t k = 0; k < half; ++k) a |= RelSet(1) << order[k];
        RelSet b = relations & ~a;
        kl_refine(g, a, b);
        const std::size_t cut = cut_of(g, a, b);
        // canonical side order: the half holding the lowest relation comes first
        if (std::countr_zero(b) < std::countr_zero(a) and std::popcount(a) == std::popcount(b)) std::swap(a, b);
        if (cut < best_cut) {
            best_cut = cut;
            best = {a, b};
        }
    }
    return *best;
}


Partitioning qjo::partition_join_graph(const JoinGraph &graph, const VarMap &varmap, std::size_t max_vars,
                                       const CostModel *model)
{
    if (varmap.edges() != graph.edge_count()) throw std::invalid_argument("variable map does not match join graph");
    if (varmap.steps() > max_vars) throw std::invalid_argument("a single join column exceeds the variable capacity");

    const RelSet all = graph.relation_count() == 64 ? ~RelSet(0) : (RelSet(1) << graph.relation_count()) - 1;
    const double limit = 0.8 * double(max_vars);
    auto vars_of = [&](RelSet s) { return double(incident_edges(graph, s).size() * varmap.steps()); };

    std::vector<RelSet> parts{all};
    for (;;) {
        auto it = std::find_if(parts.begin(), parts.end(),
                               [&](RelSet s) { return std::popcount(s) > 1 and vars_of(s) > limit; });
        if (it == parts.end()) break;
        const auto [a, b] = bisect_relations(graph, *it);
        *it = a;
        parts.push_back(b);
        std::sort(parts.begin(), parts.end(),
                  [](RelSet x, RelSet y) { return std::countr_zero(x) < std::countr_zero(y); });
    }

    Partitioning out;
    out.variable_count = varmap.size();
    std::set<std::size_t> cut;
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        const auto &edge = graph.edge(e);
        for (auto s : parts) {
            const bool l = (s >> edge.left) & 1, r = (s >> edge.right) & 1;
            if (l != r) cut.insert(e);
        }
    }
    out.cut_edges.assign(cut.begin(), cut.end());
    for (auto e : out.cut_edges)
        for (std::size_t t = 1; t <= varmap.steps(); ++t) out.shared.push_back(varmap.var(e, t));
    std::sort(out.shared.begin(), out.shared.end());

    for (auto s : parts) {
        Part part;
        part.relations = s;
        part.edges = incident_edges(graph, s);
        for (auto e : part.edges) {
            for (std::size_t t = 1; t <= varmap.steps(); ++t) part.variables.push_back(varmap.var(e, t));
            double c = 1.0;
            if (model) {
                const auto &edge = graph.edge(e);
                c = std::max(1.0, std::log(model->estimate(edge.relations())));
            }
            part.cost_estimate += c;
        }
        std::sort(part.variables.begin(), part.variables.end());
        out.parts.push_back(std::move(part));
    }
    return out;
}


void qjo::attach_subproblems(Partitioning &partitioning, const Qubo &full)
{
    if (full.size() != partitioning.variable_count) throw std::invalid_argument("QUBO does not match partitioning");
    const std::size_t n = full.size();
    const std::size_t np = partitioning.parts.size();

    // owners[v]: parts containing v
    std::vector<std::vector<std::size_t>> owners(n);
    for (std::size_t p = 0; p < np; ++p)
        for (auto v : partitioning.parts[p].variables) owners[v].push_back(p);
    auto local = [&](std::size_t p, Var v) {
        const auto &vars = partitioning.parts[p].variables;
        return Var(std::lower_bound(vars.begin(), vars.end(), v) - vars.begin());
    };

    std::vector<QuboBuilder> builders;
    for (const auto &part : partitioning.parts) builders.emplace_back(std::max<std::size_t>(1, part.variables.size()));
    QuboBuilder interface(n);
    interface.add_offset(full.offset());

    for (Var i = 0; i < n; ++i) {
        const double h = full.linear(i);
        if (h == 0.0) continue;
        if (owners[i].empty()) {
            interface.add_linear(i, h, full.linear_class(i));
            continue;
        }
        const double share = h / double(owners[i].size());
        for (auto p : owners[i]) builders[p].add_linear(local(p, i), share, full.linear_class(i));
    }
    for (const auto &c : full.couplings()) {
        std::vector<std::size_t> common;
        std::set_intersection(owners[c.i].begin(), owners[c.i].end(), owners[c.j].begin(), owners[c.j].end(),
                              std::back_inserter(common));
        if (common.empty()) {
            interface.add_quadratic(c.i, c.j, c.value, c.cls);
            continue;
        }
        const double share = c.value / double(common.size());
        for (auto p : common) builders[p].add_quadratic(local(p, c.i), local(p, c.j), share, c.cls);
    }

    for (std::size_t p = 0; p < np; ++p) partitioning.parts[p].sub_qubo = builders[p].build();
    partitioning.interface = interface.build();
}


Qubo qjo::reconstruct(const Partitioning &partitioning)
{
    if (not partitioning.interface) throw std::logic_error("subproblems not attached");
    QuboBuilder b(partitioning.variable_count);
    const Qubo &iface = *partitioning.interface;
    b.add_offset(iface.offset());
    for (Var i = 0; i < iface.size(); ++i) b.add_linear(i, iface.linear(i), iface.linear_class(i));
    for (const auto &c : iface.couplings()) b.add_quadratic(c.i, c.j, c.value, c.cls);
    for (const auto &part : partitioning.parts) {
        const Qubo &q = *part.sub_qubo;
        b.add_offset(q.offset());
        for (Var i = 0; i < q.size() and i < part.variables.size(); ++i)
            b.add_linear(part.variables[i], q.linear(i), q.linear_class(i));
        for (const auto &c : q.couplings())
            b.add_quadratic(part.variables[c.i], part.variables[c.j], c.value, c.cls);
    }
    return b.build();
}
