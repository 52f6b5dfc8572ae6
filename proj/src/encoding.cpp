#include <qjo/encoding.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>


using namespace qjo;


Var VarMap::var(std::size_t edge, std::size_t step) const
{
    if (edge >= edges_ or step == 0 or step > steps_)
        throw std::out_of_range("(edge, step) outside the variable layout");
    return static_cast<Var>(edge * steps_ + (step - 1));
}

JoinOrderEncoding qjo::encode_join_order(const Catalog &catalog, const QuerySpec &query, const JoinGraph &graph,
                                         const EncodingWeights &weights)
{
    if (not (weights.cost_weight >= 0 and weights.adjacency_weight >= 0 and weights.penalty_factor > 0 and
             weights.min_penalty > 0))
        throw std::invalid_argument("encoding weights must be non-negative with positive penalty settings");

    CostModel model(catalog, query);
    const std::size_t n_rel = graph.relation_count();
    const std::size_t steps = n_rel - 1;
    const std::size_t edges = graph.edge_count();
    VarMap varmap(edges, steps);

    std::vector<double> log_card(edges);
    for (std::size_t e = 0; e != edges; ++e)
        log_card[e] = std::log(model.estimate_unchecked(graph.edge(e).relations()));

    // objective magnitudes fix the penalty before anything is emitted
    double max_objective = 0.0;
    for (std::size_t e = 0; e != edges; ++e)
        for (std::size_t t = 1; t <= steps; ++t)
            max_objective = std::max(max_objective, weights.cost_weight * log_card[e] * double(n_rel - t));
    if (steps > 1 and not graph.op_adjacency().empty())
        max_objective = std::max(max_objective, weights.adjacency_weight);
    const double P = std::max(weights.penalty_factor * max_objective, weights.min_penalty);

    QuboBuilder full(varmap.size());
    QuboBuilder penalty(varmap.size());
    auto constraint_linear = [&](Var v, double value) {
        full.add_linear(v, value, TermClass::Constraint);
        penalty.add_linear(v, value, TermClass::Constraint);
    };
    auto constraint_pair = [&](Var a, Var b, double value) {
        full.add_quadratic(a, b, value, TermClass::Constraint);
        penalty.add_quadratic(a, b, value, TermClass::Constraint);
    };

    // H1: P (sum_e x - 1)^2 = P (1 - sum_e x + 2 sum_{e<f} x_e x_f) on binaries
    for (std::size_t t = 1; t <= steps; ++t) {
        full.add_offset(P);
        penalty.add_offset(P);
        for (std::size_t e = 0; e != edges; ++e) {
            constraint_linear(varmap.var(e, t), -P);
            for (std::size_t f = e + 1; f != edges; ++f)
                constraint_pair(varmap.var(e, t), varmap.var(f, t), 2.0 * P);
        }
    }
    // H2
    for (std::size_t e = 0; e != edges; ++e)
        for (std::size_t t = 1; t <= steps; ++t)
            for (std::size_t u = t + 1; u <= steps; ++u)
                constraint_pair(varmap.var(e, t), varmap.var(e, u), P);

    for (std::size_t e = 0; e != edges; ++e)
        for (std::size_t t = 1; t <= steps; ++t)
            full.add_linear(varmap.var(e, t), weights.cost_weight * log_card[e] * double(n_rel - t),
                            TermClass::Objective);
    if (weights.adjacency_weight > 0) {
        for (auto [e, f] : graph.op_adjacency()) {
            for (std::size_t t = 1; t < steps; ++t) {
                full.add_quadratic(varmap.var(e, t), varmap.var(f, t + 1), -weights.adjacency_weight,
                                   TermClass::Objective);
                full.add_quadratic(varmap.var(f, t), varmap.var(e, t + 1), -weights.adjacency_weight,
                                   TermClass::Objective);
            }
        }
    }

    return {full.build(), penalty.build(), varmap, P, std::move(log_card)};
}

DecodedPlan qjo::decode_and_repair(const VarMap &varmap, const JoinGraph &graph, const CostModel &model,
                                   const Assignment &s)
{
    if (s.size() != varmap.size())
        throw std::invalid_argument("assignment length does not match the variable layout");
    if (varmap.edges() != graph.edge_count() or varmap.steps() + 1 != graph.relation_count())
        throw std::invalid_argument("variable layout does not belong to this join graph");

    DecodeReport report;
    std::vector<std::size_t> per_step(varmap.steps() + 1, 0);
    std::vector<std::size_t> per_edge(varmap.edges(), 0);
    // variables are edge-major; collect (step, edge) so that selected joins sort by step, then edge
    std::vector<std::pair<std::size_t, std::size_t>> selected;
    for (Var v = 0; v != s.size(); ++v) {
        if (not s[v]) continue;
        std::size_t e = varmap.edge_of(v), t = varmap.step_of(v);
        selected.emplace_back(t, e);
        ++per_step[t];
        ++per_edge[e];
    }
    std::sort(selected.begin(), selected.end());
    report.selected = selected.size();
    for (std::size_t t = 1; t <= varmap.steps(); ++t) report.h1_violations += per_step[t] != 1;
    for (std::size_t c : per_edge) report.h2_violations += c > 1;

    const std::size_t n = graph.relation_count();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<RelSet> members(n);
    for (std::size_t i = 0; i != n; ++i) members[i] = RelSet(1) << i;
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    JoinOrderSequence applied;
    std::vector<bool> used(graph.edge_count(), false);
    auto apply = [&](std::size_t e) {
        std::size_t a = find(graph.edge(e).left), b = find(graph.edge(e).right);
        parent[b] = a;
        members[a] |= members[b];
        used[e] = true;
        applied.edges.push_back(e);
    };

    for (auto [t, e] : selected) {
        if (used[e]) {
            ++report.skipped_duplicates;
            continue;
        }
        if (find(graph.edge(e).left) == find(graph.edge(e).right)) {
            ++report.skipped_redundant;
            continue;
        }
        apply(e);
    }

    while (applied.edges.size() + 1 < n) {
        std::size_t best_edge = graph.edge_count();
        double best_card = std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e != graph.edge_count(); ++e) {
            std::size_t a = find(graph.edge(e).left), b = find(graph.edge(e).right);
            if (a == b) continue;
            double card = model.estimate_unchecked(members[a] | members[b]);
            if (card < best_card) {
                best_card = card;
                best_edge = e;
            }
        }
        if (best_edge == graph.edge_count())
            throw std::logic_error("join graph is disconnected; cannot complete the plan");
        apply(best_edge);
        ++report.greedy_added;
    }

    PlanTree plan = plan_from_sequence(graph, applied);
    double cost = model.cost(plan);
    return {std::move(plan), std::move(applied), report, cost};
}
