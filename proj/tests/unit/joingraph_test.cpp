#include <qjo/corpus.hpp>
#include <qjo/joingraph.hpp>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace qjo;

namespace {

JoinGraph graph_of(const Workload &w) { return build_join_graph(w.queries.front(), w.catalog); }

}

TEST(JoinGraph, ChainLineGraph)
{
    const auto g = graph_of(fixture::chain(3));
    EXPECT_EQ(g.edge_count(), 2u);
    EXPECT_EQ(g.op_adjacency().size(), 1u);
}

TEST(JoinGraph, StarLineGraphIsTriangle)
{
    const auto g = graph_of(fixture::star(4));
    EXPECT_EQ(g.edge_count(), 3u);
    EXPECT_EQ(g.op_adjacency().size(), 3u);
}

TEST(JoinGraph, CliqueOfFour)
{
    const auto g = graph_of(fixture::clique(4));
    EXPECT_EQ(g.edge_count(), 6u);
    // each edge of K4 shares a vertex with 4 others: 6 * 4 / 2
    std::size_t links = 0;
    for (std::size_t e = 0; e < g.edge_count(); ++e)
        for (std::size_t f = e + 1; f < g.edge_count(); ++f)
            links += (g.edge(e).relations() & g.edge(f).relations()) != 0;
    EXPECT_EQ(links, 12u);
    EXPECT_EQ(g.op_adjacency().size(), links);
}

TEST(JoinGraph, ParallelPredicatesCollapse)
{
    const auto w = fixture::make({10, 20}, {{0, 1, 0.5}, {1, 0, 0.5}});
    const auto g = graph_of(w);
    ASSERT_EQ(g.edge_count(), 1u);
    EXPECT_EQ(g.edge(0).predicates.size(), 2u);
    EXPECT_DOUBLE_EQ(CostModel(w.catalog, w.queries.front()).estimate(0b11), 50.0);
}

TEST(JoinGraph, ValidatePlan)
{
    const auto chain = graph_of(fixture::chain(3));
    const auto ab = *chain.edge_between(0, 1), bc = *chain.edge_between(1, 2);
    const auto ok = validate_plan(chain, {{ab, bc}});
    EXPECT_EQ(ok.violation_count(), 0u);
    EXPECT_TRUE(ok.spanning_tree);

    const auto dup = validate_plan(chain, {{ab, ab}});
    EXPECT_EQ(dup.duplicate_steps, std::vector<std::size_t>{1});
    EXPECT_FALSE(dup.spanning_tree);

    const auto k3 = graph_of(fixture::clique(3));
    const auto cyc = validate_plan(k3, {{*k3.edge_between(0, 1), *k3.edge_between(1, 2), *k3.edge_between(0, 2)}});
    EXPECT_EQ(cyc.redundant_steps, std::vector<std::size_t>{2});

    const auto unknown = validate_plan(chain, {{ab, 99}});
    EXPECT_EQ(unknown.unknown_steps, std::vector<std::size_t>{1});
}

TEST(JoinGraph, SequenceRoundTrip)
{
    const auto w = fixture::star(5);
    const auto g = graph_of(w);
    JoinOrderSequence seq;
    for (std::size_t e = 0; e < g.edge_count(); ++e) seq.edges.push_back(e);
    const PlanTree plan = plan_from_sequence(g, seq);
    EXPECT_EQ(plan.join_count(), 4u);
    const auto back = sequence_from_plan(g, plan);
    EXPECT_TRUE(validate_plan(g, back).spanning_tree);
    EXPECT_EQ(plan_from_sequence(g, back), plan);
}

TEST(JoinGraph, CrossProductPlanRejected)
{
    const auto w = fixture::chain(3);
    const auto g = graph_of(w);
    const auto plan = PlanTree::join(PlanTree::join(PlanTree::leaf("r0"), PlanTree::leaf("r2")), PlanTree::leaf("r1"));
    EXPECT_THROW(sequence_from_plan(g, plan), std::invalid_argument);
}

TEST(Oracle, TwoRelations)
{
    const auto w = fixture::abc();
    const auto best = dp_optimal_plan(w.catalog, w.query("ab"));
    EXPECT_EQ(best.plan.to_string(), "(a b)");
    EXPECT_DOUBLE_EQ(best.cost, 1000.0);
}

TEST(Oracle, ThreeRelationChain)
{
    const auto w = fixture::abc();
    const auto best = dp_optimal_plan(w.catalog, w.query("abc"));
    EXPECT_EQ(best.plan.to_string(), "((b c) a)");
    EXPECT_DOUBLE_EQ(best.cost, 1100.0);
    EXPECT_DOUBLE_EQ(oracle::brute_force_best_plan(w.catalog, w.query("abc")).cost, 1100.0);
}

TEST(Oracle, MatchesBruteForceOnRandomQueries)
{
    for (std::uint64_t seed = 0; seed < 24; ++seed) {
        const auto topology = Topology(seed % 4);
        const std::size_t n = 3 + seed % 4; // 3..6
        const Workload w = generate_query(topology, n, 1000 + seed);
        const auto &q = w.queries.front();
        const auto dp = dp_optimal_plan(w.catalog, q);
        const auto brute = oracle::brute_force_best_plan(w.catalog, q);
        EXPECT_NEAR(dp.cost, brute.cost, 1e-9 * brute.cost) << to_string(topology) << " n=" << n;
        EXPECT_NEAR(plan_cost(w.catalog, q, dp.plan), dp.cost, 1e-9 * dp.cost);
    }
}

TEST(Oracle, LowerBoundsOtherPlans)
{
    const Workload w = generate_query(Topology::Cycle, 7, 17);
    const auto &q = w.queries.front();
    const auto g = build_join_graph(q, w.catalog);
    const double best = dp_optimal_plan(w.catalog, q).cost;
    std::mt19937_64 rng(5);
    for (int k = 0; k < 50; ++k) {
        std::vector<std::size_t> order(g.edge_count());
        for (std::size_t e = 0; e < order.size(); ++e) order[e] = e;
        std::shuffle(order.begin(), order.end(), rng);
        // keep the edges that join two components
        JoinOrderSequence seq;
        std::vector<std::size_t> comp(g.relation_count());
        for (std::size_t i = 0; i < comp.size(); ++i) comp[i] = i;
        for (auto e : order) {
            const auto a = comp[g.edge(e).left], b = comp[g.edge(e).right];
            if (a == b) continue;
            for (auto &c : comp)
                if (c == b) c = a;
            seq.edges.push_back(e);
        }
        EXPECT_LE(best, plan_cost(w.catalog, q, plan_from_sequence(g, seq)) * (1 + 1e-12));
    }
}

TEST(Oracle, LimitEnforced)
{
    const auto w = fixture::chain(5);
    EXPECT_THROW(dp_optimal_plan(w.catalog, w.queries.front(), 4), std::invalid_argument);
}
