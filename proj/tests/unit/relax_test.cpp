#include <qjo/corpus.hpp>
#include <qjo/relax.hpp>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace qjo;

namespace {

struct Scenario
{
    Workload w;
    JoinGraph g;
    CostModel model;
    JoinOrderEncoding enc;

    explicit Scenario(Workload wl)
        : w(std::move(wl)), g(build_join_graph(w.queries.front(), w.catalog)), model(w.catalog, w.queries.front()),
          enc(encode_join_order(w.catalog, w.queries.front(), g))
    { }
};

Workload only(const Workload &w, const std::string &id)
{
    Workload out{w.catalog, {w.query(id)}};
    return out;
}

Assignment random_bits(std::size_t n, std::mt19937_64 &rng)
{
    Assignment a(n);
    for (auto &b : a.bits) b = rng() & 1;
    return a;
}

}

TEST(Scores, ConstraintPairIsProtected)
{
    const Scenario s(only(fixture::abc(), "abc"));
    const auto scores = score_correlations(s.enc.qubo, s.enc.varmap, s.g, s.model, RelaxConfig{});
    const double P = s.enc.penalty_weight;
    for (std::size_t p = 0; p < scores.size(); ++p) {
        const auto &c = s.enc.qubo.couplings()[p];
        if (c.cls == TermClass::Constraint and std::abs(std::abs(c.value) - P) < 1e-12)
            EXPECT_NEAR(scores[p], 10 * P, 1e-9);
    }
}

TEST(Scores, ObjectiveScaledBySharedCardinality)
{
    // chain r0-r1-r2-r3; the joins r0r1+r1r2 cover 1000 rows, r1r2+r2r3 cover 10
    const Scenario s(fixture::make({1000, 1, 1, 10}, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}}));
    const auto scores = score_correlations(s.enc.qubo, s.enc.varmap, s.g, s.model, RelaxConfig{});
    std::vector<double> wide, narrow;
    for (std::size_t p = 0; p < scores.size(); ++p) {
        const auto &c = s.enc.qubo.couplings()[p];
        if (c.cls != TermClass::Objective) continue;
        const RelSet covered =
            s.g.edge(s.enc.varmap.edge_of(c.i)).relations() | s.g.edge(s.enc.varmap.edge_of(c.j)).relations();
        (covered & 1 ? wide : narrow).push_back(scores[p]);
    }
    ASSERT_FALSE(wide.empty());
    ASSERT_FALSE(narrow.empty());
    for (double a : wide)
        for (double b : narrow) EXPECT_NEAR(a / b, 100.0, 1e-9);
}

TEST(Scores, ConstraintsOutrankObjectivesOnChain)
{
    const Scenario s(only(fixture::abc(), "abc"));
    const auto scores = score_correlations(s.enc.qubo, s.enc.varmap, s.g, s.model, RelaxConfig{});
    double min_c = 1e300, max_o = 0;
    for (std::size_t p = 0; p < scores.size(); ++p)
        (s.enc.qubo.couplings()[p].cls == TermClass::Constraint ? min_c = std::min(min_c, scores[p])
                                                                : max_o = std::max(max_o, scores[p]));
    EXPECT_GT(min_c, max_o);
}

TEST(Prune, KeepAllAtRhoOne)
{
    const Scenario s(fixture::star(4));
    auto q = std::make_shared<const Qubo>(s.enc.qubo);
    RelaxConfig c;
    c.keep_fraction = 1.0;
    const auto r = prune(q, score_correlations(*q, s.enc.varmap, s.g, s.model, c), c);
    EXPECT_EQ(r.active_count(), q->couplings().size());
}

TEST(Prune, TopHalfOfFour)
{
    QuboBuilder b(4);
    b.add_quadratic(0, 1, 1).add_quadratic(1, 2, 1).add_quadratic(2, 3, 1).add_quadratic(0, 3, 1);
    auto q = std::make_shared<const Qubo>(b.build());
    RelaxConfig c;
    c.keep_fraction = 0.5;
    const auto r = prune(q, {0.3, 0.9, 0.1, 0.5}, c);
    EXPECT_EQ(r.active(), (std::vector<bool>{false, true, false, true}));
    EXPECT_THROW(prune(q, {1.0}, c), std::invalid_argument);
}

TEST(Prune, ChainKeepsEveryConstraintPair)
{
    const Scenario s(only(fixture::abc(), "abc"));
    auto q = std::make_shared<const Qubo>(s.enc.qubo);
    RelaxConfig c;
    c.keep_fraction = 0.6;
    const auto r = prune(q, score_correlations(*q, s.enc.varmap, s.g, s.model, c), c);
    for (std::size_t p = 0; p < q->couplings().size(); ++p)
        if (q->couplings()[p].cls == TermClass::Constraint) EXPECT_TRUE(r.is_active(p));
}

TEST(Reduced, EffectiveKeepsLinearTermsAndCoefficients)
{
    const Qubo base = oracle::random_qubo(8, 0.6, 77);
    std::vector<bool> mask(base.couplings().size());
    for (std::size_t p = 0; p < mask.size(); ++p) mask[p] = p % 3 == 0;
    const ReducedQubo r(std::make_shared<const Qubo>(base), mask);
    const Qubo eff = r.effective();
    for (Var i = 0; i < base.size(); ++i) EXPECT_EQ(eff.linear(i), base.linear(i));
    EXPECT_EQ(eff.offset(), base.offset());
    EXPECT_EQ(eff.couplings().size(), r.active_count());
    for (const auto &c : eff.couplings()) {
        const auto idx = base.pair_index(c.i, c.j);
        ASSERT_TRUE(idx);
        EXPECT_TRUE(mask[*idx]);
        EXPECT_EQ(c.value, base.couplings()[*idx].value);
    }
}

TEST(Divergence, KnownValues)
{
    const Assignment a(std::vector<std::uint8_t>{0}), b(std::vector<std::uint8_t>{1});
    const Distribution p{{a, 0.3}, {b, 0.7}};
    EXPECT_NEAR(kl_divergence(p, p), 0.0, 1e-12);
    EXPECT_NEAR(kl_divergence({{a, 1.0}}, {{a, 0.5}, {b, 0.5}}), std::log(2.0), 1e-8);
    EXPECT_NEAR(js_divergence(p, p), 0.0, 1e-12);
    EXPECT_NEAR(js_divergence({{a, 1.0}}, {{b, 1.0}}), std::log(2.0), 1e-8);
}

TEST(Divergence, MatchesDirectSummation)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        Distribution p, q;
        double zp = 0, zq = 0;
        for (unsigned x = 0; x < 8; ++x) {
            Assignment s(3);
            for (unsigned i = 0; i < 3; ++i) s.bits[i] = (x >> i) & 1;
            p[s] = u(rng);
            q[s] = u(rng);
            zp += p[s];
            zq += q[s];
        }
        for (auto &[_, v] : p) v /= zp;
        for (auto &[_, v] : q) v /= zq;
        const double got = kl_divergence(p, q);
        EXPECT_NEAR(got, oracle::direct_kl(p, q), 1e-12);
        EXPECT_GE(got, 0.0);
    }
}

TEST(Feedback, FullQuboAtZeroBeta)
{
    const Scenario s(only(fixture::abc(), "abc"));
    auto q = std::make_shared<const Qubo>(s.enc.qubo);
    const ReducedQubo r(q, std::vector<bool>(q->couplings().size(), true));
    std::mt19937_64 rng(1);
    std::vector<Assignment> reads;
    for (int k = 0; k < 30; ++k) reads.push_back(random_bits(4, rng));
    const auto set = aggregate_samples(*q, reads);
    const auto fb = analyze_feedback(*q, r, set, s.enc.varmap, s.g, s.model, 0.0);
    EXPECT_TRUE(fb.gaps.empty());
    // at beta = 0 the target is uniform over the support
    Distribution uniform;
    for (const auto &row : set.rows) uniform[row.assignment] = 1.0 / double(set.rows.size());
    EXPECT_NEAR(fb.kl, oracle::direct_kl(uniform, empirical_distribution(set)), 1e-12);
    EXPECT_EQ(fb.distinct_samples, set.rows.size());
    ASSERT_TRUE(fb.best);
}

TEST(Feedback, PointMassHasZeroDivergence)
{
    const Scenario s(only(fixture::abc(), "abc"));
    auto q = std::make_shared<const Qubo>(s.enc.qubo);
    const ReducedQubo r(q, std::vector<bool>(q->couplings().size(), false));
    const auto set = aggregate_samples(*q, std::vector<Assignment>(10, Assignment(std::vector<std::uint8_t>{1, 0, 0, 1})));
    for (double beta : {0.0, 0.1, 5.0}) EXPECT_NEAR(analyze_feedback(*q, r, set, s.enc.varmap, s.g, s.model, beta).kl, 0.0, 1e-12);
}

TEST(Feedback, GapsMatchDirectExpectations)
{
    const Scenario s(only(fixture::abc(), "abc"));
    auto q = std::make_shared<const Qubo>(s.enc.qubo);
    RelaxConfig c;
    const auto r = prune(q, score_correlations(*q, s.enc.varmap, s.g, s.model, c), c);
    SamplerParams p;
    p.seed = 3;
    p.num_reads = 40;
    p.sweeps = 30;
    const auto set = sa_sample(r.effective(), p);
    const double beta = 0.2;
    const auto fb = analyze_feedback(*q, r, set, s.enc.varmap, s.g, s.model, beta);

    // target weights exp(-beta E_full) over the support, empirical weights from occurrences
    const auto d = oracle::densify(*q);
    double e_min = 1e300;
    for (const auto &row : set.rows) e_min = std::min(e_min, oracle::dense_energy(d, row.assignment.bits));
    double z = 0;
    for (const auto &row : set.rows) z += std::exp(-beta * (oracle::dense_energy(d, row.assignment.bits) - e_min));
    const double total = double(set.total_occurrences());

    const auto inactive = r.inactive_pairs();
    ASSERT_EQ(fb.gaps.size(), inactive.size());
    for (std::size_t k = 0; k < inactive.size(); ++k) {
        const auto &cp = q->couplings()[inactive[k]];
        double mp = 0, mq = 0;
        for (const auto &row : set.rows) {
            const double both = row.assignment[cp.i] and row.assignment[cp.j];
            mp += both * std::exp(-beta * (oracle::dense_energy(d, row.assignment.bits) - e_min)) / z;
            mq += both * double(row.occurrences) / total;
        }
        EXPECT_EQ(fb.gaps[k].pair, inactive[k]);
        EXPECT_NEAR(fb.gaps[k].gap, std::abs(mp - mq) * std::abs(cp.value), 1e-9);
    }
}

TEST(Reintroduce, NoInactiveIsIdentity)
{
    const Qubo base = oracle::random_qubo(5, 0.5, 1);
    const ReducedQubo r(std::make_shared<const Qubo>(base), std::vector<bool>(base.couplings().size(), true));
    EXPECT_EQ(reintroduce(r, Feedback{}, RelaxConfig{}).active(), r.active());
}

TEST(Reintroduce, ConstraintBeforeLargerObjectiveGap)
{
    QuboBuilder b(3);
    b.add_quadratic(0, 1, 1.0, TermClass::Constraint).add_quadratic(1, 2, 1.0, TermClass::Objective);
    const ReducedQubo r(std::make_shared<const Qubo>(b.build()), {false, false});
    Feedback fb;
    fb.gaps = {{0, 0.1, TermClass::Constraint, 0.0}, {1, 5.0, TermClass::Objective, 0.0}};
    RelaxConfig c;
    c.reintroduce_fraction = 0.5;
    EXPECT_EQ(reintroduce(r, fb, c).active(), (std::vector<bool>{true, false}));
}

TEST(Reintroduce, ReachesFullQubo)
{
    const Qubo base = oracle::random_qubo(9, 0.6, 2);
    ReducedQubo r(std::make_shared<const Qubo>(base), std::vector<bool>(base.couplings().size(), false));
    RelaxConfig c;
    for (int k = 0; k < 200 and r.active_count() < base.couplings().size(); ++k) {
        Feedback fb;
        for (auto p : r.inactive_pairs()) fb.gaps.push_back({p, 0.0, base.couplings()[p].cls, 0.0});
        const auto before = r.active_count();
        r = reintroduce(r, fb, c);
        EXPECT_GT(r.active_count(), before);
    }
    EXPECT_EQ(r.active_count(), base.couplings().size());
}

TEST(RelaxLoop, TwoRelationsIsSingleJoin)
{
    const Scenario s(only(fixture::abc(), "ab"));
    SimulatedAnnealingSampler sampler;
    BudgetClock clock(10'000, ClockMode::Modeled);
    const auto res = relax_loop(s.enc, s.g, s.model, sampler, SamplerParams{}, clock, RelaxConfig{});
    ASSERT_FALSE(res.trace.empty());
    EXPECT_EQ(res.best.plan.to_string(), "(a b)");
    EXPECT_EQ(res.trace.front().best_cost, 1000.0);
}

TEST(RelaxLoop, BestCostNonIncreasing)
{
    const Scenario s(only(fixture::abc(), "abc"));
    SimulatedAnnealingSampler sampler;
    BudgetClock clock(10'000, ClockMode::Modeled);
    SamplerParams p;
    p.seed = 9;
    const auto res = relax_loop(s.enc, s.g, s.model, sampler, p, clock, RelaxConfig{});
    ASSERT_GE(res.trace.size(), 1u);
    EXPECT_LE(res.trace.size(), 2u);
    for (std::size_t k = 1; k < res.trace.size(); ++k) EXPECT_LE(res.trace[k].best_cost, res.trace[k - 1].best_cost);
    EXPECT_EQ(res.best.cost, res.trace.back().best_cost);
    EXPECT_EQ(clock.records().size(), res.trace.size());
}

TEST(RelaxLoop, SixChainMedianWithinTwiceOracle)
{
    std::vector<double> ratios;
    SimulatedAnnealingSampler sampler;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Scenario s(generate_query(Topology::Chain, 6, 300 + seed));
        BudgetClock clock(10'000, ClockMode::Modeled);
        SamplerParams p;
        p.seed = seed;
        const auto res = relax_loop(s.enc, s.g, s.model, sampler, p, clock, RelaxConfig{});
        ratios.push_back(res.best.cost / dp_optimal_plan(s.w.catalog, s.w.queries.front()).cost);
    }
    std::sort(ratios.begin(), ratios.end());
    EXPECT_LE(0.5 * (ratios[9] + ratios[10]), 2.0);
}

TEST(RelaxLoop, BudgetDenialGivesGreedyPlan)
{
    const Scenario s(only(fixture::abc(), "abc"));
    SimulatedAnnealingSampler sampler;
    BudgetClock clock(1.0, ClockMode::Modeled);
    clock.record({0.0, 2.0, 0.0, 0.0});
    const auto res = relax_loop(s.enc, s.g, s.model, sampler, SamplerParams{}, clock, RelaxConfig{});
    EXPECT_TRUE(res.trace.empty());
    EXPECT_EQ(res.stop, StopReason::Budget);
    EXPECT_EQ(res.best.plan.to_string(), "((b c) a)");
}

TEST(RelaxConfig, Validation)
{
    RelaxConfig c;
    c.keep_fraction = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.max_iterations = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.stability_epsilon = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Budget, AdmissionUsesMovingAverage)
{
    BudgetClock clock(100.0, ClockMode::Modeled);
    ASSERT_TRUE(clock.admit());
    clock.record({0.0, 40.0, 0.0, 0.0});
    EXPECT_EQ(clock.ema_ms(), std::optional<double>(40.0));
    ASSERT_TRUE(clock.admit()); // 40 + 40 <= 100
    clock.record({40.0, 20.0, 5.0, 5.0});
    EXPECT_DOUBLE_EQ(*clock.ema_ms(), 35.0);
    EXPECT_DOUBLE_EQ(clock.time_quantum_ms(), 70.0);
    EXPECT_FALSE(clock.admit()); // 70 + 35 > 100
}
