#include <qjo/sampler.hpp>

#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace qjo;

TEST(Sampler, SingleVariableMinimum)
{
    QuboBuilder b(1);
    b.add_linear(0, -1.0);
    const auto set = sa_sample(b.build(), SamplerParams{});
    EXPECT_EQ(set.best().assignment.bits, std::vector<std::uint8_t>{1});
    EXPECT_DOUBLE_EQ(set.best().energy, -1.0);
    EXPECT_EQ(set.total_occurrences(), 32u);
}

TEST(Sampler, SeededRunsAreIdentical)
{
    const Qubo q = oracle::random_qubo(12, 0.4, 3);
    SamplerParams p;
    p.seed = 42;
    const auto a = sa_sample(q, p), b = sa_sample(q, p);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        EXPECT_EQ(a.rows[r].assignment, b.rows[r].assignment);
        EXPECT_EQ(a.rows[r].occurrences, b.rows[r].occurrences);
        EXPECT_EQ(a.rows[r].energy, b.rows[r].energy);
    }
}

TEST(Sampler, ThreadCountDoesNotChangeResult)
{
    const Qubo q = oracle::random_qubo(10, 0.5, 6);
    SamplerParams p;
    p.seed = 7;
    const auto one = sa_sample(q, p);
    p.threads = 4;
    const auto four = sa_sample(q, p);
    ASSERT_EQ(one.rows.size(), four.rows.size());
    for (std::size_t r = 0; r < one.rows.size(); ++r) EXPECT_EQ(one.rows[r].assignment, four.rows[r].assignment);
}

TEST(Sampler, RecoversGroundStateOfRandomQubos)
{
    SamplerParams p;
    p.num_reads = 64;
    p.sweeps = 500;
    int hits = 0;
    for (std::uint64_t k = 0; k < 100; ++k) {
        const Qubo q = oracle::random_qubo(8, 0.5, 20'000 + k);
        p.seed = k;
        const double want = oracle::brute_force_min_energy(q);
        hits += std::abs(sa_sample(q, p).best().energy - want) <= 1e-9 * (1 + std::abs(want));
    }
    EXPECT_GE(hits, 95);
}

TEST(Sampler, RowsSortedAndEnergiesExact)
{
    const Qubo q = oracle::random_qubo(9, 0.5, 2);
    const auto set = sa_sample(q, SamplerParams{});
    for (std::size_t r = 0; r < set.rows.size(); ++r) {
        const double e = oracle::dense_energy(q, set.rows[r].assignment);
        EXPECT_LE(std::abs(set.rows[r].energy - e), 1e-9 * (1 + std::abs(e)));
        if (r) EXPECT_LE(set.rows[r - 1].energy, set.rows[r].energy);
    }
}

TEST(Sampler, RejectsBadParams)
{
    const Qubo q = oracle::random_qubo(3, 0.5, 1);
    SamplerParams p;
    p.num_reads = 0;
    EXPECT_THROW(sa_sample(q, p), std::invalid_argument);
    p = {};
    p.sweeps = 0;
    EXPECT_THROW(sa_sample(q, p), std::invalid_argument);
    p = {};
    p.schedule.t_start = 0.001;
    EXPECT_THROW(sa_sample(q, p), std::invalid_argument);
}

TEST(Sampler, ModeledClockChargesWork)
{
    const Qubo q = oracle::random_qubo(10, 0.5, 1);
    SamplerParams p;
    p.clock = ClockMode::Modeled;
    const auto set = sa_sample(q, p);
    EXPECT_DOUBLE_EQ(set.timing.solve_ms, WorkModel::sampler_ms(p.num_reads, p.sweeps, q.size(), q.couplings().size()));
    EXPECT_DOUBLE_EQ(set.timing.end_to_end_ms, set.timing.solve_ms);
}

TEST(Exhaustive, UniqueGroundState)
{
    QuboBuilder b(2);
    b.add_linear(0, 1.0).add_linear(1, -2.0).add_quadratic(0, 1, 3.0);
    const auto set = exhaustive_ground_states(b.build());
    ASSERT_EQ(set.rows.size(), 1u);
    EXPECT_EQ(set.rows[0].assignment.bits, (std::vector<std::uint8_t>{0, 1}));
    EXPECT_DOUBLE_EQ(set.rows[0].energy, -2.0);
}

TEST(Exhaustive, ZeroQuboTiesEverywhere)
{
    QuboBuilder b(4);
    b.add_offset(1.5);
    const auto set = exhaustive_ground_states(b.build());
    EXPECT_EQ(set.rows.size(), 16u);
    for (const auto &r : set.rows) EXPECT_DOUBLE_EQ(r.energy, 1.5);
}

TEST(Exhaustive, MatchesBruteForce)
{
    for (std::uint64_t k = 0; k < 20; ++k) {
        const Qubo q = oracle::random_qubo(3 + k % 9, 0.5, 40 + k);
        EXPECT_NEAR(exhaustive_ground_states(q).best().energy, oracle::brute_force_min_energy(q), 1e-9);
    }
    EXPECT_THROW(exhaustive_ground_states(QuboBuilder(21).build()), std::invalid_argument);
}

TEST(Distribution, Empirical)
{
    QuboBuilder b(1);
    const Qubo q = b.build();
    const auto one = aggregate_samples(q, std::vector<Assignment>(5, Assignment(1)));
    const auto d1 = empirical_distribution(one);
    ASSERT_EQ(d1.size(), 1u);
    EXPECT_DOUBLE_EQ(d1.begin()->second, 1.0);

    const Assignment zero(1), onebit(std::vector<std::uint8_t>{1});
    const auto two = aggregate_samples(q, {zero, onebit, onebit, onebit});
    const auto d2 = empirical_distribution(two);
    EXPECT_DOUBLE_EQ(d2.at(zero), 0.25);
    EXPECT_DOUBLE_EQ(d2.at(onebit), 0.75);

    const auto big = sa_sample(oracle::random_qubo(12, 0.3, 5), SamplerParams{200, 20});
    double sum = 0;
    for (const auto &[_, p] : empirical_distribution(big)) sum += p;
    EXPECT_NEAR(sum, 1.0, 1e-12);

    EXPECT_THROW(empirical_distribution(SampleSet{}), std::invalid_argument);
}

TEST(Timing, DerivedFields)
{
    const auto t = SamplerTiming::from_parts(87.896, 361.214, 122.164, 15.760, 26.356);
    EXPECT_NEAR(t.end_to_end_ms, 571.274, 1e-9);
    EXPECT_NEAR(t.qpu_access_ms, 42.116, 1e-9);
}
