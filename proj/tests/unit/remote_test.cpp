#include <qjo/remote.hpp>

#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace qjo;

namespace {

Qubo two_var()
{
    QuboBuilder b(2);
    b.add_linear(0, -1.0).add_quadratic(0, 1, 2.0).add_offset(0.5);
    return b.build();
}

}

TEST(Remote, InterchangeRoundTrip)
{
    const Qubo q = oracle::random_qubo(7, 0.5, 9);
    const Qubo back = qubo_from_interchange(qubo_to_interchange(q));
    ASSERT_EQ(back.size(), q.size());
    for (Var i = 0; i < q.size(); ++i) EXPECT_DOUBLE_EQ(back.linear(i), q.linear(i));
    ASSERT_EQ(back.couplings().size(), q.couplings().size());
    for (std::size_t k = 0; k < q.couplings().size(); ++k) {
        EXPECT_EQ(back.couplings()[k].i, q.couplings()[k].i);
        EXPECT_EQ(back.couplings()[k].j, q.couplings()[k].j);
        EXPECT_DOUBLE_EQ(back.couplings()[k].value, q.couplings()[k].value);
    }
    EXPECT_THROW(qubo_from_interchange(nlohmann::json::parse(R"({"n": 2, "linear": [[5, 1.0]]})")), ProtocolError);
}

TEST(Remote, TimingLegsFromStamps)
{
    const Qubo q = two_var();
    const auto set = aggregate_samples(q, {Assignment(std::vector<std::uint8_t>{1, 0})});
    const ServiceStamps stamps{0.0, 87.896, 449.110, 571.274, 15.760, 26.356};
    std::vector<std::string> warnings;
    const auto parsed = parse_sample_response(encode_sample_response(set, stamps), q, warnings);
    EXPECT_NEAR(parsed.timing.ingress_ms, 87.896, 1e-9);
    EXPECT_NEAR(parsed.timing.solve_ms, 361.214, 1e-9);
    EXPECT_NEAR(parsed.timing.egress_ms, 122.164, 1e-9);
    EXPECT_NEAR(parsed.timing.end_to_end_ms, 571.274, 1e-9);
    EXPECT_NEAR(parsed.timing.qpu_access_ms, 42.116, 1e-9);
    EXPECT_TRUE(warnings.empty());
}

TEST(Remote, MalformedResponses)
{
    const Qubo q = two_var();
    std::vector<std::string> w;
    EXPECT_THROW(parse_sample_response("not json", q, w), ProtocolError);
    EXPECT_THROW(parse_sample_response(R"({"samples": [[1, 0]]})", q, w), ProtocolError);
    EXPECT_THROW(parse_sample_response(R"({"samples": [[1, 0, 1]], "energies": [0], "occurrences": [1],
        "timing": {"created": 0, "received": 1, "solved": 2, "resolved": 3, "qpu_programming_ms": 0,
                   "qpu_sampling_ms": 0}})",
                                       q, w),
                 ProtocolError);
}

TEST(Remote, WrongEnergyIsReplacedWithWarning)
{
    const Qubo q = two_var();
    std::vector<std::string> w;
    const auto set = parse_sample_response(R"({"samples": [[1, 0]], "energies": [99.0], "occurrences": [3],
        "timing": {"created": 0, "received": 1, "solved": 2, "resolved": 3, "qpu_programming_ms": 0,
                   "qpu_sampling_ms": 0}})",
                                           q, w);
    ASSERT_EQ(set.rows.size(), 1u);
    EXPECT_DOUBLE_EQ(set.rows[0].energy, -0.5);
    EXPECT_EQ(set.rows[0].occurrences, 3u);
    EXPECT_EQ(w.size(), 1u);
}

TEST(Remote, LoopbackMatchesLocalSampler)
{
    LoopbackAnnealer server;
    const Qubo q = oracle::random_qubo(10, 0.4, 31);
    SamplerParams p;
    p.seed = 5;
    p.num_reads = 16;
    p.sweeps = 150;
    const auto remote = remote_roundtrip(q, p, server.endpoint());
    const auto local = sa_sample(q, p);
    EXPECT_DOUBLE_EQ(remote.best().energy, local.best().energy);
    EXPECT_EQ(remote.best().assignment, local.best().assignment);
    EXPECT_EQ(remote.total_occurrences(), 16u);
    EXPECT_GE(remote.timing.end_to_end_ms, remote.timing.solve_ms);

    RemoteSampler sampler(server.endpoint());
    EXPECT_DOUBLE_EQ(sampler.sample(q, p).best().energy, local.best().energy);
}

TEST(Remote, UnreachableEndpoint)
{
    int port = 0;
    {
        LoopbackAnnealer server;
        port = server.port();
    }
    EXPECT_THROW(remote_roundtrip(two_var(), SamplerParams{}, "http://127.0.0.1:" + std::to_string(port)),
                 TransportError);
}

TEST(Remote, RequestCarriesParameters)
{
    SamplerParams p;
    p.num_reads = 7;
    p.sweeps = 33;
    p.seed = 12;
    const auto doc = nlohmann::json::parse(encode_sample_request(two_var(), p, 123.0));
    EXPECT_EQ(doc.at("num_reads"), 7);
    EXPECT_EQ(doc.at("annealing_time_us"), 33);
    EXPECT_EQ(doc.at("seed"), 12);
    EXPECT_EQ(doc.at("created"), 123.0);
    EXPECT_EQ(doc.at("n"), 2);
}
