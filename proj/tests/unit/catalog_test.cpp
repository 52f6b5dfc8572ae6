#include <qjo/catalog.hpp>

#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace qjo;

TEST(Catalog, LoadsMinimalDocument)
{
    const auto w = load_workload(R"({"relations": [{"name": "a", "cardinality": 1000}, {"name": "b", "cardinality": 100}],
        "predicates": [{"left": "a", "right": "b", "selectivity": 0.01}],
        "queries": [{"id": "q", "relations": ["a", "b"], "predicates": [0]}]})");
    EXPECT_EQ(w.catalog.relations().size(), 2u);
    EXPECT_EQ(w.queries.size(), 1u);
    EXPECT_EQ(w.query("q").relations.size(), 2u);
}

TEST(Catalog, RejectsSelectivityAboveOne)
{
    EXPECT_THROW(load_workload(R"({"relations": [{"name": "a", "cardinality": 1000}, {"name": "b", "cardinality": 100}],
        "predicates": [{"left": "a", "right": "b", "selectivity": 1.5}],
        "queries": [{"id": "q", "relations": ["a", "b"], "predicates": [0]}]})"),
                 ValidationError);
}

TEST(Catalog, RejectsDisconnectedQuery)
{
    try {
        load_workload(R"({"relations": [{"name": "a", "cardinality": 1000}, {"name": "b", "cardinality": 100},
            {"name": "c", "cardinality": 10}],
            "predicates": [{"left": "a", "right": "b", "selectivity": 0.01}],
            "queries": [{"id": "q", "relations": ["a", "c"], "predicates": []}]})");
        FAIL() << "expected a validation error";
    } catch (const ValidationError &e) {
        EXPECT_NE(std::string(e.what()).find("disconnected"), std::string::npos) << e.what();
    }
}

TEST(Catalog, MalformedJsonIsParseError)
{
    EXPECT_THROW(load_workload("{\"relations\": ["), ParseError);
    EXPECT_THROW(load_workload(R"({"relations": 3, "predicates": [], "queries": []})"), ParseError);
}

TEST(Catalog, RejectsBadCardinalityAndUnknownNames)
{
    EXPECT_THROW(load_workload(R"({"relations": [{"name": "a", "cardinality": 0.5}, {"name": "b", "cardinality": 100}],
        "predicates": [{"left": "a", "right": "b", "selectivity": 0.1}],
        "queries": []})"),
                 ValidationError);
    EXPECT_THROW(load_workload(R"({"relations": [{"name": "a", "cardinality": 10}, {"name": "b", "cardinality": 100}],
        "predicates": [{"left": "a", "right": "z", "selectivity": 0.1}],
        "queries": []})"),
                 ValidationError);
}

TEST(Catalog, EstimateCardinality)
{
    const auto w = fixture::abc();
    const auto &q = w.query("abc");
    EXPECT_DOUBLE_EQ(estimate_cardinality(w.catalog, q, {"a"}), 1000.0);
    EXPECT_DOUBLE_EQ(estimate_cardinality(w.catalog, q, {"a", "b"}), 1000.0);
    EXPECT_DOUBLE_EQ(estimate_cardinality(w.catalog, q, {"a", "b", "c"}), 1000.0);
    EXPECT_DOUBLE_EQ(estimate_cardinality(w.catalog, q, {"b", "c"}), 100.0);
    EXPECT_THROW(estimate_cardinality(w.catalog, q, {"a", "c"}), std::invalid_argument);
}

TEST(Catalog, EstimateIsOrderIndependent)
{
    const auto w = fixture::clique(6, 1000, 0.05);
    const auto &q = w.queries.front();
    std::vector<std::string> subset = q.relations;
    const double ref = estimate_cardinality(w.catalog, q, subset);
    std::mt19937 rng(3);
    for (int k = 0; k < 20; ++k) {
        std::shuffle(subset.begin(), subset.end(), rng);
        EXPECT_NEAR(estimate_cardinality(w.catalog, q, subset), ref, 1e-9 * ref);
    }
}

TEST(Catalog, PlanCost)
{
    const auto w = fixture::abc();
    const auto l = [](const char *n) { return PlanTree::leaf(n); };
    EXPECT_DOUBLE_EQ(plan_cost(w.catalog, w.query("abc"), PlanTree::join(PlanTree::join(l("a"), l("b")), l("c"))),
                     2000.0);
    EXPECT_DOUBLE_EQ(plan_cost(w.catalog, w.query("abc"), PlanTree::join(PlanTree::join(l("b"), l("c")), l("a"))),
                     1100.0);
    EXPECT_DOUBLE_EQ(plan_cost(w.catalog, w.query("ab"), PlanTree::join(l("a"), l("b"))), 1000.0);
    EXPECT_THROW(plan_cost(w.catalog, w.query("abc"), PlanTree::join(l("a"), l("b"))), std::invalid_argument);
}

TEST(Catalog, SerializationRoundTrips)
{
    const auto w = fixture::abc();
    const std::string text = serialize_workload(w);
    const auto back = load_workload(text);
    EXPECT_EQ(serialize_workload(back), text);
    EXPECT_EQ(text.back(), '\n');
}

TEST(Catalog, CardinalityFloorsAtOne)
{
    const auto w = fixture::make({10, 10}, {{0, 1, 1e-4}});
    EXPECT_DOUBLE_EQ(estimate_cardinality(w.catalog, w.queries.front(), {"r0", "r1"}), 1.0);
}
