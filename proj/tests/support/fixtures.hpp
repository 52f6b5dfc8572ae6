#pragma once

#include <qjo/catalog.hpp>
#include <qjo/joingraph.hpp>

#include <string>
#include <vector>

namespace fixture {

// a(1000) - b(100) - c(10), sel(a,b) = 0.01, sel(b,c) = 0.1
inline const char *kAbc = R"({
  "relations": [{"name": "a", "cardinality": 1000}, {"name": "b", "cardinality": 100},
                {"name": "c", "cardinality": 10}],
  "predicates": [{"left": "a", "right": "b", "selectivity": 0.01},
                 {"left": "b", "right": "c", "selectivity": 0.1}],
  "queries": [{"id": "ab", "relations": ["a", "b"], "predicates": [0]},
              {"id": "abc", "relations": ["a", "b", "c"], "predicates": [0, 1]}]
})";

inline qjo::Workload abc() { return qjo::load_workload(kAbc); }

/// Relations named r0..r{n-1} with the given cardinalities and one predicate per (left, right, selectivity).
struct EdgeSpec
{
    std::size_t left, right;
    double selectivity;
};

inline qjo::Workload make(const std::vector<double> &cards, const std::vector<EdgeSpec> &edges)
{
    std::vector<qjo::Relation> rels;
    for (std::size_t i = 0; i < cards.size(); ++i) rels.push_back({"r" + std::to_string(i), cards[i]});
    std::vector<qjo::Predicate> preds;
    qjo::QuerySpec q{"q", {}, {}};
    for (const auto &r : rels) q.relations.push_back(r.name);
    for (std::size_t k = 0; k < edges.size(); ++k) {
        preds.push_back({rels[edges[k].left].name, rels[edges[k].right].name, edges[k].selectivity});
        q.predicates.push_back(k);
    }
    qjo::Workload w;
    w.catalog = qjo::Catalog(rels, preds);
    w.queries.push_back(q);
    return w;
}

inline qjo::Workload chain(std::size_t n, double card = 100, double sel = 0.1)
{
    std::vector<EdgeSpec> e;
    for (std::size_t i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, sel});
    return make(std::vector<double>(n, card), e);
}

inline qjo::Workload star(std::size_t n, double card = 100, double sel = 0.1)
{
    std::vector<EdgeSpec> e;
    for (std::size_t i = 1; i < n; ++i) e.push_back({0, i, sel});
    return make(std::vector<double>(n, card), e);
}

inline qjo::Workload clique(std::size_t n, double card = 100, double sel = 0.1)
{
    std::vector<EdgeSpec> e;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) e.push_back({i, j, sel});
    return make(std::vector<double>(n, card), e);
}

}
