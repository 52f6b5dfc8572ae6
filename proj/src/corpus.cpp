#include <qjo/corpus.hpp>

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>


using namespace qjo;


const char * qjo::to_string(Topology t)
{
    switch (t) {
        case Topology::Chain: return "chain";
        case Topology::Star: return "star";
        case Topology::Cycle: return "cycle";
        case Topology::Clique: return "clique";
    }
    return "?";
}


namespace {

std::vector<std::pair<std::size_t, std::size_t>> shape(Topology t, std::size_t n)
{
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    switch (t) {
        case Topology::Chain:
            for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
            break;
        case Topology::Star:
            for (std::size_t i = 1; i < n; ++i) edges.emplace_back(0, i);
            break;
        case Topology::Cycle:
            for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
            if (n > 2) edges.emplace_back(0, n - 1);
            break;
        case Topology::Clique:
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
            break;
    }
    return edges;
}

double log_uniform(std::mt19937_64 &rng, double lo, double hi)
{
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

void add_query(std::vector<Relation> &relations, std::vector<Predicate> &predicates, std::vector<QuerySpec> &queries,
               Topology t, std::size_t n, std::size_t index, std::mt19937_64 &rng, const CorpusConfig &c)
{
    char id[64];
    std::snprintf(id, sizeof id, "%s_%03zu", to_string(t), index);
    QuerySpec q;
    q.id = id;
    for (std::size_t i = 0; i < n; ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "q%zu_r%zu", index, i);
        const double card = std::round(log_uniform(rng, c.min_cardinality, c.max_cardinality));
        relations.push_back({name, std::max(1.0, card)});
        q.relations.push_back(name);
    }
    const std::size_t base = relations.size() - n;
    for (const auto &[a, b] : shape(t, n)) {
        const double sel = std::min(1.0, log_uniform(rng, c.min_selectivity, c.max_selectivity));
        q.predicates.push_back(predicates.size());
        predicates.push_back({relations[base + a].name, relations[base + b].name, sel});
    }
    queries.push_back(std::move(q));
}

}


Workload qjo::generate_corpus(const CorpusConfig &config)
{
    if (config.min_relations < 2 or config.max_relations < config.min_relations or
        config.max_relations > kMaxQueryRelations)
        throw std::invalid_argument("bad relation count range");
    std::mt19937_64 rng(config.seed);
    std::uniform_int_distribution<std::size_t> size(config.min_relations, config.max_relations);
    std::vector<Relation> relations;
    std::vector<Predicate> predicates;
    std::vector<QuerySpec> queries;
    for (std::size_t k = 0; k < config.count; ++k)
        add_query(relations, predicates, queries, Topology(k % 4), size(rng), k, rng, config);
    return {Catalog(std::move(relations), std::move(predicates)), std::move(queries)};
}

Workload qjo::generate_query(Topology topology, std::size_t n, std::uint64_t seed, const CorpusConfig &ranges)
{
    if (n < 2 or n > kMaxQueryRelations) throw std::invalid_argument("bad relation count");
    std::mt19937_64 rng(seed);
    std::vector<Relation> relations;
    std::vector<Predicate> predicates;
    std::vector<QuerySpec> queries;
    add_query(relations, predicates, queries, topology, n, 0, rng, ranges);
    return {Catalog(std::move(relations), std::move(predicates)), std::move(queries)};
}
