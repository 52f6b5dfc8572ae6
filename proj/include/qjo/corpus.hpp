#pragma once

#include <qjo/catalog.hpp>

#include <cstdint>
#include <string>

namespace qjo {

enum class Topology { Chain, Star, Cycle, Clique };

const char * to_string(Topology t);

struct CorpusConfig
{
    std::size_t count = 200;
    std::size_t min_relations = 4;
    std::size_t max_relations = 8;
    double min_cardinality = 10;
    double max_cardinality = 1e6;
    double min_selectivity = 1e-4;
    double max_selectivity = 1.0;
    std::uint64_t seed = 2024;
};

/// Seeded random join queries cycling through chain, star, cycle and clique shapes. Cardinalities and
/// selectivities are log-uniform. Query k uses its own relations `q<k>_r<i>`; ids are `<shape>_<k>`.
Workload generate_corpus(const CorpusConfig &config = {});

/// One query of the given shape with `relations` relations.
Workload generate_query(Topology topology, std::size_t relations, std::uint64_t seed,
                        const CorpusConfig &ranges = {});

}
