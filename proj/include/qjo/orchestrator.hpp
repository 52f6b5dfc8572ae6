#pragma once

#include <qjo/budget.hpp>
#include <qjo/decomp.hpp>
#include <qjo/encoding.hpp>
#include <qjo/relax.hpp>
#include <qjo/sampler.hpp>

#include <optional>
#include <string>
#include <vector>

namespace qjo {

enum class Strategy { Direct, Relax, Decompose };

const char * to_string(Strategy s);
/// "direct", "relax", "decompose"; throws std::invalid_argument otherwise.
Strategy parse_strategy(std::string_view text);

struct RouteThresholds
{
    std::size_t capacity = 128;
    double density = 0.25;
};

/// DECOMPOSE above capacity, else RELAX above the density threshold, else DIRECT.
Strategy route(const QuboMetrics &metrics, const RouteThresholds &thresholds = {});

struct SolveConfig
{
    double tau_ms = 1000.0;
    ClockMode clock = ClockMode::Wall;
    std::optional<Strategy> force;
    RouteThresholds thresholds;
    EncodingWeights weights;
    SamplerParams sampler;
    RelaxConfig relax;
    ComposeConfig compose;
    AllocationConfig allocation;
    std::size_t tabu_moves = 2000;
    std::size_t hardware_nodes_per_variable = 6;
};

struct TraceEntry
{
    std::size_t iteration; ///< 1-based
    SamplerTiming timing;
    LifecycleRecord record;
    double kl;
    double best_cost;      ///< best-so-far
    std::size_t violations;
    std::size_t active_pairs;
};

struct Solution
{
    PlanTree plan;
    double cost;
    std::string hint;
    Strategy strategy;
    bool degraded = false;
    double tau_ms;
    double time_quantum_ms;
    std::vector<LifecycleRecord> lifecycle;
    std::vector<TraceEntry> trace;
    QuboMetrics metrics;
    std::size_t parts = 1;
    std::string stop;
};

/// Encode, route and run the chosen strategy under the budget. A sampling iteration starts only while the budget
/// clock admits it. If the first iteration cannot start or ends after tau, the greedy repair of the empty
/// assignment is returned with `degraded` set.
Solution solve(const Catalog &catalog, const QuerySpec &query, Sampler &sampler, const SolveConfig &config);

/// Stable JSON rendering of every field, for reproducibility checks.
std::string serialize_solution(const Solution &solution);

}
