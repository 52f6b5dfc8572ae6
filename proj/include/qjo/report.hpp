#pragma once

#include <qjo/orchestrator.hpp>

#include <optional>
#include <string>
#include <vector>

namespace qjo {

inline constexpr const char *kTimingColumns =
    "iteration,ingress_ms,solve_ms,egress_ms,end_to_end_ms,qpu_programming_ms,qpu_sampling_ms,qpu_access_ms,"
    "refine_ms,kl,best_cost,violations";

/// One row per traced iteration under the kTimingColumns header.
std::string timing_csv(const Solution &solution);

struct BenchRow
{
    std::string query;
    std::uint64_t seed;
    Strategy strategy;
    std::size_t relations;
    double solver_cost;
    std::optional<double> oracle_cost; ///< empty when the query is too large for the DP oracle
    bool degraded;
    std::string hint;
};

inline constexpr const char *kBenchColumns =
    "query,seed,strategy,relations,solver_cost,oracle_cost,ratio,degraded,hint";

/// Rows sorted by (query, seed).
std::string bench_csv(std::vector<BenchRow> rows);

/// Shortest round-trip decimal text, '.' separator.
std::string format_real(double v);
std::string format_ms(double v);

}
