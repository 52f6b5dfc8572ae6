#pragma once

#include <qjo/qubo.hpp>
#include <qjo/timing.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qjo {

/// Timing of one sampler call, in milliseconds. Field names follow the quantum-service breakdown: ingress is
/// created->received, solve is received->solved, egress is solved->resolved.
struct SamplerTiming
{
    double ingress_ms = 0.0;
    double solve_ms = 0.0;
    double egress_ms = 0.0;
    double end_to_end_ms = 0.0;
    double qpu_programming_ms = 0.0;
    double qpu_sampling_ms = 0.0;
    double qpu_access_ms = 0.0;

    /// Builds a consistent record; end_to_end and qpu_access are derived.
    static SamplerTiming from_parts(double ingress, double solve, double egress, double programming,
                                    double sampling);
};

struct SampleRow
{
    Assignment assignment;
    double energy;
    std::size_t occurrences;
};

/// Distinct assignments sorted by ascending energy (ties by assignment), with read multiplicities.
struct SampleSet
{
    std::vector<SampleRow> rows;
    SamplerTiming timing;

    bool empty() const { return rows.empty(); }
    const SampleRow & best() const;
    std::size_t total_occurrences() const;
};

/// Collapses identical reads, evaluates energies on `qubo` and sorts.
SampleSet aggregate_samples(const Qubo &qubo, const std::vector<Assignment> &reads, SamplerTiming timing = {});

struct AnnealSchedule
{
    std::optional<double> t_start; ///< defaults to the largest |coefficient|
    double t_end = 1e-2;
};

struct SamplerParams
{
    std::size_t num_reads = 32;
    std::size_t sweeps = 200;
    AnnealSchedule schedule;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    ClockMode clock = ClockMode::Wall;

    /// Throws std::invalid_argument unless num_reads >= 1, sweeps >= 1 and t_start >= t_end > 0.
    void validate() const;
};

/// Simulated annealing: `num_reads` independent restarts, each `sweeps` passes of single-bit Metropolis flips
/// under T_k = T_start * (T_end / T_start)^(k / sweeps), k = 1..sweeps. Read r draws from seed + r, so the
/// result does not depend on `threads`.
SampleSet sa_sample(const Qubo &qubo, const SamplerParams &params);

inline constexpr std::size_t kExhaustiveLimit = 20;

/// Every minimum-energy assignment, by Gray-code enumeration. Throws std::invalid_argument when n > limit.
SampleSet exhaustive_ground_states(const Qubo &qubo, std::size_t limit = kExhaustiveLimit);

/// Probability per assignment.
using Distribution = std::map<Assignment, double>;

/// occurrences / total. Throws std::invalid_argument on an empty set.
Distribution empirical_distribution(const SampleSet &set);

/// Source of samples for a QUBO; the local simulated annealer or a remote service.
class Sampler
{
    public:
    virtual ~Sampler() = default;
    virtual SampleSet sample(const Qubo &qubo, const SamplerParams &params) = 0;
};

class SimulatedAnnealingSampler final : public Sampler
{
    public:
    SampleSet sample(const Qubo &qubo, const SamplerParams &params) override { return sa_sample(qubo, params); }
};

}
