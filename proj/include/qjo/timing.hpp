#pragma once

#include <chrono>
#include <cstddef>

namespace qjo {

/// Where lifecycle durations come from. `Wall` measures real time. `Modeled` charges durations from work counts
/// with fixed per-unit costs, which makes budget admission, iteration counts and timing reports reproducible.
enum class ClockMode { Wall, Modeled };

/// Per-unit costs used by ClockMode::Modeled, roughly calibrated against the wall-clock implementation.
struct WorkModel
{
    static constexpr double sampler_call_ms = 0.02;
    static constexpr double ns_per_spin_visit = 1.5;   ///< one Metropolis proposal
    static constexpr double ns_per_field_update = 0.8; ///< one neighbour field update (charged per coupling)
    static constexpr double ns_per_decoded_var = 12.0; ///< decode_and_repair, per variable per sample
    static constexpr double ns_per_pair_op = 25.0;     ///< scoring, pruning or moment computation per pair

    static double sampler_ms(std::size_t reads, std::size_t sweeps, std::size_t variables, std::size_t couplings)
    {
        return sampler_call_ms + 1e-6 * double(reads) * double(sweeps) *
                                     (ns_per_spin_visit * double(variables) + ns_per_field_update * double(couplings));
    }

    static double refine_ms(std::size_t samples, std::size_t variables, std::size_t pairs)
    {
        return 1e-6 * (ns_per_decoded_var * double(samples) * double(variables) + ns_per_pair_op * double(pairs));
    }
};

class Stopwatch
{
    public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}

    double elapsed_ms() const
    {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

    private:
    std::chrono::steady_clock::time_point start_;
};

}
