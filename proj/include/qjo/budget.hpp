#pragma once

#include <qjo/timing.hpp>

#include <optional>
#include <vector>

namespace qjo {

/// Time spent in one sampling-and-refinement iteration of the quantum lifecycle.
struct LifecycleRecord
{
    double start_ms;   ///< budget-clock reading when the iteration was admitted
    double quantum_ms; ///< T_Q: solver compute
    double comm_ms;    ///< T_C: ingress + egress
    double refine_ms;  ///< T_R: client-side refinement, decoding and composition

    double duration_ms() const { return quantum_ms + comm_ms + refine_ms; }
};

/// Budget tau and the per-iteration lifecycle records of one solve. Time_Quantum is the sum of the recorded
/// components. A new iteration is admitted only while elapsed + EMA(iteration duration) <= tau; the first one
/// only needs elapsed < tau.
class BudgetClock
{
    public:
    BudgetClock(double tau_ms, ClockMode mode, double ema_alpha = 0.5);

    double tau_ms() const { return tau_ms_; }
    ClockMode mode() const { return mode_; }

    /// Wall mode: real time since construction. Modeled mode: Time_Quantum so far.
    double elapsed_ms() const;
    std::optional<double> ema_ms() const { return ema_; }

    /// Returns the start stamp for the next iteration, or nothing if the budget denies it.
    std::optional<double> admit() const;

    void record(const LifecycleRecord &r);
    const std::vector<LifecycleRecord> & records() const { return records_; }
    double time_quantum_ms() const;
    bool exhausted() const { return elapsed_ms() > tau_ms_; }

    private:
    double tau_ms_;
    ClockMode mode_;
    double alpha_;
    Stopwatch watch_;
    std::vector<LifecycleRecord> records_;
    std::optional<double> ema_;
};

}
