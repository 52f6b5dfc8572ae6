#include <qjo/budget.hpp>

#include <stdexcept>


using namespace qjo;


BudgetClock::BudgetClock(double tau_ms, ClockMode mode, double ema_alpha)
    : tau_ms_(tau_ms)
    , mode_(mode)
    , alpha_(ema_alpha)
{
    if (not (tau_ms > 0)) throw std::invalid_argument("time budget must be positive");
    if (not (ema_alpha > 0 and ema_alpha <= 1)) throw std::invalid_argument("EMA factor must lie in (0, 1]");
}

double BudgetClock::elapsed_ms() const
{
    return mode_ == ClockMode::Wall ? watch_.elapsed_ms() : time_quantum_ms();
}

std::optional<double> BudgetClock::admit() const
{
    const double now = elapsed_ms();
    if (not ema_) {
        if (now < tau_ms_) return now;
        return std::nullopt;
    }
    if (now + *ema_ <= tau_ms_) return now;
    return std::nullopt;
}

void BudgetClock::record(const LifecycleRecord &r)
{
    if (r.quantum_ms < 0 or r.comm_ms < 0 or r.refine_ms < 0)
        throw std::invalid_argument("lifecycle components must be non-negative");
    records_.push_back(r);
    ema_ = ema_ ? alpha_ * r.duration_ms() + (1.0 - alpha_) * *ema_ : r.duration_ms();
}

double BudgetClock::time_quantum_ms() const
{
    double total = 0.0;
    for (const auto &r : records_) total += r.quantum_ms + r.comm_ms + r.refine_ms;
    return total;
}
