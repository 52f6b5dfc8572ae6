#pragma once

#include <qjo/budget.hpp>
#include <qjo/encoding.hpp>
#include <qjo/sampler.hpp>

#include <memory>
#include <optional>
#include <vector>

namespace qjo {

struct RelaxConfig
{
    double keep_fraction = 0.5;          ///< rho: share of couplings kept by the first prune
    double reintroduce_fraction = 0.1;   ///< k: share of inactive couplings restored per iteration
    double constraint_protection = 10.0; ///< kappa: score multiplier for CONSTRAINT couplings
    std::optional<double> beta;          ///< Boltzmann inverse temperature; defaults to 1 / max|coefficient|
    std::size_t max_iterations = 2;
    double stability_epsilon = 0.05;     ///< stop when the divergence changes by less than this, relatively
    std::size_t patience = 2;            ///< stop after this many iterations without a cheaper plan
    bool entropy_fallback = true;        ///< switch to Jensen-Shannon when KL oscillates

    void validate() const;
};

/// One score per coupling of the QUBO, indexed by pair index.
using PairScores = std::vector<double>;

/// |J_ij| times kappa for CONSTRAINT couplings; |J_ij| times the normalized estimated cardinality of the relations
/// covered by both joins for OBJECTIVE couplings.
PairScores score_correlations(const Qubo &qubo, const VarMap &varmap, const JoinGraph &graph,
                              const CostModel &model, const RelaxConfig &config);

/// A QUBO with a subset of its couplings switched on. Linear terms and offset are always kept; coefficients are
/// never modified.
class ReducedQubo
{
    public:
    ReducedQubo(std::shared_ptr<const Qubo> base, std::vector<bool> active);

    const Qubo & base() const { return *base_; }
    const std::shared_ptr<const Qubo> & base_ptr() const { return base_; }
    const std::vector<bool> & active() const { return active_; }
    bool is_active(std::size_t pair) const { return active_.at(pair); }
    std::size_t active_count() const;
    std::vector<std::size_t> inactive_pairs() const;

    /// The QUBO the sampler sees: all linear terms plus the active couplings.
    Qubo effective() const;

    private:
    std::shared_ptr<const Qubo> base_;
    std::vector<bool> active_;
};

/// Keeps the top ceil(rho * |pairs|) couplings by score; ties go to the lower pair index.
ReducedQubo prune(std::shared_ptr<const Qubo> qubo, const PairScores &scores, const RelaxConfig &config);

/// sum_x p(x) ln(p(x) / q(x)) over the union support, with q smoothed by 1e-9 and renormalized.
double kl_divergence(const Distribution &p, const Distribution &q);
/// Jensen-Shannon divergence (natural log), used as the fallback stability statistic.
double js_divergence(const Distribution &p, const Distribution &q);

struct PairGap
{
    std::size_t pair;
    double gap;            ///< |<s_i s_j>_P - <s_i s_j>_Q| * |J_ij|
    TermClass cls;
    double violation_rate; ///< empirical probability that both ends are one (CONSTRAINT couplings only)
};

struct Feedback
{
    std::vector<PairGap> gaps;        ///< one per inactive coupling, in pair order
    std::size_t distinct_samples = 0;
    std::size_t constraint_violations = 0; ///< raw H1 + H2 violations summed over distinct samples
    std::size_t repairs = 0;          ///< decoder repairs summed over distinct samples
    std::optional<DecodedPlan> best;  ///< cheapest decoded plan of this sample set
    double energy_mean = 0.0;
    double energy_variance = 0.0;
    double kl = 0.0;                  ///< KL(P || Q), P the Boltzmann target on the support, Q empirical
    double js = 0.0;
};

/// Compares the empirical distribution of `samples` (drawn on `reduced`) with the Boltzmann distribution of the
/// full QUBO restricted to the sampled support, and decodes every distinct sample.
Feedback analyze_feedback(const Qubo &full, const ReducedQubo &reduced, const SampleSet &samples,
                          const VarMap &varmap, const JoinGraph &graph, const CostModel &model, double beta);

/// Activates the top ceil(k * |inactive|) inactive couplings. CONSTRAINT couplings that were violated in the
/// samples come first, then other CONSTRAINT couplings, then OBJECTIVE ones; within a tier by descending gap,
/// then pair index.
ReducedQubo reintroduce(const ReducedQubo &reduced, const Feedback &feedback, const RelaxConfig &config);

enum class StopReason { CostStable, DivergenceStable, MaxIterations, Budget };

const char * to_string(StopReason r);

struct RelaxIteration
{
    std::size_t iteration; ///< 1-based
    ReducedQubo reduced;
    Feedback feedback;
    SamplerTiming timing;
    LifecycleRecord record;
    double best_cost;      ///< best-so-far after this iteration
    bool js_mode;          ///< stability statistic was Jensen-Shannon
};

struct RelaxResult
{
    DecodedPlan best;
    std::vector<RelaxIteration> trace;
    StopReason stop;
};

/// Sample, analyze and refine until the plan cost or the divergence settles, max_iterations is reached or the
/// budget denies the next iteration. Every iteration is recorded on `clock`. If the budget denies the first
/// iteration the result is the greedy repair of the empty assignment and the trace is empty.
RelaxResult relax_loop(const JoinOrderEncoding &encoding, const JoinGraph &graph, const CostModel &model,
                       Sampler &sampler, const SamplerParams &params, BudgetClock &clock, const RelaxConfig &config);

/// Seed stride between iterations, so reads of different iterations never share a stream.
inline constexpr std::uint64_t kIterationSeedStride = 1'000'003;

}
