#include <qjo/relax.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>


using namespace qjo;


void RelaxConfig::validate() const
{
    if (not (keep_fraction > 0 and keep_fraction <= 1)) throw std::invalid_argument("keep_fraction must lie in (0, 1]");
    if (not (reintroduce_fraction > 0)) throw std::invalid_argument("reintroduce_fraction must be positive");
    if (not (constraint_protection >= 1)) throw std::invalid_argument("constraint_protection must be at least 1");
    if (beta and not (*beta > 0)) throw std::invalid_argument("beta must be positive");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
    if (not (stability_epsilon > 0)) throw std::invalid_argument("stability_epsilon must be positive");
    if (patience < 1) throw std::invalid_argument("patience must be at least 1");
}

const char * qjo::to_string(StopReason r)
{
    switch (r) {
        case StopReason::CostStable: return "cost-stable";
        case StopReason::DivergenceStable: return "divergence-stable";
        case StopReason::MaxIterations: return "max-iterations";
        case StopReason::Budget: return "budget";
    }
    return "unknown";
}


/*======================================================================================================================
 * Scoring and pruning
 *====================================================================================================================*/

PairScores qjo::score_correlations(const Qubo &qubo, const VarMap &varmap, const JoinGraph &graph,
                                   const CostModel &model, const RelaxConfig &config)
{
    if (qubo.size() != varmap.size()) throw std::invalid_argument("QUBO does not match the variable layout");
    const auto &couplings = qubo.couplings();
    std::vector<double> shared_card(couplings.size(), 0.0);
    double max_card = 0.0;
    for (std::size_t p = 0; p != couplings.size(); ++p) {
        const Coupling &c = couplings[p];
        if (c.cls != TermClass::Objective) continue;
        RelSet covered = graph.edge(varmap.edge_of(c.i)).relations() | graph.edge(varmap.edge_of(c.j)).relations();
        shared_card[p] = model.estimate_unchecked(covered);
        max_card = std::max(max_card, shared_card[p]);
    }

    PairScores scores(couplings.size());
    for (std::size_t p = 0; p != couplings.size(); ++p) {
        const Coupling &c = couplings[p];
        if (c.cls == TermClass::Constraint) scores[p] = std::abs(c.value) * config.constraint_protection;
        else scores[p] = std::abs(c.value) * (shared_card[p] / max_card);
    }
    return scores;
}

ReducedQubo::ReducedQubo(std::shared_ptr<const Qubo> base, std::vector<bool> active)
    : base_(std::move(base))
    , active_(std::move(active))
{
    if (not base_) throw std::invalid_argument("reduced QUBO needs a base QUBO");
    if (active_.size() != base_->couplings().size())
        throw std::invalid_argument("active mask does not match the base QUBO's couplings");
}

std::size_t ReducedQubo::active_count() const
{
    return static_cast<std::size_t>(std::count(active_.begin(), active_.end(), true));
}

std::vector<std::size_t> ReducedQubo::inactive_pairs() const
{
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p != active_.size(); ++p)
        if (not active_[p]) out.push_back(p);
    return out;
}

Qubo ReducedQubo::effective() const
{
    QuboBuilder b(base_->size());
    for (Var i = 0; i != base_->size(); ++i) b.add_linear(i, base_->linear(i), base_->linear_class(i));
    b.add_offset(base_->offset());
    const auto &couplings = base_->couplings();
    for (std::size_t p = 0; p != couplings.size(); ++p)
        if (active_[p]) b.add_quadratic(couplings[p].i, couplings[p].j, couplings[p].value, couplings[p].cls);
    return b.build();
}

ReducedQubo qjo::prune(std::shared_ptr<const Qubo> qubo, const PairScores &scores, const RelaxConfig &config)
{
    config.validate();
    const std::size_t pairs = qubo->couplings().size();
    if (scores.size() != pairs) throw std::invalid_argument("scores must cover every coupling");
    const auto keep = static_cast<std::size_t>(std::ceil(config.keep_fraction * double(pairs) - 1e-9));

    std::vector<std::size_t> order(pairs);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<bool> active(pairs, false);
    for (std::size_t k = 0; k != std::min(keep, pairs); ++k) active[order[k]] = true;
    return ReducedQubo(std::move(qubo), std::move(active));
}


/*======================================================================================================================
 * Divergences
 *====================================================================================================================*/

double qjo::kl_divergence(const Distribution &p, const Distribution &q)
{
    constexpr double eps = 1e-9;
    std::set<Assignment> support;
    for (const auto &[x, _] : p) support.insert(x);
    for (const auto &[x, _] : q) support.insert(x);
    double q_total = 0.0;
    for (const auto &[x, v] : q) q_total += v;
    const double norm = q_total + eps * double(support.size());

    double kl = 0.0;
    for (const auto &[x, px] : p) {
        if (px <= 0.0) continue;
        auto it = q.find(x);
        const double qx = ((it == q.end() ? 0.0 : it->second) + eps) / norm;
        kl += px * std::log(px / qx);
    }
    return std::max(0.0, kl);
}

double qjo::js_divergence(const Distribution &p, const Distribution &q)
{
    Distribution m;
    for (const auto &[x, v] : p) m[x] += 0.5 * v;
    for (const auto &[x, v] : q) m[x] += 0.5 * v;
    auto half = [&](const Distribution &d) {
        double s = 0.0;
        for (const auto &[x, v] : d)
            if (v > 0.0) s += v * std::log(v / m.at(x));
        return s;
    };
    return std::max(0.0, 0.5 * half(p) + 0.5 * half(q));
}


/*======================================================================================================================
 * Feedback and reintroduction
 *====================================================================================================================*/

Feedback qjo::analyze_feedback(const Qubo &full, const ReducedQubo &reduced, const SampleSet &samples,
                               const VarMap &varmap, const JoinGraph &graph, const CostModel &model, double beta)
{
    if (samples.empty()) throw std::invalid_argument("feedback needs at least one sample");
    if (not (beta >= 0)) throw std::invalid_argument("beta must be non-negative");
    if (&reduced.base() != &full and reduced.base().couplings().size() != full.couplings().size())
        throw std::invalid_argument("reduced QUBO does not derive from the full QUBO");

    Feedback fb;
    fb.distinct_samples = samples.rows.size();

    const Distribution q = empirical_distribution(samples);
    std::vector<double> full_energy(samples.rows.size());
    double e_min = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r != samples.rows.size(); ++r) {
        full_energy[r] = energy(full, samples.rows[r].assignment);
        e_min = std::min(e_min, full_energy[r]);
    }
    Distribution p;
    double z = 0.0;
    for (std::size_t r = 0; r != samples.rows.size(); ++r) z += std::exp(-beta * (full_energy[r] - e_min));
    for (std::size_t r = 0; r != samples.rows.size(); ++r)
        p[samples.rows[r].assignment] = std::exp(-beta * (full_energy[r] - e_min)) / z;

    fb.kl = kl_divergence(p, q);
    fb.js = js_divergence(p, q);

    const double total = double(samples.total_occurrences());
    for (const auto &row : samples.rows) fb.energy_mean += row.energy * double(row.occurrences) / total;
    for (const auto &row : samples.rows) {
        const double d = row.energy - fb.energy_mean;
        fb.energy_variance += d * d * double(row.occurrences) / total;
    }

    const auto &couplings = full.couplings();
    for (std::size_t pair : reduced.inactive_pairs()) {
        const Coupling &c = couplings[pair];
        double moment_p = 0.0, moment_q = 0.0;
        for (const auto &row : samples.rows) {
            if (row.assignment[c.i] and row.assignment[c.j]) {
                moment_p += p.at(row.assignment);
                moment_q += q.at(row.assignment);
            }
        }
        fb.gaps.push_back({pair, std::abs(moment_p - moment_q) * std::abs(c.value), c.cls,
                           c.cls == TermClass::Constraint ? moment_q : 0.0});
    }

    for (const auto &row : samples.rows) {
        DecodedPlan d = decode_and_repair(varmap, graph, model, row.assignment);
        fb.constraint_violations += d.report.constraint_violations();
        fb.repairs += d.report.repairs();
        if (not fb.best or d.cost < fb.best->cost) fb.best = std::move(d);
    }
    return fb;
}

ReducedQubo qjo::reintroduce(const ReducedQubo &reduced, const Feedback &feedback, const RelaxConfig &config)
{
    config.validate();
    std::vector<PairGap> candidates;
    for (const auto &g : feedback.gaps)
        if (not reduced.is_active(g.pair)) candidates.push_back(g);
    if (candidates.empty()) return reduced;

    auto tier = [](const PairGap &g) {
        if (g.cls == TermClass::Constraint) return g.violation_rate > 0.0 ? 0 : 1;
        return 2;
    };
    std::sort(candidates.begin(), candidates.end(), [&](const PairGap &a, const PairGap &b) {
        if (tier(a) != tier(b)) return tier(a) < tier(b);
        if (a.gap != b.gap) return a.gap > b.gap;
        return a.pair < b.pair;
    });
    const std::size_t inactive = reduced.inactive_pairs().size();
    const auto count = std::min(candidates.size(),
                                static_cast<std::size_t>(std::ceil(config.reintroduce_fraction * double(inactive) - 1e-9)));
    std::vector<bool> active = reduced.active();
    for (std::size_t k = 0; k != count; ++k) active[candidates[k].pair] = true;
    return ReducedQubo(reduced.base_ptr(), std::move(active));
}


/*======================================================================================================================
 * Loop
 *====================================================================================================================*/

RelaxResult qjo::relax_loop(const JoinOrderEncoding &encoding, const JoinGraph &graph, const CostModel &model,
                            Sampler &sampler, const SamplerParams &params, BudgetClock &clock,
                            const RelaxConfig &config)
{
    config.validate();
    auto base = std::make_shared<const Qubo>(encoding.qubo);
    const double max_coef = base->max_abs_coefficient();
    const double beta = config.beta.value_or(max_coef > 0 ? 1.0 / max_coef : 1.0);

    std::optional<DecodedPlan> best;
    std::vector<RelaxIteration> trace;
    std::optional<ReducedQubo> reduced;
    std::optional<double> previous_stat;
    int previous_direction = 0;
    std::size_t direction_flips = 0;
    bool js_mode = false;
    std::size_t unchanged = 0;
    StopReason stop = StopReason::MaxIterations;

    for (std::size_t it = 1; it <= config.max_iterations; ++it) {
        auto start = clock.admit();
        if (not start) {
            stop = StopReason::Budget;
            break;
        }

        Stopwatch prep_watch;
        if (not reduced) {
            reduced = prune(base, score_correlations(*base, encoding.varmap, graph, model, config), config);
        } else {
            reduced = reintroduce(*reduced, trace.back().feedback, config);
        }
        Qubo effective = reduced->effective();
        double prep_ms = prep_watch.elapsed_ms();

        SamplerParams p = params;
        p.seed = params.seed + (it - 1) * kIterationSeedStride;
        p.clock = clock.mode();
        SampleSet set = sampler.sample(effective, p);

        Stopwatch analyze_watch;
        Feedback fb = analyze_feedback(*base, *reduced, set, encoding.varmap, graph, model, beta);
        double refine_ms = prep_ms + analyze_watch.elapsed_ms();
        if (clock.mode() == ClockMode::Modeled)
            refine_ms = WorkModel::refine_ms(set.rows.size(), base->size(), base->couplings().size());

        const bool improved = fb.best and (not best or fb.best->cost < best->cost);
        if (improved) best = *fb.best;
        unchanged = (it > 1 and not improved) ? unchanged + 1 : 0;

        LifecycleRecord record{*start, set.timing.solve_ms, set.timing.ingress_ms + set.timing.egress_ms, refine_ms};
        clock.record(record);

        const double stat = js_mode ? fb.js : fb.kl;
        bool divergence_stable = false;
        if (previous_stat) {
            const double change = stat - *previous_stat;
            divergence_stable = std::abs(change) / std::max(*previous_stat, 1e-12) < config.stability_epsilon;
            const int direction = change > 0 ? 1 : (change < 0 ? -1 : 0);
            if (direction != 0 and previous_direction != 0 and direction != previous_direction) ++direction_flips;
            if (direction != 0) previous_direction = direction;
        }
        trace.push_back({it, *reduced, std::move(fb), set.timing, record, best->cost, js_mode});

        if (config.entropy_fallback and not js_mode and direction_flips >= 2) {
            // KL keeps changing direction; judge stability on Jensen-Shannon from here on
            js_mode = true;
            previous_stat = trace.back().feedback.js;
            previous_direction = 0;
        } else {
            previous_stat = stat;
        }

        if (unchanged >= config.patience) {
            stop = StopReason::CostStable;
            break;
        }
        if (divergence_stable) {
            stop = StopReason::DivergenceStable;
            break;
        }
        if (it == config.max_iterations) stop = StopReason::MaxIterations;
    }

    if (not best) best = decode_and_repair(encoding.varmap, graph, model, Assignment(encoding.varmap.size()));
    return {std::move(*best), std::move(trace), stop};
}
