#include <qjo/orchestrator.hpp>

#include <qjo/hint.hpp>

#include <json.hpp>

#include <cstdio>
#include <memory>


using namespace qjo;


const char * qjo::to_string(Strategy s)
{
    switch (s) {
        case Strategy::Direct: return "direct";
        case Strategy::Relax: return "relax";
        case Strategy::Decompose: return "decompose";
    }
    return "?";
}

Strategy qjo::parse_strategy(std::string_view text)
{
    if (text == "direct") return Strategy::Direct;
    if (text == "relax") return Strategy::Relax;
    if (text == "decompose") return Strategy::Decompose;
    throw std::invalid_argument("unknown strategy '" + std::string(text) + "'");
}

Strategy qjo::route(const QuboMetrics &metrics, const RouteThresholds &thresholds)
{
    if (thresholds.capacity == 0 or not (thresholds.density > 0))
        throw std::invalid_argument("routing thresholds must be positive");
    if (metrics.variables > thresholds.capacity) return Strategy::Decompose;
    if (metrics.density > thresholds.density) return Strategy::Relax;
    return Strategy::Direct;
}


namespace {

struct Context
{
    const JoinOrderEncoding &encoding;
    const JoinGraph &graph;
    const CostModel &model;
    Sampler &sampler;
    const SolveConfig &config;
    BudgetClock &clock;
    double beta;
};

struct Outcome
{
    std::optional<DecodedPlan> best;
    std::vector<TraceEntry> trace;
    std::string stop;
    std::size_t parts = 1;
};

void keep_best(std::optional<DecodedPlan> &best, const DecodedPlan &candidate)
{
    if (not best or candidate.cost < best->cost) best = candidate;
}

Outcome run_direct(const Context &ctx)
{
    Outcome out;
    const auto start = ctx.clock.admit();
    if (not start) {
        out.stop = "budget";
        return out;
    }
    SamplerParams p = ctx.config.sampler;
    p.clock = ctx.clock.mode();
    const SampleSet set = ctx.sampler.sample(ctx.encoding.qubo, p);

    Stopwatch watch;
    auto base = std::make_shared<const Qubo>(ctx.encoding.qubo);
    ReducedQubo all(base, std::vector<bool>(base->couplings().size(), true));
    const Feedback fb = analyze_feedback(*base, all, set, ctx.encoding.varmap, ctx.graph, ctx.model, ctx.beta);
    double refine_ms = watch.elapsed_ms();
    if (ctx.clock.mode() == ClockMode::Modeled)
        refine_ms = WorkModel::refine_ms(set.rows.size(), base->size(), base->couplings().size());

    const LifecycleRecord record{*start, set.timing.solve_ms, set.timing.ingress_ms + set.timing.egress_ms,
                                 refine_ms};
    ctx.clock.record(record);
    if (fb.best) keep_best(out.best, *fb.best);
    out.trace.push_back({1, set.timing, record, fb.kl, out.best ? out.best->cost : 0.0, fb.constraint_violations,
                         base->couplings().size()});
    out.stop = "single-pass";
    return out;
}

Outcome run_relax(const Context &ctx)
{
    Outcome out;
    const auto result = relax_loop(ctx.encoding, ctx.graph, ctx.model, ctx.sampler, ctx.config.sampler, ctx.clock,
                                   ctx.config.relax);
    for (const auto &it : result.trace)
        out.trace.push_back({it.iteration, it.timing, it.record, it.feedback.kl, it.best_cost,
                             it.feedback.constraint_violations, it.reduced.active_count()});
    if (not result.trace.empty()) out.best = result.best;
    out.stop = to_string(result.stop);
    return out;
}

SamplerTiming sum_timing(const std::vector<SamplerTiming> &parts)
{
    double ingress = 0, solve = 0, egress = 0, programming = 0, sampling = 0;
    for (const auto &t : parts) {
        ingress += t.ingress_ms;
        solve += t.solve_ms;
        egress += t.egress_ms;
        programming += t.qpu_programming_ms;
        sampling += t.qpu_sampling_ms;
    }
    return SamplerTiming::from_parts(ingress, solve, egress, programming, sampling);
}

Outcome run_decompose(const Context &ctx)
{
    Outcome out;
    const auto &enc = ctx.encoding;
    const Qubo &full = enc.qubo;
    Partitioning partitioning =
        partition_join_graph(ctx.graph, enc.varmap, ctx.config.thresholds.capacity, &ctx.model);
    attach_subproblems(partitioning, full);
    out.parts = partitioning.parts.size();

    EmbeddingCache cache;
    std::vector<HardwareGraph> hardware;
    for (const auto &part : partitioning.parts)
        hardware.push_back(HardwareGraph::king_for(part.variables.size(), ctx.config.hardware_nodes_per_variable));

    std::vector<double> variances;
    std::vector<SamplerTiming> timings;

    auto sample_part = [&](std::size_t p, const Qubo &q, const SamplerParams &params) {
        const Embedding &emb = cache.get(q, hardware[p]);
        SampleSet set = sample_embedded(q, emb, hardware[p], ctx.sampler, params);
        timings.push_back(set.timing);
        double mean = 0, sq = 0, total = 0;
        for (const auto &row : set.rows) {
            mean += row.energy * double(row.occurrences);
            sq += row.energy * row.energy * double(row.occurrences);
            total += double(row.occurrences);
        }
        mean /= total;
        variances[p] = std::max(0.0, sq / total - mean * mean);
        return set;
    };

    auto finish_iteration = [&](std::size_t iteration, double start, const Assignment &merged, Stopwatch &watch,
                                std::size_t samples) {
        const Assignment refined = tabu_refine(full, merged, ctx.config.tabu_moves);
        const DecodedPlan raw = decode_and_repair(enc.varmap, ctx.graph, ctx.model, merged);
        const DecodedPlan plan = decode_and_repair(enc.varmap, ctx.graph, ctx.model, refined);
        keep_best(out.best, raw);
        keep_best(out.best, plan);
        double refine_ms = watch.elapsed_ms();
        if (ctx.clock.mode() == ClockMode::Modeled)
            refine_ms = WorkModel::refine_ms(samples + 2, full.size(),
                                             full.couplings().size() * (partitioning.parts.size() + 1)) +
                        WorkModel::refine_ms(0, 0, ctx.config.tabu_moves);
        const SamplerTiming timing = sum_timing(timings);
        const LifecycleRecord record{start, timing.solve_ms, timing.ingress_ms + timing.egress_ms, refine_ms};
        ctx.clock.record(record);
        out.trace.push_back({iteration, timing, record, 0.0, out.best->cost, plan.report.constraint_violations(),
                             full.couplings().size()});
    };

    // iteration 1: independent part sampling on the sub-QUBOs
    const auto first = ctx.clock.admit();
    if (not first) {
        out.stop = "budget";
        return out;
    }
    SamplerParams base = ctx.config.sampler;
    base.clock = ctx.clock.mode();
    variances.assign(partitioning.parts.size(), 0.0);
    std::vector<SampleSet> part_samples;
    {
        const auto params = allocate_sampling(partitioning, base, ctx.config.allocation);
        for (std::size_t p = 0; p < partitioning.parts.size(); ++p)
            part_samples.push_back(sample_part(p, *partitioning.parts[p].sub_qubo, params[p]));
        Stopwatch watch;
        ComposeConfig merge_only = ctx.config.compose;
        merge_only.rounds = 0;
        const auto composed = compose_bp(partitioning, part_samples, full, merge_only, {});
        std::size_t samples = 0;
        for (const auto &s : part_samples) samples += s.rows.size();
        finish_iteration(1, *first, composed.merged, watch, samples);
    }

    // composition rounds, each one budgeted iteration
    out.stop = "rounds";
    for (std::size_t round = 1; round <= ctx.config.compose.rounds; ++round) {
        const auto start = ctx.clock.admit();
        if (not start) {
            out.stop = "budget";
            break;
        }
        SamplerParams round_base = base;
        round_base.seed = base.seed + round * kIterationSeedStride;
        const auto params = allocate_sampling(partitioning, round_base, ctx.config.allocation, &variances);
        timings.clear();
        std::vector<SampleSet> latest;
        ComposeConfig one = ctx.config.compose;
        one.rounds = 1;
        const auto composed = compose_bp(partitioning, part_samples, full, one,
                                         [&](std::size_t p, const Qubo &conditioned) -> std::optional<SampleSet> {
                                             latest.push_back(sample_part(p, conditioned, params[p]));
                                             return latest.back();
                                         });
        Stopwatch watch;
        part_samples = std::move(latest);
        std::size_t samples = 0;
        for (const auto &s : part_samples) samples += s.rows.size();
        finish_iteration(round + 1, *start, composed.merged, watch, samples);
    }
    return out;
}

std::string number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}


Solution qjo::solve(const Catalog &catalog, const QuerySpec &query, Sampler &sampler, const SolveConfig &config)
{
    if (not (config.tau_ms > 0)) throw std::invalid_argument("time budget must be positive");
    validate_query(catalog, query);
    config.sampler.validate();
    config.relax.validate();

    const CostModel model(catalog, query);
    const JoinGraph graph = build_join_graph(query, catalog);
    const JoinOrderEncoding encoding = encode_join_order(catalog, query, graph, config.weights);

    Solution sol{PlanTree::leaf("-"), 0.0, {}, Strategy::Direct, false, config.tau_ms, 0.0, {}, {},
                 qubo_metrics(encoding.qubo), 1, {}};
    sol.strategy = config.force ? *config.force : route(sol.metrics, config.thresholds);

    BudgetClock clock(config.tau_ms, config.clock);
    SolveConfig effective = config;
    effective.sampler.clock = config.clock;
    const double max_coef = encoding.qubo.max_abs_coefficient();
    const double beta = config.relax.beta.value_or(max_coef > 0 ? 1.0 / max_coef : 1.0);
    effective.compose.beta = beta;
    const Context ctx{encoding, graph, model, sampler, effective, clock, beta};

    Outcome outcome;
    switch (sol.strategy) {
        case Strategy::Direct: outcome = run_direct(ctx); break;
        case Strategy::Relax: outcome = run_relax(ctx); break;
        case Strategy::Decompose: outcome = run_decompose(ctx); break;
    }

    const auto &records = clock.records();
    const bool first_late = records.empty() or records.front().start_ms + records.front().duration_ms() > config.tau_ms;
    if (first_late or not outcome.best) {
        sol.degraded = true;
        outcome.best = decode_and_repair(encoding.varmap, graph, model, Assignment(encoding.varmap.size()));
    }

    sol.plan = outcome.best->plan;
    sol.cost = outcome.best->cost;
    sol.hint = emit_hint(sol.plan);
    sol.time_quantum_ms = clock.time_quantum_ms();
    sol.lifecycle = records;
    sol.trace = std::move(outcome.trace);
    sol.parts = outcome.parts;
    sol.stop = outcome.stop;
    return sol;
}


std::string qjo::serialize_solution(const Solution &s)
{
    nlohmann::ordered_json j;
    j["plan"] = s.plan.to_string();
    j["cost"] = number(s.cost);
    j["hint"] = s.hint;
    j["strategy"] = to_string(s.strategy);
    j["degraded"] = s.degraded;
    j["tau_ms"] = number(s.tau_ms);
    j["time_quantum_ms"] = number(s.time_quantum_ms);
    j["variables"] = s.metrics.variables;
    j["couplings"] = s.metrics.couplings;
    j["density"] = number(s.metrics.density);
    j["parts"] = s.parts;
    j["stop"] = s.stop;
    j["lifecycle"] = nlohmann::ordered_json::array();
    for (const auto &r : s.lifecycle)
        j["lifecycle"].push_back({{"start_ms", number(r.start_ms)}, {"quantum_ms", number(r.quantum_ms)},
                                  {"comm_ms", number(r.comm_ms)}, {"refine_ms", number(r.refine_ms)}});
    j["trace"] = nlohmann::ordered_json::array();
    for (const auto &t : s.trace)
        j["trace"].push_back({{"iteration", t.iteration}, {"kl", number(t.kl)}, {"best_cost", number(t.best_cost)},
                              {"violations", t.violations}, {"active_pairs", t.active_pairs}});
    return j.dump(2) + "\n";
}
