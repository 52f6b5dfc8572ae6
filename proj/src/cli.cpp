#include <qjo/cli.hpp>

#include <qjo/corpus.hpp>
#include <qjo/hint.hpp>
#include <qjo/orchestrator.hpp>
#include <qjo/remote.hpp>
#include <qjo/report.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <memory>
#include <optional>


using namespace qjo;


namespace {

struct SolveOptions
{
    double budget_ms = 1000.0;
    std::uint64_t seed = 0;
    std::string mode = "auto";
    std::size_t capacity = RouteThresholds{}.capacity;
    std::string clock = "modeled";
    std::string endpoint;
    std::size_t reads = SamplerParams{}.num_reads;
    std::size_t sweeps = SamplerParams{}.sweeps;
    unsigned threads = 1;
};

void add_solve_options(CLI::App &cmd, SolveOptions &o)
{
    cmd.add_option("--budget-ms", o.budget_ms, "time budget tau in milliseconds")->check(CLI::PositiveNumber);
    cmd.add_option("--mode", o.mode, "routing strategy")
        ->check(CLI::IsMember({"auto", "relax", "decompose", "direct"}));
    cmd.add_option("--capacity", o.capacity, "largest QUBO sampled without decomposition")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--clock", o.clock, "lifecycle timing source")->check(CLI::IsMember({"modeled", "wall"}));
    cmd.add_option("--endpoint", o.endpoint, "remote annealing service, e.g. http://127.0.0.1:8080");
    cmd.add_option("--reads", o.reads, "reads per sampler call")->check(CLI::PositiveNumber);
    cmd.add_option("--sweeps", o.sweeps, "annealing sweeps per read")->check(CLI::PositiveNumber);
    cmd.add_option("--threads", o.threads, "sampler threads")->check(CLI::PositiveNumber);
}

SolveConfig make_config(const SolveOptions &o, std::uint64_t seed)
{
    SolveConfig c;
    c.tau_ms = o.budget_ms;
    c.clock = o.clock == "wall" ? ClockMode::Wall : ClockMode::Modeled;
    if (o.mode != "auto") c.force = parse_strategy(o.mode);
    c.thresholds.capacity = o.capacity;
    c.sampler.seed = seed;
    c.sampler.num_reads = o.reads;
    c.sampler.sweeps = o.sweeps;
    c.sampler.threads = o.threads;
    return c;
}

std::unique_ptr<Sampler> make_sampler(const SolveOptions &o)
{
    if (o.endpoint.empty()) return std::make_unique<SimulatedAnnealingSampler>();
    return std::make_unique<RemoteSampler>(o.endpoint);
}

void write_file(const std::string &path, const std::string &content)
{
    std::ofstream f(path, std::ios::binary);
    if (not f) throw std::runtime_error("cannot write " + path);
    f << content;
    if (not f) throw std::runtime_error("failed writing " + path);
}

}


int qjo::run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Join ordering as QUBO with budgeted annealing", "qjo"};
    app.require_subcommand(1);

    std::string workload_path, query_id, csv_path, out_path;
    bool emit_only = false;
    SolveOptions opts;
    std::size_t seeds = 1;
    CorpusConfig corpus;

    auto *solve_cmd = app.add_subcommand("solve", "optimize one query");
    solve_cmd->add_option("--workload", workload_path, "workload JSON")->required();
    solve_cmd->add_option("--query", query_id, "query id")->required();
    solve_cmd->add_option("--seed", opts.seed, "sampler seed");
    solve_cmd->add_option("--csv", csv_path, "write the per-iteration timing CSV here");
    solve_cmd->add_flag("--emit-hint", emit_only, "print only the Leading hint");
    add_solve_options(*solve_cmd, opts);

    auto *oracle_cmd = app.add_subcommand("oracle", "exact plan by dynamic programming");
    oracle_cmd->add_option("--workload", workload_path, "workload JSON")->required();
    oracle_cmd->add_option("--query", query_id, "query id")->required();

    auto *bench_cmd = app.add_subcommand("bench", "solver against the oracle over a workload");
    bench_cmd->add_option("--workload", workload_path, "workload JSON")->required();
    bench_cmd->add_option("--seeds", seeds, "seeds per query, starting at --seed")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--seed", opts.seed, "first seed");
    bench_cmd->add_option("--csv", csv_path, "write the bench CSV here instead of stdout");
    add_solve_options(*bench_cmd, opts);

    auto *gen_cmd = app.add_subcommand("generate", "write a seeded random workload");
    gen_cmd->add_option("--out", out_path, "output path")->required();
    gen_cmd->add_option("--count", corpus.count, "number of queries")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--seed", corpus.seed, "generator seed");
    gen_cmd->add_option("--min-relations", corpus.min_relations)->check(CLI::Range(2, 64));
    gen_cmd->add_option("--max-relations", corpus.max_relations)->check(CLI::Range(2, 64));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        return app.exit(e, out, err);
    }

    try {
        if (*gen_cmd) {
            write_file(out_path, serialize_workload(generate_corpus(corpus)));
            out << "wrote " << corpus.count << " queries to " << out_path << '\n';
            return 0;
        }

        const Workload workload = load_workload_file(workload_path);

        if (*oracle_cmd) {
            const auto &q = workload.query(query_id);
            validate_query(workload.catalog, q);
            const auto best = dp_optimal_plan(workload.catalog, q);
            out << "plan " << best.plan.to_string() << '\n';
            out << "hint " << emit_hint(best.plan) << '\n';
            out << "cost " << format_real(best.cost) << '\n';
            return 0;
        }

        auto sampler = make_sampler(opts);

        if (*solve_cmd) {
            const auto &q = workload.query(query_id);
            const Solution sol = solve(workload.catalog, q, *sampler, make_config(opts, opts.seed));
            if (sol.degraded) err << "warning: budget exhausted before the first sample; returning the greedy plan\n";
            if (emit_only) {
                out << sol.hint << '\n';
            } else {
                out << "strategy " << to_string(sol.strategy) << '\n';
                out << "cost " << format_real(sol.cost) << '\n';
                out << "hint " << sol.hint << '\n';
                out << "iterations " << sol.trace.size() << '\n';
            }
            if (not csv_path.empty()) write_file(csv_path, timing_csv(sol));
            return 0;
        }

        if (*bench_cmd) {
            std::vector<BenchRow> rows;
            for (const auto &q : workload.queries) {
                validate_query(workload.catalog, q);
                std::optional<double> oracle;
                if (q.relations.size() <= kDefaultOracleLimit) oracle = dp_optimal_plan(workload.catalog, q).cost;
                for (std::size_t k = 0; k < seeds; ++k) {
                    const std::uint64_t seed = opts.seed + k;
                    const Solution sol = solve(workload.catalog, q, *sampler, make_config(opts, seed));
                    if (sol.degraded) err << "warning: " << q.id << " seed " << seed << " returned a degraded plan\n";
                    rows.push_back({q.id, seed, sol.strategy, q.relations.size(), sol.cost, oracle, sol.degraded,
                                    sol.hint});
                }
            }
            const std::string csv = bench_csv(std::move(rows));
            if (csv_path.empty())
                out << csv;
            else
                write_file(csv_path, csv);
            return 0;
        }
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
