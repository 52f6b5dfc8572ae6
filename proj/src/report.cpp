#include <qjo/report.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>


using namespace qjo;


std::string qjo::format_real(double v)
{
    char buf[128];
    const double mag = std::abs(v);
    const auto fmt = (mag == 0 or (mag >= 1e-4 and mag < 1e15)) ? std::chars_format::fixed : std::chars_format::general;
    const auto res = std::to_chars(buf, buf + sizeof buf, v, fmt);
    return std::string(buf, res.ptr);
}

std::string qjo::format_ms(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string qjo::timing_csv(const Solution &solution)
{
    std::ostringstream out;
    out << kTimingColumns << '\n';
    for (const auto &t : solution.trace) {
        const auto &x = t.timing;
        out << t.iteration << ',' << format_ms(x.ingress_ms) << ',' << format_ms(x.solve_ms) << ','
            << format_ms(x.egress_ms) << ',' << format_ms(x.end_to_end_ms) << ',' << format_ms(x.qpu_programming_ms)
            << ',' << format_ms(x.qpu_sampling_ms) << ',' << format_ms(x.qpu_access_ms) << ','
            << format_ms(t.record.refine_ms) << ',' << format_real(t.kl) << ',' << format_real(t.best_cost) << ','
            << t.violations << '\n';
    }
    return out.str();
}

std::string qjo::bench_csv(std::vector<BenchRow> rows)
{
    std::sort(rows.begin(), rows.end(), [](const BenchRow &a, const BenchRow &b) {
        return std::tie(a.query, a.seed) < std::tie(b.query, b.seed);
    });
    std::ostringstream out;
    out << kBenchColumns << '\n';
    for (const auto &r : rows) {
        out << r.query << ',' << r.seed << ',' << to_string(r.strategy) << ',' << r.relations << ','
            << format_real(r.solver_cost) << ',';
        if (r.oracle_cost)
            out << format_real(*r.oracle_cost) << ',' << format_real(r.solver_cost / *r.oracle_cost);
        else
            out << ',';
        out << ',' << (r.degraded ? 1 : 0) << ',' << r.hint << '\n';
    }
    return out.str();
}
