#include <qjo/sampler.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <string>
#include <thread>


using namespace qjo;


SamplerTiming SamplerTiming::from_parts(double ingress, double solve, double egress, double programming,
                                        double sampling)
{
    SamplerTiming t;
    t.ingress_ms = ingress;
    t.solve_ms = solve;
    t.egress_ms = egress;
    t.end_to_end_ms = ingress + solve + egress;
    t.qpu_programming_ms = programming;
    t.qpu_sampling_ms = sampling;
    t.qpu_access_ms = programming + sampling;
    return t;
}

const SampleRow & SampleSet::best() const
{
    if (rows.empty()) throw std::invalid_argument("sample set is empty");
    return rows.front();
}

std::size_t SampleSet::total_occurrences() const
{
    std::size_t total = 0;
    for (const auto &r : rows) total += r.occurrences;
    return total;
}

SampleSet qjo::aggregate_samples(const Qubo &qubo, const std::vector<Assignment> &reads, SamplerTiming timing)
{
    std::map<Assignment, std::size_t> counts;
    for (const auto &a : reads) ++counts[a];
    SampleSet set;
    set.timing = timing;
    set.rows.reserve(counts.size());
    for (auto &[a, c] : counts) set.rows.push_back({a, energy(qubo, a), c});
    std::stable_sort(set.rows.begin(), set.rows.end(),
                     [](const SampleRow &x, const SampleRow &y) { return x.energy < y.energy; });
    return set;
}

void SamplerParams::validate() const
{
    if (num_reads < 1) throw std::invalid_argument("num_reads must be at least 1");
    if (sweeps < 1) throw std::invalid_argument("sweeps must be at least 1");
    if (not (schedule.t_end > 0)) throw std::invalid_argument("T_end must be positive");
    if (schedule.t_start and not (*schedule.t_start >= schedule.t_end))
        throw std::invalid_argument("T_start must be at least T_end");
}


/*======================================================================================================================
 * Simulated annealing
 *====================================================================================================================*/

namespace {

Assignment anneal_one(const Qubo &qubo, const std::vector<double> &betas, std::uint64_t seed)
{
    const std::size_t n = qubo.size();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    Assignment s(n);
    for (auto &b : s.bits) b = static_cast<std::uint8_t>(rng() >> 63);

    // field[i] = h_i + sum_j J_ij s_j, so flipping i changes the energy by (1 - 2 s_i) * field[i]
    std::vector<double> field(qubo.linear().begin(), qubo.linear().end());
    for (const auto &c : qubo.couplings()) {
        if (s.bits[c.j]) field[c.i] += c.value;
        if (s.bits[c.i]) field[c.j] += c.value;
    }

    for (double beta : betas) {
        for (Var i = 0; i != n; ++i) {
            const double delta = s.bits[i] ? -field[i] : field[i];
            if (delta > 0.0) {
                // acceptance below e^-40 is treated as zero, which skips the draw for frozen spins
                const double x = beta * delta;
                if (x > 40.0 or uniform(rng) >= std::exp(-x)) continue;
            }
            s.bits[i] ^= 1;
            const double sign = s.bits[i] ? 1.0 : -1.0;
            for (const auto &nb : qubo.neighbors(i)) field[nb.var] += sign * nb.value;
        }
    }
    return s;
}

}

SampleSet qjo::sa_sample(const Qubo &qubo, const SamplerParams &params)
{
    params.validate();
    Stopwatch watch;

    const double t_end = params.schedule.t_end;
    const double t_start = params.schedule.t_start.value_or(std::max(qubo.max_abs_coefficient(), t_end));
    std::vector<double> betas(params.sweeps);
    for (std::size_t k = 1; k <= params.sweeps; ++k) {
        double t = t_start * std::pow(t_end / t_start, double(k) / double(params.sweeps));
        betas[k - 1] = 1.0 / t;
    }

    std::vector<Assignment> reads(params.num_reads);
    const unsigned threads = std::max(1u, std::min<unsigned>(params.threads, unsigned(params.num_reads)));
    if (threads == 1) {
        for (std::size_t r = 0; r != params.num_reads; ++r) reads[r] = anneal_one(qubo, betas, params.seed + r);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w != threads; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t r = w; r < params.num_reads; r += threads)
                    reads[r] = anneal_one(qubo, betas, params.seed + r);
            });
        }
    }

    double solve_ms = params.clock == ClockMode::Wall
                          ? watch.elapsed_ms()
                          : WorkModel::sampler_ms(params.num_reads, params.sweeps, qubo.size(),
                                                  qubo.couplings().size());
    // local sampling has no transfer legs; all of the solve time counts as sampling
    return aggregate_samples(qubo, reads, SamplerTiming::from_parts(0.0, solve_ms, 0.0, 0.0, solve_ms));
}


/*======================================================================================================================
 * Exhaustive enumeration
 *====================================================================================================================*/

SampleSet qjo::exhaustive_ground_states(const Qubo &qubo, std::size_t limit)
{
    const std::size_t n = qubo.size();
    if (n > limit)
        throw std::invalid_argument("exhaustive enumeration limited to " + std::to_string(limit) + " variables, got " +
                                    std::to_string(n));
    Stopwatch watch;

    Assignment s(n);
    std::vector<double> field(qubo.linear().begin(), qubo.linear().end());
    double e = qubo.offset();
    double best = e;
    std::vector<Assignment> minima{s};
    auto tolerance = [](double ref) { return 1e-9 * (1.0 + std::abs(ref)); };

    const std::uint64_t total = std::uint64_t(1) << n;
    for (std::uint64_t k = 1; k < total; ++k) {
        const Var i = static_cast<Var>(std::countr_zero(k)); // Gray code: flip the lowest set bit of k
        e += s.bits[i] ? -field[i] : field[i];
        s.bits[i] ^= 1;
        const double sign = s.bits[i] ? 1.0 : -1.0;
        for (const auto &nb : qubo.neighbors(i)) field[nb.var] += sign * nb.value;

        if (e < best - tolerance(best)) {
            best = e;
            minima.clear();
            minima.push_back(s);
        } else if (e <= best + tolerance(best)) {
            minima.push_back(s);
        }
    }

    // recompute exactly and drop anything the running sum let through
    SampleSet set = aggregate_samples(qubo, minima);
    const double exact_best = set.rows.front().energy;
    std::erase_if(set.rows, [&](const SampleRow &r) { return r.energy > exact_best + tolerance(exact_best); });
    double ms = watch.elapsed_ms();
    set.timing = SamplerTiming::from_parts(0.0, ms, 0.0, 0.0, ms);
    return set;
}

Distribution qjo::empirical_distribution(const SampleSet &set)
{
    if (set.empty()) throw std::invalid_argument("empirical distribution of an empty sample set");
    const double total = double(set.total_occurrences());
    Distribution d;
    for (const auto &r : set.rows) d[r.assignment] += double(r.occurrences) / total;
    return d;
}
