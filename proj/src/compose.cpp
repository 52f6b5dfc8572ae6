#include <qjo/decomp.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>


using namespace qjo;


std::vector<SamplerParams> qjo::allocate_sampling(const Partitioning &partitioning, const SamplerParams &base,
                                                  const AllocationConfig &config,
                                                  const std::vector<double> *previous_variance)
{
    const std::size_t np = partitioning.parts.size();
    if (np == 0) return {};
    if (previous_variance and previous_variance->size() != np)
        throw std::invalid_argument("one previous variance per part expected");

    double mean = 0.0;
    for (const auto &p : partitioning.parts) mean += p.cost_estimate;
    mean /= double(np);

    double median = 0.0;
    if (previous_variance) {
        auto sorted = *previous_variance;
        std::sort(sorted.begin(), sorted.end());
        median = np % 2 ? sorted[np / 2] : 0.5 * (sorted[np / 2 - 1] + sorted[np / 2]);
    }

    std::vector<SamplerParams> out;
    for (std::size_t p = 0; p < np; ++p) {
        SamplerParams sp = base;
        double scale = mean > 0 ? std::pow(partitioning.parts[p].cost_estimate / mean, config.gamma) : 1.0;
        scale = std::clamp(scale, config.min_scale, config.max_scale);
        sp.sweeps = std::max<std::size_t>(1, std::size_t(std::llround(double(base.sweeps) * scale)));
        if (previous_variance and (*previous_variance)[p] > median) sp.num_reads = base.num_reads * 2;
        sp.seed = base.seed + (p + 1) * kPartSeedStride;
        out.push_back(sp);
    }
    return out;
}


namespace {

struct PartMarginals
{
    double best_energy;
    std::vector<double> marginal; ///< per local variable
};

PartMarginals marginals(const SampleSet &set, std::size_t local_size, double beta)
{
    if (set.empty()) throw std::invalid_argument("part sample set is empty");
    PartMarginals out{set.best().energy, std::vector<double>(local_size, 0.0)};
    double z = 0.0;
    for (const auto &row : set.rows) {
        const double w = double(row.occurrences) * std::exp(-beta * (row.energy - out.best_energy));
        z += w;
        for (std::size_t v = 0; v < local_size; ++v)
            if (row.assignment.bits[v]) out.marginal[v] += w;
    }
    for (auto &m : out.marginal) m /= z;
    return out;
}

std::size_t local_index(const Part &part, Var v)
{
    return std::size_t(std::lower_bound(part.variables.begin(), part.variables.end(), v) - part.variables.begin());
}

bool contains(const Part &part, Var v)
{
    return std::binary_search(part.variables.begin(), part.variables.end(), v);
}

}


std::map<Var, double> qjo::shared_consensus(const Partitioning &partitioning,
                                            const std::vector<SampleSet> &part_samples, double beta)
{
    const std::size_t np = partitioning.parts.size();
    if (part_samples.size() != np) throw std::invalid_argument("one sample set per part expected");
    std::vector<PartMarginals> m;
    double min_best = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < np; ++p) {
        m.push_back(marginals(part_samples[p], partitioning.parts[p].variables.size(), beta));
        min_best = std::min(min_best, m.back().best_energy);
    }

    std::map<Var, double> out;
    for (auto v : partitioning.shared) {
        double num = 0.0, den = 0.0;
        for (std::size_t p = 0; p < np; ++p) {
            const auto &part = partitioning.parts[p];
            if (not contains(part, v)) continue;
            const double w = std::exp(-beta * (m[p].best_energy - min_best));
            num += w * m[p].marginal[local_index(part, v)];
            den += w;
        }
        out[v] = den > 0 ? num / den : 0.0;
    }
    return out;
}


ComposeResult qjo::compose_bp(const Partitioning &partitioning, std::vector<SampleSet> part_samples,
                              const Qubo &full, const ComposeConfig &config, const PartResampler &resample)
{
    const std::size_t np = partitioning.parts.size();
    if (part_samples.size() != np) throw std::invalid_argument("one sample set per part expected");
    if (full.size() != partitioning.variable_count) throw std::invalid_argument("QUBO does not match partitioning");

    Assignment global(full.size());
    auto take_private = [&]() {
        for (std::size_t p = 0; p < np; ++p) {
            const auto &part = partitioning.parts[p];
            const auto &best = part_samples[p].best().assignment;
            for (std::size_t k = 0; k < part.variables.size(); ++k)
                if (not partitioning.is_shared(part.variables[k])) global.bits[part.variables[k]] = best.bits[k];
        }
    };
    auto clamp_shared = [&](const std::map<Var, double> &c) {
        for (const auto &[v, value] : c) global.bits[v] = value >= 0.5 ? 1 : 0;
    };

    ComposeResult out;
    take_private();
    out.consensus = shared_consensus(partitioning, part_samples, config.beta);
    clamp_shared(out.consensus);

    for (std::size_t round = 0; round < config.rounds; ++round) {
        const Assignment snapshot = global;
        std::vector<SampleSet> next;
        bool denied = false;
        for (std::size_t p = 0; p < np and not denied; ++p) {
            const auto &part = partitioning.parts[p];
            std::vector<std::int8_t> fixed(full.size());
            for (Var v = 0; v < full.size(); ++v) fixed[v] = std::int8_t(snapshot.bits[v]);
            for (auto v : part.variables) fixed[v] = -1;
            std::vector<Var> free_vars;
            const Qubo conditioned = condition(full, fixed, free_vars);
            auto res = resample(p, conditioned);
            if (not res) { denied = true; break; }
            if (res->empty()) throw std::runtime_error("part resampling returned no samples");
            next.push_back(std::move(*res));
        }
        if (denied) break;
        part_samples = std::move(next);
        ++out.rounds_run;
        take_private();
        out.consensus = shared_consensus(partitioning, part_samples, config.beta);
        clamp_shared(out.consensus);
    }
    out.merged = global;
    return out;
}


Assignment qjo::tabu_refine(const Qubo &qubo, const Assignment &start, std::size_t move_budget)
{
    const std::size_t n = qubo.size();
    if (start.size() != n) throw std::invalid_argument("assignment length does not match QUBO");
    constexpr std::size_t kTenure = 7;
    const std::size_t stall_limit = std::max<std::size_t>(200, 20 * n);

    Assignment cur = start, best = start;
    double e = energy(qubo, cur), best_e = e;
    // delta[i]: energy change of flipping i
    std::vector<double> delta(n);
    auto field = [&](Var i) {
        double f = qubo.linear(i);
        for (const auto &nb : qubo.neighbors(i))
            if (cur.bits[nb.var]) f += nb.value;
        return f;
    };
    for (Var i = 0; i < n; ++i) delta[i] = cur.bits[i] ? -field(i) : field(i);

    std::vector<std::size_t> tabu_until(n, 0);
    std::size_t stall = 0;
    for (std::size_t move = 1; move <= move_budget and stall < stall_limit; ++move) {
        std::optional<Var> pick;
        for (Var i = 0; i < n; ++i) {
            const bool allowed = tabu_until[i] < move or e + delta[i] < best_e - 1e-12;
            if (not allowed) continue;
            if (not pick or delta[i] < delta[*pick]) pick = i;
        }
        if (not pick) { ++stall; continue; }
        const Var i = *pick;
        const double d = delta[i];
        const int sign_i = cur.bits[i] ? -1 : 1; // change of s_i
        cur.bits[i] ^= 1;
        e += d;
        delta[i] = -d;
        for (const auto &nb : qubo.neighbors(i)) {
            // flipping j changes energy by (1 - 2 s_j) * field_j; field_j moved by J * sign_i
            const int sj = cur.bits[nb.var] ? -1 : 1;
            delta[nb.var] += double(sj) * nb.value * double(sign_i);
        }
        tabu_until[i] = move + kTenure;
        if (e < best_e - 1e-12) {
            best_e = e;
            best = cur;
            stall = 0;
        } else {
            ++stall;
        }
    }
    return best;
}
