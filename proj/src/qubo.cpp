#include <qjo/qubo.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>


using namespace qjo;


std::optional<std::size_t> Qubo::pair_index(Var i, Var j) const
{
    if (i > j) std::swap(i, j);
    auto it = std::lower_bound(couplings_.begin(), couplings_.end(), std::make_pair(i, j),
                               [](const Coupling &c, const std::pair<Var, Var> &key) {
                                   return std::make_pair(c.i, c.j) < key;
                               });
    if (it == couplings_.end() or it->i != i or it->j != j) return std::nullopt;
    return static_cast<std::size_t>(it - couplings_.begin());
}

double Qubo::max_abs_coefficient() const
{
    double m = 0.0;
    for (double h : linear_) m = std::max(m, std::abs(h));
    for (const auto &c : couplings_) m = std::max(m, std::abs(c.value));
    return m;
}


QuboBuilder::QuboBuilder(std::size_t n)
    : n_(n)
    , linear_(n)
{
    if (n == 0) throw std::invalid_argument("a QUBO needs at least one variable");
}

QuboBuilder & QuboBuilder::add_linear(Var i, double value, TermClass cls)
{
    if (i >= n_) throw std::out_of_range("linear term index " + std::to_string(i) + " out of range");
    linear_[i].value += value;
    linear_[i].constraint |= (cls == TermClass::Constraint);
    return *this;
}

QuboBuilder & QuboBuilder::add_quadratic(Var i, Var j, double value, TermClass cls)
{
    if (i >= n_ or j >= n_) throw std::out_of_range("quadratic term index out of range");
    if (i == j) throw std::invalid_argument("quadratic term needs two distinct variables");
    if (i > j) std::swap(i, j);
    Term &t = quadratic_[{i, j}];
    t.value += value;
    t.constraint |= (cls == TermClass::Constraint);
    return *this;
}

QuboBuilder & QuboBuilder::add_offset(double value)
{
    offset_ += value;
    return *this;
}

Qubo QuboBuilder::build() const
{
    Qubo q;
    q.linear_.resize(n_);
    q.linear_class_.resize(n_);
    for (std::size_t i = 0; i != n_; ++i) {
        q.linear_[i] = linear_[i].value;
        q.linear_class_[i] = linear_[i].constraint ? TermClass::Constraint : TermClass::Objective;
    }
    q.offset_ = offset_;

    std::vector<std::size_t> degree(n_, 0);
    for (const auto &[key, term] : quadratic_) {
        if (term.value == 0.0) continue;
        q.couplings_.push_back({key.first, key.second, term.value,
                                term.constraint ? TermClass::Constraint : TermClass::Objective});
        ++degree[key.first];
        ++degree[key.second];
    }

    q.row_start_.assign(n_ + 1, 0);
    for (std::size_t i = 0; i != n_; ++i) q.row_start_[i + 1] = q.row_start_[i] + degree[i];
    q.neighbors_.resize(q.row_start_[n_]);
    // Couplings are sorted by (i, j). Visiting them once for lower neighbours and once for upper neighbours fills
    // every row in ascending neighbour order.
    std::vector<std::size_t> fill(q.row_start_.begin(), q.row_start_.end() - 1);
    for (const auto &c : q.couplings_) q.neighbors_[fill[c.j]++] = {c.i, c.value};
    for (const auto &c : q.couplings_) q.neighbors_[fill[c.i]++] = {c.j, c.value};
    return q;
}

double qjo::energy(const Qubo &qubo, const Assignment &s)
{
    if (s.size() != qubo.size())
        throw std::invalid_argument("assignment length " + std::to_string(s.size()) + " does not match QUBO size " +
                                    std::to_string(qubo.size()));
    double e = qubo.offset();
    auto h = qubo.linear();
    for (std::size_t i = 0; i != h.size(); ++i)
        if (s.bits[i]) e += h[i];
    for (const auto &c : qubo.couplings())
        if (s.bits[c.i] and s.bits[c.j]) e += c.value;
    return e;
}

QuboMetrics qjo::qubo_metrics(const Qubo &qubo)
{
    const std::size_t n = qubo.size();
    const std::size_t m = qubo.couplings().size();
    const double pairs = n < 2 ? 0.0 : 0.5 * double(n) * double(n - 1);
    return {n, m, pairs == 0.0 ? 0.0 : double(m) / pairs};
}

Qubo qjo::condition(const Qubo &qubo, const std::vector<std::int8_t> &fixed, std::vector<Var> &free_vars)
{
    if (fixed.size() != qubo.size()) throw std::invalid_argument("fixed-value vector has the wrong length");
    free_vars.clear();
    std::vector<std::int64_t> local(qubo.size(), -1);
    for (Var i = 0; i != qubo.size(); ++i) {
        if (fixed[i] < 0) {
            local[i] = static_cast<std::int64_t>(free_vars.size());
            free_vars.push_back(i);
        }
    }
    if (free_vars.empty()) throw std::invalid_argument("conditioning would leave no free variable");

    QuboBuilder b(free_vars.size());
    b.add_offset(qubo.offset());
    for (Var i = 0; i != qubo.size(); ++i) {
        double h = qubo.linear(i);
        if (h == 0.0) continue;
        if (local[i] >= 0) b.add_linear(Var(local[i]), h, qubo.linear_class(i));
        else if (fixed[i] == 1) b.add_offset(h);
    }
    for (const auto &c : qubo.couplings()) {
        bool fi = local[c.i] < 0, fj = local[c.j] < 0;
        if (not fi and not fj) b.add_quadratic(Var(local[c.i]), Var(local[c.j]), c.value, c.cls);
        else if (fi and fj) { if (fixed[c.i] == 1 and fixed[c.j] == 1) b.add_offset(c.value); }
        else if (fi) { if (fixed[c.i] == 1) b.add_linear(Var(local[c.j]), c.value, c.cls); }
        else if (fixed[c.j] == 1) b.add_linear(Var(local[c.i]), c.value, c.cls);
    }
    return b.build();
}
