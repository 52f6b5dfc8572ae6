#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qjo {

using Var = std::uint32_t;

/// Whether a term enforces validity or prices the objective. A term that receives both kinds of contribution is
/// tagged CONSTRAINT.
enum class TermClass : std::uint8_t { Constraint, Objective };

struct Coupling
{
    Var i; ///< i < j
    Var j;
    double value;
    TermClass cls;
};

/// Binary vector s in {0,1}^n.
struct Assignment
{
    std::vector<std::uint8_t> bits;

    Assignment() = default;
    explicit Assignment(std::size_t n) : bits(n, 0) {}
    explicit Assignment(std::vector<std::uint8_t> b) : bits(std::move(b)) {}

    std::size_t size() const { return bits.size(); }
    bool operator[](std::size_t i) const { return bits[i] != 0; }

    friend auto operator<=>(const Assignment &, const Assignment &) = default;
    friend bool operator==(const Assignment &, const Assignment &) = default;
};

/// Sparse QUBO  E(s) = sum_{i<j} J_ij s_i s_j + sum_i h_i s_i + offset.  Immutable once built; use QuboBuilder.
class Qubo
{
    public:
    struct Neighbor
    {
        Var var;
        double value;
    };

    std::size_t size() const { return linear_.size(); }
    std::span<const double> linear() const { return linear_; }
    double linear(Var i) const { return linear_.at(i); }
    TermClass linear_class(Var i) const { return linear_class_.at(i); }
    /// Sorted by (i, j); the position in this vector is the pair index used by relaxation.
    const std::vector<Coupling> & couplings() const { return couplings_; }
    double offset() const { return offset_; }

    /// Couplings incident to `i`, sorted by neighbour.
    std::span<const Neighbor> neighbors(Var i) const
    {
        return {neighbors_.data() + row_start_[i], neighbors_.data() + row_start_[i + 1]};
    }

    /// Position of pair (i, j) in couplings(), if stored.
    std::optional<std::size_t> pair_index(Var i, Var j) const;

    /// Largest |h_i| or |J_ij|; 0 for an all-zero QUBO.
    double max_abs_coefficient() const;

    private:
    friend class QuboBuilder;
    Qubo() = default;

    std::vector<double> linear_;
    std::vector<TermClass> linear_class_;
    std::vector<Coupling> couplings_;
    double offset_ = 0.0;
    std::vector<std::size_t> row_start_;
    std::vector<Neighbor> neighbors_;
};

/// Accumulates terms; zero-valued terms are dropped at build().
class QuboBuilder
{
    public:
    explicit QuboBuilder(std::size_t n);

    QuboBuilder & add_linear(Var i, double value, TermClass cls = TermClass::Objective);
    QuboBuilder & add_quadratic(Var i, Var j, double value, TermClass cls = TermClass::Objective);
    QuboBuilder & add_offset(double value);

    Qubo build() const;

    private:
    struct Term
    {
        double value = 0.0;
        bool constraint = false;
    };
    std::size_t n_;
    std::vector<Term> linear_;
    std::map<std::pair<Var, Var>, Term> quadratic_;
    double offset_ = 0.0;
};

/// Throws std::invalid_argument on length mismatch.
double energy(const Qubo &qubo, const Assignment &s);

struct QuboMetrics
{
    std::size_t variables;
    std::size_t couplings;
    double density; ///< couplings / C(n, 2); 0 when n < 2
};

QuboMetrics qubo_metrics(const Qubo &qubo);

/// Fixes some variables and returns the QUBO over the remaining ones (in ascending order of their original index),
/// with the fixed values folded into linear terms and offset. `free_vars` receives the original indices.
Qubo condition(const Qubo &qubo, const std::vector<std::int8_t> &fixed, std::vector<Var> &free_vars);

}
