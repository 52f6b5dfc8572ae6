#pragma once

#include <memory>
#include <string>
#include <vector>

namespace qjo {

/// Immutable binary join tree. Leaves name base relations, inner nodes join two subtrees. Subtrees are shared
/// between copies, so copying a plan is cheap.
class PlanTree
{
    public:
    static PlanTree leaf(std::string relation);
    static PlanTree join(PlanTree left, PlanTree right);

    bool is_leaf() const { return not left_; }
    const std::string & relation() const; ///< leaf only
    const PlanTree & left() const;        ///< inner node only
    const PlanTree & right() const;       ///< inner node only

    /// Leaf names in left-to-right order.
    std::vector<std::string> leaves() const;
    std::size_t join_count() const;

    /// Fully parenthesized form with single-space separators, e.g. `((a b) c)`.
    std::string to_string() const;

    friend bool operator==(const PlanTree &lhs, const PlanTree &rhs);

    private:
    PlanTree() = default;
    void collect_leaves(std::vector<std::string> &out) const;

    std::string relation_;
    std::shared_ptr<const PlanTree> left_;
    std::shared_ptr<const PlanTree> right_;
};

bool operator==(const PlanTree &lhs, const PlanTree &rhs);

}
