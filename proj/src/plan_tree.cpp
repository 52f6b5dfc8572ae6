#include <qjo/plan_tree.hpp>

#include <stdexcept>


using namespace qjo;


PlanTree PlanTree::leaf(std::string relation)
{
    if (relation.empty())
        throw std::invalid_argument("plan leaf needs a relation name");
    PlanTree t;
    t.relation_ = std::move(relation);
    return t;
}

PlanTree PlanTree::join(PlanTree left, PlanTree right)
{
    PlanTree t;
    t.left_ = std::make_shared<const PlanTree>(std::move(left));
    t.right_ = std::make_shared<const PlanTree>(std::move(right));
    return t;
}

const std::string & PlanTree::relation() const
{
    if (not is_leaf()) throw std::logic_error("relation() called on a join node");
    return relation_;
}

const PlanTree & PlanTree::left() const
{
    if (is_leaf()) throw std::logic_error("left() called on a leaf");
    return *left_;
}

const PlanTree & PlanTree::right() const
{
    if (is_leaf()) throw std::logic_error("right() called on a leaf");
    return *right_;
}

void PlanTree::collect_leaves(std::vector<std::string> &out) const
{
    if (is_leaf()) {
        out.push_back(relation_);
        return;
    }
    left_->collect_leaves(out);
    right_->collect_leaves(out);
}

std::vector<std::string> PlanTree::leaves() const
{
    std::vector<std::string> out;
    collect_leaves(out);
    return out;
}

std::size_t PlanTree::join_count() const
{
    if (is_leaf()) return 0;
    return 1 + left_->join_count() + right_->join_count();
}

std::string PlanTree::to_string() const
{
    if (is_leaf()) return relation_;
    return "(" + left_->to_string() + " " + right_->to_string() + ")";
}

bool qjo::operator==(const PlanTree &lhs, const PlanTree &rhs)
{
    if (lhs.is_leaf() != rhs.is_leaf()) return false;
    if (lhs.is_leaf()) return lhs.relation_ == rhs.relation_;
    return *lhs.left_ == *rhs.left_ and *lhs.right_ == *rhs.right_;
}
