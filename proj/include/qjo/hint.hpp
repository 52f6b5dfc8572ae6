#pragma once

#include <qjo/plan_tree.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace qjo {

struct HintParseError : std::runtime_error
{
    HintParseError(const std::string &what, std::size_t position);
    std::size_t position;
};

/// `Leading(...)` text of a plan. A join is written `(L R)` when both inputs are relations and `(LR)` otherwise.
/// When the root has a joined input, the `Leading(...)` parentheses also close the root join, e.g.
/// `Leading((a(b c))(d e))`; a two-relation plan reads `Leading((a b))`.
std::string emit_hint(const PlanTree &plan);

/// Inverse of emit_hint. Whitespace between tokens is tolerated; a fully parenthesized root is accepted too.
PlanTree parse_hint(std::string_view text);

}
