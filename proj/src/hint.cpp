#include <qjo/hint.hpp>

#include <cctype>


using namespace qjo;


HintParseError::HintParseError(const std::string &what, std::size_t pos)
    : std::runtime_error(what + " at position " + std::to_string(pos))
    , position(pos)
{ }


namespace {

void emit_node(const PlanTree &p, std::string &out)
{
    if (p.is_leaf()) {
        out += p.relation();
        return;
    }
    out += '(';
    emit_node(p.left(), out);
    if (p.left().is_leaf() and p.right().is_leaf()) out += ' ';
    emit_node(p.right(), out);
    out += ')';
}

bool name_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) or c == '_' or c == '$' or c == '.';
}

class Parser
{
    public:
    explicit Parser(std::string_view text) : text_(text) {}

    PlanTree parse()
    {
        skip();
        static constexpr std::string_view kKeyword = "Leading";
        if (text_.substr(pos_, kKeyword.size()) != kKeyword) fail("expected 'Leading'");
        pos_ += kKeyword.size();
        skip();
        expect('(');
        PlanTree first = node();
        skip();
        PlanTree root = first;
        if (peek() != ')') {
            // root join written without its own parentheses
            PlanTree second = node();
            root = PlanTree::join(std::move(first), std::move(second));
            skip();
        } else if (first.is_leaf()) {
            fail("a hint needs at least one join");
        }
        expect(')');
        skip();
        if (pos_ != text_.size()) fail("trailing characters");
        return root;
    }

    private:
    PlanTree node()
    {
        skip();
        if (peek() == '(') {
            ++pos_;
            PlanTree l = node();
            PlanTree r = node();
            skip();
            expect(')');
            return PlanTree::join(std::move(l), std::move(r));
        }
        const std::size_t start = pos_;
        while (pos_ < text_.size() and name_char(text_[pos_])) ++pos_;
        if (pos_ == start) fail("expected relation name or '('");
        return PlanTree::leaf(std::string(text_.substr(start, pos_ - start)));
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void skip()
    {
        while (pos_ < text_.size() and std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    void expect(char c)
    {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    [[noreturn]] void fail(const std::string &what) const { throw HintParseError(what, pos_); }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}


std::string qjo::emit_hint(const PlanTree &plan)
{
    if (plan.is_leaf()) throw std::invalid_argument("a hint needs at least one join");
    std::string out = "Leading(";
    if (plan.left().is_leaf() and plan.right().is_leaf()) {
        emit_node(plan, out);
    } else {
        emit_node(plan.left(), out);
        emit_node(plan.right(), out);
    }
    out += ')';
    return out;
}

PlanTree qjo::parse_hint(std::string_view text)
{
    return Parser(text).parse();
}
