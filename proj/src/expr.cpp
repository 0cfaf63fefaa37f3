#include "linf/expr.hpp"

#include "linf/error.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

namespace linf {

struct Expression::Node {
    enum class Kind { number, var_x, var_y, neg, add, sub, mul, div, pow, call };
    enum class Fn { sin, cos, exp, atan, abs, sqrt };

    Kind kind = Kind::number;
    double value = 0.0;
    Fn fn = Fn::sin;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;

    double eval(double x, double y) const
    {
        switch (kind) {
        case Kind::number: return value;
        case Kind::var_x: return x;
        case Kind::var_y: return y;
        case Kind::neg: return -lhs->eval(x, y);
        case Kind::add: return lhs->eval(x, y) + rhs->eval(x, y);
        case Kind::sub: return lhs->eval(x, y) - rhs->eval(x, y);
        case Kind::mul: return lhs->eval(x, y) * rhs->eval(x, y);
        case Kind::div: return lhs->eval(x, y) / rhs->eval(x, y);
        case Kind::pow: return std::pow(lhs->eval(x, y), rhs->eval(x, y));
        case Kind::call: {
            const double a = lhs->eval(x, y);
            switch (fn) {
            case Fn::sin: return std::sin(a);
            case Fn::cos: return std::cos(a);
            case Fn::exp: return std::exp(a);
            case Fn::atan: return std::atan(a);
            case Fn::abs: return std::abs(a);
            case Fn::sqrt: return std::sqrt(a);
            }
        }
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

NodePtr make(Node::Kind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr)
{
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse()
    {
        NodePtr n = expression();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw ConfigError("expression '" + s_ + "': " + what + " at column " +
                          std::to_string(pos_ + 1));
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expression()
    {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) lhs = make(Node::Kind::add, lhs, term());
            else if (accept('-')) lhs = make(Node::Kind::sub, lhs, term());
            else return lhs;
        }
    }

    NodePtr term()
    {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make(Node::Kind::mul, lhs, unary());
            else if (accept('/')) lhs = make(Node::Kind::div, lhs, unary());
            else return lhs;
        }
    }

    // unary minus binds looser than ^ so that -x^2 == -(x^2)
    NodePtr unary()
    {
        if (accept('-')) return make(Node::Kind::neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power()
    {
        NodePtr base = primary();
        if (accept('^')) return make(Node::Kind::pow, base, unary());
        return base;
    }

    NodePtr primary()
    {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr n = expression();
            if (!accept(')')) fail("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        fail("unexpected character");
    }

    NodePtr number()
    {
        const char* begin = s_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        auto n = std::make_shared<Node>();
        n->value = v;
        return n;
    }

    NodePtr identifier()
    {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        const std::string name = s_.substr(start, pos_ - start);
        if (name == "x" || name == "x1") return make(Node::Kind::var_x);
        if (name == "y" || name == "x2") return make(Node::Kind::var_y);
        if (name == "pi") {
            auto n = std::make_shared<Node>();
            n->value = std::numbers::pi;
            return n;
        }
        static const std::vector<std::pair<std::string, Node::Fn>> fns = {
            {"sin", Node::Fn::sin}, {"cos", Node::Fn::cos},   {"exp", Node::Fn::exp},
            {"atan", Node::Fn::atan}, {"abs", Node::Fn::abs}, {"sqrt", Node::Fn::sqrt},
        };
        for (const auto& [fname, fn] : fns) {
            if (name != fname) continue;
            if (!accept('(')) fail("expected '(' after " + name);
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::call;
            n->fn = fn;
            n->lhs = expression();
            if (!accept(')')) fail("expected ')'");
            return n;
        }
        pos_ = start;
        fail("unknown identifier '" + name + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(std::string source) : source_(std::move(source))
{
    root_ = Parser(source_).parse();
}

double Expression::operator()(double x, double y) const
{
    if (!root_) throw ConfigError("evaluating an empty expression");
    return root_->eval(x, y);
}

}  // namespace linf
