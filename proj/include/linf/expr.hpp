#pragma once

#include <memory>
#include <string>

namespace linf {

/// Compiled arithmetic expression in the coordinates x and y.
///
/// Grammar: numbers, the variables `x`, `y` (aliases `x1`, `x2`), the
/// constant `pi`, binary `+ - * / ^` (`^` is right-associative), unary minus,
/// parentheses, and the functions sin, cos, exp, atan, abs, sqrt.
/// Parsing errors throw ConfigError with the offending column.
class Expression {
public:
    Expression() = default;
    explicit Expression(std::string source);

    double operator()(double x, double y = 0.0) const;

    const std::string& source() const { return source_; }
    bool empty() const { return root_ == nullptr; }

    struct Node;

private:
    std::string source_;
    std::shared_ptr<const Node> root_;
};

}  // namespace linf
