#pragma once

#include "pathctl/path.hpp"

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>

namespace pathctl::cli {

/// Syntax or vocabulary error; column is 1-based within the expression text.
class ExpressionError : public std::runtime_error {
public:
    ExpressionError(const std::string& what, std::size_t column)
        : std::runtime_error(what), column_(column) {}
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

/// A formula over t, the action a and coordinates y1..yk, built from numbers,
/// pi, + - * / ^, unary minus, sin, cos, exp, log, sqrt, tanh, abs, min, max.
/// Parsing is the only way in, so evaluation cannot fail on unknown names.
class Expression {
public:
    /// Throws ExpressionError; coordinates beyond max_coordinate are rejected.
    static Expression parse(const std::string& text, std::size_t max_coordinate);

    double operator()(double t, const Vector& y, double a) const;
    const std::string& text() const noexcept { return text_; }

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
};

}  // namespace pathctl::cli
