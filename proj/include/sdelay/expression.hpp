#pragma once

#include <memory>
#include <string>
#include <vector>

namespace sdelay {

/// Scalar arithmetic over one variable: + - * / ^, parentheses, unary minus,
/// constants pi and e, and sin cos tan exp log sqrt abs sinh cosh tanh.
/// Immutable after parsing, so evaluation is safe from several threads.
class Expression {
public:
    /// Throws std::invalid_argument with the offending position.
    static Expression parse(const std::string& text, const std::string& variable = "x");

    double operator()(double value) const;
    const std::string& text() const noexcept { return text_; }

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
};

}  // namespace sdelay
