#include "sdelay/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

namespace sdelay {

struct Expression::Node {
    enum class Kind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call } kind;
    double value = 0.0;
    double (*fn)(double) = nullptr;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

std::shared_ptr<Node> make(Node::Kind kind, NodePtr a = {}, NodePtr b = {}) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

double (*lookup_function(const std::string& name))(double) {
    if (name == "sin") return [](double v) { return std::sin(v); };
    if (name == "cos") return [](double v) { return std::cos(v); };
    if (name == "tan") return [](double v) { return std::tan(v); };
    if (name == "exp") return [](double v) { return std::exp(v); };
    if (name == "log") return [](double v) { return std::log(v); };
    if (name == "sqrt") return [](double v) { return std::sqrt(v); };
    if (name == "abs") return [](double v) { return std::abs(v); };
    if (name == "sinh") return [](double v) { return std::sinh(v); };
    if (name == "cosh") return [](double v) { return std::cosh(v); };
    if (name == "tanh") return [](double v) { return std::tanh(v); };
    return nullptr;
}

class Parser {
public:
    Parser(const std::string& text, const std::string& variable) : s_(text), var_(variable) {}

    NodePtr parse() {
        auto n = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("expression '" + s_ + "': " + what + " at position " +
                                    std::to_string(pos_));
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        auto n = term();
        for (;;) {
            if (accept('+')) n = make(Node::Kind::Add, n, term());
            else if (accept('-')) n = make(Node::Kind::Sub, n, term());
            else return n;
        }
    }

    NodePtr term() {
        auto n = unary();
        for (;;) {
            if (accept('*')) n = make(Node::Kind::Mul, n, unary());
            else if (accept('/')) n = make(Node::Kind::Div, n, unary());
            else return n;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Node::Kind::Neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    // Right-associative; -x^2 parses as -(x^2).
    NodePtr power() {
        auto base = primary();
        if (accept('^')) return make(Node::Kind::Pow, base, unary());
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        const char c = s_[pos_];
        if (accept('(')) {
            auto n = expr();
            if (!accept(')')) fail("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<std::size_t>(end - begin);
            auto n = make(Node::Kind::Number);
            n->value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
                ++pos_;
            }
            const std::string name = s_.substr(start, pos_ - start);
            if (name == var_) return make(Node::Kind::Variable);
            if (name == "pi" || name == "e") {
                auto n = make(Node::Kind::Number);
                n->value = name == "pi" ? std::numbers::pi : std::numbers::e;
                return n;
            }
            auto fn = lookup_function(name);
            if (!fn) fail("unknown identifier '" + name + "'");
            if (!accept('(')) fail("expected '(' after " + name);
            auto arg = expr();
            if (!accept(')')) fail("expected ')'");
            auto n = make(Node::Kind::Call, arg);
            n->fn = fn;
            return n;
        }
        fail(std::string("unexpected '") + c + "'");
    }

    const std::string& s_;
    const std::string& var_;
    std::size_t pos_ = 0;
};

double eval(const Node& n, double v) {
    switch (n.kind) {
        case Node::Kind::Number: return n.value;
        case Node::Kind::Variable: return v;
        case Node::Kind::Neg: return -eval(*n.a, v);
        case Node::Kind::Add: return eval(*n.a, v) + eval(*n.b, v);
        case Node::Kind::Sub: return eval(*n.a, v) - eval(*n.b, v);
        case Node::Kind::Mul: return eval(*n.a, v) * eval(*n.b, v);
        case Node::Kind::Div: return eval(*n.a, v) / eval(*n.b, v);
        case Node::Kind::Pow: return std::pow(eval(*n.a, v), eval(*n.b, v));
        case Node::Kind::Call: return n.fn(eval(*n.a, v));
    }
    return 0.0;
}

}  // namespace

Expression Expression::parse(const std::string& text, const std::string& variable) {
    Expression e;
    e.text_ = text;
    e.root_ = Parser(text, variable).parse();
    return e;
}

double Expression::operator()(double value) const { return eval(*root_, value); }

}  // namespace sdelay
