#pragma once

// Tiny arithmetic expressions in one variable:
//   numbers, the variable, pi, + - * / ^, unary minus, parentheses,
//   sin cos exp sqrt log.

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "fracdelay/errors.hpp"

namespace fracdelay::io {

class Expression {
public:
    /// Parses `source`; `variable` names the free variable (empty: none).
    static Expression parse(std::string_view source, std::string_view variable = "t") {
        Parser p{source, variable, 0};
        Expression e;
        e.root_ = p.expression();
        p.skip_space();
        if (p.pos != source.size()) {
            p.fail("unexpected trailing input");
        }
        e.source_ = std::string(source);
        return e;
    }

    /// Parses and evaluates a constant expression such as "1/256".
    static double constant(std::string_view source) { return parse(source, "")(0.0); }

    double operator()(double x) const { return root_->eval(x); }

    const std::string& source() const noexcept { return source_; }

private:
    struct Node {
        enum class Kind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };
        Kind kind = Kind::Number;
        double value = 0.0;
        std::string func;
        std::shared_ptr<const Node> lhs;
        std::shared_ptr<const Node> rhs;

        double eval(double x) const {
            switch (kind) {
            case Kind::Number:
                return value;
            case Kind::Variable:
                return x;
            case Kind::Neg:
                return -lhs->eval(x);
            case Kind::Add:
                return lhs->eval(x) + rhs->eval(x);
            case Kind::Sub:
                return lhs->eval(x) - rhs->eval(x);
            case Kind::Mul:
                return lhs->eval(x) * rhs->eval(x);
            case Kind::Div:
                return lhs->eval(x) / rhs->eval(x);
            case Kind::Pow:
                return std::pow(lhs->eval(x), rhs->eval(x));
            case Kind::Call: {
                const double a = lhs->eval(x);
                if (func == "sin") return std::sin(a);
                if (func == "cos") return std::cos(a);
                if (func == "exp") return std::exp(a);
                if (func == "sqrt") return std::sqrt(a);
                return std::log(a);
            }
            }
            return 0.0;
        }
    };
    using NodePtr = std::shared_ptr<const Node>;

    static NodePtr make(Node::Kind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
        auto n = std::make_shared<Node>();
        n->kind = kind;
        n->lhs = std::move(lhs);
        n->rhs = std::move(rhs);
        return n;
    }

    struct Parser {
        std::string_view src;
        std::string_view var;
        std::size_t pos;

        [[noreturn]] void fail(const std::string& why) const {
            throw ParseError("expression '" + std::string(src) + "': " + why + " at offset " + std::to_string(pos));
        }

        void skip_space() {
            while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) {
                ++pos;
            }
        }

        bool accept(char c) {
            skip_space();
            if (pos < src.size() && src[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        NodePtr expression() {
            NodePtr lhs = term();
            while (true) {
                if (accept('+')) {
                    lhs = make(Node::Kind::Add, lhs, term());
                } else if (accept('-')) {
                    lhs = make(Node::Kind::Sub, lhs, term());
                } else {
                    return lhs;
                }
            }
        }

        NodePtr term() {
            NodePtr lhs = unary();
            while (true) {
                if (accept('*')) {
                    lhs = make(Node::Kind::Mul, lhs, unary());
                } else if (accept('/')) {
                    lhs = make(Node::Kind::Div, lhs, unary());
                } else {
                    return lhs;
                }
            }
        }

        NodePtr unary() {
            if (accept('-')) {
                return make(Node::Kind::Neg, unary());
            }
            if (accept('+')) {
                return unary();
            }
            return power();
        }

        NodePtr power() {
            NodePtr base = primary();
            if (accept('^')) {
                return make(Node::Kind::Pow, base, unary());
            }
            return base;
        }

        NodePtr primary() {
            skip_space();
            if (pos >= src.size()) {
                fail("unexpected end of input");
            }
            const char c = src[pos];
            if (accept('(')) {
                NodePtr inner = expression();
                if (!accept(')')) {
                    fail("expected ')'");
                }
                return inner;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                double v = 0.0;
                const auto [ptr, ec] = std::from_chars(src.data() + pos, src.data() + src.size(), v);
                if (ec != std::errc()) {
                    fail("malformed number");
                }
                pos = static_cast<std::size_t>(ptr - src.data());
                auto n = std::make_shared<Node>();
                n->value = v;
                return n;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                const std::size_t start = pos;
                while (pos < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_')) {
                    ++pos;
                }
                const std::string_view name = src.substr(start, pos - start);
                if (!var.empty() && name == var) {
                    return make(Node::Kind::Variable);
                }
                if (name == "pi") {
                    auto n = std::make_shared<Node>();
                    n->value = std::numbers::pi;
                    return n;
                }
                if (name == "sin" || name == "cos" || name == "exp" || name == "sqrt" || name == "log") {
                    if (!accept('(')) {
                        fail("expected '(' after " + std::string(name));
                    }
                    NodePtr arg = expression();
                    if (!accept(')')) {
                        fail("expected ')'");
                    }
                    auto n = std::make_shared<Node>();
                    n->kind = Node::Kind::Call;
                    n->func = std::string(name);
                    n->lhs = std::move(arg);
                    return n;
                }
                pos = start;
                fail("unknown identifier '" + std::string(name) + "'");
            }
            fail(std::string("unexpected character '") + c + "'");
        }
    };

    NodePtr root_;
    std::string source_;
};

}  // namespace fracdelay::io
