#pragma once

/// @file expression.hpp
/// @brief Tiny arithmetic-expression parser for user-supplied initial data.
///
/// Grammar (recursive descent, right-associative ^):
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := '-' factor | power
///   power  := atom ('^' factor)?
///   atom   := number | 'x' | 'y' | 'r' | 'pi' | fn '(' expr ')' | '(' expr ')'
///   fn     := sin | cos | exp | sqrt | abs
///
/// Variables: x, y are coordinates, r = sqrt(x^2 + y^2). Parse errors carry
/// the character position.

#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <string>

#include "capfem/error.hpp"
#include "capfem/geometry.hpp"

namespace capfem {

/// A compiled expression in the variables x, y (and r).
class Expression {
public:
    /// Parses `text`; throws Error(ErrorKind::parse) with the offending
    /// position on malformed input.
    static Expression parse(const std::string& text);

    double operator()(Vec2 p) const { return root_(p); }
    const std::string& text() const { return text_; }

private:
    using Node = std::function<double(Vec2)>;

    explicit Expression(Node root, std::string text)
        : root_(std::move(root)), text_(std::move(text)) {}

    Node root_;
    std::string text_;

    friend struct expression_parser;
};

struct expression_parser {
    const std::string& src;
    std::size_t pos = 0;

    using Node = std::function<double(Vec2)>;

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorKind::parse,
                    "expression: " + what + " at position " +
                        std::to_string(pos),
                    static_cast<long>(pos));
    }

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
            ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < src.size() && src[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    Node parse_expr() {
        Node lhs = parse_term();
        for (;;) {
            if (eat('+')) {
                Node rhs = parse_term();
                lhs = [lhs, rhs](Vec2 p) { return lhs(p) + rhs(p); };
            } else if (eat('-')) {
                Node rhs = parse_term();
                lhs = [lhs, rhs](Vec2 p) { return lhs(p) - rhs(p); };
            } else {
                return lhs;
            }
        }
    }

    Node parse_term() {
        Node lhs = parse_factor();
        for (;;) {
            if (eat('*')) {
                Node rhs = parse_factor();
                lhs = [lhs, rhs](Vec2 p) { return lhs(p) * rhs(p); };
            } else if (eat('/')) {
                Node rhs = parse_factor();
                lhs = [lhs, rhs](Vec2 p) { return lhs(p) / rhs(p); };
            } else {
                return lhs;
            }
        }
    }

    Node parse_factor() {
        if (eat('-')) {
            Node inner = parse_factor();
            return [inner](Vec2 p) { return -inner(p); };
        }
        return parse_power();
    }

    Node parse_power() {
        Node base = parse_atom();
        if (eat('^')) {
            Node expo = parse_factor(); // right associative, allows -n
            return [base, expo](Vec2 p) { return std::pow(base(p), expo(p)); };
        }
        return base;
    }

    Node parse_atom() {
        skip_ws();
        if (pos >= src.size()) fail("unexpected end of input");
        char c = src[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v;
            try {
                v = std::stod(src.substr(pos), &used);
            } catch (const std::exception&) {
                fail("malformed number");
            }
            pos += used;
            return [v](Vec2) { return v; };
        }
        if (c == '(') {
            ++pos;
            Node inner = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return inner;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos;
            while (pos < src.size() &&
                   std::isalpha(static_cast<unsigned char>(src[pos])))
                ++pos;
            std::string word = src.substr(start, pos - start);
            if (word == "x") return [](Vec2 p) { return p.x; };
            if (word == "y") return [](Vec2 p) { return p.y; };
            if (word == "r") return [](Vec2 p) { return norm(p); };
            if (word == "pi") return [](Vec2) { return M_PI; };
            auto unary = [&](double (*fn)(double)) -> Node {
                if (!eat('(')) fail("expected '(' after function name");
                Node arg = parse_expr();
                if (!eat(')')) fail("expected ')'");
                return [fn, arg](Vec2 p) { return fn(arg(p)); };
            };
            if (word == "sin") return unary(std::sin);
            if (word == "cos") return unary(std::cos);
            if (word == "exp") return unary(std::exp);
            if (word == "sqrt") return unary(std::sqrt);
            if (word == "abs") return unary(std::fabs);
            pos = start;
            fail("unknown identifier '" + word + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

inline Expression Expression::parse(const std::string& text) {
    expression_parser p{text};
    Node root = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");
    return Expression(std::move(root), text);
}

} // namespace capfem
