#pragma once

// Expression language for multiscale coefficients a(t,x,s,y) and source terms f(t,x).
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | t | x | s | y | pi | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | exp | abs
//
// So '^' binds tighter than unary minus: -2^2 == -4, 2^3^2 == 512.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "fehmm/error.hpp"

namespace fehmm::coeff {

enum class Variable : std::uint8_t { t = 0, x = 1, s = 2, y = 3 };

struct Point {
    double t = 0.0;
    double x = 0.0;
    double s = 0.0;
    double y = 0.0;
};

/// Immutable parsed expression. Nodes are stored in postfix order, which is
/// the order the recursive-descent parser creates them in, so evaluation is a
/// single linear pass over a value stack.
class Expr {
public:
    enum class Op : std::uint8_t { literal, variable, add, sub, mul, div, pow, neg, sin, cos, exp, abs };

    struct Node {
        Op op = Op::literal;
        double value = 0.0;
        Variable var = Variable::t;
        int lhs = -1;
        int rhs = -1;
    };

    Expr() : Expr(constant(0.0)) {}

    static Expr constant(double v) {
        Expr e(std::string{});
        e.nodes_.push_back(Node{Op::literal, v});
        e.max_depth_ = 1;
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof buf, v);
        e.source_.assign(buf, res.ptr);
        return e;
    }

    double evaluate(const Point& p) const {
        const std::array<double, 4> vars{p.t, p.x, p.s, p.y};
        constexpr std::size_t kInline = 48;
        std::array<double, kInline> inline_stack{};
        std::vector<double> heap_stack;
        double* stack = inline_stack.data();
        if (max_depth_ > kInline) {
            heap_stack.resize(max_depth_);
            stack = heap_stack.data();
        }
        std::size_t top = 0;
        for (const Node& n : nodes_) {
            switch (n.op) {
                case Op::literal: stack[top++] = n.value; break;
                case Op::variable: stack[top++] = vars[static_cast<std::size_t>(n.var)]; break;
                case Op::add: --top; stack[top - 1] += stack[top]; break;
                case Op::sub: --top; stack[top - 1] -= stack[top]; break;
                case Op::mul: --top; stack[top - 1] *= stack[top]; break;
                case Op::div:
                    --top;
                    if (stack[top] == 0.0) throw NumericalError("division by zero in '" + source_ + "'");
                    stack[top - 1] /= stack[top];
                    break;
                case Op::pow: --top; stack[top - 1] = power(stack[top - 1], stack[top]); break;
                case Op::neg: stack[top - 1] = -stack[top - 1]; break;
                case Op::sin: stack[top - 1] = std::sin(stack[top - 1]); break;
                case Op::cos: stack[top - 1] = std::cos(stack[top - 1]); break;
                case Op::exp: stack[top - 1] = std::exp(stack[top - 1]); break;
                case Op::abs: stack[top - 1] = std::fabs(stack[top - 1]); break;
            }
        }
        const double r = stack[0];
        if (!std::isfinite(r)) throw NumericalError("non-finite value of '" + source_ + "'");
        return r;
    }

    double operator()(double t, double x, double s, double y) const { return evaluate({t, x, s, y}); }

    bool depends_on(Variable v) const { return (var_mask_ >> static_cast<unsigned>(v)) & 1u; }

    /// Number of distinct variables referenced.
    int variable_count() const {
        int c = 0;
        for (unsigned b = 0; b < 4; ++b) c += (var_mask_ >> b) & 1u;
        return c;
    }

    const std::string& source() const noexcept { return source_; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }

    /// Fully parenthesized rendering; literals use shortest round-trip decimals.
    std::string to_string() const { return nodes_.empty() ? std::string{} : render(static_cast<int>(nodes_.size()) - 1); }

private:
    friend class Parser;
    explicit Expr(std::string source) : source_(std::move(source)) {}

    static double power(double base, double exponent) {
        if (exponent == 2.0) return base * base;
        return std::pow(base, exponent);
    }

    std::string render(int i) const {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        switch (n.op) {
            case Op::literal: {
                if (n.value == std::numbers::pi) return "pi";
                char buf[32];
                auto res = std::to_chars(buf, buf + sizeof buf, n.value);
                return std::string(buf, res.ptr);
            }
            case Op::variable: return std::string(1, "txsy"[static_cast<int>(n.var)]);
            case Op::add: return "(" + render(n.lhs) + " + " + render(n.rhs) + ")";
            case Op::sub: return "(" + render(n.lhs) + " - " + render(n.rhs) + ")";
            case Op::mul: return "(" + render(n.lhs) + " * " + render(n.rhs) + ")";
            case Op::div: return "(" + render(n.lhs) + " / " + render(n.rhs) + ")";
            case Op::pow: return "(" + render(n.lhs) + " ^ " + render(n.rhs) + ")";
            case Op::neg: return "(-" + render(n.lhs) + ")";
            case Op::sin: return "sin(" + render(n.lhs) + ")";
            case Op::cos: return "cos(" + render(n.lhs) + ")";
            case Op::exp: return "exp(" + render(n.lhs) + ")";
            case Op::abs: return "abs(" + render(n.lhs) + ")";
        }
        return {};
    }

    std::string source_;
    std::vector<Node> nodes_;
    std::size_t max_depth_ = 0;
    unsigned var_mask_ = 0;
};

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src), out_(std::string(src)) {}

    Expr run() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError(pos_, "expected expression, found end of input");
        parse_expr();
        skip_ws();
        if (pos_ < src_.size())
            throw ParseError(pos_, std::string("expected operator or end of input, found '") + src_[pos_] + "'");
        out_.max_depth_ = stack_depth();
        return std::move(out_);
    }

private:
    using Op = Expr::Op;

    int emit(Expr::Node n) {
        out_.nodes_.push_back(n);
        return static_cast<int>(out_.nodes_.size()) - 1;
    }

    std::size_t stack_depth() const {
        std::size_t depth = 0, best = 0;
        for (const auto& n : out_.nodes_) {
            if (n.op == Op::literal || n.op == Op::variable) ++depth;
            else if (n.rhs >= 0) --depth;
            best = depth > best ? depth : best;
        }
        return best;
    }

    void skip_ws() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= src_.size())
                throw ParseError(pos_, std::string("expected '") + c + "', found end of input");
            throw ParseError(pos_, std::string("expected '") + c + "', found '" + src_[pos_] + "'");
        }
    }

    int parse_expr() {
        int lhs = parse_term();
        for (;;) {
            if (accept('+')) lhs = emit({Op::add, 0.0, Variable::t, lhs, parse_term()});
            else if (accept('-')) lhs = emit({Op::sub, 0.0, Variable::t, lhs, parse_term()});
            else return lhs;
        }
    }

    int parse_term() {
        int lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = emit({Op::mul, 0.0, Variable::t, lhs, parse_unary()});
            else if (accept('/')) lhs = emit({Op::div, 0.0, Variable::t, lhs, parse_unary()});
            else return lhs;
        }
    }

    int parse_unary() {
        if (accept('-')) {
            int operand = parse_unary();
            return emit({Op::neg, 0.0, Variable::t, operand, -1});
        }
        return parse_power();
    }

    int parse_power() {
        int base = parse_primary();
        if (accept('^')) {
            int exponent = parse_unary();
            return emit({Op::pow, 0.0, Variable::t, base, exponent});
        }
        return base;
    }

    int parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError(pos_, "expected expression, found end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            int inner = parse_expr();
            expect(')');
            return inner;
        }
        if ((c >= '0' && c <= '9') || c == '.') return parse_number();
        if (is_ident_start(c)) return parse_identifier();
        throw ParseError(pos_, std::string("expected expression, found '") + c + "'");
    }

    int parse_number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && ((src_[pos_] >= '0' && src_[pos_] <= '9') || src_[pos_] == '.')) ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
            if (p < src_.size() && src_[p] >= '0' && src_[p] <= '9') {
                pos_ = p;
                while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') ++pos_;
            }
        }
        double v = 0.0;
        const char* first = src_.data() + start;
        const char* last = src_.data() + pos_;
        auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc{} || res.ptr != last)
            throw ParseError(start, "malformed number '" + std::string(first, last) + "'");
        return emit({Op::literal, v});
    }

    static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
    static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

    int parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);
        if (name.size() == 1) {
            const auto slot = std::string_view("txsy").find(name[0]);
            if (slot != std::string_view::npos) {
                out_.var_mask_ |= 1u << slot;
                return emit({Op::variable, 0.0, static_cast<Variable>(slot)});
            }
        }
        if (name == "pi") return emit({Op::literal, std::numbers::pi});
        Op fn;
        if (name == "sin") fn = Op::sin;
        else if (name == "cos") fn = Op::cos;
        else if (name == "exp") fn = Op::exp;
        else if (name == "abs") fn = Op::abs;
        else throw ParseError(start, "unknown identifier '" + std::string(name) + "'");
        expect('(');
        int arg = parse_expr();
        expect(')');
        return emit({fn, 0.0, Variable::t, arg, -1});
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Expr out_;
};

inline Expr parse(std::string_view source) { return Parser(source).run(); }

inline double evaluate(const Expr& e, double t, double x, double s, double y) { return e.evaluate({t, x, s, y}); }

}  // namespace fehmm::coeff
