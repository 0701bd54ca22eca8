#pragma once

// Closed-form analytic expression trees for metric components and soliton
// potentials, evaluable over doubles or jets, plus a small parser for the
// text metric-definition format.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ril/jet.hpp"

namespace ril {

class Expr;

namespace detail {

enum class NodeKind : std::uint8_t { kConst, kVar, kAdd, kSub, kMul, kDiv, kNeg, kPow, kExp, kLog, kSin, kCos, kSqrt };

struct ExprNode {
    NodeKind kind;
    double value = 0.0;  // kConst: the constant; kPow: the exponent
    int var = -1;
    std::shared_ptr<const ExprNode> a, b;
};

}  // namespace detail

/// Immutable analytic expression in the chart coordinates.
class Expr {
public:
    Expr() = default;

    static Expr constant(double v) {
        auto n = std::make_shared<detail::ExprNode>();
        n->kind = detail::NodeKind::kConst;
        n->value = v;
        return Expr(std::move(n));
    }
    static Expr var(int index) {
        auto n = std::make_shared<detail::ExprNode>();
        n->kind = detail::NodeKind::kVar;
        n->var = index;
        return Expr(std::move(n));
    }

    bool valid() const { return node_ != nullptr; }

    friend Expr operator+(const Expr& a, const Expr& b) { return binary(detail::NodeKind::kAdd, a, b); }
    friend Expr operator-(const Expr& a, const Expr& b) { return binary(detail::NodeKind::kSub, a, b); }
    friend Expr operator*(const Expr& a, const Expr& b) { return binary(detail::NodeKind::kMul, a, b); }
    friend Expr operator/(const Expr& a, const Expr& b) { return binary(detail::NodeKind::kDiv, a, b); }
    friend Expr operator-(const Expr& a) { return unary(detail::NodeKind::kNeg, a); }
    friend Expr operator+(const Expr& a, double k) { return a + constant(k); }
    friend Expr operator+(double k, const Expr& a) { return constant(k) + a; }
    friend Expr operator-(const Expr& a, double k) { return a - constant(k); }
    friend Expr operator-(double k, const Expr& a) { return constant(k) - a; }
    friend Expr operator*(const Expr& a, double k) { return a * constant(k); }
    friend Expr operator*(double k, const Expr& a) { return constant(k) * a; }
    friend Expr operator/(const Expr& a, double k) { return a / constant(k); }
    friend Expr operator/(double k, const Expr& a) { return constant(k) / a; }

    friend Expr exp(const Expr& a) { return unary(detail::NodeKind::kExp, a); }
    friend Expr log(const Expr& a) { return unary(detail::NodeKind::kLog, a); }
    friend Expr sin(const Expr& a) { return unary(detail::NodeKind::kSin, a); }
    friend Expr cos(const Expr& a) { return unary(detail::NodeKind::kCos, a); }
    friend Expr sqrt(const Expr& a) { return unary(detail::NodeKind::kSqrt, a); }
    friend Expr pow(const Expr& a, double p) {
        Expr e = unary(detail::NodeKind::kPow, a);
        const_cast<detail::ExprNode*>(e.node_.get())->value = p;
        return e;
    }

    template <class T>
    T eval(std::span<const T> vars) const {
        if (!node_) throw std::invalid_argument("empty expression");
        return eval_node(*node_, vars);
    }
    double eval_d(std::span<const double> vars) const { return eval<double>(vars); }

private:
    explicit Expr(std::shared_ptr<const detail::ExprNode> n) : node_(std::move(n)) {}

    static Expr binary(detail::NodeKind k, const Expr& a, const Expr& b) {
        auto n = std::make_shared<detail::ExprNode>();
        n->kind = k;
        n->a = a.node_;
        n->b = b.node_;
        return Expr(std::move(n));
    }
    static Expr unary(detail::NodeKind k, const Expr& a) {
        auto n = std::make_shared<detail::ExprNode>();
        n->kind = k;
        n->a = a.node_;
        return Expr(std::move(n));
    }

    template <class T>
    static T eval_node(const detail::ExprNode& n, std::span<const T> vars) {
        using detail::NodeKind;
        using std::cos;
        using std::exp;
        using std::log;
        using std::sin;
        using std::sqrt;
        switch (n.kind) {
            case NodeKind::kConst:
                if constexpr (std::is_same_v<T, double>) return n.value;
                else return T::constant(vars[0].space(), Dual(n.value));
            case NodeKind::kVar: return vars[n.var];
            case NodeKind::kAdd: return eval_node(*n.a, vars) + eval_node(*n.b, vars);
            case NodeKind::kSub: return eval_node(*n.a, vars) - eval_node(*n.b, vars);
            case NodeKind::kMul: return eval_node(*n.a, vars) * eval_node(*n.b, vars);
            case NodeKind::kDiv: return eval_node(*n.a, vars) / eval_node(*n.b, vars);
            case NodeKind::kNeg: return -eval_node(*n.a, vars);
            case NodeKind::kExp: return exp(eval_node(*n.a, vars));
            case NodeKind::kLog: return log(eval_node(*n.a, vars));
            case NodeKind::kSin: return sin(eval_node(*n.a, vars));
            case NodeKind::kCos: return cos(eval_node(*n.a, vars));
            case NodeKind::kSqrt: return sqrt(eval_node(*n.a, vars));
            case NodeKind::kPow: {
                T base = eval_node(*n.a, vars);
                double p = n.value;
                double ip;
                if (std::modf(p, &ip) == 0.0 && ip >= 0.0 && ip <= 64.0) {
                    // integer powers by repeated multiplication: valid for any base
                    int e = static_cast<int>(ip);
                    if constexpr (std::is_same_v<T, double>) {
                        double r = 1.0;
                        for (int i = 0; i < e; ++i) r *= base;
                        return r;
                    } else {
                        T r = T::constant(base.space(), Dual(1.0));
                        for (int i = 0; i < e; ++i) r = r * base;
                        return r;
                    }
                }
                using std::pow;
                return pow(base, p);
            }
        }
        throw std::logic_error("unreachable expression node");
    }

    std::shared_ptr<const detail::ExprNode> node_;
};

/// Parse failure with the 1-based line/column of the offending character.
struct ExprParseError : std::runtime_error {
    ExprParseError(const std::string& msg, int line, int column)
        : std::runtime_error(msg + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
          line(line), column(column) {}
    int line, column;
};

/// Recursive-descent parser over the grammar documented in the README:
///   expr := term (('+'|'-') term)* ; term := factor (('*'|'/') factor)* ;
///   factor := unary ('^' signed-number)? ; unary := '-' unary | primary ;
///   primary := number | func '(' expr ')' | name | '(' expr ')'
class ExprParser {
public:
    ExprParser(std::string_view text, std::span<const std::string> variables,
               const std::map<std::string, double>& parameters = {})
        : text_(text), vars_(variables), params_(parameters) {}

    Expr parse() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        int line = 1, col = 1;
        for (size_t i = 0; i < pos_ && i < text_.size(); ++i) {
            if (text_[i] == '\n') { ++line; col = 1; } else ++col;
        }
        throw ExprParseError(msg, line, col);
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r'))
            ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) { ++pos_; return true; }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Expr parse_expr() {
        Expr e = parse_term();
        for (;;) {
            if (eat('+')) e = e + parse_term();
            else if (eat('-')) e = e - parse_term();
            else return e;
        }
    }
    Expr parse_term() {
        Expr e = parse_factor();
        for (;;) {
            if (eat('*')) e = e * parse_factor();
            else if (eat('/')) e = e / parse_factor();
            else return e;
        }
    }
    Expr parse_factor() {
        Expr e = parse_unary();
        if (eat('^')) {
            skip_ws();
            bool neg = eat('-');
            double p = parse_number_literal();
            return pow(e, neg ? -p : p);
        }
        return e;
    }
    Expr parse_unary() {
        if (eat('-')) return -parse_unary();
        return parse_primary();
    }
    double parse_number_literal() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                text_[pos_] == 'e' || text_[pos_] == 'E' ||
                ((text_[pos_] == '+' || text_[pos_] == '-') && pos_ > start &&
                 (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
            ++pos_;
        if (start == pos_) fail("expected a number");
        try {
            return std::stod(std::string(text_.substr(start, pos_ - start)));
        } catch (const std::exception&) {
            pos_ = start;
            fail("malformed number");
        }
    }
    Expr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return Expr::constant(parse_number_literal());
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            std::string name(text_.substr(start, pos_ - start));
            if (peek() == '(') {
                ++pos_;
                Expr arg = parse_expr();
                if (!eat(')')) fail("expected ')'");
                if (name == "exp") return exp(arg);
                if (name == "log") return log(arg);
                if (name == "sin") return sin(arg);
                if (name == "cos") return cos(arg);
                if (name == "sqrt") return sqrt(arg);
                pos_ = start;
                fail("unknown function '" + name + "'");
            }
            for (size_t i = 0; i < vars_.size(); ++i)
                if (vars_[i] == name) return Expr::var(static_cast<int>(i));
            if (auto it = params_.find(name); it != params_.end()) return Expr::constant(it->second);
            pos_ = start;
            fail("unknown identifier '" + name + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string_view text_;
    std::span<const std::string> vars_;
    const std::map<std::string, double>& params_;
    size_t pos_ = 0;
};

inline Expr parse_expression(std::string_view text, std::span<const std::string> variables,
                             const std::map<std::string, double>& parameters = {}) {
    return ExprParser(text, variables, parameters).parse();
}

}  // namespace ril
