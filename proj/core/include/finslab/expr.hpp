#pragma once

// Arithmetic expression trees over indexed variables.
//
// Grammar (precedence high to low): function call / parentheses, '^'
// (right-associative, exponent may carry a sign), unary minus/plus, '*' '/',
// '+' '-'. Functions: pow(a, b), exp, log, sqrt, sin, cos. The identifier
// `pi` is a constant. Every other identifier must be declared in the
// VariableTable handed to the parser.

#include "finslab/errors.hpp"
#include "finslab/jets.hpp"

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace finslab {

class VariableTable {
public:
    VariableTable() = default;
    explicit VariableTable(std::vector<std::string> names) : names_(std::move(names)) {}

    /// x0..x{n-1}, y0..y{n-1}.
    static VariableTable chart_and_fiber(int n);
    /// u0..u{d-1}.
    static VariableTable parameters(int d);

    int size() const noexcept { return static_cast<int>(names_.size()); }
    const std::string& name(int i) const { return names_.at(static_cast<std::size_t>(i)); }
    /// Index of `name`, or -1.
    int find(std::string_view name) const;

private:
    std::vector<std::string> names_;
};

class Expr {
public:
    enum class Kind { constant, variable, negate, add, sub, mul, div, pow, exp, log, sqrt, sin, cos };

    struct Node {
        Kind kind;
        double value = 0.0;
        int var = -1;
        int max_var = -1;
        std::shared_ptr<const Node> lhs;
        std::shared_ptr<const Node> rhs;
    };

    Expr() : Expr(constant(0.0)) {}

    static Expr constant(double v);
    static Expr variable(int index);

    Kind kind() const noexcept { return node_->kind; }
    const Node& node() const noexcept { return *node_; }
    bool is_constant() const noexcept { return node_->kind == Kind::constant; }
    double constant_value() const noexcept { return node_->value; }
    /// Largest variable index referenced, or -1.
    int max_variable() const noexcept { return node_->max_var; }

    template <class S>
    S evaluate(std::span<const S> vars) const;

    double operator()(std::span<const double> vars) const { return evaluate<double>(vars); }

    friend Expr operator+(const Expr& a, const Expr& b) { return binary(Kind::add, a, b); }
    friend Expr operator-(const Expr& a, const Expr& b) { return binary(Kind::sub, a, b); }
    friend Expr operator*(const Expr& a, const Expr& b) { return binary(Kind::mul, a, b); }
    friend Expr operator/(const Expr& a, const Expr& b) { return binary(Kind::div, a, b); }
    friend Expr operator+(const Expr& a, double b) { return a + constant(b); }
    friend Expr operator-(const Expr& a, double b) { return a - constant(b); }
    friend Expr operator*(const Expr& a, double b) { return a * constant(b); }
    friend Expr operator/(const Expr& a, double b) { return a / constant(b); }
    friend Expr operator+(double a, const Expr& b) { return constant(a) + b; }
    friend Expr operator-(double a, const Expr& b) { return constant(a) - b; }
    friend Expr operator*(double a, const Expr& b) { return constant(a) * b; }
    friend Expr operator/(double a, const Expr& b) { return constant(a) / b; }
    Expr operator-() const { return unary(Kind::negate, *this); }

    friend Expr pow(const Expr& a, const Expr& b) { return binary(Kind::pow, a, b); }
    friend Expr pow(const Expr& a, double b) { return binary(Kind::pow, a, constant(b)); }
    friend Expr exp(const Expr& a) { return unary(Kind::exp, a); }
    friend Expr log(const Expr& a) { return unary(Kind::log, a); }
    friend Expr sqrt(const Expr& a) { return unary(Kind::sqrt, a); }
    friend Expr sin(const Expr& a) { return unary(Kind::sin, a); }
    friend Expr cos(const Expr& a) { return unary(Kind::cos, a); }

private:
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    static Expr unary(Kind k, const Expr& a);
    static Expr binary(Kind k, const Expr& a, const Expr& b);

    template <class S>
    static S eval(const Node& n, std::span<const S> vars);

    std::shared_ptr<const Node> node_;
};

/// Parse `source` against `variables`. Throws ParseError with a 1-based offset.
Expr parse_expression(std::string_view source, const VariableTable& variables);

/// Canonical text form; parse_expression(print_expression(e)) prints identically.
std::string print_expression(const Expr& e, const VariableTable& variables);

// ---------------------------------------------------------------------------
// Scalar back-ends for evaluation.

namespace detail {

inline double make_constant(const double&, double v) { return v; }
inline JetScalar make_constant(const JetScalar& proto, double v) { return proto.constant(v); }

inline double checked_log(double u) {
    if (!(u > 0.0)) throw DomainError("log of a nonpositive value");
    return std::log(u);
}
inline double checked_sqrt(double u) {
    if (!(u > 0.0)) throw DomainError("sqrt of a nonpositive value");
    return std::sqrt(u);
}
inline double checked_div(double a, double b) {
    if (b == 0.0) throw DomainError("division by zero");
    return a / b;
}
inline double checked_pow(double u, double p) {
    if (std::round(p) != p && !(u > 0.0)) throw DomainError("fractional power of a nonpositive base");
    if (p < 0.0 && u == 0.0) throw DomainError("negative power of zero");
    return std::pow(u, p);
}

inline JetScalar checked_log(const JetScalar& u) { return log(u); }
inline JetScalar checked_sqrt(const JetScalar& u) { return sqrt(u); }
inline JetScalar checked_div(const JetScalar& a, const JetScalar& b) { return a / b; }
inline JetScalar checked_pow(const JetScalar& u, const JetScalar& p) { return pow(u, p); }

} // namespace detail

template <class S>
S Expr::eval(const Node& n, std::span<const S> vars) {
    using std::cos;
    using std::exp;
    using std::sin;
    switch (n.kind) {
    case Kind::constant: return detail::make_constant(vars[0], n.value);
    case Kind::variable: return vars[static_cast<std::size_t>(n.var)];
    case Kind::negate: return -eval(*n.lhs, vars);
    case Kind::add: return eval(*n.lhs, vars) + eval(*n.rhs, vars);
    case Kind::sub: return eval(*n.lhs, vars) - eval(*n.rhs, vars);
    case Kind::mul: return eval(*n.lhs, vars) * eval(*n.rhs, vars);
    case Kind::div: return detail::checked_div(eval(*n.lhs, vars), eval(*n.rhs, vars));
    case Kind::pow:
        if (n.rhs->kind == Kind::constant) {
            if constexpr (std::is_same_v<S, double>) return detail::checked_pow(eval(*n.lhs, vars), n.rhs->value);
            else return pow(eval(*n.lhs, vars), n.rhs->value);
        }
        return detail::checked_pow(eval(*n.lhs, vars), eval(*n.rhs, vars));
    case Kind::exp: return exp(eval(*n.lhs, vars));
    case Kind::log: return detail::checked_log(eval(*n.lhs, vars));
    case Kind::sqrt: return detail::checked_sqrt(eval(*n.lhs, vars));
    case Kind::sin: return sin(eval(*n.lhs, vars));
    case Kind::cos: return cos(eval(*n.lhs, vars));
    }
    throw std::logic_error("unknown expression node");
}

template <class S>
S Expr::evaluate(std::span<const S> vars) const {
    if (vars.empty()) throw DimensionMismatch("expression evaluated without variables");
    if (max_variable() >= static_cast<int>(vars.size()))
        throw DimensionMismatch("expression references a variable beyond the supplied set");
    return eval(*node_, vars);
}

} // namespace finslab
