// Symbolic expression trees over named variables with exact rational
// constants. The node set is deliberately small: sums, products, quotients,
// integer powers, negation, and the unary functions exp and sqrt — exactly
// what separation relations, potentials and chart formulas need. There is no
// canonical simplification; identity testing is randomized pointwise
// evaluation (equal_on_samples). Trees are immutable and shareable.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <charconv>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stackel/dual.hpp"
#include "stackel/errors.hpp"
#include "stackel/rng.hpp"

namespace stackel {

using Rational = boost::multiprecision::cpp_rational;

namespace detail {

enum class NodeKind { Constant, Variable, Add, Sub, Mul, Div, Neg, Pow, Call };
enum class UnaryFn { Exp, Sqrt };

struct Node;
using NodeRef = std::shared_ptr<const Node>;

struct Node {
    NodeKind kind;
    Rational value;     // Constant
    double dval = 0.0;  // Constant, converted once
    int slot = -1;      // Variable: index into the owning context
    std::string name;   // Variable
    NodeRef a, b;
    int exponent = 0;   // Pow
    UnaryFn fn = UnaryFn::Exp;
};

NodeRef make_const(Rational r);
NodeRef make_var(int slot, std::string name);
NodeRef make_add(NodeRef a, NodeRef b);
NodeRef make_sub(NodeRef a, NodeRef b);
NodeRef make_mul(NodeRef a, NodeRef b);
NodeRef make_div(NodeRef a, NodeRef b);
NodeRef make_neg(NodeRef a);
NodeRef make_pow(NodeRef a, int k);
NodeRef make_call(UnaryFn fn, NodeRef a);

inline bool is_const(const NodeRef& n) { return n->kind == NodeKind::Constant; }
inline bool is_const_val(const NodeRef& n, int v) {
    return is_const(n) && n->value == v;
}

inline NodeRef make_const(Rational r) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Constant;
    n->dval = r.convert_to<double>();
    n->value = std::move(r);
    return n;
}

inline NodeRef make_var(int slot, std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Variable;
    n->slot = slot;
    n->name = std::move(name);
    return n;
}

inline NodeRef make_node(NodeKind k, NodeRef a, NodeRef b) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

inline NodeRef make_add(NodeRef a, NodeRef b) {
    if (is_const(a) && is_const(b)) return make_const(a->value + b->value);
    if (is_const_val(a, 0)) return b;
    if (is_const_val(b, 0)) return a;
    return make_node(NodeKind::Add, std::move(a), std::move(b));
}

inline NodeRef make_neg(NodeRef a) {
    if (is_const(a)) return make_const(-a->value);
    if (a->kind == NodeKind::Neg) return a->a;
    return make_node(NodeKind::Neg, std::move(a), nullptr);
}

inline NodeRef make_sub(NodeRef a, NodeRef b) {
    if (is_const(a) && is_const(b)) return make_const(a->value - b->value);
    if (is_const_val(b, 0)) return a;
    if (is_const_val(a, 0)) return make_neg(std::move(b));
    return make_node(NodeKind::Sub, std::move(a), std::move(b));
}

inline NodeRef make_mul(NodeRef a, NodeRef b) {
    if (is_const(a) && is_const(b)) return make_const(a->value * b->value);
    if (is_const_val(a, 0) || is_const_val(b, 0)) return make_const(Rational(0));
    if (is_const_val(a, 1)) return b;
    if (is_const_val(b, 1)) return a;
    return make_node(NodeKind::Mul, std::move(a), std::move(b));
}

inline NodeRef make_div(NodeRef a, NodeRef b) {
    if (is_const_val(b, 0)) throw DomainError("division by the literal zero constant");
    if (is_const(a) && is_const(b)) return make_const(a->value / b->value);
    if (is_const_val(b, 1)) return a;
    if (is_const_val(a, 0)) return make_const(Rational(0));
    return make_node(NodeKind::Div, std::move(a), std::move(b));
}

inline NodeRef make_pow(NodeRef a, int k) {
    if (k == 1) return a;
    if (k == 0) return make_const(Rational(1));
    if (is_const(a)) {
        if (a->value == 0 && k < 0) throw DomainError("zero raised to a negative power");
        Rational r(1);
        Rational base = k > 0 ? a->value : Rational(1) / a->value;
        for (int i = 0; i < (k > 0 ? k : -k); ++i) r *= base;
        return make_const(r);
    }
    auto n = make_node(NodeKind::Pow, std::move(a), nullptr);
    const_cast<Node*>(n.get())->exponent = k;
    return n;
}

inline NodeRef make_call(UnaryFn fn, NodeRef a) {
    auto n = make_node(NodeKind::Call, std::move(a), nullptr);
    const_cast<Node*>(n.get())->fn = fn;
    return n;
}

std::string print_node(const NodeRef& n);

} // namespace detail

/// Ordered variable -> value binding used by the name-keyed evaluate overload.
class Environment {
public:
    Environment() = default;
    Environment(std::initializer_list<std::pair<std::string, double>> init) {
        for (auto& [k, v] : init) set(k, v);
    }
    void set(const std::string& name, double value) {
        for (auto& [k, v] : entries_)
            if (k == name) { v = value; return; }
        entries_.emplace_back(name, value);
    }
    std::optional<double> lookup(std::string_view name) const {
        for (const auto& [k, v] : entries_)
            if (k == name) return v;
        return std::nullopt;
    }

private:
    std::vector<std::pair<std::string, double>> entries_;
};

class Expression {
public:
    using Vars = std::shared_ptr<const std::vector<std::string>>;

    Expression() = default;
    Expression(Vars vars, detail::NodeRef root) : vars_(std::move(vars)), root_(std::move(root)) {}

    /// Parse `text` against the given variable context (see the grammar in
    /// the project docs). Undeclared identifiers are rejected.
    static Expression parse(std::string_view text, std::vector<std::string> vars);
    static Expression parse(std::string_view text, const Vars& vars);

    const std::vector<std::string>& variables() const { return *vars_; }
    const Vars& context() const { return vars_; }
    bool valid() const { return root_ != nullptr; }

    bool is_constant() const { return root_->kind == detail::NodeKind::Constant; }
    const Rational& constant_value() const { return root_->value; }

    /// Exact symbolic derivative with respect to a declared variable.
    Expression differentiate(std::string_view var) const {
        int slot = slot_of(var);
        return Expression(vars_, diff_node(root_, slot));
    }

    /// Evaluate with values ordered exactly like variables().
    template <class T>
    T evaluate(std::span<const T> values) const {
        return eval_node<T>(root_, values);
    }
    double evaluate(std::span<const double> values) const {
        return eval_node<double>(root_, values);
    }
    double evaluate(const Environment& env) const;

    /// Value and gradient (one slot per context variable) at a point.
    std::pair<double, std::vector<double>> evaluate_dual(std::span<const double> values) const;

    std::string str() const { return detail::print_node(root_); }

    const detail::NodeRef& root() const { return root_; }

    friend Expression operator+(const Expression& a, const Expression& b) {
        return combine(a, b, detail::make_add);
    }
    friend Expression operator-(const Expression& a, const Expression& b) {
        return combine(a, b, detail::make_sub);
    }
    friend Expression operator*(const Expression& a, const Expression& b) {
        return combine(a, b, detail::make_mul);
    }
    friend Expression operator/(const Expression& a, const Expression& b) {
        return combine(a, b, detail::make_div);
    }
    friend Expression operator-(const Expression& a) {
        return Expression(a.vars_, detail::make_neg(a.root_));
    }

    int slot_of(std::string_view var) const {
        const auto& names = *vars_;
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == var) return static_cast<int>(i);
        throw UnknownVariable("variable '" + std::string(var) + "' not declared in this context");
    }

private:
    template <class F>
    static Expression combine(const Expression& a, const Expression& b, F&& make) {
        if (a.vars_ != b.vars_ && *a.vars_ != *b.vars_)
            throw Error("expression contexts differ");
        return Expression(a.vars_, make(a.root_, b.root_));
    }

    static detail::NodeRef diff_node(const detail::NodeRef& n, int slot);

    template <class T>
    static T eval_node(const detail::NodeRef& n, std::span<const T> env);

    Vars vars_;
    detail::NodeRef root_;
};

inline Expression pow(const Expression& a, int k) {
    return Expression(a.context(), detail::make_pow(a.root(), k));
}
inline Expression exp_of(const Expression& a) {
    return Expression(a.context(), detail::make_call(detail::UnaryFn::Exp, a.root()));
}
inline Expression sqrt_of(const Expression& a) {
    return Expression(a.context(), detail::make_call(detail::UnaryFn::Sqrt, a.root()));
}

/// Factory for expressions sharing one variable context.
class VarSet {
public:
    explicit VarSet(std::vector<std::string> names)
        : names_(std::make_shared<const std::vector<std::string>>(std::move(names))) {}

    Expression var(std::string_view name) const {
        const auto& v = *names_;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] == name)
                return Expression(names_, detail::make_var(static_cast<int>(i), std::string(name)));
        throw UnknownVariable("variable '" + std::string(name) + "' not declared in this context");
    }
    Expression num(long long value) const {
        return Expression(names_, detail::make_const(Rational(value)));
    }
    Expression num(long long num, long long den) const {
        return Expression(names_, detail::make_const(Rational(num) / Rational(den)));
    }
    Expression parse(std::string_view text) const { return Expression::parse(text, names_); }
    const std::vector<std::string>& names() const { return *names_; }
    const Expression::Vars& context() const { return names_; }

private:
    Expression::Vars names_;
};

// ---------------------------------------------------------------------------
// Differentiation

inline detail::NodeRef Expression::diff_node(const detail::NodeRef& n, int slot) {
    using namespace detail;
    switch (n->kind) {
    case NodeKind::Constant: return make_const(Rational(0));
    case NodeKind::Variable: return make_const(Rational(n->slot == slot ? 1 : 0));
    case NodeKind::Add: return make_add(diff_node(n->a, slot), diff_node(n->b, slot));
    case NodeKind::Sub: return make_sub(diff_node(n->a, slot), diff_node(n->b, slot));
    case NodeKind::Neg: return make_neg(diff_node(n->a, slot));
    case NodeKind::Mul:
        return make_add(make_mul(diff_node(n->a, slot), n->b),
                        make_mul(n->a, diff_node(n->b, slot)));
    case NodeKind::Div: {
        auto da = diff_node(n->a, slot);
        auto db = diff_node(n->b, slot);
        if (is_const_val(db, 0)) return make_div(std::move(da), n->b);
        return make_div(make_sub(make_mul(std::move(da), n->b), make_mul(n->a, std::move(db))),
                        make_mul(n->b, n->b));
    }
    case NodeKind::Pow:
        return make_mul(make_mul(make_const(Rational(n->exponent)), make_pow(n->a, n->exponent - 1)),
                        diff_node(n->a, slot));
    case NodeKind::Call:
        if (n->fn == UnaryFn::Exp)
            return make_mul(make_call(UnaryFn::Exp, n->a), diff_node(n->a, slot));
        return make_div(diff_node(n->a, slot),
                        make_mul(make_const(Rational(2)), make_call(UnaryFn::Sqrt, n->a)));
    }
    throw Error("unreachable node kind");
}

// ---------------------------------------------------------------------------
// Evaluation

template <class T>
T Expression::eval_node(const detail::NodeRef& n, std::span<const T> env) {
    using namespace detail;
    switch (n->kind) {
    case NodeKind::Constant: return T(n->dval);
    case NodeKind::Variable: return env[static_cast<std::size_t>(n->slot)];
    case NodeKind::Add: return eval_node<T>(n->a, env) + eval_node<T>(n->b, env);
    case NodeKind::Sub: return eval_node<T>(n->a, env) - eval_node<T>(n->b, env);
    case NodeKind::Neg: return -eval_node<T>(n->a, env);
    case NodeKind::Mul: return eval_node<T>(n->a, env) * eval_node<T>(n->b, env);
    case NodeKind::Div: {
        T den = eval_node<T>(n->b, env);
        if (scalar_value(den) == 0.0)
            throw DomainError("division by zero in " + print_node(n->b));
        return eval_node<T>(n->a, env) / den;
    }
    case NodeKind::Pow: {
        T base = eval_node<T>(n->a, env);
        if (n->exponent < 0 && scalar_value(base) == 0.0)
            throw DomainError("zero base with negative exponent in " + print_node(n));
        return pow_int(base, n->exponent);
    }
    case NodeKind::Call: {
        T arg = eval_node<T>(n->a, env);
        if (n->fn == UnaryFn::Exp) {
            using std::exp;
            return exp(arg);
        }
        if (scalar_value(arg) < 0.0)
            throw DomainError("sqrt of negative value in " + print_node(n));
        using std::sqrt;
        return sqrt(arg);
    }
    }
    throw Error("unreachable node kind");
}

inline double Expression::evaluate(const Environment& env) const {
    std::vector<double> values;
    values.reserve(variables().size());
    for (const auto& name : variables()) {
        auto v = env.lookup(name);
        if (!v) throw UnknownVariable("environment does not bind '" + name + "'");
        values.push_back(*v);
    }
    return evaluate(std::span<const double>(values));
}

inline std::pair<double, std::vector<double>> Expression::evaluate_dual(
    std::span<const double> values) const {
    auto seeded = seed_point(values);
    D1 r = evaluate<D1>(std::span<const D1>(seeded.data(), seeded.size()));
    std::vector<double> grad(values.size(), 0.0);
    for (std::size_t i = 0; i < r.g.size(); ++i) grad[i] = r.g[i];
    return {r.v, std::move(grad)};
}

// ---------------------------------------------------------------------------
// Printing (precedence-aware; output re-parses to an equivalent tree)

namespace detail {

inline int precedence(const NodeRef& n) {
    switch (n->kind) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Neg: return 3;
    case NodeKind::Pow: return 4;
    case NodeKind::Constant:
        if (n->value < 0) return 3;                    // prints with a leading '-'
        if (denominator(n->value) != 1) return 2;      // prints as p/q
        return 5;
    case NodeKind::Variable:
    case NodeKind::Call: return 5;
    }
    return 5;
}

inline void print_rec(std::ostringstream& os, const NodeRef& n, int min_level) {
    const bool parens = precedence(n) < min_level;
    if (parens) os << '(';
    switch (n->kind) {
    case NodeKind::Constant: {
        const auto num = numerator(n->value);
        const auto den = denominator(n->value);
        os << num.str();
        if (den != 1) os << '/' << den.str();
        break;
    }
    case NodeKind::Variable: os << n->name; break;
    case NodeKind::Add:
        print_rec(os, n->a, 1);
        os << " + ";
        print_rec(os, n->b, 2);
        break;
    case NodeKind::Sub:
        print_rec(os, n->a, 1);
        os << " - ";
        print_rec(os, n->b, 2);
        break;
    case NodeKind::Mul:
        print_rec(os, n->a, 2);
        os << '*';
        print_rec(os, n->b, 3);
        break;
    case NodeKind::Div:
        print_rec(os, n->a, 2);
        os << '/';
        print_rec(os, n->b, 3);
        break;
    case NodeKind::Neg:
        os << '-';
        print_rec(os, n->a, 3);
        break;
    case NodeKind::Pow:
        print_rec(os, n->a, 5);
        os << '^' << n->exponent;
        break;
    case NodeKind::Call:
        os << (n->fn == UnaryFn::Exp ? "exp(" : "sqrt(");
        print_rec(os, n->a, 0);
        os << ')';
        break;
    }
    if (parens) os << ')';
}

inline std::string print_node(const NodeRef& n) {
    std::ostringstream os;
    print_rec(os, n, 0);
    return os.str();
}

// ---------------------------------------------------------------------------
// Parser: recursive descent over
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ('-')? base ('^' integer)?
//   base   := number | ident | '(' expr ')' | ('exp'|'sqrt') '(' expr ')'

class ExprParser {
public:
    ExprParser(std::string_view text, const Expression::Vars& vars) : text_(text), vars_(vars) {}

    NodeRef run() {
        skip_ws();
        if (pos_ >= text_.size()) throw SyntaxError("empty expression", pos_);
        NodeRef e = parse_expr();
        skip_ws();
        if (pos_ < text_.size())
            throw SyntaxError(std::string("unexpected character '") + text_[pos_] + "'", pos_);
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }
    bool consume(char c) {
        if (peek() == c) { ++pos_; return true; }
        return false;
    }

    NodeRef parse_expr() {
        NodeRef e = parse_term();
        for (;;) {
            if (consume('+')) e = make_add(e, parse_term());
            else if (consume('-')) e = make_sub(e, parse_term());
            else return e;
        }
    }

    NodeRef parse_term() {
        NodeRef e = parse_factor();
        for (;;) {
            if (consume('*')) e = make_mul(e, parse_factor());
            else if (consume('/')) e = make_div(e, parse_factor());
            else return e;
        }
    }

    NodeRef parse_factor() {
        bool neg = consume('-');
        NodeRef e = parse_base();
        if (consume('^')) e = make_pow(e, parse_int_exponent());
        return neg ? make_neg(e) : e;
    }

    int parse_int_exponent() {
        skip_ws();
        bool neg = consume('-');
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == start) throw SyntaxError("expected integer exponent", pos_);
        int value = 0;
        auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (res.ec != std::errc{}) throw SyntaxError("exponent out of range", start);
        return neg ? -value : value;
    }

    NodeRef parse_base() {
        char c = peek();
        if (c == '(') {
            ++pos_;
            NodeRef e = parse_expr();
            if (!consume(')')) throw SyntaxError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        throw SyntaxError("expected a number, variable, or '('", pos_);
    }

    NodeRef parse_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        Rational r(boost::multiprecision::cpp_int(std::string(text_.substr(start, pos_ - start))));
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            std::size_t fstart = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (pos_ == fstart) throw SyntaxError("expected digits after decimal point", pos_);
            boost::multiprecision::cpp_int frac(std::string(text_.substr(fstart, pos_ - fstart)));
            boost::multiprecision::cpp_int den(1);
            for (std::size_t i = 0; i < pos_ - fstart; ++i) den *= 10;
            r += Rational(frac, den);
        }
        return make_const(std::move(r));
    }

    NodeRef parse_ident() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        if (name == "exp" || name == "sqrt") {
            if (!consume('(')) throw SyntaxError("expected '(' after '" + name + "'", pos_);
            NodeRef arg = parse_expr();
            if (!consume(')')) throw SyntaxError("expected ')'", pos_);
            return make_call(name == "exp" ? UnaryFn::Exp : UnaryFn::Sqrt, arg);
        }
        const auto& vars = *vars_;
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i] == name) return make_var(static_cast<int>(i), std::move(name));
        throw UnknownVariable("unknown variable '" + name + "' (at offset " +
                              std::to_string(start) + ")");
    }

    std::string_view text_;
    const Expression::Vars& vars_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline Expression Expression::parse(std::string_view text, const Vars& vars) {
    detail::ExprParser p(text, vars);
    return Expression(vars, p.run());
}

inline Expression Expression::parse(std::string_view text, std::vector<std::string> vars) {
    auto shared = std::make_shared<const std::vector<std::string>>(std::move(vars));
    return parse(text, shared);
}

// ---------------------------------------------------------------------------
// Randomized identity oracle

struct SampleGuard {
    Expression expr;
    double margin = 1e-3;
};

/// True iff |e1 - e2| <= tol * (1 + max(|e1|,|e2|)) at n deterministic sample
/// points (components uniform in [-2, 2]). Points landing within a guard's
/// margin of its zero set, or raising a DomainError, are rejected and
/// resampled; 100 consecutive rejections raise DomainError.
inline bool equal_on_samples(const Expression& e1, const Expression& e2, int n_samples, double tol,
                             std::uint64_t seed, std::span<const SampleGuard> guards = {}) {
    if (e1.variables() != e2.variables())
        throw Error("equal_on_samples: variable contexts differ");
    Rng rng(seed);
    const std::size_t dim = e1.variables().size();
    std::vector<double> x(dim);
    int accepted = 0;
    int consecutive_failures = 0;
    while (accepted < n_samples) {
        if (consecutive_failures >= 100)
            throw DomainError("equal_on_samples: 100 consecutive samples rejected");
        for (auto& xi : x) xi = rng.uniform(-2.0, 2.0);
        try {
            bool guarded = false;
            for (const auto& g : guards) {
                if (std::abs(g.expr.evaluate(std::span<const double>(x))) < g.margin) {
                    guarded = true;
                    break;
                }
            }
            if (guarded) { ++consecutive_failures; continue; }
            double v1 = e1.evaluate(std::span<const double>(x));
            double v2 = e2.evaluate(std::span<const double>(x));
            if (std::abs(v1 - v2) > tol * (1.0 + std::max(std::abs(v1), std::abs(v2))))
                return false;
            ++accepted;
            consecutive_failures = 0;
        } catch (const DomainError&) {
            ++consecutive_failures;
        }
    }
    return true;
}

} // namespace stackel
