#pragma once

// Scalar expression trees for metric components and frame fields.
//
// Grammar (binding tightens downward, '^' is right-associative and binds
// tighter than unary minus):
//
//   expr    := term  (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | ident | ident '(' expr ')' | '(' expr ')'
//
// Identifiers resolve to chart coordinates, declared parameters, the
// constants pi and e, or one of: sin cos tan exp log sqrt sinh cosh tanh.

#include <array>
#include <cctype>
#include <cstdio>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "jet.hpp"

namespace ricci3 {

struct ParseError : std::runtime_error {
    size_t offset;
    ParseError(const std::string& msg, size_t off)
        : std::runtime_error(msg + " (at offset " + std::to_string(off) + ")"), offset(off) {}
};

struct EvalDomainError : std::runtime_error {
    explicit EvalDomainError(const std::string& what) : std::runtime_error(what) {}
};

using ParamMap = std::map<std::string, double>;

namespace detail {

enum class Op : unsigned char {
    Literal, Var, Param,
    Neg, Add, Sub, Mul, Div, Pow,
    Sin, Cos, Tan, Exp, Log, Sqrt, Sinh, Cosh, Tanh,
};

struct ExprNode {
    Op op = Op::Literal;
    double lit = 0.0;       // Literal
    int var = -1;           // Var: coordinate index 0..2
    std::string name;       // Param
    std::shared_ptr<const ExprNode> a, b;
};

inline const char* fn_name(Op op) {
    switch (op) {
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        case Op::Tan: return "tan";
        case Op::Exp: return "exp";
        case Op::Log: return "log";
        case Op::Sqrt: return "sqrt";
        case Op::Sinh: return "sinh";
        case Op::Cosh: return "cosh";
        case Op::Tanh: return "tanh";
        default: return "";
    }
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
T lift_constant(double c) {
    if constexpr (std::is_same_v<T, Jet2>)
        return Jet2::constant(c);
    else
        return c;
}

}  // namespace detail

class Expr {
  public:
    using NodePtr = std::shared_ptr<const detail::ExprNode>;

    Expr() = default;

    static Expr literal(double v) {
        auto n = std::make_shared<detail::ExprNode>();
        n->op = detail::Op::Literal;
        n->lit = v;
        return Expr(std::move(n));
    }
    static Expr var(int index) {
        auto n = std::make_shared<detail::ExprNode>();
        n->op = detail::Op::Var;
        n->var = index;
        return Expr(std::move(n));
    }
    static Expr param(std::string name) {
        auto n = std::make_shared<detail::ExprNode>();
        n->op = detail::Op::Param;
        n->name = std::move(name);
        return Expr(std::move(n));
    }
    static Expr unary(detail::Op op, Expr a) {
        auto n = std::make_shared<detail::ExprNode>();
        n->op = op;
        n->a = a.root_;
        return Expr(std::move(n));
    }
    static Expr binary(detail::Op op, Expr a, Expr b) {
        auto n = std::make_shared<detail::ExprNode>();
        n->op = op;
        n->a = a.root_;
        n->b = b.root_;
        return Expr(std::move(n));
    }

    friend Expr operator+(const Expr& a, const Expr& b) { return binary(detail::Op::Add, a, b); }
    friend Expr operator-(const Expr& a, const Expr& b) { return binary(detail::Op::Sub, a, b); }
    friend Expr operator*(const Expr& a, const Expr& b) { return binary(detail::Op::Mul, a, b); }
    friend Expr operator-(const Expr& a) { return unary(detail::Op::Neg, a); }

    bool valid() const { return root_ != nullptr; }

    // Parses `text`. `coords` supplies the three coordinate names; `params`
    // the set of declared parameter names. Anything else is rejected.
    static Expr parse(const std::string& text,
                      const std::array<std::string, 3>& coords = {"x", "y", "z"},
                      const std::vector<std::string>& params = {});

    template <class T>
    T eval(const std::array<T, 3>& vars, const ParamMap& params) const {
        if (!root_)
            throw EvalDomainError("evaluating an empty expression");
        return eval_node<T>(*root_, vars, params);
    }

    std::string to_string(const std::array<std::string, 3>& coords = {"x", "y", "z"}) const {
        if (!root_)
            return "0";
        std::string out;
        print_node(*root_, coords, 0, out);
        return out;
    }

  private:
    explicit Expr(NodePtr root) : root_(std::move(root)) {}

    static std::string describe(const detail::ExprNode& n) {
        std::string out;
        print_node(n, {"x", "y", "z"}, 0, out);
        return out;
    }

    template <class T>
    static T eval_node(const detail::ExprNode& n, const std::array<T, 3>& vars, const ParamMap& params) {
        using detail::Op;
        switch (n.op) {
            case Op::Literal: return detail::lift_constant<T>(n.lit);
            case Op::Var: return vars[static_cast<size_t>(n.var)];
            case Op::Param: {
                auto it = params.find(n.name);
                if (it == params.end())
                    throw EvalDomainError("parameter '" + n.name + "' has no bound value");
                return detail::lift_constant<T>(it->second);
            }
            case Op::Neg: return -eval_node<T>(*n.a, vars, params);
            case Op::Add: return eval_node<T>(*n.a, vars, params) + eval_node<T>(*n.b, vars, params);
            case Op::Sub: return eval_node<T>(*n.a, vars, params) - eval_node<T>(*n.b, vars, params);
            case Op::Mul: return eval_node<T>(*n.a, vars, params) * eval_node<T>(*n.b, vars, params);
            case Op::Div: {
                T num = eval_node<T>(*n.a, vars, params);
                T den = eval_node<T>(*n.b, vars, params);
                if (value_of(den) == 0.0)
                    throw EvalDomainError("division by zero in '" + describe(n) + "'");
                return num / den;
            }
            case Op::Pow: return eval_pow<T>(n, vars, params);
            default: break;
        }
        // Unary functions.
        T arg = eval_node<T>(*n.a, vars, params);
        try {
            return apply_fn<T>(n.op, arg);
        } catch (const JetDomainError& e) {
            throw EvalDomainError(std::string(e.what()) + " in '" + describe(n) + "'");
        }
    }

    static double value_of(double v) { return v; }
    static double value_of(const Jet2& j) { return j.v; }

    template <class T>
    static T apply_fn(detail::Op op, const T& a) {
        using detail::Op;
        using std::cos;
        using std::cosh;
        using std::exp;
        using std::log;
        using std::sin;
        using std::sinh;
        using std::sqrt;
        using std::tan;
        using std::tanh;
        switch (op) {
            case Op::Sin: return sin(a);
            case Op::Cos: return cos(a);
            case Op::Tan: return tan(a);
            case Op::Exp: return exp(a);
            case Op::Log:
                if (!(value_of(a) > 0.0))
                    throw JetDomainError("log of non-positive value");
                return log(a);
            case Op::Sqrt:
                if (!(value_of(a) > 0.0))
                    throw JetDomainError("sqrt of non-positive value");
                return sqrt(a);
            case Op::Sinh: return sinh(a);
            case Op::Cosh: return cosh(a);
            case Op::Tanh: return tanh(a);
            default: throw JetDomainError("unsupported function");
        }
    }

    template <class T>
    static T eval_pow(const detail::ExprNode& n, const std::array<T, 3>& vars, const ParamMap& params) {
        T base = eval_node<T>(*n.a, vars, params);
        // Constant integer exponents are evaluated by repeated multiplication,
        // which keeps x^2 meaningful on the whole chart, negative x included.
        if (n.b->op == detail::Op::Literal || (n.b->op == detail::Op::Neg && n.b->a->op == detail::Op::Literal)) {
            const double c = n.b->op == detail::Op::Literal ? n.b->lit : -n.b->a->lit;
            const double r = std::nearbyint(c);
            if (r == c && std::abs(c) <= 1e9) {
                const long long k = static_cast<long long>(r);
                if (k < 0 && value_of(base) == 0.0)
                    throw EvalDomainError("division by zero in '" + describe(n) + "'");
                if constexpr (std::is_same_v<T, Jet2>)
                    return powi(base, k);
                else
                    return std::pow(base, static_cast<double>(k));
            }
            try {
                if constexpr (std::is_same_v<T, Jet2>)
                    return powc(base, c);
                else {
                    if (!(base > 0.0))
                        throw JetDomainError("power of non-positive base with non-integer exponent");
                    return std::pow(base, c);
                }
            } catch (const JetDomainError& e) {
                throw EvalDomainError(std::string(e.what()) + " in '" + describe(n) + "'");
            }
        }
        T expo = eval_node<T>(*n.b, vars, params);
        if (!(value_of(base) > 0.0))
            throw EvalDomainError("power of non-positive base with variable exponent in '" + describe(n) + "'");
        using std::pow;
        return pow(base, expo);
    }

    // Precedence levels used by the printer: 1 add, 2 mul, 3 unary minus,
    // 4 power, 5 atoms and function calls.
    static int level(const detail::ExprNode& n) {
        using detail::Op;
        switch (n.op) {
            case Op::Add: case Op::Sub: return 1;
            case Op::Mul: case Op::Div: return 2;
            case Op::Neg: return 3;
            case Op::Pow: return 4;
            default: return 5;
        }
    }

    static void print_node(const detail::ExprNode& n, const std::array<std::string, 3>& coords,
                           int parent_level, std::string& out) {
        using detail::Op;
        const int lv = level(n);
        const bool parens = lv < parent_level;
        if (parens)
            out += '(';
        switch (n.op) {
            case Op::Literal: out += detail::format_double(n.lit); break;
            case Op::Var: out += coords[static_cast<size_t>(n.var)]; break;
            case Op::Param: out += n.name; break;
            case Op::Neg:
                out += '-';
                print_node(*n.a, coords, lv + 1, out);
                break;
            case Op::Add: case Op::Sub:
                print_node(*n.a, coords, lv, out);
                out += n.op == Op::Add ? " + " : " - ";
                print_node(*n.b, coords, lv + 1, out);
                break;
            case Op::Mul: case Op::Div:
                print_node(*n.a, coords, lv, out);
                out += n.op == Op::Mul ? "*" : "/";
                print_node(*n.b, coords, lv + 1, out);
                break;
            case Op::Pow:
                print_node(*n.a, coords, lv + 1, out);
                out += '^';
                // The exponent slot accepts a full unary expression, but
                // explicit parens keep x^(y^z) and x^(-2) unambiguous to read.
                if (level(*n.b) == 5) {
                    print_node(*n.b, coords, 0, out);
                } else {
                    out += '(';
                    print_node(*n.b, coords, 0, out);
                    out += ')';
                }
                break;
            default:
                out += detail::fn_name(n.op);
                out += '(';
                print_node(*n.a, coords, 0, out);
                out += ')';
                break;
        }
        if (parens)
            out += ')';
    }

    NodePtr root_;

    friend class ExprParser;
};

class ExprParser {
  public:
    ExprParser(const std::string& text, const std::array<std::string, 3>& coords,
               const std::vector<std::string>& params)
        : text_(text), coords_(coords), params_(params) {}

    Expr run() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size())
            throw ParseError("unexpected trailing input '" + text_.substr(pos_) + "'", pos_);
        return e;
    }

  private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool accept(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr parse_expr() {
        Expr e = parse_term();
        for (;;) {
            if (accept('+'))
                e = Expr::binary(detail::Op::Add, e, parse_term());
            else if (accept('-'))
                e = Expr::binary(detail::Op::Sub, e, parse_term());
            else
                return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_unary();
        for (;;) {
            if (accept('*'))
                e = Expr::binary(detail::Op::Mul, e, parse_unary());
            else if (accept('/'))
                e = Expr::binary(detail::Op::Div, e, parse_unary());
            else
                return e;
        }
    }

    Expr parse_unary() {
        if (accept('-'))
            return Expr::unary(detail::Op::Neg, parse_unary());
        if (accept('+'))
            return parse_unary();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (accept('^'))
            return Expr::binary(detail::Op::Pow, base, parse_unary());
        return base;
    }

    Expr parse_primary() {
        const char c = peek();
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            if (!accept(')'))
                throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return parse_ident();
        if (c == '\0')
            throw ParseError("unexpected end of input", pos_);
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    Expr parse_number() {
        const size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            size_t mark = pos_ + 1;
            if (mark < text_.size() && (text_[mark] == '+' || text_[mark] == '-'))
                ++mark;
            if (mark < text_.size() && std::isdigit(static_cast<unsigned char>(text_[mark]))) {
                pos_ = mark;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            }
        }
        const std::string tok = text_.substr(start, pos_ - start);
        try {
            size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size())
                throw std::invalid_argument(tok);
            return Expr::literal(v);
        } catch (const std::exception&) {
            throw ParseError("malformed number '" + tok + "'", start);
        }
    }

    Expr parse_ident() {
        const size_t start = pos_;
        while (pos_ < text_.size()
               && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string name = text_.substr(start, pos_ - start);

        static const std::map<std::string, detail::Op> fns = {
            {"sin", detail::Op::Sin},   {"cos", detail::Op::Cos},  {"tan", detail::Op::Tan},
            {"exp", detail::Op::Exp},   {"log", detail::Op::Log},  {"sqrt", detail::Op::Sqrt},
            {"sinh", detail::Op::Sinh}, {"cosh", detail::Op::Cosh}, {"tanh", detail::Op::Tanh},
        };

        if (peek() == '(') {
            auto it = fns.find(name);
            if (it == fns.end())
                throw ParseError("'" + name + "' is not a function", start);
            ++pos_;
            Expr arg = parse_expr();
            if (!accept(')'))
                throw ParseError("expected ')' closing call to '" + name + "'", pos_);
            return Expr::unary(it->second, arg);
        }

        for (int i = 0; i < 3; ++i)
            if (coords_[static_cast<size_t>(i)] == name)
                return Expr::var(i);
        for (const auto& p : params_)
            if (p == name)
                return Expr::param(name);
        if (name == "pi")
            return Expr::literal(3.14159265358979323846);
        if (name == "e")
            return Expr::literal(2.71828182845904523536);
        throw ParseError("unknown identifier '" + name + "'", start);
    }

    const std::string& text_;
    std::array<std::string, 3> coords_;
    std::vector<std::string> params_;
    size_t pos_ = 0;
};

inline Expr Expr::parse(const std::string& text, const std::array<std::string, 3>& coords,
                        const std::vector<std::string>& params) {
    return ExprParser(text, coords, params).run();
}

}  // namespace ricci3
