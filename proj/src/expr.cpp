#include "noether/expr.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <utility>

namespace noether {

struct Expr::Node {
    Kind kind = Kind::Constant;
    double value = 0.0;
    Symbol symbol{};
    std::vector<Expr> ops;
    int exponent = 0;
    UnaryFn fn = UnaryFn::Sin;
};

Expr make_node(Expr::Kind kind, std::vector<Expr> ops, int exponent, UnaryFn fn) {
    auto node = std::make_shared<Expr::Node>();
    node->kind = kind;
    node->ops = std::move(ops);
    node->exponent = exponent;
    node->fn = fn;
    return Expr(std::shared_ptr<const Expr::Node>(std::move(node)));
}

Expr::Expr() : Expr(0.0) {}

Expr::Expr(double value) {
    auto node = std::make_shared<Node>();
    node->kind = Kind::Constant;
    node->value = value;
    node_ = std::move(node);
}

Expr::Expr(Symbol s) {
    auto node = std::make_shared<Node>();
    node->kind = Kind::Var;
    node->symbol = s;
    node_ = std::move(node);
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->value; }
const Symbol& Expr::symbol() const { return node_->symbol; }
std::span<const Expr> Expr::operands() const { return node_->ops; }
int Expr::exponent() const { return node_->exponent; }
UnaryFn Expr::function() const { return node_->fn; }

std::string to_string(const Symbol& s) {
    switch (s.kind) {
    case SymbolKind::Time: return "t";
    case SymbolKind::State: return "x" + std::to_string(s.index);
    case SymbolKind::Control: return "u" + std::to_string(s.index);
    case SymbolKind::ControlDot: return "du" + std::to_string(s.index);
    case SymbolKind::JetP:
        if (s.order == 0) return "p" + std::to_string(s.index);
        if (s.order == 1) return "dp" + std::to_string(s.index);
        if (s.order == 2) return "ddp" + std::to_string(s.index);
        return "p" + std::to_string(s.index) + "^(" + std::to_string(s.order) + ")";
    case SymbolKind::Costate0: return "psi0";
    case SymbolKind::Costate: return "psi" + std::to_string(s.index);
    }
    return "?";
}

const char* to_string(UnaryFn f) {
    switch (f) {
    case UnaryFn::Sin: return "sin";
    case UnaryFn::Cos: return "cos";
    case UnaryFn::Exp: return "exp";
    case UnaryFn::Ln: return "ln";
    case UnaryFn::Sqrt: return "sqrt";
    }
    return "?";
}

namespace {

bool fold_function(UnaryFn f, double v, double& out) {
    switch (f) {
    case UnaryFn::Sin: out = std::sin(v); break;
    case UnaryFn::Cos: out = std::cos(v); break;
    case UnaryFn::Exp: out = std::exp(v); break;
    case UnaryFn::Ln:
        if (v <= 0.0) return false;
        out = std::log(v);
        break;
    case UnaryFn::Sqrt:
        if (v < 0.0) return false;
        out = std::sqrt(v);
        break;
    }
    return std::isfinite(out);
}

}  // namespace

Expr sum(std::vector<Expr> terms) {
    std::vector<Expr> flat;
    flat.reserve(terms.size());
    double constant = 0.0;
    auto absorb = [&](const Expr& e, auto&& self) -> void {
        if (e.kind() == Expr::Kind::Sum) {
            for (const auto& op : e.operands()) self(op, self);
        } else if (e.is_constant()) {
            constant += e.value();
        } else {
            flat.push_back(e);
        }
    };
    for (const auto& t : terms) absorb(t, absorb);
    if (constant != 0.0 || !std::isfinite(constant)) flat.emplace_back(constant);
    if (flat.empty()) return Expr(0.0);
    if (flat.size() == 1) return flat.front();
    return make_node(Expr::Kind::Sum, std::move(flat), 0, UnaryFn::Sin);
}

Expr product(std::vector<Expr> factors) {
    std::vector<Expr> flat;
    flat.reserve(factors.size());
    double constant = 1.0;
    auto absorb = [&](const Expr& e, auto&& self) -> void {
        if (e.kind() == Expr::Kind::Product) {
            for (const auto& op : e.operands()) self(op, self);
        } else if (e.is_constant()) {
            constant *= e.value();
        } else {
            flat.push_back(e);
        }
    };
    for (const auto& f : factors) absorb(f, absorb);
    if (constant == 0.0) return Expr(0.0);
    if (flat.empty()) return Expr(constant);
    if (constant == -1.0 && flat.size() == 1) return negate(flat.front());
    if (constant != 1.0) flat.insert(flat.begin(), Expr(constant));
    if (flat.size() == 1) return flat.front();
    return make_node(Expr::Kind::Product, std::move(flat), 0, UnaryFn::Sin);
}

Expr negate(const Expr& e) {
    if (e.is_constant()) return Expr(-e.value());
    if (e.kind() == Expr::Kind::Negate) return e.operands()[0];
    return make_node(Expr::Kind::Negate, {e}, 0, UnaryFn::Sin);
}

Expr quotient(const Expr& num, const Expr& den) {
    if (den.is_constant(0.0)) throw std::domain_error("quotient with literal zero denominator");
    if (num.is_constant(0.0)) return Expr(0.0);
    if (den.is_constant(1.0)) return num;
    if (den.is_constant(-1.0)) return negate(num);
    if (num.is_constant() && den.is_constant()) return Expr(num.value() / den.value());
    return make_node(Expr::Kind::Quotient, {num, den}, 0, UnaryFn::Sin);
}

Expr power(const Expr& base, int exponent) {
    if (exponent == 0) return Expr(1.0);
    if (exponent == 1) return base;
    if (base.is_constant()) {
        const double v = std::pow(base.value(), exponent);
        if (std::isfinite(v)) return Expr(v);
    }
    return make_node(Expr::Kind::Power, {base}, exponent, UnaryFn::Sin);
}

Expr apply(UnaryFn f, const Expr& arg) {
    if (arg.is_constant()) {
        double v = 0.0;
        if (fold_function(f, arg.value(), v)) return Expr(v);
    }
    return make_node(Expr::Kind::Function, {arg}, 0, f);
}

Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return sum({a, negate(b)}); }
Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return quotient(a, b); }
Expr operator-(const Expr& a) { return negate(a); }

namespace {

void collect(const Expr& e, std::set<Symbol>& out) {
    if (e.kind() == Expr::Kind::Var) {
        out.insert(e.symbol());
        return;
    }
    for (const auto& op : e.operands()) collect(op, out);
}

}  // namespace

std::set<Symbol> symbols(const Expr& e) {
    std::set<Symbol> out;
    collect(e, out);
    return out;
}

bool any_symbol(const Expr& e, const std::function<bool(const Symbol&)>& pred) {
    if (e.kind() == Expr::Kind::Var) return pred(e.symbol());
    for (const auto& op : e.operands())
        if (any_symbol(op, pred)) return true;
    return false;
}

bool contains_kind(const Expr& e, SymbolKind kind) {
    return any_symbol(e, [kind](const Symbol& s) { return s.kind == kind; });
}

std::size_t node_count(const Expr& e) {
    std::size_t n = 1;
    for (const auto& op : e.operands()) n += node_count(op);
    return n;
}

Expr partial(const Expr& e, const Symbol& s) {
    switch (e.kind()) {
    case Expr::Kind::Constant: return Expr(0.0);
    case Expr::Kind::Var: return Expr(e.symbol() == s ? 1.0 : 0.0);
    case Expr::Kind::Sum: {
        std::vector<Expr> terms;
        for (const auto& op : e.operands()) terms.push_back(partial(op, s));
        return sum(std::move(terms));
    }
    case Expr::Kind::Product: {
        const auto ops = e.operands();
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < ops.size(); ++i) {
            Expr d = partial(ops[i], s);
            if (d.is_constant(0.0)) continue;
            std::vector<Expr> factors;
            for (std::size_t j = 0; j < ops.size(); ++j) factors.push_back(j == i ? d : ops[j]);
            terms.push_back(product(std::move(factors)));
        }
        return sum(std::move(terms));
    }
    case Expr::Kind::Negate: return negate(partial(e.operands()[0], s));
    case Expr::Kind::Quotient: {
        const Expr& a = e.operands()[0];
        const Expr& b = e.operands()[1];
        Expr da = partial(a, s);
        Expr db = partial(b, s);
        if (db.is_constant(0.0)) return quotient(da, b);
        return quotient(da * b - a * db, power(b, 2));
    }
    case Expr::Kind::Power: {
        const Expr& b = e.operands()[0];
        Expr db = partial(b, s);
        if (db.is_constant(0.0)) return Expr(0.0);
        const int n = e.exponent();
        return product({Expr(static_cast<double>(n)), power(b, n - 1), db});
    }
    case Expr::Kind::Function: {
        const Expr& a = e.operands()[0];
        Expr da = partial(a, s);
        if (da.is_constant(0.0)) return Expr(0.0);
        switch (e.function()) {
        case UnaryFn::Sin: return cos(a) * da;
        case UnaryFn::Cos: return negate(sin(a) * da);
        case UnaryFn::Exp: return e * da;
        case UnaryFn::Ln: return quotient(da, a);
        case UnaryFn::Sqrt: return quotient(da, Expr(2.0) * e);
        }
    }
    }
    return Expr(0.0);
}

namespace {

Expr rebuild(const Expr& e, std::vector<Expr> ops) {
    switch (e.kind()) {
    case Expr::Kind::Sum: return sum(std::move(ops));
    case Expr::Kind::Product: return product(std::move(ops));
    case Expr::Kind::Negate: return negate(ops[0]);
    case Expr::Kind::Quotient: return quotient(ops[0], ops[1]);
    case Expr::Kind::Power: return power(ops[0], e.exponent());
    case Expr::Kind::Function: return apply(e.function(), ops[0]);
    default: return e;
    }
}

template <typename Leaf>
Expr map_leaves(const Expr& e, const Leaf& leaf) {
    if (e.kind() == Expr::Kind::Var) return leaf(e);
    if (e.kind() == Expr::Kind::Constant) return e;
    std::vector<Expr> ops;
    ops.reserve(e.operands().size());
    for (const auto& op : e.operands()) ops.push_back(map_leaves(op, leaf));
    return rebuild(e, std::move(ops));
}

}  // namespace

Expr substitute(const Expr& e, const std::map<Symbol, Expr>& replacements) {
    return map_leaves(e, [&](const Expr& v) {
        auto it = replacements.find(v.symbol());
        return it == replacements.end() ? v : it->second;
    });
}

Expr restrict_to_zero_jets(const Expr& e) {
    return map_leaves(e, [](const Expr& v) { return v.symbol().kind == SymbolKind::JetP ? Expr(0.0) : v; });
}

Expr total_derivative(const Expr& e, std::span<const Expr> phi) {
    std::vector<Expr> terms;
    for (const Symbol& s : symbols(e)) {
        switch (s.kind) {
        case SymbolKind::Time: terms.push_back(partial(e, s)); break;
        case SymbolKind::State:
            if (s.index < 1 || static_cast<std::size_t>(s.index) > phi.size())
                throw std::invalid_argument("total_derivative: state index " + to_string(s) +
                                            " outside the dynamics dimension");
            terms.push_back(phi[s.index - 1] * partial(e, s));
            break;
        case SymbolKind::Control: terms.push_back(Expr(Symbol::control_dot(s.index)) * partial(e, s)); break;
        case SymbolKind::JetP: terms.push_back(Expr(Symbol::jet(s.index, s.order + 1)) * partial(e, s)); break;
        case SymbolKind::ControlDot:
        case SymbolKind::Costate0:
        case SymbolKind::Costate:
            throw std::invalid_argument("total_derivative: input contains " + to_string(s));
        }
    }
    return sum(std::move(terms));
}

namespace {

double checked(double v, const char* what) {
    if (!std::isfinite(v)) throw EvalError(EvalError::Reason::NonFinite, std::string("non-finite value in ") + what);
    return v;
}

double eval_rec(const Expr& e, const Env& env, double& scale) {
    double v = 0.0;
    switch (e.kind()) {
    case Expr::Kind::Constant: v = e.value(); break;
    case Expr::Kind::Var: {
        auto it = env.find(e.symbol());
        if (it == env.end())
            throw EvalError(EvalError::Reason::MissingSymbol, "no value for symbol " + to_string(e.symbol()));
        v = it->second;
        break;
    }
    case Expr::Kind::Sum:
        for (const auto& op : e.operands()) v += eval_rec(op, env, scale);
        v = checked(v, "sum");
        break;
    case Expr::Kind::Product:
        v = 1.0;
        for (const auto& op : e.operands()) v *= eval_rec(op, env, scale);
        v = checked(v, "product");
        break;
    case Expr::Kind::Negate: v = -eval_rec(e.operands()[0], env, scale); break;
    case Expr::Kind::Quotient: {
        const double a = eval_rec(e.operands()[0], env, scale);
        const double b = eval_rec(e.operands()[1], env, scale);
        if (b == 0.0) throw EvalError(EvalError::Reason::DivisionByZero, "division by zero");
        v = checked(a / b, "quotient");
        break;
    }
    case Expr::Kind::Power: {
        const double b = eval_rec(e.operands()[0], env, scale);
        if (b == 0.0 && e.exponent() < 0)
            throw EvalError(EvalError::Reason::DivisionByZero, "zero raised to a negative power");
        v = checked(std::pow(b, e.exponent()), "power");
        break;
    }
    case Expr::Kind::Function: {
        const double a = eval_rec(e.operands()[0], env, scale);
        switch (e.function()) {
        case UnaryFn::Sin: v = std::sin(a); break;
        case UnaryFn::Cos: v = std::cos(a); break;
        case UnaryFn::Exp: v = checked(std::exp(a), "exp"); break;
        case UnaryFn::Ln:
            if (a <= 0.0) throw EvalError(EvalError::Reason::Domain, "ln of non-positive value");
            v = std::log(a);
            break;
        case UnaryFn::Sqrt:
            if (a < 0.0) throw EvalError(EvalError::Reason::Domain, "sqrt of negative value");
            v = std::sqrt(a);
            break;
        }
        break;
    }
    }
    scale = std::max(scale, std::abs(v));
    return v;
}

}  // namespace

double eval(const Expr& e, const Env& env) {
    double scale = 0.0;
    return eval_rec(e, env, scale);
}

ScaledValue eval_scaled(const Expr& e, const Env& env) {
    ScaledValue out;
    out.value = eval_rec(e, env, out.scale);
    return out;
}

namespace {

// Binding strength of the printed form; higher binds tighter.
enum Level { kSum = 1, kProduct = 2, kUnary = 3, kPower = 4, kAtom = 5 };

Level level_of(const Expr& e) {
    switch (e.kind()) {
    case Expr::Kind::Constant: return e.value() < 0.0 || std::signbit(e.value()) ? kUnary : kAtom;
    case Expr::Kind::Var:
    case Expr::Kind::Function: return kAtom;
    case Expr::Kind::Sum: return kSum;
    case Expr::Kind::Product:
    case Expr::Kind::Quotient: return kProduct;
    case Expr::Kind::Negate: return kUnary;
    case Expr::Kind::Power: return kPower;
    }
    return kAtom;
}

std::string format_number(double v) {
    char buf[64];
    if (v == std::floor(v) && std::abs(v) < 1e15)
        std::snprintf(buf, sizeof buf, "%.0f", v);
    else
        std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void print_rec(const Expr& e, std::ostringstream& os);

void print_at(const Expr& e, Level min_level, std::ostringstream& os) {
    if (level_of(e) < min_level) {
        os << '(';
        print_rec(e, os);
        os << ')';
    } else {
        print_rec(e, os);
    }
}

void print_rec(const Expr& e, std::ostringstream& os) {
    switch (e.kind()) {
    case Expr::Kind::Constant: os << format_number(e.value()); break;
    case Expr::Kind::Var: os << to_string(e.symbol()); break;
    case Expr::Kind::Sum: {
        bool first = true;
        for (const auto& op : e.operands()) {
            if (first) {
                print_at(op, kSum, os);
            } else if (op.kind() == Expr::Kind::Negate) {
                os << " - ";
                print_at(op.operands()[0], kProduct, os);
            } else if (op.is_constant() && std::signbit(op.value())) {
                os << " - " << format_number(-op.value());
            } else {
                os << " + ";
                print_at(op, kProduct, os);
            }
            first = false;
        }
        break;
    }
    case Expr::Kind::Product: {
        bool first = true;
        for (const auto& op : e.operands()) {
            if (!first) os << " * ";
            print_at(op, first ? kProduct : kUnary, os);
            first = false;
        }
        break;
    }
    case Expr::Kind::Negate:
        os << '-';
        print_at(e.operands()[0], kUnary, os);
        break;
    case Expr::Kind::Quotient:
        print_at(e.operands()[0], kProduct, os);
        os << " / ";
        print_at(e.operands()[1], kUnary, os);
        break;
    case Expr::Kind::Power: {
        print_at(e.operands()[0], kAtom, os);
        const int n = e.exponent();
        if (n < 0)
            os << "^(" << n << ')';
        else
            os << '^' << n;
        break;
    }
    case Expr::Kind::Function:
        os << to_string(e.function()) << '(';
        print_rec(e.operands()[0], os);
        os << ')';
        break;
    }
}

}  // namespace

std::string print(const Expr& e) {
    std::ostringstream os;
    print_rec(e, os);
    return os.str();
}

}  // namespace noether
