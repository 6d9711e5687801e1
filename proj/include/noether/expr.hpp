#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace noether {

enum class SymbolKind : std::uint8_t {
    Time,
    State,
    Control,
    ControlDot,
    JetP,
    Costate0,
    Costate,
};

// A scalar coordinate of the jet-extended phase space. `index` is 1-based for
// the indexed kinds; `order` is the derivative order of a JetP symbol.
struct Symbol {
    SymbolKind kind = SymbolKind::Time;
    int index = 0;
    int order = 0;

    static Symbol time() { return {SymbolKind::Time, 0, 0}; }
    static Symbol state(int i) { return {SymbolKind::State, i, 0}; }
    static Symbol control(int j) { return {SymbolKind::Control, j, 0}; }
    static Symbol control_dot(int j) { return {SymbolKind::ControlDot, j, 0}; }
    static Symbol jet(int j, int order) { return {SymbolKind::JetP, j, order}; }
    static Symbol costate0() { return {SymbolKind::Costate0, 0, 0}; }
    static Symbol costate(int i) { return {SymbolKind::Costate, i, 0}; }

    friend auto operator<=>(const Symbol&, const Symbol&) = default;
};

std::string to_string(const Symbol& s);

// Dimensions of the symbol context: n states, r controls, k arbitrary
// functions with jets of order 0..m.
struct Dimensions {
    int n = 0;
    int r = 0;
    int k = 0;
    int m = 0;
};

enum class UnaryFn : std::uint8_t { Sin, Cos, Exp, Ln, Sqrt };

const char* to_string(UnaryFn f);

// Immutable expression tree. Copies share structure.
class Expr {
public:
    enum class Kind : std::uint8_t { Constant, Var, Sum, Product, Negate, Quotient, Power, Function };

    Expr();
    Expr(double value);  // NOLINT(google-explicit-constructor)
    Expr(Symbol s);      // NOLINT(google-explicit-constructor)

    Kind kind() const;
    double value() const;
    const Symbol& symbol() const;
    std::span<const Expr> operands() const;
    int exponent() const;
    UnaryFn function() const;

    bool is_constant() const { return kind() == Kind::Constant; }
    bool is_constant(double v) const { return is_constant() && value() == v; }

    // Structural node identity, not semantic equality.
    bool same_node(const Expr& other) const { return node_ == other.node_; }

    struct Node;

private:
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;

    friend Expr make_node(Kind, std::vector<Expr>, int, UnaryFn);
};

// Builders. All of them fold constants; nothing else is simplified.
Expr sum(std::vector<Expr> terms);
Expr product(std::vector<Expr> factors);
Expr negate(const Expr& e);
Expr quotient(const Expr& num, const Expr& den);
Expr power(const Expr& base, int exponent);
Expr apply(UnaryFn f, const Expr& arg);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

inline Expr sin(const Expr& e) { return apply(UnaryFn::Sin, e); }
inline Expr cos(const Expr& e) { return apply(UnaryFn::Cos, e); }
inline Expr exp(const Expr& e) { return apply(UnaryFn::Exp, e); }
inline Expr ln(const Expr& e) { return apply(UnaryFn::Ln, e); }
inline Expr sqrt(const Expr& e) { return apply(UnaryFn::Sqrt, e); }

std::set<Symbol> symbols(const Expr& e);
bool any_symbol(const Expr& e, const std::function<bool(const Symbol&)>& pred);
bool contains_kind(const Expr& e, SymbolKind kind);
std::size_t node_count(const Expr& e);

// Symbolic partial derivative; every other symbol is held fixed.
Expr partial(const Expr& e, const Symbol& s);

// Simultaneous substitution of symbols by expressions.
Expr substitute(const Expr& e, const std::map<Symbol, Expr>& replacements);

// Replaces every JetP symbol, of any order, by zero.
Expr restrict_to_zero_jets(const Expr& e);

// Total time derivative along the control equation xdot = phi:
//   D_t = d/dt + sum_i phi_i d/dx_i + sum_j udot_j d/du_j + sum p^(q+1) d/dp^(q).
// Control derivatives enter as free ControlDot symbols.
Expr total_derivative(const Expr& e, std::span<const Expr> phi);

// Evaluation.
using Env = std::map<Symbol, double>;

class EvalError : public std::runtime_error {
public:
    enum class Reason { MissingSymbol, DivisionByZero, Domain, NonFinite };
    EvalError(Reason reason, const std::string& what) : std::runtime_error(what), reason_(reason) {}
    Reason reason() const { return reason_; }

private:
    Reason reason_;
};

double eval(const Expr& e, const Env& env);

struct ScaledValue {
    double value = 0.0;
    double scale = 0.0;  // largest |intermediate| seen while evaluating
};
ScaledValue eval_scaled(const Expr& e, const Env& env);

// Text in the expression grammar; parse(print(e)) agrees with e.
std::string print(const Expr& e);

}  // namespace noether
