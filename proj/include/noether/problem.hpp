#pragma once

#include <limits>
#include <string>
#include <vector>

#include "noether/expr.hpp"

namespace noether {

// One coordinate of the control box. Infinite ends are allowed.
struct Bound {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    bool lower_open = true;
    bool upper_open = true;

    bool contains(double v) const;
    bool in_closure(double v) const;
};

// Minimize the integral of L(t, x, u) over [a, b] subject to xdot = phi(t, x, u),
// u(t) in the box omega.
struct OcpProblem {
    std::string name;
    int n = 0;
    int r = 0;
    double a = 0.0;
    double b = 1.0;
    Expr L;
    std::vector<Expr> phi;
    std::vector<Bound> omega;

    Dimensions dims(int k = 0, int m = 0) const { return {n, r, k, m}; }
};

struct Diagnostic {
    std::string field;
    std::string message;
};

std::vector<Diagnostic> validate_problem(const OcpProblem& problem);

// H = psi0 * L + sum_i psi_i * phi_i.
struct HamiltonianExpr {
    Expr expr;
};

HamiltonianExpr build_hamiltonian(const OcpProblem& problem);

Expr total_derivative(const Expr& e, const OcpProblem& problem);

// The problem's (t, x, u) symbols, in order.
std::vector<Symbol> phase_symbols(const OcpProblem& problem);

}  // namespace noether
