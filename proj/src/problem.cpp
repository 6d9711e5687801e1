#include "noether/problem.hpp"

#include <cmath>

namespace noether {

bool Bound::contains(double v) const {
    const bool above = lower_open ? v > lower : v >= lower;
    const bool below = upper_open ? v < upper : v <= upper;
    return above && below;
}

bool Bound::in_closure(double v) const { return v >= lower && v <= upper; }

namespace {

void check_symbols(const Expr& e, const OcpProblem& p, const std::string& field, std::vector<Diagnostic>& out) {
    for (const Symbol& s : symbols(e)) {
        switch (s.kind) {
        case SymbolKind::Time: break;
        case SymbolKind::State:
            if (s.index < 1 || s.index > p.n)
                out.push_back({field, "index out of range: " + to_string(s) + " with n = " + std::to_string(p.n)});
            break;
        case SymbolKind::Control:
            if (s.index < 1 || s.index > p.r)
                out.push_back({field, "index out of range: " + to_string(s) + " with r = " + std::to_string(p.r)});
            break;
        default: out.push_back({field, "illegal symbol " + to_string(s) + " (only t, x, u are allowed)"});
        }
    }
}

}  // namespace

std::vector<Diagnostic> validate_problem(const OcpProblem& problem) {
    std::vector<Diagnostic> out;
    if (problem.n < 1) out.push_back({"n", "state dimension must be >= 1"});
    if (problem.r < 1) out.push_back({"r", "control dimension must be >= 1"});
    if (!std::isfinite(problem.a) || !std::isfinite(problem.b))
        out.push_back({"interval", "endpoints must be finite"});
    else if (!(problem.a < problem.b))
        out.push_back({"interval", "degenerate interval: a must be < b"});
    if (static_cast<int>(problem.phi.size()) != problem.n)
        out.push_back({"phi", "expected " + std::to_string(problem.n) + " components, got " +
                                  std::to_string(problem.phi.size())});
    if (static_cast<int>(problem.omega.size()) != problem.r)
        out.push_back({"omega", "expected " + std::to_string(problem.r) + " bounds, got " +
                                    std::to_string(problem.omega.size())});
    check_symbols(problem.L, problem, "L", out);
    for (std::size_t i = 0; i < problem.phi.size(); ++i)
        check_symbols(problem.phi[i], problem, "phi[" + std::to_string(i + 1) + "]", out);
    for (std::size_t j = 0; j < problem.omega.size(); ++j) {
        const Bound& bd = problem.omega[j];
        if (std::isnan(bd.lower) || std::isnan(bd.upper) || !(bd.lower < bd.upper))
            out.push_back({"omega[" + std::to_string(j + 1) + "]", "lower bound must be < upper bound"});
    }
    return out;
}

HamiltonianExpr build_hamiltonian(const OcpProblem& problem) {
    std::vector<Expr> terms{Expr(Symbol::costate0()) * problem.L};
    for (std::size_t i = 0; i < problem.phi.size(); ++i)
        terms.push_back(Expr(Symbol::costate(static_cast<int>(i) + 1)) * problem.phi[i]);
    return {sum(std::move(terms))};
}

Expr total_derivative(const Expr& e, const OcpProblem& problem) { return total_derivative(e, problem.phi); }

std::vector<Symbol> phase_symbols(const OcpProblem& problem) {
    std::vector<Symbol> out{Symbol::time()};
    for (int i = 1; i <= problem.n; ++i) out.push_back(Symbol::state(i));
    for (int j = 1; j <= problem.r; ++j) out.push_back(Symbol::control(j));
    return out;
}

}  // namespace noether
