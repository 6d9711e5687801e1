#include "noether/symmetry.hpp"

#include <algorithm>

namespace noether {

namespace {

void check_group_symbols(const Expr& e, const GaugeSymmetry& sym, const OcpProblem& p, const std::string& field,
                         std::vector<Diagnostic>& out) {
    for (const Symbol& s : symbols(e)) {
        switch (s.kind) {
        case SymbolKind::Time: break;
        case SymbolKind::State:
            if (s.index < 1 || s.index > p.n) out.push_back({field, "index out of range: " + to_string(s)});
            break;
        case SymbolKind::Control:
            if (s.index < 1 || s.index > p.r) out.push_back({field, "index out of range: " + to_string(s)});
            break;
        case SymbolKind::JetP:
            if (s.index < 1 || s.index > sym.k) out.push_back({field, "index out of range: " + to_string(s)});
            if (s.order < 0 || s.order > sym.m) out.push_back({field, "jet order above m: " + to_string(s)});
            break;
        default: out.push_back({field, "illegal symbol " + to_string(s)});
        }
    }
}

Expr jet_partial_at_zero(const Expr& e, int j, int order) {
    if (order < 0) return Expr(0.0);
    return restrict_to_zero_jets(partial(e, Symbol::jet(j, order)));
}

// (d/dp_j^(i) D_t G) at zero jets.
Expr differentiated_total_derivative(const Expr& g, const OcpProblem& problem, int i, int j) {
    return total_derivative(jet_partial_at_zero(g, j, i), problem) + jet_partial_at_zero(g, j, i - 1);
}

ResidualCheck run_check(std::string label, Expr residual, const IdentityTest& test) {
    ResidualCheck c;
    c.label = std::move(label);
    c.depends_on_control_dot = contains_kind(residual, SymbolKind::ControlDot);
    c.residual = std::move(residual);
    try {
        c.verdict = is_zero(c.residual, test);
    } catch (const SamplerExhausted& ex) {
        c.error = ex.what();
    }
    return c;
}

}  // namespace

std::vector<Diagnostic> validate_symmetry(const GaugeSymmetry& sym, const OcpProblem& problem) {
    std::vector<Diagnostic> out;
    if (sym.k < 1) out.push_back({"k", "number of arbitrary functions must be >= 1"});
    if (sym.m < 0) out.push_back({"m", "jet order must be >= 0"});
    if (static_cast<int>(sym.X.size()) != problem.n)
        out.push_back({"X", "expected " + std::to_string(problem.n) + " components"});
    if (static_cast<int>(sym.U.size()) != problem.r)
        out.push_back({"U", "expected " + std::to_string(problem.r) + " components"});
    if (sym.lambda.rows() != sym.k || sym.lambda.cols() != sym.m + 1)
        out.push_back({"lambda", "expected a " + std::to_string(sym.k) + " x " + std::to_string(sym.m + 1) + " matrix"});
    else if (!sym.lambda.allFinite())
        out.push_back({"lambda", "entries must be finite"});
    check_group_symbols(sym.T, sym, problem, "T", out);
    check_group_symbols(sym.F, sym, problem, "F", out);
    for (std::size_t i = 0; i < sym.X.size(); ++i)
        check_group_symbols(sym.X[i], sym, problem, "X[" + std::to_string(i + 1) + "]", out);
    for (std::size_t j = 0; j < sym.U.size(); ++j)
        check_group_symbols(sym.U[j], sym, problem, "U[" + std::to_string(j + 1) + "]", out);
    return out;
}

GaugeSymmetry make_gauge_symmetry(GaugeSymmetry sym, const OcpProblem& problem, const IdentityTest& test) {
    if (auto diags = validate_symmetry(sym, problem); !diags.empty()) {
        std::string msg = "invalid symmetry:";
        for (const auto& d : diags) msg += " [" + d.field + "] " + d.message + ";";
        throw SymmetryError(msg);
    }
    auto require_identity = [&](const Expr& component, const Expr& expected, const std::string& field) {
        ZeroVerdict v;
        try {
            v = is_zero(restrict_to_zero_jets(component) - expected, test);
        } catch (const std::domain_error&) {
            throw SymmetryError("symmetry is singular at zero jets: " + field);
        } catch (const SamplerExhausted&) {
            throw SymmetryError("symmetry cannot be evaluated at zero jets: " + field);
        }
        if (!v.identically_zero)
            throw SymmetryError("symmetry is not the identity at zero jets: " + field + "|0 differs from " +
                                print(expected));
    };
    require_identity(sym.T, Expr(Symbol::time()), "T");
    for (int i = 0; i < problem.n; ++i)
        require_identity(sym.X[i], Expr(Symbol::state(i + 1)), "X[" + std::to_string(i + 1) + "]");
    for (int j = 0; j < problem.r; ++j)
        require_identity(sym.U[j], Expr(Symbol::control(j + 1)), "U[" + std::to_string(j + 1) + "]");
    return sym;
}

GaugeSymmetry identity_symmetry(const OcpProblem& problem, int k, int m) {
    GaugeSymmetry sym;
    sym.k = k;
    sym.m = m;
    sym.T = Expr(Symbol::time());
    for (int i = 1; i <= problem.n; ++i) sym.X.emplace_back(Symbol::state(i));
    for (int j = 1; j <= problem.r; ++j) sym.U.emplace_back(Symbol::control(j));
    sym.F = Expr(0.0);
    sym.lambda = Eigen::MatrixXd::Zero(k, m + 1);
    return sym;
}

Expr substitute_group(const Expr& e, const GaugeSymmetry& sym) {
    std::map<Symbol, Expr> rep;
    rep.emplace(Symbol::time(), sym.T);
    for (std::size_t i = 0; i < sym.X.size(); ++i) rep.emplace(Symbol::state(static_cast<int>(i) + 1), sym.X[i]);
    for (std::size_t j = 0; j < sym.U.size(); ++j) rep.emplace(Symbol::control(static_cast<int>(j) + 1), sym.U[j]);
    return substitute(e, rep);
}

InvarianceResiduals invariance_residuals(const GaugeSymmetry& sym, const OcpProblem& problem) {
    const Expr dT = total_derivative(sym.T, problem);

    std::vector<Expr> weighted;
    for (int j = 0; j < sym.lambda.rows(); ++j)
        for (int i = 0; i < sym.lambda.cols(); ++i)
            if (sym.lambda(j, i) != 0.0) weighted.push_back(sym.lambda(j, i) * Expr(Symbol::jet(j + 1, i)));
    const Expr weight = sum(std::move(weighted));

    InvarianceResiduals out;
    const Expr lhs = weight * total_derivative(problem.L, problem) + problem.L + total_derivative(sym.F, problem);
    out.cost = substitute_group(problem.L, sym) * dT - lhs;
    for (int l = 0; l < problem.n; ++l)
        out.dynamics.push_back(total_derivative(sym.X[l], problem) - substitute_group(problem.phi[l], sym) * dT);
    return out;
}

InvarianceResiduals linearized_residuals(const GaugeSymmetry& sym, const OcpProblem& problem, int i, int j) {
    if (i < 0 || i > sym.m || j < 1 || j > sym.k)
        throw std::out_of_range("linearized_residuals: (i, j) = (" + std::to_string(i) + ", " + std::to_string(j) +
                                ") outside the jet grid");
    const Symbol t = Symbol::time();
    const Expr dT = jet_partial_at_zero(sym.T, j, i);
    std::vector<Expr> dX, dU;
    for (const auto& x : sym.X) dX.push_back(jet_partial_at_zero(x, j, i));
    for (const auto& u : sym.U) dU.push_back(jet_partial_at_zero(u, j, i));
    const Expr dtT = differentiated_total_derivative(sym.T, problem, i, j);

    // chain rule of f(g) at the identity, contracted with (dT, dX, dU)
    auto first_variation = [&](const Expr& f) {
        std::vector<Expr> terms{partial(f, t) * dT};
        for (int s = 0; s < problem.n; ++s) terms.push_back(partial(f, Symbol::state(s + 1)) * dX[s]);
        for (int s = 0; s < problem.r; ++s) terms.push_back(partial(f, Symbol::control(s + 1)) * dU[s]);
        return sum(std::move(terms));
    };

    InvarianceResiduals out;
    const Expr cost_lhs = sym.lambda(j - 1, i) * total_derivative(problem.L, problem) +
                          differentiated_total_derivative(sym.F, problem, i, j);
    const Expr cost_rhs = first_variation(problem.L) + problem.L * dtT;
    out.cost = cost_lhs - cost_rhs;
    for (int l = 0; l < problem.n; ++l) {
        const Expr lhs = differentiated_total_derivative(sym.X[l], problem, i, j);
        const Expr rhs = first_variation(problem.phi[l]) + problem.phi[l] * dtT;
        out.dynamics.push_back(lhs - rhs);
    }
    return out;
}

bool InvarianceReport::full_pass() const {
    return std::all_of(full_check.begin(), full_check.end(), [](const auto& c) { return c.passed(); });
}

bool InvarianceReport::linearized_pass() const {
    return std::all_of(linearized_check.begin(), linearized_check.end(), [](const auto& c) { return c.passed(); });
}

std::string InvarianceReport::classification() const {
    if (full_ran && full_pass() && (!linearized_ran || linearized_pass())) return "gauge symmetry";
    if (linearized_ran && linearized_pass()) return "linearized conditions only";
    return "not a symmetry";
}

InvarianceReport check_semi_invariance(const GaugeSymmetry& sym, const OcpProblem& problem, const IdentityTest& test) {
    InvarianceReport report;
    report.full_ran = true;
    const auto res = invariance_residuals(sym, problem);
    report.full_check.push_back(run_check("cost", res.cost, test));
    for (std::size_t l = 0; l < res.dynamics.size(); ++l)
        report.full_check.push_back(run_check("dynamics[" + std::to_string(l + 1) + "]", res.dynamics[l], test));
    for (const auto& c : report.full_check) report.controldot_dependence |= c.depends_on_control_dot;
    return report;
}

InvarianceReport check_invariance(const GaugeSymmetry& sym, const OcpProblem& problem, const IdentityTest& test,
                                  double linearized_tol_factor) {
    InvarianceReport report = check_semi_invariance(sym, problem, test);
    report.linearized_ran = true;
    IdentityTest lin = test;
    lin.tol = test.tol * linearized_tol_factor;
    for (int i = 0; i <= sym.m; ++i) {
        for (int j = 1; j <= sym.k; ++j) {
            const auto res = linearized_residuals(sym, problem, i, j);
            const std::string tag = "(i=" + std::to_string(i) + ", j=" + std::to_string(j) + ")";
            auto c = run_check("linearized cost " + tag, res.cost, lin);
            c.i = i;
            c.j = j;
            report.linearized_check.push_back(std::move(c));
            for (std::size_t l = 0; l < res.dynamics.size(); ++l) {
                auto d = run_check("linearized dynamics[" + std::to_string(l + 1) + "] " + tag, res.dynamics[l], lin);
                d.i = i;
                d.j = j;
                report.linearized_check.push_back(std::move(d));
            }
        }
    }
    for (const auto& c : report.linearized_check) report.controldot_dependence |= c.depends_on_control_dot;
    return report;
}

}  // namespace noether
