#include "noether/currents.hpp"

#include <sstream>

namespace noether {

std::vector<NoetherCurrent> generate_currents(const GaugeSymmetry& sym, const OcpProblem& problem,
                                              const IdentityTest& triviality) {
    const Expr H = build_hamiltonian(problem).expr;
    const Expr psi0(Symbol::costate0());
    std::vector<NoetherCurrent> out;
    out.reserve(static_cast<std::size_t>(sym.k) * (sym.m + 1));
    for (int i = 0; i <= sym.m; ++i) {
        for (int j = 1; j <= sym.k; ++j) {
            const Symbol pj = Symbol::jet(j, i);
            auto at_zero = [&](const Expr& e) { return restrict_to_zero_jets(partial(e, pj)); };

            std::vector<Expr> terms{psi0 * (at_zero(sym.F) + sym.lambda(j - 1, i) * problem.L)};
            for (int l = 0; l < problem.n; ++l) terms.push_back(Expr(Symbol::costate(l + 1)) * at_zero(sym.X[l]));
            terms.push_back(negate(H * at_zero(sym.T)));

            NoetherCurrent c;
            c.i = i;
            c.j = j;
            c.expr = sum(std::move(terms));
            c.trivial = c.expr.is_constant(0.0) || is_zero(c.expr, triviality).identically_zero;
            out.push_back(std::move(c));
        }
    }
    return out;
}

std::string currents_text(const std::vector<NoetherCurrent>& currents) {
    std::ostringstream os;
    std::size_t nontrivial = 0;
    for (const auto& c : currents) {
        os << "  C(i=" << c.i << ", j=" << c.j << ") = " << print(c.expr);
        if (c.trivial) os << "    [trivial]";
        os << '\n';
        if (!c.trivial) ++nontrivial;
    }
    os << "  " << currents.size() << " currents, " << nontrivial << " non-trivial\n";
    return os.str();
}

nlohmann::json currents_json(const std::vector<NoetherCurrent>& currents) {
    auto arr = nlohmann::json::array();
    for (const auto& c : currents)
        arr.push_back({{"i", c.i}, {"j", c.j}, {"expression", print(c.expr)}, {"trivial", c.trivial}});
    return arr;
}

}  // namespace noether
