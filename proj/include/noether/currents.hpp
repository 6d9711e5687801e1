#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "noether/expr.hpp"
#include "noether/identity.hpp"
#include "noether/problem.hpp"
#include "noether/symmetry.hpp"

namespace noether {

// C_ij(t, x, u, psi0, psi), conserved along every Pontryagin extremal when the
// problem is semi-invariant under the generating symmetry.
struct NoetherCurrent {
    int i = 0;  // jet order 0..m
    int j = 1;  // function index 1..k
    Expr expr;
    bool trivial = false;
};

// For every (i, j):
//   C_ij = psi0 (dF/dp_j^(i)|0 + lambda_j^i L) + psi . dX/dp_j^(i)|0 - H dT/dp_j^(i)|0
// with H expanded as psi0 L + psi . phi. Returns k (m + 1) currents, i-major.
std::vector<NoetherCurrent> generate_currents(const GaugeSymmetry& sym, const OcpProblem& problem,
                                              const IdentityTest& triviality = {});

std::string currents_text(const std::vector<NoetherCurrent>& currents);
nlohmann::json currents_json(const std::vector<NoetherCurrent>& currents);

}  // namespace noether
