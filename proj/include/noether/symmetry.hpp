#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "noether/expr.hpp"
#include "noether/identity.hpp"
#include "noether/problem.hpp"

namespace noether {

// Candidate transformation group g = (T, X, U) depending on k arbitrary
// functions p_j and their derivatives up to order m, with gauge term F and
// weights lambda(j-1, i) = lambda_j^i.
struct GaugeSymmetry {
    int k = 1;
    int m = 0;
    Expr T;
    std::vector<Expr> X;
    std::vector<Expr> U;
    Expr F;
    Eigen::MatrixXd lambda;  // k x (m + 1)

    Dimensions dims(const OcpProblem& problem) const { return {problem.n, problem.r, k, m}; }
};

class SymmetryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<Diagnostic> validate_symmetry(const GaugeSymmetry& sym, const OcpProblem& problem);

// Validates shapes and symbols, then requires g to be the identity at zero jets.
// Throws SymmetryError on any violation.
GaugeSymmetry make_gauge_symmetry(GaugeSymmetry sym, const OcpProblem& problem, const IdentityTest& test = {});

// The identity transformation with k functions of order m, F = 0, lambda = 0.
GaugeSymmetry identity_symmetry(const OcpProblem& problem, int k = 1, int m = 0);

// t -> T, x_i -> X_i, u_j -> U_j, simultaneously.
Expr substitute_group(const Expr& e, const GaugeSymmetry& sym);

struct InvarianceResiduals {
    Expr cost;
    std::vector<Expr> dynamics;
};

// cost   = L(g) D_t T - [ (sum_ij lambda_j^i p_j^(i)) D_t L + L + D_t F ]
// dyn_l  = D_t X_l - phi_l(g) D_t T
InvarianceResiduals invariance_residuals(const GaugeSymmetry& sym, const OcpProblem& problem);

// The invariance equations differentiated with respect to p_j^(i) and restricted
// to zero jets, returned as (LHS - RHS). Differentiation does not commute with
// D_t: d/dp^(i) D_t G = D_t dG/dp^(i) + dG/dp^(i-1), so the lower-order term
// is carried explicitly.
InvarianceResiduals linearized_residuals(const GaugeSymmetry& sym, const OcpProblem& problem, int i, int j);

struct ResidualCheck {
    std::string label;
    int i = -1;  // jet order, linearized checks only
    int j = -1;  // function index, linearized checks only
    Expr residual;
    ZeroVerdict verdict;
    bool depends_on_control_dot = false;
    std::string error;  // sampler exhaustion

    bool passed() const { return error.empty() && verdict.identically_zero; }
};

struct InvarianceReport {
    std::vector<ResidualCheck> full_check;
    std::vector<ResidualCheck> linearized_check;  // (m+1) * k entries, i-major
    bool controldot_dependence = false;
    bool full_ran = false;
    bool linearized_ran = false;

    bool full_pass() const;
    bool linearized_pass() const;
    bool overall() const { return (!full_ran || full_pass()) && (!linearized_ran || linearized_pass()); }
    // "gauge symmetry", "linearized conditions only" or "not a symmetry".
    std::string classification() const;
};

InvarianceReport check_semi_invariance(const GaugeSymmetry& sym, const OcpProblem& problem,
                                       const IdentityTest& test = {});

// Full and linearized checks; the linearized grid uses tol * linearized_tol_factor.
InvarianceReport check_invariance(const GaugeSymmetry& sym, const OcpProblem& problem,
                                  const IdentityTest& test = {}, double linearized_tol_factor = 10.0);

}  // namespace noether
