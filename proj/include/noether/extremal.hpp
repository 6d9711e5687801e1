#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "noether/expr.hpp"
#include "noether/problem.hpp"

namespace noether {

// u = law(t, x, psi0, psi), one expression per control component.
struct FeedbackLaw {
    std::vector<Expr> u;
};

// values[q] holds on [breakpoints[q-1], breakpoints[q]); values.size() == breakpoints.size() + 1.
struct PiecewiseConstantLaw {
    std::vector<double> breakpoints;
    std::vector<Eigen::VectorXd> values;
};

using ControlLaw = std::variant<FeedbackLaw, PiecewiseConstantLaw>;

// Candidate Pontryagin extremal sampled on a uniform grid. Row q of x, u, psi
// is the value at node q.
struct Trajectory {
    std::string name;
    Eigen::VectorXd t;
    Eigen::MatrixXd x;
    Eigen::MatrixXd u;
    Eigen::MatrixXd psi;
    double psi0 = -1.0;
    Eigen::VectorXd H;
    double J = 0.0;
    double step = 0.0;
    std::vector<Eigen::Index> breakpoint_nodes;  // exempt from pointwise checks
    std::vector<std::string> warnings;

    Eigen::Index nodes() const { return t.size(); }
    bool normal() const { return psi0 != 0.0; }
    bool is_breakpoint(Eigen::Index node) const;
    Env env_at(Eigen::Index node) const;
};

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

// Classical RK4 on the coupled state/costate system
//   xdot = phi(t, x, u),  psidot = -dH/dx(t, x, u, psi0, psi),
// with the running cost integrated alongside. `steps` is the number of
// intervals; piecewise laws refine it so every breakpoint is a node.
Trajectory integrate_extremal(const OcpProblem& problem, const ControlLaw& law, const Eigen::VectorXd& x_a,
                              double psi0, const Eigen::VectorXd& psi_a, int steps);

// max |central-difference psidot + dH/dx| over interior nodes.
double check_adjoint(const OcpProblem& problem, const Trajectory& traj);

struct MaximalityResult {
    double violation = 0.0;            // max(0, H(sample) - H(u(t)))
    Eigen::Index worst_node = -1;
    bool unattained_supremum = false;  // dH/du != 0 somewhere: the max over open Omega may not be attained
};

MaximalityResult check_maximality(const OcpProblem& problem, const Trajectory& traj, int samples_per_node,
                                  std::uint64_t seed);

// max |central-difference dH/dt - dH/dt (partial)| over interior nodes.
double check_dHdt(const OcpProblem& problem, const Trajectory& traj);

struct ExtremalityTolerances {
    double adjoint = 1e-6;
    double maximality = 1e-9;
    double dHdt = 1e-6;

    // Central differences are second order: the floor scales with h^2.
    static ExtremalityTolerances for_step(double h);
};

struct ExtremalityReport {
    double adjoint_residual_max = 0.0;
    double maximality_violation_max = 0.0;
    double dHdt_mismatch_max = 0.0;
    bool normal = true;
    bool unattained_supremum = false;
    ExtremalityTolerances tolerances;

    bool pass() const {
        return adjoint_residual_max <= tolerances.adjoint && maximality_violation_max <= tolerances.maximality &&
               dHdt_mismatch_max <= tolerances.dHdt;
    }
};

ExtremalityReport check_extremality(const OcpProblem& problem, const Trajectory& traj, int samples_per_node,
                                    std::uint64_t seed);

// Header t, x1..xn, u1..ur, psi1..psin, H; one row per node.
std::string trajectory_csv(const Trajectory& traj);

}  // namespace noether
