#include "noether/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace noether {

bool Trajectory::is_breakpoint(Eigen::Index node) const {
    return std::binary_search(breakpoint_nodes.begin(), breakpoint_nodes.end(), node);
}

namespace {

Env make_env(double t, const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& u,
             double psi0, const Eigen::Ref<const Eigen::VectorXd>& psi) {
    Env env;
    env[Symbol::time()] = t;
    for (Eigen::Index i = 0; i < x.size(); ++i) env[Symbol::state(static_cast<int>(i) + 1)] = x(i);
    for (Eigen::Index j = 0; j < u.size(); ++j) env[Symbol::control(static_cast<int>(j) + 1)] = u(j);
    env[Symbol::costate0()] = psi0;
    for (Eigen::Index i = 0; i < psi.size(); ++i) env[Symbol::costate(static_cast<int>(i) + 1)] = psi(i);
    return env;
}

// Symbolic pieces of the coupled system, differentiated once up front.
struct CoupledSystem {
    const OcpProblem& problem;
    Expr H;
    std::vector<Expr> minus_Hx;

    explicit CoupledSystem(const OcpProblem& p) : problem(p), H(build_hamiltonian(p).expr) {
        for (int i = 1; i <= p.n; ++i) minus_Hx.push_back(negate(partial(H, Symbol::state(i))));
    }

    // y = [x; psi; J]
    Eigen::VectorXd rhs(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& u, double psi0) const {
        const int n = problem.n;
        const Env env = make_env(t, y.head(n), u, psi0, y.segment(n, n));
        Eigen::VectorXd dy(2 * n + 1);
        for (int i = 0; i < n; ++i) {
            dy(i) = eval(problem.phi[i], env);
            dy(n + i) = eval(minus_Hx[i], env);
        }
        dy(2 * n) = eval(problem.L, env);
        return dy;
    }
};

struct LawEvaluator {
    const ControlLaw& law;
    int r;
    std::vector<int> piece_of_step;  // piecewise only

    Eigen::VectorXd at(double t, const Eigen::VectorXd& y, int n, double psi0, Eigen::Index step) const {
        if (const auto* fb = std::get_if<FeedbackLaw>(&law)) {
            const Env env = make_env(t, y.head(n), Eigen::VectorXd::Zero(0), psi0, y.segment(n, n));
            Eigen::VectorXd u(r);
            for (int j = 0; j < r; ++j) u(j) = eval(fb->u[j], env);
            return u;
        }
        const auto& pw = std::get<PiecewiseConstantLaw>(law);
        return pw.values[piece_of_step[step]];
    }
};

bool aligned(double q) { return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, std::abs(q)); }

}  // namespace

Env Trajectory::env_at(Eigen::Index node) const {
    return make_env(t(node), x.row(node).transpose(), u.row(node).transpose(), psi0, psi.row(node).transpose());
}

Trajectory integrate_extremal(const OcpProblem& problem, const ControlLaw& law, const Eigen::VectorXd& x_a,
                              double psi0, const Eigen::VectorXd& psi_a, int steps) {
    const int n = problem.n;
    const int r = problem.r;
    if (steps < 2) throw std::invalid_argument("integrate_extremal: steps must be >= 2");
    if (x_a.size() != n || psi_a.size() != n)
        throw std::invalid_argument("integrate_extremal: initial state and costate must have " + std::to_string(n) +
                                    " components");
    if (!(psi0 <= 0.0)) throw std::invalid_argument("integrate_extremal: psi0 must be <= 0");
    if (psi0 == 0.0 && psi_a.isZero(0.0))
        throw std::invalid_argument("integrate_extremal: (psi0, psi) must not vanish together");

    Trajectory traj;
    LawEvaluator ctl{law, r, {}};
    std::vector<double> breakpoints;

    if (const auto* fb = std::get_if<FeedbackLaw>(&law)) {
        if (static_cast<int>(fb->u.size()) != r)
            throw std::invalid_argument("integrate_extremal: feedback law needs " + std::to_string(r) + " components");
        for (const auto& e : fb->u)
            for (const Symbol& s : symbols(e))
                if (s.kind == SymbolKind::Control || s.kind == SymbolKind::ControlDot || s.kind == SymbolKind::JetP)
                    throw std::invalid_argument("integrate_extremal: feedback law may only use t, x, psi0, psi");
    } else {
        const auto& pw = std::get<PiecewiseConstantLaw>(law);
        if (pw.values.size() != pw.breakpoints.size() + 1)
            throw std::invalid_argument("integrate_extremal: piecewise law needs breakpoints + 1 values");
        for (std::size_t q = 0; q < pw.breakpoints.size(); ++q) {
            const double bp = pw.breakpoints[q];
            if (!(bp > problem.a && bp < problem.b) || (q > 0 && !(bp > pw.breakpoints[q - 1])))
                throw std::invalid_argument("integrate_extremal: breakpoints must be increasing inside (a, b)");
        }
        for (std::size_t q = 0; q < pw.values.size(); ++q) {
            if (pw.values[q].size() != r)
                throw std::invalid_argument("integrate_extremal: piecewise value with wrong dimension");
            for (int j = 0; j < r && j < static_cast<int>(problem.omega.size()); ++j)
                if (!problem.omega[j].in_closure(pw.values[q](j)))
                    traj.warnings.push_back("piece " + std::to_string(q) + " control u" + std::to_string(j + 1) +
                                            " lies outside the closure of Omega");
        }
        breakpoints = pw.breakpoints;
        // refine the grid until every breakpoint is a node
        int refined = 0;
        for (int s = 1; s <= 64 && refined == 0; ++s) {
            const double h = (problem.b - problem.a) / (static_cast<double>(steps) * s);
            if (std::all_of(breakpoints.begin(), breakpoints.end(),
                            [&](double bp) { return aligned((bp - problem.a) / h); }))
                refined = steps * s;
        }
        if (refined == 0)
            throw std::invalid_argument("integrate_extremal: cannot align breakpoints with a uniform grid");
        steps = refined;
    }

    const double h = (problem.b - problem.a) / steps;
    const Eigen::Index nodes = steps + 1;
    for (double bp : breakpoints)
        traj.breakpoint_nodes.push_back(static_cast<Eigen::Index>(std::llround((bp - problem.a) / h)));
    if (!breakpoints.empty()) {
        ctl.piece_of_step.resize(steps);
        std::size_t piece = 0;
        for (int k = 0; k < steps; ++k) {
            while (piece < traj.breakpoint_nodes.size() && traj.breakpoint_nodes[piece] <= k) ++piece;
            ctl.piece_of_step[k] = static_cast<int>(piece);
        }
    } else if (std::holds_alternative<PiecewiseConstantLaw>(law)) {
        ctl.piece_of_step.assign(steps, 0);
    }

    const CoupledSystem sys(problem);
    traj.step = h;
    traj.psi0 = psi0;
    traj.t.resize(nodes);
    traj.x.resize(nodes, n);
    traj.u.resize(nodes, r);
    traj.psi.resize(nodes, n);
    traj.H.resize(nodes);

    Eigen::VectorXd y(2 * n + 1);
    y << x_a, psi_a, 0.0;
    bool omega_warned = false;

    auto record = [&](Eigen::Index k, double t) {
        const Eigen::Index step = std::min<Eigen::Index>(k, steps - 1);
        const Eigen::VectorXd u = ctl.at(t, y, n, psi0, step);
        traj.t(k) = t;
        traj.x.row(k) = y.head(n).transpose();
        traj.psi.row(k) = y.segment(n, n).transpose();
        traj.u.row(k) = u.transpose();
        traj.H(k) = eval(sys.H, traj.env_at(k));
        if (!omega_warned && std::holds_alternative<FeedbackLaw>(law)) {
            for (int j = 0; j < r && j < static_cast<int>(problem.omega.size()); ++j) {
                if (!problem.omega[j].in_closure(u(j))) {
                    char buf[128];
                    std::snprintf(buf, sizeof buf, "control u%d leaves the closure of Omega at t = %.6g", j + 1, t);
                    traj.warnings.emplace_back(buf);
                    omega_warned = true;
                    break;
                }
            }
        }
    };

    double t_now = problem.a;
    try {
        record(0, problem.a);
        for (int k = 0; k < steps; ++k) {
            const double t = problem.a + k * h;
            t_now = t;
            const double tm = t + 0.5 * h;
            const double t1 = problem.a + (k + 1) * h;
            const Eigen::VectorXd k1 = sys.rhs(t, y, ctl.at(t, y, n, psi0, k), psi0);
            const Eigen::VectorXd y2 = y + 0.5 * h * k1;
            const Eigen::VectorXd k2 = sys.rhs(tm, y2, ctl.at(tm, y2, n, psi0, k), psi0);
            const Eigen::VectorXd y3 = y + 0.5 * h * k2;
            const Eigen::VectorXd k3 = sys.rhs(tm, y3, ctl.at(tm, y3, n, psi0, k), psi0);
            const Eigen::VectorXd y4 = y + h * k3;
            const Eigen::VectorXd k4 = sys.rhs(t1, y4, ctl.at(t1, y4, n, psi0, k), psi0);
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!y.allFinite()) throw IntegrationError("integrate_extremal: state/costate blow-up", t1);
            record(k + 1, t1);
        }
    } catch (const EvalError& ex) {
        throw IntegrationError(std::string("integrate_extremal: ") + ex.what(), t_now);
    }
    traj.J = y(2 * n);
    return traj;
}

double check_adjoint(const OcpProblem& problem, const Trajectory& traj) {
    const Expr H = build_hamiltonian(problem).expr;
    std::vector<Expr> Hx;
    for (int i = 1; i <= problem.n; ++i) Hx.push_back(partial(H, Symbol::state(i)));
    double worst = 0.0;
    for (Eigen::Index k = 1; k + 1 < traj.nodes(); ++k) {
        if (traj.is_breakpoint(k)) continue;
        const Env env = traj.env_at(k);
        for (int i = 0; i < problem.n; ++i) {
            const double dpsi = (traj.psi(k + 1, i) - traj.psi(k - 1, i)) / (2.0 * traj.step);
            worst = std::max(worst, std::abs(dpsi + eval(Hx[i], env)));
        }
    }
    return worst;
}

MaximalityResult check_maximality(const OcpProblem& problem, const Trajectory& traj, int samples_per_node,
                                  std::uint64_t seed) {
    if (samples_per_node < 1) throw std::invalid_argument("check_maximality: samples_per_node must be >= 1");
    const Expr H = build_hamiltonian(problem).expr;
    std::vector<Expr> Hu;
    for (int j = 1; j <= problem.r; ++j) Hu.push_back(partial(H, Symbol::control(j)));

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    MaximalityResult out;
    for (Eigen::Index k = 0; k < traj.nodes(); ++k) {
        if (traj.is_breakpoint(k)) continue;
        Env env = traj.env_at(k);
        const double h_here = traj.H(k);
        for (int j = 0; j < problem.r; ++j)
            if (std::abs(eval(Hu[j], env)) > 1e-9 * (1.0 + std::abs(h_here))) out.unattained_supremum = true;
        for (int s = 0; s < samples_per_node; ++s) {
            for (int j = 0; j < problem.r; ++j) {
                const Bound bd = j < static_cast<int>(problem.omega.size()) ? problem.omega[j] : Bound{};
                const double lo = std::isfinite(bd.lower) ? bd.lower : traj.u(k, j) - 10.0;
                const double hi = std::isfinite(bd.upper) ? bd.upper : traj.u(k, j) + 10.0;
                double v = lo + (hi - lo) * unit(rng);
                while (!bd.contains(v)) v = lo + (hi - lo) * unit(rng);
                env[Symbol::control(j + 1)] = v;
            }
            double value = 0.0;
            try {
                value = eval(H, env);
            } catch (const EvalError&) {
                continue;
            }
            const double excess = value - h_here;
            if (excess > out.violation) {
                out.violation = excess;
                out.worst_node = k;
            }
        }
    }
    return out;
}

double check_dHdt(const OcpProblem& problem, const Trajectory& traj) {
    const Expr Ht = partial(build_hamiltonian(problem).expr, Symbol::time());
    double worst = 0.0;
    for (Eigen::Index k = 1; k + 1 < traj.nodes(); ++k) {
        // H jumps at a breakpoint node, which also spoils the stencil of the node before it
        if (traj.is_breakpoint(k) || traj.is_breakpoint(k + 1)) continue;
        const double dH = (traj.H(k + 1) - traj.H(k - 1)) / (2.0 * traj.step);
        worst = std::max(worst, std::abs(dH - eval(Ht, traj.env_at(k))));
    }
    return worst;
}

ExtremalityTolerances ExtremalityTolerances::for_step(double h) {
    ExtremalityTolerances tol;
    tol.adjoint = std::max(1e-8, 10.0 * h * h);
    tol.dHdt = std::max(1e-8, 10.0 * h * h);
    tol.maximality = 1e-9;
    return tol;
}

ExtremalityReport check_extremality(const OcpProblem& problem, const Trajectory& traj, int samples_per_node,
                                    std::uint64_t seed) {
    ExtremalityReport rep;
    rep.adjoint_residual_max = check_adjoint(problem, traj);
    const auto mx = check_maximality(problem, traj, samples_per_node, seed);
    rep.maximality_violation_max = mx.violation;
    rep.unattained_supremum = mx.unattained_supremum;
    rep.dHdt_mismatch_max = check_dHdt(problem, traj);
    rep.normal = traj.normal();
    rep.tolerances = ExtremalityTolerances::for_step(traj.step);
    return rep;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream os;
    os.precision(17);
    os << 't';
    for (Eigen::Index i = 0; i < traj.x.cols(); ++i) os << ",x" << i + 1;
    for (Eigen::Index j = 0; j < traj.u.cols(); ++j) os << ",u" << j + 1;
    for (Eigen::Index i = 0; i < traj.psi.cols(); ++i) os << ",psi" << i + 1;
    os << ",H\n";
    for (Eigen::Index k = 0; k < traj.nodes(); ++k) {
        os << traj.t(k);
        for (Eigen::Index i = 0; i < traj.x.cols(); ++i) os << ',' << traj.x(k, i);
        for (Eigen::Index j = 0; j < traj.u.cols(); ++j) os << ',' << traj.u(k, j);
        for (Eigen::Index i = 0; i < traj.psi.cols(); ++i) os << ',' << traj.psi(k, i);
        os << ',' << traj.H(k) << '\n';
    }
    return os.str();
}

}  // namespace noether
