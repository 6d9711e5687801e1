#include "noether/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "noether/conservation.hpp"
#include "noether/currents.hpp"
#include "noether/documents.hpp"
#include "noether/extremal.hpp"
#include "noether/symmetry.hpp"

namespace noether {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::string env_text(const Env& env) {
    std::string s;
    for (const auto& [sym, v] : env) {
        if (!s.empty()) s += ", ";
        s += to_string(sym) + " = " + sci(v);
    }
    return s.empty() ? "(constant)" : s;
}

json env_json(const Env& env) {
    json j = json::object();
    for (const auto& [sym, v] : env) j[to_string(sym)] = v;
    return j;
}

json check_json(const ResidualCheck& c) {
    json j = {{"label", c.label},
              {"pass", c.passed()},
              {"trials", c.verdict.trials_run},
              {"max_abs_residual", c.verdict.max_abs_value},
              {"max_scaled_residual", c.verdict.max_scaled_value},
              {"depends_on_control_dot", c.depends_on_control_dot}};
    if (c.i >= 0) {
        j["i"] = c.i;
        j["j"] = c.j;
    }
    if (c.verdict.witness) {
        j["witness"] = env_json(c.verdict.witness->values);
        j["witness_value"] = c.verdict.witness_value;
    }
    if (!c.error.empty()) j["error"] = c.error;
    return j;
}

json invariance_json(const InvarianceReport& r) {
    json full = json::array();
    for (const auto& c : r.full_check) full.push_back(check_json(c));
    json lin = json::array();
    for (const auto& c : r.linearized_check) lin.push_back(check_json(c));
    return {{"classification", r.classification()},
            {"full_pass", r.full_pass()},
            {"linearized_pass", r.linearized_pass()},
            {"controldot_dependence", r.controldot_dependence},
            {"full_check", full},
            {"linearized_check", lin},
            {"pass", r.overall()}};
}

void check_text(std::ostringstream& os, const ResidualCheck& c) {
    os << "  " << (c.passed() ? "ok   " : "FAIL ") << c.label << "  max|R| = " << sci(c.verdict.max_abs_value);
    if (c.depends_on_control_dot) os << "  [depends on du]";
    os << '\n';
    if (c.verdict.witness)
        os << "       witness: " << env_text(c.verdict.witness->values) << "  R = " << sci(c.verdict.witness_value)
           << '\n';
    if (!c.error.empty()) os << "       error: " << c.error << '\n';
}

std::string invariance_text(const InvarianceReport& r) {
    std::ostringstream os;
    os << "invariance (full):\n";
    for (const auto& c : r.full_check) check_text(os, c);
    os << "invariance (linearized):\n";
    for (const auto& c : r.linearized_check) check_text(os, c);
    if (r.controldot_dependence) os << "  note: some residual depends on control derivatives (du)\n";
    os << "classification: " << r.classification() << '\n';
    return os.str();
}

json extremality_json(const ExtremalityReport& e) {
    return {{"adjoint_residual_max", e.adjoint_residual_max},
            {"maximality_violation_max", e.maximality_violation_max},
            {"dHdt_mismatch_max", e.dHdt_mismatch_max},
            {"normal", e.normal},
            {"unattained_supremum_warning", e.unattained_supremum},
            {"tolerances",
             {{"adjoint", e.tolerances.adjoint}, {"maximality", e.tolerances.maximality}, {"dHdt", e.tolerances.dHdt}}},
            {"pass", e.pass()}};
}

json record_json(const ConservationRecord& r) {
    json j = {{"i", r.i},
              {"j", r.j},
              {"trajectory", r.trajectory},
              {"mean", r.mean},
              {"drift", r.drift},
              {"relative_drift", r.relative_drift},
              {"tolerance", r.tolerance},
              {"conserved", r.conserved}};
    if (!r.error.empty()) {
        j["error"] = r.error;
        j["error_node"] = r.error_node;
    }
    return j;
}

std::string safe_name(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out.empty() ? "traj" : out;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text;
}

struct Inputs {
    OcpProblem problem;
    std::string problem_digest;
    std::optional<GaugeSymmetry> symmetry;
    std::string symmetry_digest;
    std::optional<TrajectorySpec> spec;
};

struct Run {
    const RunConfig& cfg;
    std::ostream& out;
    std::ostream& err;
    json report;
    std::ostringstream text;
    bool overall = true;

    IdentityTest identity() const { return {cfg.trials, cfg.tol, cfg.seed}; }

    int finish() {
        report["overall"] = overall ? "pass" : "fail";
        text << "overall: " << (overall ? "PASS" : "FAIL") << '\n';
        if (!cfg.out_dir.empty()) {
            fs::create_directories(cfg.out_dir);
            write_file(fs::path(cfg.out_dir) / "report.json", report.dump(2) + "\n");
        }
        if (cfg.machine)
            out << report.dump(2) << '\n';
        else
            out << text.str();
        return overall ? kExitPass : kExitFail;
    }
};

json config_json(const RunConfig& c) {
    json j = {{"command", c.command},   {"trials", c.trials}, {"tol", c.tol},
              {"seed", c.seed},         {"samples", c.samples_per_node}, {"force", c.force},
              {"problem", c.problem_path}};
    if (!c.symmetry_path.empty()) j["symmetry"] = c.symmetry_path;
    if (!c.trajectories_path.empty()) j["trajectories"] = c.trajectories_path;
    if (c.steps) j["steps"] = *c.steps;
    return j;
}

Inputs load(const RunConfig& cfg) {
    Inputs in;
    const std::string ptext = read_text_file(cfg.problem_path);
    in.problem_digest = fnv1a_digest(ptext);
    try {
        in.problem = problem_from_json(json::parse(ptext));
    } catch (const json::exception& ex) {
        throw DocumentError("", cfg.problem_path + ": " + ex.what());
    }
    if (!cfg.symmetry_path.empty()) {
        const std::string stext = read_text_file(cfg.symmetry_path);
        in.symmetry_digest = fnv1a_digest(stext);
        try {
            in.symmetry = symmetry_from_json(json::parse(stext), in.problem);
        } catch (const json::exception& ex) {
            throw DocumentError("", cfg.symmetry_path + ": " + ex.what());
        }
    }
    if (!cfg.trajectories_path.empty()) {
        try {
            in.spec = trajectory_spec_from_json(read_json_file(cfg.trajectories_path), in.problem);
        } catch (const json::exception& ex) {
            throw DocumentError("", cfg.trajectories_path + ": " + ex.what());
        }
    }
    return in;
}

// Returns false when the symmetry is rejected at construction.
bool invariance_stage(Run& run, Inputs& in, InvarianceReport& report) {
    try {
        in.symmetry = make_gauge_symmetry(*in.symmetry, in.problem, run.identity());
    } catch (const SymmetryError& ex) {
        run.report["invariance"] = {{"classification", "not a symmetry"}, {"error", ex.what()}, {"pass", false}};
        run.text << "invariance: " << ex.what() << '\n';
        run.overall = false;
        return false;
    }
    report = check_invariance(*in.symmetry, in.problem, run.identity());
    run.report["invariance"] = invariance_json(report);
    run.text << invariance_text(report);
    run.overall = run.overall && report.overall();
    return true;
}

// Returns the currents, or nothing when the invariance gate blocks generation.
std::optional<std::vector<NoetherCurrent>> currents_stage(Run& run, Inputs& in) {
    InvarianceReport inv;
    const bool constructed = invariance_stage(run, in, inv);
    const std::string cls = constructed ? inv.classification() : "not a symmetry";
    if (cls == "linearized conditions only") {
        run.text << "warning: only the linearized conditions hold; currents follow from those alone\n";
        run.report["warnings"].push_back("currents generated from linearized conditions only");
    } else if (cls == "not a symmetry") {
        if (!run.cfg.force) {
            run.text << "currents: not generated (invariance check failed; use --force to override)\n";
            return std::nullopt;
        }
        run.text << "warning: invariance gate skipped (--force)\n";
        run.report["warnings"].push_back("invariance gate skipped by --force");
        if (!constructed) {
            run.text << "currents: cannot be generated for a symmetry rejected at construction\n";
            return std::nullopt;
        }
    }
    auto currents = generate_currents(*in.symmetry, in.problem, run.identity());
    run.report["currents"] = currents_json(currents);
    run.text << "noether currents (k = " << in.symmetry->k << ", m = " << in.symmetry->m << "):\n"
             << currents_text(currents);
    return currents;
}

std::vector<Trajectory> simulate_stage(Run& run, const Inputs& in) {
    std::vector<Trajectory> trajs;
    const int steps = run.cfg.steps.value_or(in.spec->steps.value_or(1000));
    json arr = json::array();
    run.text << "trajectories (" << in.spec->trajectories.size() << ", steps = " << steps << "):\n";
    for (const auto& seed : in.spec->trajectories) {
        json tj = {{"name", seed.name}};
        try {
            Trajectory tr = integrate_extremal(in.problem, seed.law, seed.x0, seed.psi0, seed.psi_a, steps);
            tr.name = seed.name;
            const auto ext = check_extremality(in.problem, tr, run.cfg.samples_per_node, run.cfg.seed);
            tj["nodes"] = tr.nodes();
            tj["step"] = tr.step;
            tj["psi0"] = tr.psi0;
            tj["cost"] = tr.J;
            tj["warnings"] = tr.warnings;
            tj["extremality"] = extremality_json(ext);
            run.text << "  " << (ext.pass() ? "ok   " : "FAIL ") << seed.name << "  nodes = " << tr.nodes()
                     << "  J = " << sci(tr.J) << "  adjoint = " << sci(ext.adjoint_residual_max)
                     << "  maximality = " << sci(ext.maximality_violation_max)
                     << "  dH/dt = " << sci(ext.dHdt_mismatch_max) << (ext.normal ? "  normal" : "  abnormal") << '\n';
            if (ext.unattained_supremum)
                run.text << "       warning: dH/du != 0; the maximum over the open control set is not attained\n";
            for (const auto& w : tr.warnings) run.text << "       warning: " << w << '\n';
            if (!run.cfg.out_dir.empty()) {
                fs::create_directories(run.cfg.out_dir);
                write_file(fs::path(run.cfg.out_dir) / (safe_name(seed.name) + ".csv"), trajectory_csv(tr));
            }
            run.overall = run.overall && (run.cfg.command == "simulate" || ext.pass());
            trajs.push_back(std::move(tr));
        } catch (const IntegrationError& ex) {
            tj["error"] = ex.what();
            tj["error_time"] = ex.time();
            run.text << "  FAIL " << seed.name << "  " << ex.what() << " (t = " << sci(ex.time()) << ")\n";
            run.overall = false;
        } catch (const std::invalid_argument& ex) {
            tj["error"] = ex.what();
            run.text << "  FAIL " << seed.name << "  " << ex.what() << '\n';
            run.overall = false;
        }
        arr.push_back(std::move(tj));
    }
    run.report["trajectories"] = std::move(arr);
    return trajs;
}

void conservation_stage(Run& run, const std::vector<NoetherCurrent>& currents, const std::vector<Trajectory>& trajs) {
    const auto summary = conservation_suite(currents, trajs);
    json recs = json::array();
    for (const auto& r : summary.records) recs.push_back(record_json(r));
    json cj = {{"pass", summary.pass}, {"warnings", summary.warnings}, {"records", recs}};
    if (summary.worst) cj["worst"] = record_json(summary.records[*summary.worst]);
    run.report["conservation"] = std::move(cj);

    run.text << "conservation:\n";
    for (const auto& r : summary.records) {
        run.text << "  " << (r.conserved ? "ok   " : "FAIL ") << "C(i=" << r.i << ", j=" << r.j << ") on "
                 << r.trajectory << "  mean = " << sci(r.mean) << "  relative drift = " << sci(r.relative_drift)
                 << "  (tol " << sci(r.tolerance) << ")";
        if (!r.error.empty()) run.text << "  error at node " << r.error_node << ": " << r.error;
        run.text << '\n';
    }
    for (const auto& w : summary.warnings) run.text << "  warning: " << w << '\n';
    run.overall = run.overall && summary.pass;

    if (!run.cfg.out_dir.empty()) {
        std::size_t q = 0;
        for (const auto& traj : trajs) {
            for (const auto& c : currents) {
                const auto& r = summary.records[q++];
                write_file(fs::path(run.cfg.out_dir) /
                               (safe_name(traj.name) + "_C" + std::to_string(c.i) + "_" + std::to_string(c.j) + ".csv"),
                           conservation_csv(r, traj));
            }
        }
    }
}

}  // namespace

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    Inputs in;
    try {
        in = load(cfg);
    } catch (const DocumentError& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitUsage;
    }

    Run run{cfg, out, err, json::object(), {}, true};
    run.report["tool"] = "noether";
    run.report["version"] = kToolVersion;
    run.report["config"] = config_json(cfg);
    run.report["problem"] = {{"name", in.problem.name}, {"digest", in.problem_digest}};
    if (in.symmetry) run.report["symmetry"] = {{"digest", in.symmetry_digest}};
    run.report["warnings"] = json::array();
    run.text << "noether " << kToolVersion << "  " << cfg.command << "  problem: "
             << (in.problem.name.empty() ? cfg.problem_path : in.problem.name) << '\n';

    try {
        if (cfg.command == "check") {
            InvarianceReport inv;
            invariance_stage(run, in, inv);
        } else if (cfg.command == "currents") {
            if (!currents_stage(run, in)) run.overall = false;
        } else if (cfg.command == "verify") {
            auto currents = currents_stage(run, in);
            if (!currents) {
                run.overall = false;
            } else {
                const auto trajs = simulate_stage(run, in);
                conservation_stage(run, *currents, trajs);
            }
        } else if (cfg.command == "simulate") {
            simulate_stage(run, in);
        } else {
            err << "error: unknown command '" << cfg.command << "'\n";
            return kExitUsage;
        }
        return run.finish();
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitUsage;
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gauge-symmetry checks and Noether currents for optimal control problems", "noether"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string format = "text";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--trials", cfg.trials, "random samples per identity test")->check(CLI::PositiveNumber);
        sub->add_option("--tol", cfg.tol, "identity-test tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--seed", cfg.seed, "sampler seed");
        sub->add_option("--out", cfg.out_dir, "directory for report.json and CSV files");
        sub->add_option("--format", format, "stdout format")->check(CLI::IsMember({"text", "machine"}));
    };
    auto add_integration = [&](CLI::App* sub) {
        sub->add_option("--steps", cfg.steps, "RK4 intervals (overrides the trajectory document)")
            ->check(CLI::Range(2, 100000000));
        sub->add_option("--samples", cfg.samples_per_node, "control samples per node for the maximality check")
            ->check(CLI::PositiveNumber);
    };

    auto* check = app.add_subcommand("check", "verify the semi-invariance conditions");
    check->add_option("problem", cfg.problem_path, "problem document")->required();
    check->add_option("symmetry", cfg.symmetry_path, "symmetry document")->required();
    add_common(check);

    auto* currents = app.add_subcommand("currents", "generate the Noether currents");
    currents->add_option("problem", cfg.problem_path, "problem document")->required();
    currents->add_option("symmetry", cfg.symmetry_path, "symmetry document")->required();
    currents->add_flag("--force", cfg.force, "generate currents even if the invariance check fails");
    add_common(currents);

    auto* verify = app.add_subcommand("verify", "check, generate currents and certify conservation");
    verify->add_option("problem", cfg.problem_path, "problem document")->required();
    verify->add_option("symmetry", cfg.symmetry_path, "symmetry document")->required();
    verify->add_option("trajectories", cfg.trajectories_path, "trajectory document")->required();
    verify->add_flag("--force", cfg.force, "generate currents even if the invariance check fails");
    add_common(verify);
    add_integration(verify);

    auto* simulate = app.add_subcommand("simulate", "integrate candidate extremals only");
    simulate->add_option("problem", cfg.problem_path, "problem document")->required();
    simulate->add_option("trajectories", cfg.trajectories_path, "trajectory document")->required();
    add_common(simulate);
    add_integration(simulate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitPass : kExitUsage;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.machine = format == "machine";
    return run_command(cfg, out, err);
}

}  // namespace noether
