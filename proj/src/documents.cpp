#include "noether/documents.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "noether/parser.hpp"

namespace noether {

using nlohmann::json;

namespace {

const json& require(const json& doc, const char* key) {
    if (!doc.is_object()) throw DocumentError("", "document must be an object");
    auto it = doc.find(key);
    if (it == doc.end()) throw DocumentError(key, "missing field");
    return *it;
}

int require_int(const json& doc, const char* key, int min_value) {
    const json& v = require(doc, key);
    if (!v.is_number_integer()) throw DocumentError(key, "expected an integer");
    const auto i = v.get<long long>();
    if (i < min_value || i > 1'000'000) throw DocumentError(key, "value out of range");
    return static_cast<int>(i);
}

double number(const json& v, const std::string& field) {
    if (!v.is_number()) throw DocumentError(field, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw DocumentError(field, "expected a finite number");
    return d;
}

double bound_value(const json& v, const std::string& field, double infinite) {
    if (v.is_null()) return infinite;
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw DocumentError(field, "expected a number, null, \"inf\" or \"-inf\"");
    }
    return number(v, field);
}

Expr expression(const json& v, const std::string& field, const Dimensions& dims, const ParseOptions& opts = {}) {
    if (!v.is_string()) throw DocumentError(field, "expected an expression string");
    try {
        return parse(v.get<std::string>(), dims, opts);
    } catch (const ParseError& ex) {
        throw DocumentError(field, std::string("parse error at ") + ex.what());
    }
}

std::vector<Expr> expression_list(const json& v, const std::string& field, std::size_t size, const Dimensions& dims,
                                  const ParseOptions& opts = {}) {
    if (!v.is_array()) throw DocumentError(field, "expected a list of expression strings");
    if (v.size() != size)
        throw DocumentError(field, "expected " + std::to_string(size) + " entries, got " + std::to_string(v.size()));
    std::vector<Expr> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(expression(v[i], field + "[" + std::to_string(i + 1) + "]", dims, opts));
    return out;
}

Eigen::VectorXd vector_of(const json& v, const std::string& field, int size) {
    if (!v.is_array() || static_cast<int>(v.size()) != size)
        throw DocumentError(field, "expected a list of " + std::to_string(size) + " numbers");
    Eigen::VectorXd out(size);
    for (int i = 0; i < size; ++i) out(i) = number(v[i], field + "[" + std::to_string(i + 1) + "]");
    return out;
}

}  // namespace

OcpProblem problem_from_json(const json& doc) {
    OcpProblem p;
    if (auto it = doc.find("name"); it != doc.end()) {
        if (!it->is_string()) throw DocumentError("name", "expected a string");
        p.name = it->get<std::string>();
    }
    p.n = require_int(doc, "n", 1);
    p.r = require_int(doc, "r", 1);
    p.a = number(require(doc, "a"), "a");
    p.b = number(require(doc, "b"), "b");
    const Dimensions dims = p.dims();
    p.L = expression(require(doc, "L"), "L", dims);
    p.phi = expression_list(require(doc, "phi"), "phi", p.n, dims);

    const json& omega = require(doc, "omega");
    if (!omega.is_array() || static_cast<int>(omega.size()) != p.r)
        throw DocumentError("omega", "expected a list of " + std::to_string(p.r) + " bounds");
    for (std::size_t j = 0; j < omega.size(); ++j) {
        const std::string f = "omega[" + std::to_string(j + 1) + "]";
        const json& o = omega[j];
        if (!o.is_object()) throw DocumentError(f, "expected an object");
        Bound bd;
        bd.lower = bound_value(o.value("lower", json()), f + ".lower", -std::numeric_limits<double>::infinity());
        bd.upper = bound_value(o.value("upper", json()), f + ".upper", std::numeric_limits<double>::infinity());
        bd.lower_open = o.value("lower_open", true);
        bd.upper_open = o.value("upper_open", true);
        p.omega.push_back(bd);
    }

    if (auto diags = validate_problem(p); !diags.empty()) throw DocumentError(diags.front().field, diags.front().message);
    return p;
}

GaugeSymmetry symmetry_from_json(const json& doc, const OcpProblem& problem) {
    GaugeSymmetry sym;
    sym.k = require_int(doc, "k", 1);
    sym.m = require_int(doc, "m", 0);
    const Dimensions dims = sym.dims(problem);
    sym.T = expression(require(doc, "T"), "T", dims);
    sym.X = expression_list(require(doc, "X"), "X", problem.n, dims);
    sym.U = expression_list(require(doc, "U"), "U", problem.r, dims);
    sym.F = doc.contains("F") ? expression(doc["F"], "F", dims) : Expr(0.0);
    sym.lambda = Eigen::MatrixXd::Zero(sym.k, sym.m + 1);
    if (doc.contains("lambda")) {
        const json& lam = doc["lambda"];
        if (!lam.is_array() || static_cast<int>(lam.size()) != sym.k)
            throw DocumentError("lambda", "expected " + std::to_string(sym.k) + " rows");
        for (int j = 0; j < sym.k; ++j) {
            const std::string f = "lambda[" + std::to_string(j + 1) + "]";
            sym.lambda.row(j) = vector_of(lam[j], f, sym.m + 1).transpose();
        }
    }
    if (auto diags = validate_symmetry(sym, problem); !diags.empty())
        throw DocumentError(diags.front().field, diags.front().message);
    return sym;
}

TrajectorySpec trajectory_spec_from_json(const json& doc, const OcpProblem& problem) {
    TrajectorySpec spec;
    if (doc.contains("steps")) spec.steps = require_int(doc, "steps", 2);
    const json& list = require(doc, "trajectories");
    if (!list.is_array()) throw DocumentError("trajectories", "expected a list");
    const Dimensions dims = problem.dims();
    ParseOptions law_opts;
    law_opts.allow_costate = true;
    for (std::size_t q = 0; q < list.size(); ++q) {
        const json& e = list[q];
        const std::string f = "trajectories[" + std::to_string(q + 1) + "]";
        if (!e.is_object()) throw DocumentError(f, "expected an object");
        TrajectorySeed seed;
        seed.name = e.value("name", "traj" + std::to_string(q + 1));
        seed.x0 = vector_of(require(e, "x0"), f + ".x0", problem.n);
        seed.psi0 = number(require(e, "psi0"), f + ".psi0");
        if (seed.psi0 > 0.0) throw DocumentError(f + ".psi0", "psi0 must be <= 0");
        seed.psi_a = vector_of(require(e, "psi_a"), f + ".psi_a", problem.n);
        if (seed.psi0 == 0.0 && seed.psi_a.isZero(0.0))
            throw DocumentError(f, "(psi0, psi_a) must not vanish together");

        const json& law = require(e, "law");
        const std::string type = law.is_object() ? law.value("type", "") : "";
        if (type == "piecewise") {
            PiecewiseConstantLaw pw;
            const json& bps = law.contains("breakpoints") ? law["breakpoints"] : json::array();
            if (!bps.is_array()) throw DocumentError(f + ".law.breakpoints", "expected a list");
            for (std::size_t i = 0; i < bps.size(); ++i)
                pw.breakpoints.push_back(number(bps[i], f + ".law.breakpoints[" + std::to_string(i + 1) + "]"));
            const json& vals = require(law, "values");
            if (!vals.is_array() || vals.size() != pw.breakpoints.size() + 1)
                throw DocumentError(f + ".law.values", "expected breakpoints + 1 entries");
            for (std::size_t i = 0; i < vals.size(); ++i)
                pw.values.push_back(vector_of(vals[i], f + ".law.values[" + std::to_string(i + 1) + "]", problem.r));
            seed.law = std::move(pw);
        } else if (type == "feedback") {
            FeedbackLaw fb;
            fb.u = expression_list(require(law, "u"), f + ".law.u", problem.r, dims, law_opts);
            for (const auto& ex : fb.u)
                if (contains_kind(ex, SymbolKind::Control))
                    throw DocumentError(f + ".law.u", "feedback law may only use t, x, psi0, psi");
            seed.law = std::move(fb);
        } else {
            throw DocumentError(f + ".law.type", "expected \"piecewise\" or \"feedback\"");
        }
        spec.trajectories.push_back(std::move(seed));
    }
    return spec;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DocumentError("", "cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& ex) {
        throw DocumentError("", path.string() + ": " + ex.what());
    }
}

std::string fnv1a_digest(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace noether
