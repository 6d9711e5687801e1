#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "support/test_support.hpp"

using namespace noether;
using namespace noether::testing;

namespace {

bool has_field(const std::vector<Diagnostic>& ds, const std::string& field, const std::string& fragment) {
    return std::any_of(ds.begin(), ds.end(), [&](const Diagnostic& d) {
        return d.field == field && d.message.find(fragment) != std::string::npos;
    });
}

}  // namespace

TEST_CASE("Hamiltonian of the time-optimal problem") {
    const Expr H = build_hamiltonian(time_optimal_problem()).expr;
    CHECK(equivalent(H, px("psi0 + psi1 * u1")));
}

TEST_CASE("Hamiltonian with linear cost") {
    const Expr H = build_hamiltonian(linear_cost_problem()).expr;
    CHECK(equivalent(H, px("psi0 * u1 + psi1 * u1")));
}

TEST_CASE("zero problem has zero Hamiltonian") {
    const Expr H = build_hamiltonian(make_problem("0", {"0"})).expr;
    CHECK(H.is_constant(0.0));
}

TEST_CASE("bundled documents validate cleanly") {
    CHECK(validate_problem(time_optimal_problem()).empty());
    CHECK(validate_problem(linear_cost_problem()).empty());
    const OcpProblem p = time_optimal_problem();
    CHECK(p.omega.size() == 1);
    CHECK(p.omega[0].lower == -1.0);
    CHECK(p.omega[0].upper == 1.0);
    CHECK(p.omega[0].lower_open);
    CHECK_FALSE(p.omega[0].contains(1.0));
    CHECK(p.omega[0].in_closure(1.0));
}

TEST_CASE("diagnostics name the field") {
    OcpProblem p = make_problem("1", {"u1"});
    p.phi[0] = Expr(Symbol::state(2));
    CHECK(has_field(validate_problem(p), "phi[1]", "index out of range"));

    OcpProblem q = make_problem("1", {"u1"});
    q.b = q.a;
    CHECK(has_field(validate_problem(q), "interval", "degenerate"));

    OcpProblem w = make_problem("1", {"u1"});
    w.omega[0] = Bound{1.0, -1.0, true, true};
    CHECK(has_field(validate_problem(w), "omega[1]", "lower bound"));

    OcpProblem c = make_problem("1", {"u1"});
    c.L = c.L + Expr(Symbol::costate(1));
    CHECK(has_field(validate_problem(c), "L", "illegal symbol"));

    OcpProblem j = make_problem("1", {"u1"});
    j.phi[0] = Expr(Symbol::jet(1, 0));
    CHECK(has_field(validate_problem(j), "phi[1]", "illegal symbol"));

    OcpProblem d = make_problem("1", {"u1"});
    d.phi.push_back(Expr(0.0));
    CHECK(has_field(validate_problem(d), "phi", "expected 1"));
}

TEST_CASE("Hamiltonian has no jet or control-derivative symbols, and dH/dpsi_i = phi_i") {
    ExprGenerator gen({Symbol::time(), Symbol::state(1), Symbol::state(2), Symbol::control(1)}, 404);
    for (int n = 0; n < 40; ++n) {
        OcpProblem p = make_problem("1", {"0", "0"});
        p.L = gen(4);
        p.phi = {gen(4), gen(4)};
        const Expr H = build_hamiltonian(p).expr;
        CHECK_FALSE(contains_kind(H, SymbolKind::JetP));
        CHECK_FALSE(contains_kind(H, SymbolKind::ControlDot));
        for (int i = 1; i <= 2; ++i)
            CHECK(equivalent(partial(H, Symbol::costate(i)), p.phi[i - 1], {50, 1e-10, static_cast<std::uint64_t>(n)}));
    }
}

TEST_CASE("problem document errors") {
    using nlohmann::json;
    json doc = read_json_file(data_path("time_optimal/problem.json"));
    CHECK(problem_from_json(doc).name == "time-optimal transfer");

    json bad = doc;
    bad["phi"] = json::array({"x2"});
    CHECK_THROWS_AS(problem_from_json(bad), DocumentError);

    json missing = doc;
    missing.erase("L");
    try {
        problem_from_json(missing);
        FAIL("expected DocumentError");
    } catch (const DocumentError& e) {
        CHECK(e.field() == "L");
    }

    json inf = doc;
    inf["omega"] = json::array({json{{"lower", nullptr}, {"upper", "inf"}}});
    const OcpProblem p = problem_from_json(inf);
    CHECK(std::isinf(p.omega[0].lower));
    CHECK(std::isinf(p.omega[0].upper));

    json degenerate = doc;
    degenerate["b"] = 0;
    CHECK_THROWS_AS(problem_from_json(degenerate), DocumentError);
}
