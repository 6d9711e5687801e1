#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support/test_support.hpp"

using namespace noether;
using namespace noether::testing;

namespace {

const Dimensions kExample{1, 1, 1, 2};

bool same_everywhere(const Expr& a, const Expr& b, int trials = 100, double tol = 1e-12) {
    return equivalent(a, b, IdentityTest{trials, tol, 7});
}

}  // namespace

TEST_SUITE("parse") {
    TEST_CASE("transformed state parses to power times state") {
        const Expr e = parse("(dp1 + 1)^2 * x1", kExample);
        REQUIRE(e.kind() == Expr::Kind::Product);
        REQUIRE(e.operands().size() == 2);
        const Expr& pw = e.operands()[0];
        CHECK(pw.kind() == Expr::Kind::Power);
        CHECK(pw.exponent() == 2);
        const Expr& base = pw.operands()[0];
        REQUIRE(base.kind() == Expr::Kind::Sum);
        CHECK(base.operands()[0].symbol() == Symbol::jet(1, 1));
        CHECK(base.operands()[1].is_constant(1.0));
        CHECK(e.operands()[1].symbol() == Symbol::state(1));
    }

    TEST_CASE("atomic time token") {
        const Expr e = parse("t", kExample);
        REQUIRE(e.kind() == Expr::Kind::Var);
        CHECK(e.symbol() == Symbol::time());
    }

    TEST_CASE("jet order above m is rejected") {
        CHECK_THROWS_WITH_AS(parse("p1^(3)", kExample), doctest::Contains("jet order above m"), ParseError);
        CHECK_THROWS_WITH_AS(parse("ddp1", Dimensions{1, 1, 1, 1}), doctest::Contains("jet order above m"),
                             ParseError);
    }

    TEST_CASE("general jet notation") {
        const Dimensions d{1, 1, 2, 4};
        CHECK(parse("p2^(0)", d).symbol() == Symbol::jet(2, 0));
        CHECK(parse("p1^(1)", d).symbol() == Symbol::jet(1, 1));
        CHECK(parse("p1^(4)", d).symbol() == Symbol::jet(1, 4));
        // a bare p symbol raised to a literal is still a power
        const Expr sq = parse("p1^2", d);
        CHECK(sq.kind() == Expr::Kind::Power);
        const Expr inv = parse("p1^(-1)", d);
        CHECK(inv.kind() == Expr::Kind::Power);
        CHECK(inv.exponent() == -1);
    }

    TEST_CASE("precedence and associativity") {
        const Env env{{Symbol::state(1), 3.0}};
        CHECK(eval(parse("-x1^2", kExample), env) == doctest::Approx(-9.0));
        CHECK(eval(parse("2^3^2", kExample), env) == doctest::Approx(512.0));
        CHECK(eval(parse("8 / 4 / 2", kExample), env) == doctest::Approx(1.0));
        CHECK(eval(parse("1 - 2 - 3", kExample), env) == doctest::Approx(-4.0));
        CHECK(eval(parse("2 * x1^-1", kExample), env) == doctest::Approx(2.0 / 3.0));
        CHECK(eval(parse("1.5e1 + .5", kExample), env) == doctest::Approx(15.5));
        CHECK(eval(parse("sqrt(x1 + 1) * exp(0) + ln(1)", kExample), env) == doctest::Approx(2.0));
    }

    TEST_CASE("errors carry line and column") {
        try {
            parse("x1 +\n   * u1", kExample);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
            CHECK(e.column() == 4);
        }
        CHECK_THROWS_WITH_AS(parse("y1", kExample), doctest::Contains("unknown symbol"), ParseError);
        CHECK_THROWS_WITH_AS(parse("x2", kExample), doctest::Contains("index out of range"), ParseError);
        CHECK_THROWS_WITH_AS(parse("x0", kExample), doctest::Contains("index out of range"), ParseError);
        CHECK_THROWS_WITH_AS(parse("x1^0.5", kExample), doctest::Contains("integer"), ParseError);
        CHECK_THROWS_WITH_AS(parse("x1^t", kExample), doctest::Contains("integer"), ParseError);
        CHECK_THROWS_WITH_AS(parse("(x1", kExample), doctest::Contains("')'"), ParseError);
        CHECK_THROWS_WITH_AS(parse("x1 / 0", kExample), doctest::Contains("zero"), ParseError);
        CHECK_THROWS_AS(parse("", kExample), ParseError);
        CHECK_THROWS_AS(parse("x1 $ 2", kExample), ParseError);
    }

    TEST_CASE("costates and control derivatives are opt-in") {
        CHECK_THROWS_WITH_AS(parse("psi1", kExample), doctest::Contains("not allowed"), ParseError);
        CHECK_THROWS_WITH_AS(parse("du1", kExample), doctest::Contains("not allowed"), ParseError);
        ParseOptions opts;
        opts.allow_costate = true;
        CHECK(parse("psi0", kExample, opts).symbol() == Symbol::costate0());
        CHECK(parse("psi1", kExample, opts).symbol() == Symbol::costate(1));
        CHECK_THROWS_AS(parse("psi2", kExample, opts), ParseError);
    }
}

TEST_SUITE("partial") {
    TEST_CASE("power rule") {
        const Expr e = parse("(dp1 + 1)^2 * x1", kExample);
        CHECK(same_everywhere(partial(e, Symbol::jet(1, 1)), parse("2 * (dp1 + 1) * x1", kExample)));
    }

    TEST_CASE("product rule") {
        const Expr d = partial(parse("x1 * u1", kExample), Symbol::state(1));
        REQUIRE(d.kind() == Expr::Kind::Var);
        CHECK(d.symbol() == Symbol::control(1));
    }

    TEST_CASE("transformed control, second jet") {
        const Expr d = partial(parse("2 * ddp1 * x1 + (dp1 + 1) * u1", kExample), Symbol::jet(1, 2));
        CHECK(same_everywhere(d, parse("2 * x1", kExample)));
    }

    TEST_CASE("symbol-free expression differentiates to zero") {
        CHECK(partial(parse("3 + sin(2)", kExample), Symbol::state(1)).is_constant(0.0));
        CHECK(partial(parse("u1 * t", kExample), Symbol::state(1)).is_constant(0.0));
    }

    TEST_CASE("elementary functions") {
        const Symbol x = Symbol::state(1);
        CHECK(same_everywhere(partial(parse("sin(x1)", kExample), x), parse("cos(x1)", kExample)));
        CHECK(same_everywhere(partial(parse("cos(x1)", kExample), x), parse("-sin(x1)", kExample)));
        CHECK(same_everywhere(partial(parse("exp(2*x1)", kExample), x), parse("2*exp(2*x1)", kExample)));
        CHECK(same_everywhere(partial(parse("ln(x1^2 + 1)", kExample), x), parse("2*x1/(x1^2+1)", kExample)));
        CHECK(same_everywhere(partial(parse("sqrt(x1^2 + 1)", kExample), x), parse("x1/sqrt(x1^2+1)", kExample)));
        CHECK(same_everywhere(partial(parse("1 / x1", kExample), x), parse("-1/x1^2", kExample)));
        CHECK(same_everywhere(partial(parse("x1^(-3)", kExample), x), parse("-3*x1^(-4)", kExample)));
    }
}

TEST_SUITE("total_derivative") {
    const OcpProblem kTimeOptimal = make_problem("1", {"u1"});

    TEST_CASE("transformed state along xdot = u") {
        const Expr d = total_derivative(parse("(dp1 + 1)^2 * x1", kExample), kTimeOptimal);
        CHECK(same_everywhere(d, parse("2 * ddp1 * (dp1 + 1) * x1 + (dp1 + 1)^2 * u1", kExample)));
    }

    TEST_CASE("identity time") { CHECK(total_derivative(parse("t", kExample), kTimeOptimal).is_constant(1.0)); }

    TEST_CASE("shifted time") {
        CHECK(same_everywhere(total_derivative(parse("p1 + t", kExample), kTimeOptimal), parse("dp1 + 1", kExample)));
    }

    TEST_CASE("control enters through a free control derivative") {
        const Expr d = total_derivative(parse("x1 * u1", kExample), kTimeOptimal);
        CHECK(contains_kind(d, SymbolKind::ControlDot));
        CHECK(same_everywhere(d, px("u1 * u1 + x1 * du1")));
    }

    TEST_CASE("jets are promoted one order, including past m") {
        const Expr d = total_derivative(parse("ddp1", kExample), kTimeOptimal);
        REQUIRE(d.kind() == Expr::Kind::Var);
        CHECK(d.symbol() == Symbol::jet(1, 3));
    }

    TEST_CASE("costates and control derivatives are rejected") {
        CHECK_THROWS_AS(total_derivative(px("psi1 * x1"), kTimeOptimal), std::invalid_argument);
        CHECK_THROWS_AS(total_derivative(px("du1"), kTimeOptimal), std::invalid_argument);
    }
}

TEST_SUITE("restrict_to_zero_jets") {
    TEST_CASE("examples") {
        CHECK(same_everywhere(restrict_to_zero_jets(parse("2 * (dp1 + 1) * x1", kExample)), parse("2 * x1", kExample)));
        const Expr jet_free = parse("x1 * u1", kExample);
        CHECK(same_everywhere(restrict_to_zero_jets(jet_free), jet_free));
        CHECK(restrict_to_zero_jets(parse("ddp1 * x1", kExample)).is_constant(0.0));
        CHECK(restrict_to_zero_jets(px("p1^(3) * x1 + 1")).is_constant(1.0));
    }
}

TEST_SUITE("eval") {
    TEST_CASE("jets at zero") {
        const Env env{{Symbol::jet(1, 1), 0.0}, {Symbol::state(1), 3.0}};
        CHECK(eval(parse("(dp1 + 1)^2 * x1", kExample), env) == 3.0);
    }

    TEST_CASE("psi0 - H vanishes at zero costate") {
        // psi0 - (psi0 * 1 + psi1 * u1) with psi1 = 0
        const Expr H = build_hamiltonian(make_problem("1", {"u1"})).expr;
        const Expr c = Expr(Symbol::costate0()) - H;
        const Env env{{Symbol::costate0(), -1.0}, {Symbol::costate(1), 0.0}, {Symbol::control(1), 0.37}};
        CHECK(eval(c, env) == 0.0);
    }

    TEST_CASE("error reasons") {
        auto reason_of = [](const Expr& e, const Env& env) {
            try {
                eval(e, env);
            } catch (const EvalError& ex) {
                return ex.reason();
            }
            FAIL("expected EvalError");
            return EvalError::Reason::NonFinite;
        };
        const Env zero{{Symbol::state(1), 0.0}};
        const Env neg{{Symbol::state(1), -1.0}};
        CHECK(reason_of(parse("1 / x1", kExample), zero) == EvalError::Reason::DivisionByZero);
        CHECK(reason_of(parse("x1^(-2)", kExample), zero) == EvalError::Reason::DivisionByZero);
        CHECK(reason_of(parse("ln(x1)", kExample), neg) == EvalError::Reason::Domain);
        CHECK(reason_of(parse("sqrt(x1)", kExample), neg) == EvalError::Reason::Domain);
        CHECK(reason_of(parse("exp(1000 * x1)", kExample), Env{{Symbol::state(1), 1.0}}) ==
              EvalError::Reason::NonFinite);
        CHECK(reason_of(parse("x1 + u1", kExample), zero) == EvalError::Reason::MissingSymbol);
    }
}

TEST_SUITE("is_zero") {
    TEST_CASE("literal and folded zeros") {
        CHECK(is_zero(Expr(0.0), {1, 1e-12, 0}).identically_zero);
        CHECK(is_zero(parse("0 * x1", kExample), {10, 1e-12, 3}).identically_zero);
    }

    TEST_CASE("non-zero expression yields a witness") {
        const auto v = is_zero(parse("dp1 * x1", kExample), {10, 1e-9, 11});
        CHECK_FALSE(v.identically_zero);
        REQUIRE(v.witness.has_value());
        const double at = eval(parse("dp1 * x1", kExample), v.witness->values);
        CHECK(at == v.witness_value);
        CHECK(std::abs(at) > 1e-9);
    }

    TEST_CASE("trigonometric identity") {
        CHECK(is_zero(parse("sin(x1)^2 + cos(x1)^2 - 1", kExample)).identically_zero);
        CHECK(is_zero(parse("exp(x1 + t) - exp(x1) * exp(t)", kExample)).identically_zero);
    }

    TEST_CASE("singular samples are redrawn, and exhaustion is reported") {
        CHECK(is_zero(parse("x1 / x1 - 1", kExample), {200, 1e-12, 5}).identically_zero);
        CHECK_THROWS_AS(is_zero(parse("sqrt(-1 - x1^2)", kExample), {5, 1e-9, 0}), SamplerExhausted);
    }

    TEST_CASE("deterministic in the seed") {
        const Expr e = parse("x1 - u1 * t", kExample);
        const auto a = is_zero(e, {10, 1e-9, 42});
        const auto b = is_zero(e, {10, 1e-9, 42});
        REQUIRE(a.witness.has_value());
        CHECK(a.witness->values == b.witness->values);
    }

    TEST_CASE("bad configuration") {
        CHECK_THROWS_AS(is_zero(Expr(0.0), {0, 1e-9, 0}), std::invalid_argument);
        CHECK_THROWS_AS(is_zero(Expr(0.0), {1, 0.0, 0}), std::invalid_argument);
    }

    TEST_CASE("sampler stays inside the box and outside the guard band") {
        Sampler s(9);
        for (int i = 0; i < 10000; ++i) {
            const double v = s.draw_value();
            CHECK(std::abs(v) <= Sampler::kHalfWidth);
            CHECK(std::abs(v) >= Sampler::kGuard);
        }
    }
}

TEST_SUITE("print") {
    TEST_CASE("atoms") {
        CHECK(print(Expr(Symbol::jet(1, 1))) == "dp1");
        CHECK(print(Expr(Symbol::jet(1, 2))) == "ddp1");
        CHECK(print(Expr(Symbol::jet(1, 5))) == "p1^(5)");
        CHECK(print(Expr(1.0)) == "1");
        CHECK(print(Expr(-2.5)) == "-2.5");
        CHECK(print(Expr(Symbol::costate0())) == "psi0");
    }

    TEST_CASE("parsed expression round-trips") {
        const Expr e = parse("(dp1+1)^2*x1", kExample);
        CHECK(same_everywhere(parse(print(e), kExample), e));
    }

    TEST_CASE("awkward shapes round-trip") {
        for (const char* text : {"-(x1 - u1)", "x1 - (-2)", "(-2)^3 * x1", "x1 / (u1 * t)", "x1 / -u1", "-x1^2",
                                 "p1^2 + p1^(3)^2", "(x1 + 1)^(-2)", "2 - -x1", "x1 * (u1 / t)", "-(-x1)"}) {
            CAPTURE(text);
            const Expr e = px(text);
            CHECK(same_everywhere(px(print(e)), e));
        }
    }
}

TEST_SUITE("properties") {
    TEST_CASE("partials agree with central differences") {
        ExprGenerator gen(small_context_pool(), 2024);
        std::mt19937_64 rng(99);
        int checked = 0;
        for (int n = 0; n < 60; ++n) {
            const Expr e = gen(6);
            const auto syms = symbols(e);
            for (const Symbol& s : small_context_pool()) {
                const Expr d = partial(e, s);
                for (int k = 0; k < 5; ++k) {
                    Env env = random_env(union_symbols({e, d}), rng);
                    env.emplace(s, 0.7);
                    double sym = 0.0, fd = 0.0;
                    try {
                        sym = eval(d, env);
                        fd = ridders_derivative(e, env, s);
                    } catch (const EvalError&) {
                        continue;
                    }
                    CAPTURE(print(e));
                    CHECK(std::abs(sym - fd) / std::max(1.0, std::abs(sym)) < 1e-6);
                    ++checked;
                }
            }
        }
        CHECK(checked > 1000);
    }

    TEST_CASE("linearity of the partial derivative") {
        ExprGenerator gen(small_context_pool(), 31);
        std::mt19937_64 rng(5);
        for (int n = 0; n < 50; ++n) {
            const Expr e1 = gen(4), e2 = gen(4);
            const double a = 1.75;
            const Symbol s = small_context_pool()[n % 7];
            const Expr lhs = partial(a * e1 + e2, s);
            const Expr rhs = a * partial(e1, s) + partial(e2, s);
            for (int k = 0; k < 10; ++k) {
                const Env env = random_env(union_symbols({lhs, rhs}), rng);
                try {
                    const ScaledValue l = eval_scaled(lhs, env);
                    CHECK(std::abs(l.value - eval(rhs, env)) < 1e-10 * (1.0 + l.scale));
                } catch (const EvalError&) {
                }
            }
        }
    }

    TEST_CASE("Leibniz rule for the total derivative") {
        const OcpProblem prob = make_problem("x1 * u1", {"x2 + u1", "sin(x1) * t"});
        ExprGenerator gen(small_context_pool(), 77);
        std::mt19937_64 rng(6);
        for (int n = 0; n < 50; ++n) {
            const Expr e1 = gen(4), e2 = gen(4);
            const Expr lhs = total_derivative(e1 * e2, prob);
            const Expr rhs = e1 * total_derivative(e2, prob) + e2 * total_derivative(e1, prob);
            for (int k = 0; k < 10; ++k) {
                const Env env = random_env(union_symbols({lhs, rhs}), rng);
                try {
                    const ScaledValue l = eval_scaled(lhs, env);
                    CHECK(std::abs(l.value - eval(rhs, env)) < 1e-10 * (1.0 + l.scale));
                } catch (const EvalError&) {
                }
            }
        }
    }

    TEST_CASE("jet restriction commutes with non-jet partials") {
        ExprGenerator gen(small_context_pool(), 13);
        for (int n = 0; n < 50; ++n) {
            const Expr e = gen(5);
            try {
                restrict_to_zero_jets(e);
            } catch (const std::domain_error&) {
                continue;  // singular at zero jets, e.g. x1 / dp1
            }
            for (const Symbol& s : {Symbol::time(), Symbol::state(1), Symbol::state(2), Symbol::control(1)}) {
                const Expr a = restrict_to_zero_jets(partial(e, s));
                const Expr b = partial(restrict_to_zero_jets(e), s);
                CHECK(equivalent(a, b, {20, 1e-10, static_cast<std::uint64_t>(n)}));
            }
        }
    }

    TEST_CASE("print then parse agrees with the original") {
        ExprGenerator gen(small_context_pool(), 555);
        std::mt19937_64 rng(8);
        for (int n = 0; n < 100; ++n) {
            const Expr e = gen(6);
            const Expr back = px(print(e));
            int agreed = 0;
            for (int k = 0; k < 100; ++k) {
                const Env env = random_env(symbols(e), rng);
                try {
                    const ScaledValue v = eval_scaled(e, env);
                    CAPTURE(print(e));
                    CHECK(std::abs(v.value - eval(back, env)) <= 1e-12 * (1.0 + v.scale));
                    ++agreed;
                } catch (const EvalError&) {
                }
            }
            CHECK(agreed > 0);
        }
    }
}
