#include "noether/identity.hpp"

#include <cmath>

namespace noether {

double Sampler::draw_value() {
    std::uniform_real_distribution<double> dist(-kHalfWidth, kHalfWidth);
    double v = dist(rng_);
    while (std::abs(v) < kGuard) v = dist(rng_);
    return v;
}

SampleEnv Sampler::draw(const std::set<Symbol>& syms) {
    SampleEnv env;
    env.seed = seed_;
    for (const Symbol& s : syms) env.values[s] = draw_value();
    return env;
}

ZeroVerdict is_zero(const Expr& e, const IdentityTest& config) {
    if (config.trials < 1) throw std::invalid_argument("is_zero: trials must be >= 1");
    if (!(config.tol > 0.0)) throw std::invalid_argument("is_zero: tol must be > 0");

    ZeroVerdict verdict;
    if (e.is_constant()) {
        verdict.trials_run = config.trials;
        verdict.max_abs_value = std::abs(e.value());
        verdict.max_scaled_value = verdict.max_abs_value / (1.0 + verdict.max_abs_value);
        verdict.identically_zero = verdict.max_abs_value <= config.tol;
        if (!verdict.identically_zero) {
            verdict.witness = SampleEnv{{}, config.seed};
            verdict.witness_value = e.value();
        }
        return verdict;
    }

    const std::set<Symbol> syms = symbols(e);
    Sampler sampler(config.seed);
    for (int trial = 0; trial < config.trials; ++trial) {
        ScaledValue sv;
        SampleEnv env;
        bool ok = false;
        for (int attempt = 0; attempt <= config.max_retries && !ok; ++attempt) {
            env = sampler.draw(syms);
            try {
                sv = eval_scaled(e, env.values);
                ok = true;
            } catch (const EvalError&) {
            }
        }
        if (!ok) throw SamplerExhausted("is_zero: expression undefined at every redraw of trial " + std::to_string(trial));
        ++verdict.trials_run;
        const double a = std::abs(sv.value);
        const double scaled = a / (1.0 + sv.scale);
        verdict.max_abs_value = std::max(verdict.max_abs_value, a);
        verdict.max_scaled_value = std::max(verdict.max_scaled_value, scaled);
        if (a > config.tol * (1.0 + sv.scale)) {
            verdict.witness = std::move(env);
            verdict.witness_value = sv.value;
            return verdict;
        }
    }
    verdict.identically_zero = true;
    return verdict;
}

bool equivalent(const Expr& a, const Expr& b, const IdentityTest& config) {
    return is_zero(a - b, config).identically_zero;
}

}  // namespace noether
