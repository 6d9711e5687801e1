#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>

#include "noether/expr.hpp"

namespace noether {

// A point of the sample box together with the seed that produced it.
struct SampleEnv {
    Env values;
    std::uint64_t seed = 0;
};

// Draws every symbol uniformly from [-half_width, half_width], skipping the
// band |v| < guard around zero. Each worker owns its own sampler.
class Sampler {
public:
    static constexpr double kHalfWidth = 2.0;
    static constexpr double kGuard = 1e-3;

    explicit Sampler(std::uint64_t seed) : seed_(seed), rng_(seed) {}

    SampleEnv draw(const std::set<Symbol>& syms);
    double draw_value();

private:
    std::uint64_t seed_;
    std::mt19937_64 rng_;
};

struct IdentityTest {
    int trials = 200;
    double tol = 1e-9;
    std::uint64_t seed = 0;
    int max_retries = 50;  // redraws per trial after an evaluation error
};

struct ZeroVerdict {
    bool identically_zero = false;
    int trials_run = 0;
    double max_abs_value = 0.0;    // over accepted samples
    double max_scaled_value = 0.0; // |value| / (1 + scale)
    std::optional<SampleEnv> witness;
    double witness_value = 0.0;
};

class SamplerExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Random-evaluation identity test: the expression is declared identically zero
// when every sample satisfies |value| <= tol * (1 + scale), where scale is the
// largest intermediate magnitude met during evaluation.
ZeroVerdict is_zero(const Expr& e, const IdentityTest& config = {});

// True when a and b agree at `trials` random points within tol * (1 + scale).
bool equivalent(const Expr& a, const Expr& b, const IdentityTest& config = {});

}  // namespace noether
