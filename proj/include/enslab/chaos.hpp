// Truth system: the Moran-Ricker map, noisy observations, and a Lyapunov
// exponent estimator based on the analytic derivative.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "enslab/errors.hpp"
#include "enslab/rng.hpp"

namespace enslab {

struct SystemParams {
    double lambda = 3.0;
    double noise_sd = 0.0;       // observational noise, state units
    std::size_t spinup_steps = 1000;
};

struct Trajectory {
    std::vector<double> states;
    std::int64_t start_index = 0;
};

struct ObservationSeries {
    std::vector<double> observations;
};

inline double system_step(double x, double lambda) {
    return x * std::exp(lambda * (1.0 - x));
}

// d/dx of system_step.
inline double system_step_derivative(double x, double lambda) {
    return std::exp(lambda * (1.0 - x)) * (1.0 - lambda * x);
}

inline Trajectory generate_trajectory(const SystemParams& params, double x0,
                                      std::size_t length, std::uint64_t rng_seed) {
    if (!(x0 > 0.0)) throw std::invalid_argument("generate_trajectory: x0 must be > 0");
    if (length == 0) throw std::invalid_argument("generate_trajectory: length must be > 0");
    (void)rng_seed;  // the map is deterministic; the seed is reserved for future stochastic variants
    double x = x0;
    for (std::size_t i = 0; i < params.spinup_steps; ++i) {
        x = system_step(x, params.lambda);
        if (!std::isfinite(x))
            throw DivergenceError(0, i, "trajectory diverged during spin-up at step " + std::to_string(i));
    }
    Trajectory traj;
    traj.start_index = static_cast<std::int64_t>(params.spinup_steps);
    traj.states.reserve(length);
    traj.states.push_back(x);
    for (std::size_t i = 1; i < length; ++i) {
        x = system_step(x, params.lambda);
        if (!std::isfinite(x))
            throw DivergenceError(0, i, "trajectory diverged at step " + std::to_string(i));
        traj.states.push_back(x);
    }
    return traj;
}

inline ObservationSeries observe(const Trajectory& traj, double noise_sd,
                                 std::uint64_t rng_seed) {
    if (noise_sd < 0.0) throw std::invalid_argument("observe: noise_sd must be >= 0");
    ObservationSeries out;
    out.observations.reserve(traj.states.size());
    auto eng = make_engine(rng_seed);
    for (double x : traj.states) out.observations.push_back(normal_positive(eng, x, noise_sd));
    return out;
}

// Time average of ln|f'(x)| along a post-spin-up orbit started from a seeded
// random point in (0, 1]. Terms where the derivative vanishes exactly are
// skipped and counted.
inline double lyapunov_exponent(double lambda, std::size_t n_steps, std::uint64_t rng_seed,
                                std::size_t* degeneracies = nullptr) {
    if (n_steps < 10000) throw std::invalid_argument("lyapunov_exponent: n_steps must be >= 1e4");
    auto eng = make_engine(rng_seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double x = 0.0;
    while (!(x > 0.0)) x = u(eng);
    for (std::size_t i = 0; i < 1000; ++i) x = system_step(x, lambda);
    double acc = 0.0;
    std::size_t used = 0, skipped = 0;
    for (std::size_t i = 0; i < n_steps; ++i) {
        double d = system_step_derivative(x, lambda);
        if (d == 0.0) {
            ++skipped;
        } else {
            acc += std::log(std::abs(d));
            ++used;
        }
        x = system_step(x, lambda);
        if (!std::isfinite(x))
            throw DivergenceError(0, i, "orbit diverged during Lyapunov estimation");
    }
    if (degeneracies) *degeneracies = skipped;
    if (used == 0) throw std::runtime_error("lyapunov_exponent: no usable derivative terms");
    return acc / static_cast<double>(used);
}

// Standard deviation of the invariant measure, estimated from a long
// post-spin-up run; used for the default observational-noise scale.
inline double attractor_sd(double lambda, std::size_t n_steps, std::uint64_t rng_seed) {
    SystemParams p;
    p.lambda = lambda;
    Trajectory t = generate_trajectory(p, 0.3, n_steps, rng_seed);
    double m = 0.0;
    for (double x : t.states) m += x;
    m /= static_cast<double>(t.states.size());
    double s = 0.0;
    for (double x : t.states) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(t.states.size() - 1));
}

}  // namespace enslab
