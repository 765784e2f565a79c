#include <catch_amalgamated.hpp>

#include <cmath>

#include "enslab/chaos.hpp"
#include "enslab/rng.hpp"

using namespace enslab;

TEST_CASE("map fixed points", "[chaos]") {
    CHECK(system_step(1.0, 3.0) == 1.0);
    CHECK(system_step(1.0, 0.7) == 1.0);
    CHECK(system_step(0.0, 3.0) == 0.0);
}

TEST_CASE("map value at x = 0.5", "[chaos]") {
    CHECK_THAT(system_step(0.5, 3.0),
               Catch::Matchers::WithinRel(2.2408445351690324, 1e-15));
}

TEST_CASE("map derivative", "[chaos]") {
    CHECK(system_step_derivative(1.0, 3.0) == -2.0);  // e^0 (1 - 3)
    CHECK(system_step_derivative(0.0, 3.0) == std::exp(3.0));
    // finite-difference cross-check
    double x = 0.7, h = 1e-7;
    double fd = (system_step(x + h, 3.0) - system_step(x - h, 3.0)) / (2 * h);
    CHECK_THAT(system_step_derivative(x, 3.0), Catch::Matchers::WithinAbs(fd, 1e-6));
}

TEST_CASE("trajectories are positive, finite, and deterministic", "[chaos]") {
    SystemParams p;
    p.lambda = 3.0;
    Trajectory a = generate_trajectory(p, 0.3, 500, 11);
    REQUIRE(a.states.size() == 500);
    CHECK(a.start_index == static_cast<std::int64_t>(p.spinup_steps));
    for (double x : a.states) {
        REQUIRE(std::isfinite(x));
        REQUIRE(x > 0.0);
    }
    Trajectory b = generate_trajectory(p, 0.3, 500, 11);
    CHECK(a.states == b.states);
}

TEST_CASE("observations add positive-truncated noise", "[chaos]") {
    SystemParams p;
    p.lambda = 3.0;
    Trajectory traj = generate_trajectory(p, 0.3, 2000, 11);
    ObservationSeries obs = observe(traj, 0.05, 13);
    REQUIRE(obs.observations.size() == traj.states.size());
    for (double s : obs.observations) REQUIRE(s > 0.0);
    ObservationSeries again = observe(traj, 0.05, 13);
    CHECK(obs.observations == again.observations);
    ObservationSeries clean = observe(traj, 0.0, 13);
    CHECK(clean.observations == traj.states);
}

TEST_CASE("Lyapunov exponent of a stable fixed point is log|1-lambda|", "[chaos]") {
    // for lambda = 0.5 the orbit converges to x* = 1 where f' = 1 - lambda
    double le = lyapunov_exponent(0.5, 20000, 3);
    CHECK_THAT(le, Catch::Matchers::WithinAbs(std::log(0.5), 1e-3));
}

TEST_CASE("Lyapunov exponent at lambda = 3 is positive and seed-stable", "[chaos]") {
    double a = lyapunov_exponent(3.0, 100000, 1);
    double b = lyapunov_exponent(3.0, 100000, 2);
    CHECK(a > 0.3);
    CHECK(b > 0.3);
    CHECK(std::abs(a - b) < 0.03);
    CHECK_THAT(a, Catch::Matchers::WithinAbs(0.385, 0.02));
}

TEST_CASE("derivative degeneracies are counted, not folded in", "[chaos]") {
    std::size_t degenerate = 1234;
    lyapunov_exponent(3.0, 20000, 7, &degenerate);
    CHECK(degenerate == 0);  // x = 1/3 has natural measure zero
}

TEST_CASE("attractor standard deviation at lambda = 3", "[chaos]") {
    double sd1 = attractor_sd(3.0, 100000, 1);
    double sd2 = attractor_sd(3.0, 100000, 99);
    CHECK_THAT(sd1, Catch::Matchers::WithinAbs(0.819, 0.02));
    CHECK_THAT(sd1, Catch::Matchers::WithinAbs(sd2, 0.02));
}

TEST_CASE("trajectory rejects nonsense", "[chaos]") {
    SystemParams p;
    CHECK_THROWS(generate_trajectory(p, -0.5, 100, 1));
    CHECK_THROWS(generate_trajectory(p, 0.3, 0, 1));
}
