#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sdelay/errors.hpp"
#include "sdelay/plant_solver.hpp"

using namespace sdelay;
using namespace sdelay::plant;

namespace {

constexpr double kPi = std::numbers::pi;

PlantProfile sine_profile(std::size_t m, int mode = 1) {
    PlantProfile p{std::vector<double>(m + 1), 1.0 / static_cast<double>(m), 0.0};
    for (std::size_t i = 0; i <= m; ++i) p.values[i] = std::sin(mode * kPi * i * p.dx);
    p.values[m] = 0.0;
    return p;
}

double max_error_vs_heat(std::size_t m, double dt, double t_end) {
    CrankNicolson cn(m, 0.0, dt);
    auto p = sine_profile(m);
    const int steps = static_cast<int>(std::lround(t_end / dt));
    for (int k = 0; k < steps; ++k) cn.step(p, 0.0, 0.0);
    double err = 0.0;
    for (std::size_t i = 0; i <= m; ++i) {
        err = std::max(err, std::abs(p.values[i] - std::sin(kPi * i * p.dx) * std::exp(-kPi * kPi * t_end)));
    }
    return err;
}

}  // namespace

TEST_CASE("grid sine is an eigenvector of the scheme") {
    // Discrete symbol: mu = lambda - (4/dx^2) sin^2(pi dx / 2), CN factor (1 + dt mu/2)/(1 - dt mu/2).
    const std::size_t m = 100;
    const double dt = 0.01, lambda = 11.0;
    const double dx = 1.0 / m;
    const double mu = lambda - 4.0 / (dx * dx) * std::pow(std::sin(kPi * dx / 2.0), 2);
    const double g = (1.0 + 0.5 * dt * mu) / (1.0 - 0.5 * dt * mu);
    CrankNicolson cn(m, lambda, dt);
    auto p = sine_profile(m);
    for (int k = 0; k < 200; ++k) cn.step(p, 0.0, 0.0);
    const double amp = std::pow(g, 200);
    for (std::size_t i = 0; i <= m; ++i) {
        CHECK(p.values[i] == doctest::Approx(amp * std::sin(kPi * i * dx)).epsilon(1e-11));
    }
}

TEST_CASE("heat equation error is second order") {
    const double e1 = max_error_vs_heat(50, 0.02, 0.1);
    const double e2 = max_error_vs_heat(100, 0.01, 0.1);
    const double e3 = max_error_vs_heat(200, 0.005, 0.1);
    CHECK(e2 < 5e-4);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
    CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("boundary values are imposed exactly") {
    CrankNicolson cn(20, 11.0, 0.01);
    auto p = sine_profile(20);
    cn.step(p, 0.0, 0.123456789);
    CHECK(p.values.front() == 0.0);
    CHECK(p.values.back() == 0.123456789);
}

TEST_CASE("steady linear profile is preserved without reaction") {
    CrankNicolson cn(40, 0.0, 0.05);
    PlantProfile p{std::vector<double>(41), 1.0 / 40, 0.0};
    for (int i = 0; i <= 40; ++i) p.values[i] = i / 40.0;
    for (int k = 0; k < 100; ++k) cn.step(p, 1.0, 1.0);
    for (int i = 0; i <= 40; ++i) CHECK(p.values[i] == doctest::Approx(i / 40.0).epsilon(1e-13));
}

TEST_CASE("step is linear in state and boundary data") {
    CrankNicolson cn(30, 11.0, 0.01);
    auto a = sine_profile(30, 1);
    auto b = sine_profile(30, 3);
    PlantProfile sum{std::vector<double>(31), a.dx, 0.0};
    for (int i = 0; i <= 30; ++i) sum.values[i] = 2.0 * a.values[i] - b.values[i];
    cn.step(a, 0.0, 0.4);
    cn.step(b, 0.0, -0.1);
    cn.step(sum, 0.0, 0.9);
    for (int i = 0; i <= 30; ++i) CHECK(sum.values[i] == doctest::Approx(2.0 * a.values[i] - b.values[i]).epsilon(1e-12));
}

TEST_CASE("one-off step agrees with the cached factorization") {
    CrankNicolson cn(25, 3.0, 0.02);
    auto p = sine_profile(25, 2);
    const auto q = step_cn(p, 0.1, 0.2, 3.0, 0.02);
    cn.step(p, 0.1, 0.2);
    CHECK(q.values == p.values);
}

TEST_CASE("solver error paths") {
    CHECK_THROWS_AS(CrankNicolson(1, 1.0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(CrankNicolson(10, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(CrankNicolson(10, NAN, 0.01), std::invalid_argument);
    CrankNicolson cn(10, 1.0, 0.01);
    auto wrong = sine_profile(12);
    CHECK_THROWS_AS(cn.step(wrong, 0.0, 0.0), std::invalid_argument);
    auto p = sine_profile(10);
    CHECK_THROWS_AS(cn.step(p, 0.0, INFINITY), NumericalError);
    p.values[3] = NAN;
    CHECK_THROWS_AS(cn.step(p, 0.0, 0.0), NumericalError);
}
