#include <doctest.h>

#include <cmath>
#include <limits>

#include "sdelay/config.hpp"
#include "sdelay/errors.hpp"
#include "sdelay/montecarlo.hpp"
#include "sdelay/random.hpp"

using namespace sdelay;

namespace {

sim::SimConfig stable(const std::vector<std::string>& overrides = {}) {
    return config::parse_config("paper_stable", overrides).sim;
}

}  // namespace

TEST_CASE("decay fit recovers an exact exponential") {
    std::vector<double> t, v;
    for (int k = 0; k <= 30; ++k) {
        t.push_back(0.5 * k);
        v.push_back(3.0 * std::exp(-2.0 * t.back()));
    }
    const auto fit = mc::fit_decay(t, v, 0.0, 15.0, 1.5);
    CHECK(fit.beta == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.alpha == doctest::Approx(2.0).epsilon(1e-10));
    const auto part = mc::fit_decay(t, v, 5.0, 10.0, 3.0);
    CHECK(part.beta == doctest::Approx(2.0).epsilon(1e-12));
    // Growth gives a negative beta.
    for (auto& x : v) x = 1.0 / x;
    CHECK(mc::fit_decay(t, v, 0.0, 15.0, 1.0).beta == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("decay fit least squares on noisy data") {
    // Alternating +-0.1 in log space around slope -1: the OLS slope is
    // unchanged when residuals are orthogonal to (1, t).
    std::vector<double> t{0, 1, 2, 3}, v;
    const double eps[] = {0.1, -0.1, -0.1, 0.1};
    for (int k = 0; k < 4; ++k) v.push_back(std::exp(-t[k] + eps[k]));
    CHECK(mc::fit_decay(t, v, 0.0, 3.0, 1.0).beta == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("decay fit error paths") {
    std::vector<double> t{0, 1, 2}, v{1.0, 0.0, 0.5};
    CHECK_THROWS_AS(mc::fit_decay(t, v, 0.0, 2.0, 1.0), NumericalError);
    v = {1.0, std::numeric_limits<double>::infinity(), 0.5};
    CHECK_THROWS_AS(mc::fit_decay(t, v, 0.0, 2.0, 1.0), NumericalError);
    v = {1.0, 0.5, 0.25};
    CHECK_THROWS_AS(mc::fit_decay(t, v, 0.5, 1.5, 1.0), NumericalError);
    CHECK_NOTHROW(mc::fit_decay(t, v, 0.0, 1.0, 1.0));
}

TEST_CASE("single realization has an undefined interval") {
    mc::EnsembleOptions o;
    o.n = 1;
    o.master_seed = 4;
    const auto r = mc::run_ensemble(stable({"sim.horizon=1"}), o);
    CHECK(r.n_realizations == 1);
    CHECK(r.mean_v.size() == r.times.size());
    for (double c : r.ci_halfwidth) CHECK(std::isnan(c));
    CHECK(r.initial_v.size() == 1);
}

TEST_CASE("degenerate chain gives identical realizations and zero spread") {
    auto cfg = stable({"delay.states=[0.5]", "delay.q_matrix=[[0]]", "delay.initial_index=1",
                       "init.vtilde=[0]", "sim.horizon=2"});
    mc::EnsembleOptions o;
    o.n = 6;
    o.jobs = 3;
    const auto r = mc::run_ensemble(cfg, o);
    const auto one = sim::run_realization(cfg, delay::DelayPath{{0.0}, {0}, 2.0});
    CHECK(r.mean_v.back() == one.snapshots.back().v_total);
    for (double c : r.ci_halfwidth) CHECK(c == 0.0);
    CHECK(r.fit_ok);
}

TEST_CASE("ensemble is independent of the worker count") {
    auto cfg = stable({"sim.horizon=1"});
    mc::EnsembleOptions o;
    o.n = 6;
    o.master_seed = 77;
    o.jobs = 1;
    const auto a = mc::run_ensemble(cfg, o);
    o.jobs = 4;
    const auto b = mc::run_ensemble(cfg, o);
    CHECK(a.mean_v == b.mean_v);
    CHECK(a.ci_halfwidth == b.ci_halfwidth);
    CHECK(a.final_v == b.final_v);
    CHECK(a.fitted_beta == b.fitted_beta);
    CHECK(a.window_lo == doctest::Approx(1.0 / 3.0));
    CHECK(a.window_hi == 1.0);
}

TEST_CASE("ensemble mean matches the per-realization values") {
    auto cfg = stable({"sim.horizon=0.5"});
    mc::EnsembleOptions o;
    o.n = 5;
    o.master_seed = 2;
    const auto r = mc::run_ensemble(cfg, o);
    double sum = 0.0;
    for (double v : r.final_v) sum += v;
    CHECK(r.mean_v.back() == doctest::Approx(sum / 5).epsilon(1e-14));
    const auto third = sim::run_realization(cfg, derive_seed(2, 2));
    CHECK(r.final_v[2] == third.snapshots.back().v_total);
}

TEST_CASE("diverged realizations make the mean infinite") {
    auto cfg = stable({"sim.controller=false", "plant.lambda=60", "sim.horizon=3"});
    cfg.divergence_threshold = 1e3;
    mc::EnsembleOptions o;
    o.n = 3;
    const auto r = mc::run_ensemble(cfg, o);
    CHECK(r.diverged_count == 3);
    CHECK(std::isinf(r.mean_v.back()));
    CHECK(std::isinf(r.ci_halfwidth.back()));
    CHECK(std::isinf(r.final_v[0]));
    CHECK_FALSE(r.fit_ok);
    CHECK(std::isnan(r.fitted_beta));
}
