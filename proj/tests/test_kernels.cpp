#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sdelay/errors.hpp"
#include "sdelay/kernels.hpp"

using namespace sdelay;
using namespace sdelay::kernels;

namespace {

constexpr double kPi = std::numbers::pi;

KernelConfig paper_cfg(int n = 200) {
    KernelConfig c;
    c.lambda = 11.0;
    c.d0 = 0.5;
    c.n_terms = n;
    c.quad_points = KernelConfig::default_quad_points(n);
    return c;
}

// Closed forms through the standard library's Bessel functions.
double p_ref(double x, double y, double lambda) {
    const double z = std::sqrt(lambda * (x * x - y * y));
    return z < 1e-12 ? -lambda * y / 2.0 : -lambda * y * std::cyl_bessel_i(1.0, z) / z;
}

double q_ref(double x, double y, double lambda) {
    const double z = std::sqrt(lambda * (x * x - y * y));
    return z < 1e-12 ? -lambda * y / 2.0 : -lambda * y * std::cyl_bessel_j(1.0, z) / z;
}

// 2 \int_0^1 sin(n pi y) f(y) dy by composite Simpson on `nodes` (odd) points.
template <typename F>
double simpson_sine(int n, F&& f, int nodes = 40001) {
    const double h = 1.0 / (nodes - 1);
    double s = 0.0;
    for (int k = 0; k < nodes; ++k) {
        const double y = k * h;
        const double w = (k == 0 || k == nodes - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        s += w * std::sin(n * kPi * y) * f(y);
    }
    return 2.0 * s * h / 3.0;
}

}  // namespace

TEST_CASE("closed-form kernels match standard Bessel functions") {
    const auto cfg = paper_cfg();
    for (double x : {0.0, 0.1, 0.5, 0.9, 1.0}) {
        for (double frac : {0.0, 0.3, 0.7, 1.0}) {
            const double y = frac * x;
            CHECK(eval_p(x, y, cfg) == doctest::Approx(p_ref(x, y, 11.0)).epsilon(1e-13));
            CHECK(eval_q(x, y, cfg) == doctest::Approx(q_ref(x, y, 11.0)).epsilon(1e-13));
        }
    }
    CHECK(eval_p(1.0, 1.0, cfg) == -5.5);
    CHECK(eval_q(0.4, 0.4, cfg) == doctest::Approx(-2.2));
    CHECK_THROWS_AS(eval_p(0.3, 0.5, cfg), std::domain_error);
    CHECK_THROWS_AS(eval_q(1.5, 0.5, cfg), std::domain_error);
}

TEST_CASE("kernel config validation") {
    auto c = paper_cfg();
    CHECK_NOTHROW(c.validate());
    c.lambda = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = paper_cfg();
    c.quad_points = 100;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = paper_cfg();
    c.n_terms = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(KernelConfig::default_quad_points(10) == 2001);
    CHECK(KernelConfig::default_quad_points(1000) == 10000);
}

TEST_CASE("sine coefficients agree with an independent Simpson quadrature") {
    const auto cfg = paper_cfg(60);
    const auto p = compute_p1n(cfg);
    const auto q = compute_q1n(cfg);
    REQUIRE(p.size() == 60);
    for (int n : {1, 2, 5, 17, 60}) {
        const double pr = simpson_sine(n, [](double y) { return p_ref(1.0, y, 11.0); });
        const double qr = simpson_sine(n, [](double y) { return q_ref(1.0, y, 11.0); });
        CAPTURE(n);
        CHECK(std::abs(p.p1n[n - 1] - pr) < 1e-8);
        CHECK(std::abs(q.p1n[n - 1] - qr) < 1e-8);
    }
    CHECK(p.tail_coefficient == doctest::Approx(11.0));
    CHECK(q.tail_coefficient == doctest::Approx(11.0));
}

TEST_CASE("coefficients decay like tail / (n pi) with alternating sign") {
    const auto p = compute_p1n(paper_cfg());
    for (int n : {100, 150, 200}) {
        const double sign = n % 2 == 0 ? 1.0 : -1.0;
        CHECK(sign * n * kPi * p.p1n[n - 1] == doctest::Approx(p.tail_coefficient).epsilon(0.01));
    }
}

TEST_CASE("kernel reciprocity holds on the test grid") {
    const double res = reciprocity_residual(paper_cfg());
    CHECK(res < 1e-5);
}

TEST_CASE("series kernels equal their defining sums") {
    const auto cfg = paper_cfg(40);
    const auto p = compute_p1n(cfg);
    const auto q = compute_q1n(cfg);
    const double x = 0.3, y = 0.6, s = 0.2;
    double g = 0.0, e = 0.0, k = 0.0, l = 0.0;
    for (int n = 1; n <= 40; ++n) {
        const double fw = std::exp(cfg.d0 * (cfg.lambda - n * n * kPi * kPi) * x);
        const double iv = std::exp(-cfg.d0 * n * n * kPi * kPi * x);
        g += p.p1n[n - 1] * std::sin(n * kPi * y) * fw;
        e += q.p1n[n - 1] * std::sin(n * kPi * y) * iv;
        const double sign = n % 2 == 0 ? 1.0 : -1.0;
        k -= sign * n * kPi * p.p1n[n - 1] * std::exp(cfg.d0 * (cfg.lambda - n * n * kPi * kPi) * s);
        l -= sign * n * kPi * q.p1n[n - 1] * std::exp(-cfg.d0 * n * n * kPi * kPi * s);
    }
    CHECK(eval_gamma(x, y, p, cfg) == doctest::Approx(g).epsilon(1e-12));
    CHECK(eval_eta(x, y, q, cfg) == doctest::Approx(e).epsilon(1e-12));
    CHECK(eval_kappa(s, p, cfg) == doctest::Approx(k).epsilon(1e-12));
    CHECK(eval_ell(s, q, cfg) == doctest::Approx(l).epsilon(1e-12));
    CHECK(eval_l(0.7, 0.5, q, cfg) == doctest::Approx(eval_ell(0.2, q, cfg)).epsilon(1e-12));
    CHECK(mode_rate(Family::Forward, cfg, 1) == doctest::Approx(0.5 * (11.0 - kPi * kPi)));
    CHECK(mode_rate(Family::Inverse, cfg, 2) == doctest::Approx(-0.5 * 4 * kPi * kPi));
}

TEST_CASE("gamma(0, y) converges to p(1, y) as N grows") {
    // Pointwise Fourier convergence away from y = 1, where the odd extension
    // jumps; the coefficients decay like 1/n so the error does too.
    std::vector<double> errs;
    for (int n : {50, 100, 200}) {
        const auto cfg = paper_cfg(n);
        const auto c = compute_p1n(cfg);
        double err = 0.0;
        for (double y : {0.2, 0.5, 0.8}) err = std::max(err, std::abs(eval_gamma(0.0, y, c, cfg) - p_ref(1.0, y, 11.0)));
        errs.push_back(err);
    }
    CHECK(errs[0] / errs[2] > 3.0);
    CHECK(errs[2] < 0.05);
}

TEST_CASE("eta(x, .) at x = 1 is smooth and small") {
    const auto cfg = paper_cfg();
    const auto q = compute_q1n(cfg);
    // Only the first mode survives e^{-d0 pi^2} damping at the scale of 1e-2.
    const double y = 0.5;
    CHECK(eval_eta(1.0, y, q, cfg) ==
          doctest::Approx(q.p1n[0] * std::exp(-cfg.d0 * kPi * kPi)).epsilon(1e-6));
    CHECK(eval_eta_x(0.5, y, q, cfg) ==
          doctest::Approx((eval_eta(0.5 + 1e-5, y, q, cfg) - eval_eta(0.5 - 1e-5, y, q, cfg)) / 2e-5)
              .epsilon(1e-6));
}

TEST_CASE("diagonal moments match direct quadrature away from the singularity") {
    const auto cfg = paper_cfg(100);
    const auto c = compute_p1n(cfg);
    const double h = 0.02;
    const auto mom = diagonal_moments(Family::Forward, c, cfg, h, 1.0);
    REQUIRE(mom.intervals() == 50);
    for (std::size_t m : {3u, 10u, 49u}) {
        const double s0 = m * h;
        double left = 0.0, right = 0.0, second = 0.0;
        const int nodes = 2001;
        const double dh = h / (nodes - 1);
        for (int k = 0; k < nodes; ++k) {
            const double sig = k * dh;
            const double w = (k == 0 || k == nodes - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
            double kv = 0.0;
            // Truncated sum plus the n > N modes the moments also carry.
            kv = eval_kappa(s0 + sig, c, cfg);
            for (int n = 101; n <= 20000; ++n) {
                const double sign = n % 2 == 0 ? 1.0 : -1.0;
                const double p1n = sign * c.tail_coefficient / (n * kPi);
                kv -= sign * n * kPi * p1n * std::exp(cfg.d0 * (cfg.lambda - n * n * kPi * kPi) * (s0 + sig));
            }
            left += w * kv * (1.0 - sig / h);
            right += w * kv * (sig / h);
            second += w * kv * (sig / h) * (sig / h);
        }
        CAPTURE(m);
        CHECK(mom.left[m] == doctest::Approx(left * dh / 3.0).epsilon(1e-6));
        CHECK(mom.right[m] == doctest::Approx(right * dh / 3.0).epsilon(1e-6));
        CHECK(mom.second[m] == doctest::Approx(second * dh / 3.0).epsilon(1e-6));
    }
}

TEST_CASE("short final interval when the span is not a multiple of h") {
    const auto cfg = paper_cfg(50);
    const auto c = compute_p1n(cfg);
    const auto mom = diagonal_moments(Family::Forward, c, cfg, 0.03, 1.0);
    REQUIRE(mom.intervals() == 34);
    CHECK(mom.widths.back() == doctest::Approx(0.01));
    CHECK(mom.widths.front() == 0.03);
}

TEST_CASE("product-integration weights are exact for polynomial data") {
    // Hand-built moments of K(s) = s on intervals of width h.
    const double h = 0.1;
    HatMoments mom;
    mom.h = h;
    for (int m = 0; m < 10; ++m) {
        const double s = m * h;
        mom.widths.push_back(h);
        mom.left.push_back(s * h / 2 + h * h / 6);
        mom.right.push_back(s * h / 2 + h * h / 3);
        mom.second.push_back(s * h / 3 + h * h / 4);
    }
    std::vector<double> lin(11), quad(11);
    for (int i = 0; i <= 10; ++i) {
        lin[i] = 2.0 * i * h - 1.0;
        quad[i] = (i * h) * (i * h);
    }
    for (std::size_t i = 1; i <= 10; ++i) {
        const double x = i * h;
        CAPTURE(i);
        // \int_0^x (x - y)(2y - 1) dy and \int_0^x (x - y) y^2 dy.
        CHECK(volterra_convolve(mom, lin, i) == doctest::Approx(x * x * x / 3 - x * x / 2).epsilon(1e-12));
        CHECK(volterra_convolve_quadratic(mom, quad, i) == doctest::Approx(std::pow(x, 4) / 12).epsilon(1e-12));
    }
    CHECK(volterra_convolve_quadratic(mom, quad, 0) == 0.0);
}

TEST_CASE("tables are consistent with pointwise evaluation") {
    const auto cfg = paper_cfg(100);
    const auto t = build_tables(cfg, 50);
    REQUIRE(t.nodes() == 51);
    CHECK(t.dx == doctest::Approx(0.02));
    for (std::size_t i : {0u, 7u, 50u}) {
        const double x = t.grid[i];
        CHECK(t.p_1[i] == eval_p(1.0, x, cfg));
        CHECK(t.gamma_1[i] == eval_gamma(1.0, x, t.coeffs, cfg));
        CHECK(t.eta_row[i] == eval_eta(1.0, x, t.inverse_coeffs, cfg));
        CHECK(t.p_at(i, i / 2) == eval_p(x, t.grid[i / 2], cfg));
        CHECK(t.q_at(i, 0) == 0.0);
    }
    CHECK(t.k_diag == eval_kappa(0.0, t.coeffs, cfg));
    CHECK(t.kappa[10] == eval_kappa(t.grid[10], t.coeffs, cfg));
    CHECK_THROWS_AS(build_tables(cfg, 5), ConfigError);
}

TEST_CASE("fredholm rows match a fine quadrature of the series kernels") {
    const auto cfg = paper_cfg();
    const auto p1n = compute_p1n(cfg);
    const auto q1n = compute_q1n(cfg);
    auto f = [](double y) { return std::sin(2 * kPi * y) + 0.5 * y * y; };
    // Fine Simpson on the pointwise kernels; rows away from x = 0 where the kernel is smooth in y.
    auto reference = [&](Family family, double x) {
        const int nodes = 20001;
        const double h = 1.0 / (nodes - 1);
        double acc = 0.0;
        for (int j = 0; j < nodes; ++j) {
            const double y = j * h;
            const double k = family == Family::Forward ? eval_gamma(x, y, p1n, cfg)
                                                       : eval_eta(x, y, q1n, cfg);
            const double w = (j == 0 || j == nodes - 1) ? 1.0 : (j % 2 ? 4.0 : 2.0);
            acc += w * k * f(y);
        }
        return acc * h / 3.0;
    };
    double prev = 0.0;
    for (int m : {50, 100}) {
        const auto t = build_tables(cfg, m);
        std::vector<double> fv(t.nodes());
        for (std::size_t j = 0; j < fv.size(); ++j) fv[j] = f(t.grid[j]);
        double err = 0.0;
        for (auto family : {Family::Forward, Family::Inverse}) {
            const auto rows = fredholm_rows(t, family, fv);
            for (std::size_t i : {t.nodes() / 2, t.nodes() - 1}) {
                err = std::max(err, std::abs(rows[i] - reference(family, t.grid[i])));
            }
        }
        CHECK(err < 1e-5);
        if (prev > 0.0) CHECK(prev / err > 3.5);
        prev = err;
    }
}

TEST_CASE("fredholm row weights reproduce the row") {
    const auto t = build_tables(paper_cfg(50), 40);
    std::vector<double> f(t.nodes());
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = std::exp(t.grid[j]) - 0.3 * t.grid[j];
    for (auto family : {Family::Forward, Family::Inverse}) {
        const auto rows = fredholm_rows(t, family, f);
        for (std::size_t i : {std::size_t{0}, std::size_t{7}, t.nodes() - 1}) {
            const auto w = fredholm_row_weights(t, family, i);
            double acc = 0.0;
            for (std::size_t j = 0; j < f.size(); ++j) acc += w[j] * f[j];
            CHECK(acc == doctest::Approx(rows[i]).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(fredholm_row_weights(t, Family::Forward, t.nodes()), std::out_of_range);
    CHECK_THROWS_AS(fredholm_rows(t, Family::Forward, std::vector<double>(5, 0.0)), std::invalid_argument);
}
