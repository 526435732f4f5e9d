#include "sdelay/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "sdelay/bessel.hpp"
#include "sdelay/errors.hpp"

namespace sdelay::kernels {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTermTolerance = 1e-12;
constexpr int kTermPatience = 5;
constexpr double kDomainSlack = 1e-12;

void check_triangle(double x, double y, const char* who) {
    if (!(x >= -kDomainSlack && x <= 1.0 + kDomainSlack && y >= -kDomainSlack &&
          y <= x + kDomainSlack)) {
        throw std::domain_error(std::string(who) + ": need 0 <= y <= x <= 1, got x=" +
                                std::to_string(x) + " y=" + std::to_string(y));
    }
}

// Sum_{n=1}^{N} weight(n) e^{rate_n x} with the adaptive stop on
// |n pi p1n| e^{rate_n x} < 1e-12 for five consecutive n.
template <typename Weight>
double truncated_series(Family family, const FourierCoeffs& coeffs, const KernelConfig& cfg,
                        double x, Weight&& weight) {
    double sum = 0.0;
    int quiet = 0;
    const int n_max = static_cast<int>(coeffs.size());
    for (int n = 1; n <= n_max; ++n) {
        const double decay = std::exp(mode_rate(family, cfg, n) * x);
        const double p1n = coeffs.p1n[n - 1];
        sum += weight(n, p1n) * decay;
        if (std::abs(n * kPi * p1n) * decay < kTermTolerance) {
            if (++quiet >= kTermPatience) break;
        } else {
            quiet = 0;
        }
    }
    return sum;
}

// A(z) = \int_0^1 e^{z t}(1 - t) dt, B(z) = \int_0^1 e^{z t} t dt,
// C(z) = \int_0^1 e^{z t} t^2 dt.
struct HatPair {
    double a;
    double b;
    double c;
};

HatPair hat_pair(double z) {
    if (std::abs(z) < 0.5) {
        double a = 0.0;
        double b = 0.0;
        double c = 0.0;
        double term = 1.0;  // z^k / k!
        for (int k = 0; k < 30; ++k) {
            const double i1 = term / (k + 1);
            const double i2 = term / (k + 2);
            a += i1 - i2;
            b += i2;
            c += term / (k + 3);
            term *= z / (k + 1);
        }
        return {a, b, c};
    }
    const double ez = std::exp(z);
    const double z2 = z * z;
    const double z3 = z2 * z;
    return {(std::expm1(z) - z) / z2, (ez * (z - 1.0) + 1.0) / z2,
            ez * (1.0 / z - 2.0 / z2 + 2.0 / z3) - 2.0 / z3};
}

double diagonal_series(Family family, double s, const FourierCoeffs& coeffs,
                       const KernelConfig& cfg) {
    if (s < -kDomainSlack || s > 1.0 + kDomainSlack) {
        throw std::domain_error("diagonal kernel: need 0 <= s <= 1, got s=" + std::to_string(s));
    }
    s = std::clamp(s, 0.0, 1.0);
    return -truncated_series(family, coeffs, cfg, s, [](int n, double p1n) {
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        return sign * n * kPi * p1n;
    });
}

}  // namespace

int KernelConfig::default_quad_points(int n_terms) { return std::max(2001, 10 * n_terms); }

void KernelConfig::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("must be > 0", "plant.lambda");
    if (!(d0 > 0.0) || !std::isfinite(d0)) throw ConfigError("must be > 0", "delay.d0");
    if (n_terms < 1) throw ConfigError("must be >= 1", "kernel.n_terms");
    if (quad_points < 2 * n_terms) {
        throw ConfigError("must be >= 2 * kernel.n_terms", "kernel.quad_points");
    }
}

double mode_rate(Family family, const KernelConfig& cfg, int n) {
    const double diffusion = static_cast<double>(n) * n * kPi * kPi;
    return family == Family::Forward ? cfg.d0 * (cfg.lambda - diffusion) : -cfg.d0 * diffusion;
}

double eval_p(double x, double y, const KernelConfig& cfg) {
    check_triangle(x, y, "eval_p");
    const double z2 = std::max(0.0, cfg.lambda * (x * x - y * y));
    return -cfg.lambda * y * bessel::i1_over_z(z2);
}

double eval_q(double x, double y, const KernelConfig& cfg) {
    check_triangle(x, y, "eval_q");
    const double z2 = std::max(0.0, cfg.lambda * (x * x - y * y));
    return -cfg.lambda * y * bessel::j1_over_z(z2);
}

namespace {

template <typename Trace>
FourierCoeffs sine_coefficients(const KernelConfig& cfg, Trace&& trace) {
    cfg.validate();
    const int q = cfg.quad_points;
    const double h = 1.0 / (q - 1);
    std::vector<double> f(q);
    for (int k = 0; k < q; ++k) f[k] = trace(k == q - 1 ? 1.0 : k * h);

    FourierCoeffs out;
    out.p1n.resize(cfg.n_terms);
    for (int n = 1; n <= cfg.n_terms; ++n) {
        const double omega = n * kPi;
        // sin(n pi xi) vanishes at both ends, so only interior nodes contribute.
        double sum = 0.0;
        for (int k = 1; k < q - 1; ++k) sum += std::sin(omega * (k * h)) * f[k];
        // Euler-Maclaurin end correction -h^2/12 (g'(1) - g'(0)), g = sin(n pi xi) f(xi);
        // g'(0) = 0 since f(0) = 0.
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        const double g_prime_1 = omega * sign * f[q - 1];
        out.p1n[n - 1] = 2.0 * (h * sum - h * h / 12.0 * g_prime_1);
    }
    out.tail_coefficient = -2.0 * f[q - 1];
    return out;
}

}  // namespace

FourierCoeffs compute_p1n(const KernelConfig& cfg) {
    return sine_coefficients(cfg, [&](double y) { return eval_p(1.0, y, cfg); });
}

FourierCoeffs compute_q1n(const KernelConfig& cfg) {
    return sine_coefficients(cfg, [&](double y) { return eval_q(1.0, y, cfg); });
}

double reciprocity_residual(const KernelConfig& cfg, int grid_points, int inner_nodes) {
    if (grid_points < 2 || inner_nodes < 2) throw std::invalid_argument("reciprocity_residual: too few nodes");
    double worst = 0.0;
    for (int a = 0; a < grid_points; ++a) {
        const double x = static_cast<double>(a) / (grid_points - 1);
        for (int b = 0; b <= a; ++b) {
            const double y = static_cast<double>(b) / (grid_points - 1);
            const double h = (x - y) / (inner_nodes - 1);
            double integral = 0.0;
            if (h > 0.0) {
                for (int k = 0; k < inner_nodes; ++k) {
                    const double s = k == inner_nodes - 1 ? x : y + k * h;
                    const double w = (k == 0 || k == inner_nodes - 1) ? 0.5 : 1.0;
                    integral += w * eval_p(x, s, cfg) * eval_q(s, y, cfg);
                }
                integral *= h;
            }
            const double r = eval_q(x, y, cfg) - eval_p(x, y, cfg) - integral;
            worst = std::max(worst, std::abs(r));
        }
    }
    return worst;
}

double eval_gamma(double x, double y, const FourierCoeffs& coeffs, const KernelConfig& cfg) {
    return truncated_series(Family::Forward, coeffs, cfg, x,
                            [y](int n, double p1n) { return std::sin(n * kPi * y) * p1n; });
}

double eval_eta(double x, double y, const FourierCoeffs& coeffs, const KernelConfig& cfg) {
    return truncated_series(Family::Inverse, coeffs, cfg, x,
                            [y](int n, double p1n) { return std::sin(n * kPi * y) * p1n; });
}

double eval_eta_x(double x, double y, const FourierCoeffs& coeffs, const KernelConfig& cfg) {
    return truncated_series(Family::Inverse, coeffs, cfg, x, [&](int n, double p1n) {
        return mode_rate(Family::Inverse, cfg, n) * std::sin(n * kPi * y) * p1n;
    });
}

double eval_kappa(double s, const FourierCoeffs& coeffs, const KernelConfig& cfg) {
    return diagonal_series(Family::Forward, s, coeffs, cfg);
}

double eval_ell(double s, const FourierCoeffs& coeffs, const KernelConfig& cfg) {
    return diagonal_series(Family::Inverse, s, coeffs, cfg);
}

double eval_l(double x, double y, const FourierCoeffs& coeffs, const KernelConfig& cfg) {
    check_triangle(x, y, "eval_l");
    return eval_ell(x - y, coeffs, cfg);
}

HatMoments diagonal_moments(Family family, const FourierCoeffs& coeffs, const KernelConfig& cfg,
                            double h, double span) {
    if (!(h > 0.0) || !(span > 0.0)) throw std::invalid_argument("diagonal_moments: h, span > 0");
    HatMoments out;
    out.h = h;
    const double ratio = span / h;
    auto full = static_cast<std::size_t>(std::floor(ratio + 1e-9));
    const double rest = span - static_cast<double>(full) * h;
    for (std::size_t m = 0; m < full; ++m) out.widths.push_back(h);
    if (rest > 1e-9 * h) out.widths.push_back(rest);

    const int n_max = static_cast<int>(coeffs.size());
    const double c_inf = coeffs.tail_coefficient;
    double start = 0.0;
    for (double w : out.widths) {
        double left = 0.0;
        double right = 0.0;
        double second = 0.0;
        for (int n = 1; n <= n_max; ++n) {
            const double rate = mode_rate(family, cfg, n);
            const double shift = std::exp(rate * start);
            if (shift == 0.0 && rate < 0.0) break;
            const double sign = (n % 2 == 0) ? 1.0 : -1.0;
            const double c = sign * n * kPi * coeffs.p1n[n - 1];
            const auto [a, b, q] = hat_pair(rate * w);
            left -= c * shift * w * a;
            right -= c * shift * w * b;
            second -= c * shift * w * q;
        }
        // Modes beyond N with their asymptotic coefficient. Summed explicitly
        // up to 50 N, then the remaining 1/n^2 tail of the left moment in
        // closed form (the right moment's tail is O(n^-4) and dropped there).
        const int n_tail = 50 * std::max(n_max, 20);
        for (int n = n_max + 1; n <= n_tail; ++n) {
            const double rate = mode_rate(family, cfg, n);
            const double shift = std::exp(rate * start);
            if (shift == 0.0) break;
            const auto [a, b, q] = hat_pair(rate * w);
            left -= c_inf * shift * w * a;
            right -= c_inf * shift * w * b;
            second -= c_inf * shift * w * q;
            if (n == n_tail && start == 0.0) {
                left -= c_inf / (cfg.d0 * kPi * kPi * (n_tail + 0.5));
            }
        }
        out.left.push_back(left);
        out.right.push_back(right);
        out.second.push_back(second);
        start += w;
    }
    return out;
}

double volterra_convolve(const HatMoments& moments, std::span<const double> f, std::size_t i) {
    if (i >= f.size()) throw std::out_of_range("volterra_convolve: node index");
    if (i > moments.intervals()) throw std::out_of_range("volterra_convolve: span too short");
    double acc = 0.0;
    for (std::size_t m = 0; m < i; ++m) {
        acc += moments.left[m] * f[i - m] + moments.right[m] * f[i - m - 1];
    }
    return acc;
}

double volterra_convolve_quadratic(const HatMoments& moments, std::span<const double> f,
                                   std::size_t i) {
    if (i >= f.size()) throw std::out_of_range("volterra_convolve_quadratic: node index");
    if (i > moments.intervals()) throw std::out_of_range("volterra_convolve_quadratic: span too short");
    if (f.size() < 3) return volterra_convolve(moments, f, i);
    double acc = 0.0;
    for (std::size_t m = 0; m < i; ++m) {
        const double mu1 = moments.right[m];
        const double mu0 = moments.left[m] + mu1;
        const double mu2 = moments.second[m];
        if (m + 1 < i) {
            // Nodes tau = 0, 1, 2 at f[i-m], f[i-m-1], f[i-m-2].
            acc += 0.5 * (mu2 - 3.0 * mu1 + 2.0 * mu0) * f[i - m] + (2.0 * mu1 - mu2) * f[i - m - 1] +
                   0.5 * (mu2 - mu1) * f[i - m - 2];
        } else {
            // Nodes tau = -1, 0, 1 at f[i-m+1], f[i-m], f[i-m-1].
            acc += 0.5 * (mu2 - mu1) * f[i - m + 1] + (mu0 - mu2) * f[i - m] + 0.5 * (mu2 + mu1) * f[i - m - 1];
        }
    }
    return acc;
}

namespace {

// \int_0^1 sin(omega y) phi_j(y) dy for the hat basis on x_j = j h.
double sine_hat_integral(double omega, double h, int j, int M) {
    const double wh = omega * h;
    // (wh - sin wh)/(omega^2 h), evaluated without cancellation for small wh.
    auto edge = [&]() {
        if (std::abs(wh) < 1e-2) {
            const double w2 = wh * wh;
            return h * wh / 6.0 * (1.0 - w2 / 20.0 * (1.0 - w2 / 42.0));
        }
        return (wh - std::sin(wh)) / (omega * wh);
    };
    if (j == 0) return edge();
    if (j == M) return -std::cos(omega) * edge() + std::sin(omega) * (1.0 - std::cos(wh)) / (omega * wh);
    const double half = 0.5 * wh;
    const double sinc = std::abs(half) < 1e-8 ? 1.0 : std::sin(half) / half;
    return std::sin(omega * (j * h)) * h * sinc * sinc;
}

}  // namespace

KernelTables build_tables(const KernelConfig& cfg, int grid_size) {
    cfg.validate();
    if (grid_size < 10) throw ConfigError("grid must have at least 10 intervals", "grid.dx");
    KernelTables t;
    t.cfg = cfg;
    t.coeffs = compute_p1n(cfg);
    t.inverse_coeffs = compute_q1n(cfg);
    t.M = grid_size;
    t.dx = 1.0 / grid_size;
    const std::size_t nodes = static_cast<std::size_t>(grid_size) + 1;
    t.grid.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i) t.grid[i] = static_cast<double>(i) / grid_size;

    t.p_1.resize(nodes);
    t.gamma_1.resize(nodes);
    t.kappa.resize(nodes);
    t.eta_row.resize(nodes);
    t.l_band.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double x = t.grid[i];
        t.p_1[i] = eval_p(1.0, x, cfg);
        t.gamma_1[i] = eval_gamma(1.0, x, t.coeffs, cfg);
        t.kappa[i] = eval_kappa(x, t.coeffs, cfg);
        t.eta_row[i] = eval_eta(1.0, x, t.inverse_coeffs, cfg);
        t.l_band[i] = eval_ell(x, t.inverse_coeffs, cfg);
    }
    t.k_diag = t.kappa[0];

    t.p_tri.resize(nodes * (nodes + 1) / 2);
    t.q_tri.resize(t.p_tri.size());
    for (std::size_t i = 0; i < nodes; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            t.p_tri[i * (i + 1) / 2 + j] = eval_p(t.grid[i], t.grid[j], cfg);
            t.q_tri[i * (i + 1) / 2 + j] = eval_q(t.grid[i], t.grid[j], cfg);
        }
    }

    t.kappa_moments = diagonal_moments(Family::Forward, t.coeffs, cfg, t.dx, 1.0);
    t.l_moments = diagonal_moments(Family::Inverse, t.inverse_coeffs, cfg, t.dx, 1.0);

    const std::size_t n_terms = t.coeffs.size();
    t.sine_hat.resize(n_terms * nodes);
    t.sine_grid.resize(n_terms * nodes);
    t.forward_exp.resize(nodes * n_terms);
    t.inverse_exp.resize(nodes * n_terms);
    for (std::size_t n = 1; n <= n_terms; ++n) {
        const double omega = static_cast<double>(n) * kPi;
        for (std::size_t j = 0; j < nodes; ++j) {
            t.sine_hat[(n - 1) * nodes + j] =
                sine_hat_integral(omega, t.dx, static_cast<int>(j), grid_size);
            t.sine_grid[(n - 1) * nodes + j] = std::sin(omega * t.grid[j]);
        }
        const double a = mode_rate(Family::Forward, cfg, static_cast<int>(n));
        const double b = mode_rate(Family::Inverse, cfg, static_cast<int>(n));
        for (std::size_t i = 0; i < nodes; ++i) {
            t.forward_exp[i * n_terms + (n - 1)] = std::exp(a * t.grid[i]);
            t.inverse_exp[i * n_terms + (n - 1)] = std::exp(b * t.grid[i]);
        }
    }

    t.forward_tail.assign(nodes, 0.0);
    t.inverse_tail.assign(nodes, 0.0);
    t.inverse_tail_x.assign(nodes, 0.0);
    const int n_first = static_cast<int>(n_terms) + 1;
    const int n_tail = 50 * std::max(static_cast<int>(n_terms), 20);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double x = t.grid[i];
        for (int n = n_first; n <= n_tail; ++n) {
            const double inv_n2 = 1.0 / (static_cast<double>(n) * n);
            const double a = mode_rate(Family::Forward, cfg, n);
            const double b = mode_rate(Family::Inverse, cfg, n);
            const double fa = std::exp(a * x);
            const double fb = std::exp(b * x);
            if (fa == 0.0 && fb == 0.0) break;
            t.forward_tail[i] += fa * inv_n2;
            t.inverse_tail[i] += fb * inv_n2;
            t.inverse_tail_x[i] += b * fb * inv_n2;
        }
    }
    t.forward_tail[0] += 1.0 / (n_tail + 0.5);
    t.inverse_tail[0] += 1.0 / (n_tail + 0.5);
    return t;
}

namespace {

struct FredholmPrep {
    std::vector<double> weighted;  // c_n g_n
    double tail = 0.0;             // coefficient of sum_{n>N} e^{rate_n x} / n^2
};

FredholmPrep fredholm_prep(const KernelTables& t, Family family, std::span<const double> f) {
    const std::size_t nodes = t.nodes();
    if (f.size() != nodes) throw std::invalid_argument("fredholm: grid mismatch with tables");
    const std::size_t last = nodes - 1;
    // g = f - h^2/12 f''; one-sided four-point second differences at the ends.
    std::vector<double> g(f.begin(), f.end());
    const double c = 1.0 / 12.0;
    for (std::size_t j = 1; j < last; ++j) g[j] -= c * (f[j - 1] - 2.0 * f[j] + f[j + 1]);
    g[0] -= c * (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]);
    g[last] -= c * (2.0 * f[last] - 5.0 * f[last - 1] + 4.0 * f[last - 2] - f[last - 3]);

    const auto& coeffs = family == Family::Forward ? t.coeffs : t.inverse_coeffs;
    FredholmPrep out;
    out.weighted.resize(coeffs.size());
    for (std::size_t n = 0; n < coeffs.size(); ++n) {
        const double* row = &t.sine_hat[n * nodes];
        double acc = 0.0;
        for (std::size_t j = 0; j < nodes; ++j) acc += row[j] * g[j];
        out.weighted[n] = acc * coeffs.p1n[n];
    }
    out.tail = -coeffs.tail_coefficient * g[last] / (kPi * kPi);
    return out;
}

double fredholm_row(const KernelTables& t, Family family, const FredholmPrep& prep, std::size_t i) {
    const auto& exps = family == Family::Forward ? t.forward_exp : t.inverse_exp;
    const auto& tail = family == Family::Forward ? t.forward_tail : t.inverse_tail;
    const std::size_t n_terms = prep.weighted.size();
    const double* e = &exps[i * n_terms];
    double acc = 0.0;
    for (std::size_t n = 0; n < n_terms; ++n) acc += e[n] * prep.weighted[n];
    return acc + prep.tail * tail[i];
}

}  // namespace

std::vector<double> fredholm_rows(const KernelTables& t, Family family, std::span<const double> f) {
    const auto prep = fredholm_prep(t, family, f);
    std::vector<double> out(t.nodes());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fredholm_row(t, family, prep, i);
    return out;
}

std::vector<double> fredholm_row_weights(const KernelTables& t, Family family, std::size_t i) {
    if (i >= t.nodes()) throw std::out_of_range("fredholm_row_weights: row outside the grid");
    std::vector<double> unit(t.nodes(), 0.0), out(t.nodes());
    for (std::size_t j = 0; j < unit.size(); ++j) {
        unit[j] = 1.0;
        out[j] = fredholm_row(t, family, fredholm_prep(t, family, unit), i);
        unit[j] = 0.0;
    }
    return out;
}

}  // namespace sdelay::kernels
