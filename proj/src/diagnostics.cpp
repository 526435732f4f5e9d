#include "sdelay/diagnostics.hpp"

#include <numbers>
#include <stdexcept>
#include <string>

#include "sdelay/actuator.hpp"

namespace sdelay::diagnostics {

namespace {

double trapz_sq(std::span<const double> f, double dx) {
    const std::size_t n = f.size();
    if (n < 2) return 0.0;
    double acc = 0.5 * (f[0] * f[0] + f[n - 1] * f[n - 1]);
    for (std::size_t i = 1; i + 1 < n; ++i) acc += f[i] * f[i];
    return acc * dx;
}

void require_grid(std::size_t size, const kernels::KernelTables& tables, const char* who) {
    if (size != tables.nodes()) throw std::invalid_argument(std::string(who) + ": grid mismatch with tables");
}

// Sine coefficients int_0^1 sin(n pi y) f(y) dy of the piecewise-linear interpolant.
std::vector<double> sine_coefficients(std::span<const double> f, const kernels::KernelTables& t,
                                      const kernels::FourierCoeffs& coeffs) {
    const std::size_t nodes = t.nodes();
    const std::size_t n_terms = t.coeffs.size();
    std::vector<double> out(n_terms, 0.0);
    for (std::size_t n = 0; n < n_terms; ++n) {
        const double* row = &t.sine_hat[n * nodes];
        double acc = 0.0;
        for (std::size_t j = 0; j < nodes; ++j) acc += row[j] * f[j];
        out[n] = acc * coeffs.p1n[n];
    }
    return out;
}

double modal_sum(const std::vector<double>& exps, std::size_t i, const std::vector<double>& weighted,
                 const std::vector<double>* rates = nullptr) {
    const std::size_t n_terms = weighted.size();
    const double* row = &exps[i * n_terms];
    double acc = 0.0;
    for (std::size_t n = 0; n < n_terms; ++n) {
        const double term = row[n] * weighted[n];
        acc += rates ? (*rates)[n] * term : term;
    }
    return acc;
}

// Trapezoid with the Euler-Maclaurin end correction -h^2/12 (f'(x_i) - f'(0)),
// derivatives from three-point one-sided differences.
double volterra_quad(const kernels::KernelTables& t, bool use_q, std::span<const double> f,
                     std::size_t i) {
    if (i == 0) return 0.0;
    auto g = [&](std::size_t j) { return (use_q ? t.q_at(i, j) : t.p_at(i, j)) * f[j]; };
    const double h = t.dx;
    double acc = 0.5 * (g(0) + g(i));
    for (std::size_t j = 1; j < i; ++j) acc += g(j);
    acc *= h;
    if (i >= 2) {
        const double d0 = (-3.0 * g(0) + 4.0 * g(1) - g(2)) / (2.0 * h);
        const double d1 = (3.0 * g(i) - 4.0 * g(i - 1) + g(i - 2)) / (2.0 * h);
        acc -= h * h / 12.0 * (d1 - d0);
    }
    return acc;
}

// Coefficient of the n > N spectral tail for data f with sine coefficients
// weighted by a trace whose asymptotic constant is c_inf.
double tail_weight(const kernels::FourierCoeffs& coeffs, std::span<const double> f) {
    return -coeffs.tail_coefficient * f.back() / (std::numbers::pi * std::numbers::pi);
}

}  // namespace

double l2_sq(std::span<const double> f, double dx) { return trapz_sq(f, dx); }

double h1_sq(std::span<const double> f, double dx) {
    const auto d = actuator::derivative(f, dx);
    return trapz_sq(f, dx) + trapz_sq(d, dx);
}

double l2_sq(const std::vector<std::vector<double>>& f, double dx) {
    double acc = 0.0;
    for (const auto& c : f) acc += l2_sq(c, dx);
    return acc;
}

double h1_sq(const std::vector<std::vector<double>>& f, double dx) {
    double acc = 0.0;
    for (const auto& c : f) acc += h1_sq(c, dx);
    return acc;
}

double lyapunov_v(std::span<const double> u, std::span<const double> vhat,
                  const std::vector<std::vector<double>>& vtilde, double dx) {
    return l2_sq(u, dx) + h1_sq(vhat, dx) + h1_sq(vtilde, dx);
}

NormSnapshot make_snapshot(double t, std::span<const double> u, std::span<const double> vhat,
                           const std::vector<std::vector<double>>& vtilde, double dx,
                           double u_ctrl, std::size_t delay_index) {
    NormSnapshot s;
    s.t = t;
    s.u_l2sq = l2_sq(u, dx);
    s.vhat_h1sq = h1_sq(vhat, dx);
    s.vtilde_h1sq = h1_sq(vtilde, dx);
    s.v_total = s.u_l2sq + s.vhat_h1sq + s.vtilde_h1sq;
    s.u_ctrl = u_ctrl;
    s.delay_index = delay_index;
    return s;
}

TargetSnapshot forward_transform(std::span<const double> u, std::span<const double> vhat,
                                 const kernels::KernelTables& tables) {
    require_grid(u.size(), tables, "forward_transform");
    require_grid(vhat.size(), tables, "forward_transform");
    const std::size_t nodes = tables.nodes();
    const double d0 = tables.cfg.d0;

    TargetSnapshot out;
    out.w.resize(nodes);
    out.z.resize(nodes);
    out.h.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i) out.w[i] = u[i] - volterra_quad(tables, false, u, i);

    const auto gamma_u = kernels::fredholm_rows(tables, kernels::Family::Forward, u);
    for (std::size_t i = 0; i < nodes; ++i) {
        out.z[i] = vhat[i] - gamma_u[i] - d0 * kernels::volterra_convolve_quadratic(tables.kappa_moments, vhat, i);
    }

    std::vector<double> rates(tables.coeffs.size());
    for (std::size_t n = 0; n < rates.size(); ++n) {
        rates[n] = kernels::mode_rate(kernels::Family::Inverse, tables.cfg, static_cast<int>(n + 1));
    }
    const auto w_hat = sine_coefficients(out.w, tables, tables.inverse_coeffs);
    const double w_tail = tail_weight(tables.inverse_coeffs, out.w);
    const auto z_y = actuator::derivative(out.z, tables.dx);
    for (std::size_t i = 0; i < nodes; ++i) {
        out.h[i] = z_y[i] + modal_sum(tables.inverse_exp, i, w_hat, &rates) +
                   w_tail * tables.inverse_tail_x[i] +
                   d0 * (tables.l_band[i] * out.z[0] +
                         kernels::volterra_convolve_quadratic(tables.l_moments, z_y, i));
    }
    return out;
}

PlantActuatorPair inverse_transform(std::span<const double> w, std::span<const double> z,
                                    const kernels::KernelTables& tables) {
    require_grid(w.size(), tables, "inverse_transform");
    require_grid(z.size(), tables, "inverse_transform");
    const std::size_t nodes = tables.nodes();
    const double d0 = tables.cfg.d0;

    PlantActuatorPair out;
    out.u.resize(nodes);
    out.vhat.resize(nodes);
    const auto eta_w = kernels::fredholm_rows(tables, kernels::Family::Inverse, w);
    for (std::size_t i = 0; i < nodes; ++i) {
        out.u[i] = w[i] + volterra_quad(tables, true, w, i);
        out.vhat[i] = z[i] + eta_w[i] + d0 * kernels::volterra_convolve_quadratic(tables.l_moments, z, i);
    }
    return out;
}

}  // namespace sdelay::diagnostics
