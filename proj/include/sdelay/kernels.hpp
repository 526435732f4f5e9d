#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sdelay::kernels {

struct KernelConfig {
    double lambda = 11.0;  // reaction coefficient
    double d0 = 0.5;       // reference (compensated) delay
    int n_terms = 200;     // Fourier truncation N
    int quad_points = 2001;

    /// max(2001, 10 N): ten nodes per half-wave of sin(N pi xi).
    static int default_quad_points(int n_terms);

    /// Throws ConfigError on lambda <= 0, d0 <= 0, n_terms < 1 or
    /// quad_points < 2 n_terms.
    void validate() const;
};

/// Sine coefficients of a boundary trace: p(1,.) for the forward kernels
/// (gamma, k), q(1,.) for the inverse kernels (eta, l).
struct FourierCoeffs {
    std::vector<double> p1n;  // p1n[n-1] = 2 \int_0^1 sin(n pi xi) f(xi) dxi

    /// Limit of (-1)^n n pi p1n as n -> infinity, equal to -2 f(1) = lambda
    /// for both traces. The series decays like 1/n because f(1) != 0; this
    /// constant drives the analytic tail of the diagonal-kernel moments.
    double tail_coefficient = 0.0;

    std::size_t size() const noexcept { return p1n.size(); }
};

/// Which exponential family a series belongs to. Forward kernels (gamma, k)
/// carry rates d0 (lambda - n^2 pi^2); inverse kernels (eta, l) carry -d0 n^2 pi^2.
enum class Family { Forward, Inverse };

double mode_rate(Family family, const KernelConfig& cfg, int n);

// Closed-form Bessel kernels; domain 0 <= y <= x <= 1, std::domain_error otherwise.
double eval_p(double x, double y, const KernelConfig& cfg);
double eval_q(double x, double y, const KernelConfig& cfg);

FourierCoeffs compute_p1n(const KernelConfig& cfg);
/// Same quadrature applied to q(1,.). The inverse transform evaluated at
/// x = 0 reads u(1) = w(1) + int eta(0,y) w(y) dy, so eta(0,.) must be q(1,.).
FourierCoeffs compute_q1n(const KernelConfig& cfg);

/// max |q - p - int_y^x p(x,s) q(s,y) ds| over a grid_points^2 triangular
/// grid, inner integral by the composite trapezoid on inner_nodes nodes.
double reciprocity_residual(const KernelConfig& cfg, int grid_points = 21, int inner_nodes = 401);

// Truncated Fourier-series kernels. gamma and kappa take the p(1,.)
// coefficients, eta, eta_x, ell and l the q(1,.) coefficients. Each sum stops early once five
// consecutive terms have |n pi p1n| e^{rate x} below 1e-12.
double eval_gamma(double x, double y, const FourierCoeffs& coeffs, const KernelConfig& cfg);
double eval_eta(double x, double y, const FourierCoeffs& coeffs, const KernelConfig& cfg);
double eval_eta_x(double x, double y, const FourierCoeffs& coeffs, const KernelConfig& cfg);

/// k(x, y) = kappa(x - y). Note kappa(s) ~ -(lambda/2)/sqrt(pi d0 s) as
/// s -> 0, so kappa(0) is the N-term partial sum of a divergent series.
double eval_kappa(double s, const FourierCoeffs& coeffs, const KernelConfig& cfg);
/// Same as eval_kappa for the inverse family.
double eval_ell(double s, const FourierCoeffs& coeffs, const KernelConfig& cfg);
/// l(x, y) for 0 <= y <= x <= 1.
double eval_l(double x, double y, const FourierCoeffs& coeffs, const KernelConfig& cfg);

/// Product-integration moments of a diagonal kernel K(s) (kappa or l) over
/// consecutive intervals [s_m, s_m + w_m] covering [0, span]:
///   left[m]  = \int K(s_m + sigma) (1 - sigma/w_m) dsigma
///   right[m] = \int K(s_m + sigma) (sigma/w_m) dsigma
/// Each exponential mode is integrated exactly; modes n > N are added with
/// the asymptotic coefficient so the integrable singularity at s = 0 is
/// captured. All intervals have width h except possibly a shorter last one.
struct HatMoments {
    double h = 0.0;
    std::vector<double> widths;
    std::vector<double> left;
    std::vector<double> right;
    std::vector<double> second;  // \int K(s_m + sigma) (sigma/w_m)^2 dsigma

    std::size_t intervals() const noexcept { return left.size(); }
};

HatMoments diagonal_moments(Family family, const FourierCoeffs& coeffs, const KernelConfig& cfg,
                            double h, double span);

/// \int_0^{x_i} K(x_i - y) f(y) dy for the piecewise-linear interpolant of
/// grid values f on a grid of spacing moments.h.
double volterra_convolve(const HatMoments& moments, std::span<const double> f, std::size_t i);

/// Same integral for the piecewise-quadratic interpolant (three nodes per
/// interval, the stencil shifted inward on the interval touching y = 0).
/// Needs full-width intervals up to x_i and, for i = 1, the node x_2.
double volterra_convolve_quadratic(const HatMoments& moments, std::span<const double> f, std::size_t i);

/// Everything the controller and diagnostics read from the kernels, sampled
/// once on the uniform grid x_i = i / M. Immutable after construction.
struct KernelTables {
    KernelConfig cfg;
    FourierCoeffs coeffs;          // p(1,.)
    FourierCoeffs inverse_coeffs;  // q(1,.)
    int M = 0;
    double dx = 0.0;
    std::vector<double> grid;

    std::vector<double> p_1;      // p(1, x_i)
    std::vector<double> gamma_1;  // gamma(1, x_i)
    std::vector<double> kappa;    // kappa(x_i)
    std::vector<double> eta_row;  // eta(1, x_i)
    std::vector<double> l_band;   // l(x_i, 0)
    double k_diag = 0.0;          // kappa(0)

    // Transform operators.
    std::vector<double> p_tri;  // p(x_i, x_j), j <= i, packed row-major
    std::vector<double> q_tri;
    HatMoments kappa_moments;   // on spacing dx
    HatMoments l_moments;
    std::vector<double> sine_hat;     // [n-1][j] = \int_0^1 sin(n pi y) phi_j(y) dy
    std::vector<double> sine_grid;    // [n-1][j] = sin(n pi x_j)
    std::vector<double> forward_exp;  // [i][n-1] = e^{d0(lambda - n^2 pi^2) x_i}
    std::vector<double> inverse_exp;  // [i][n-1] = e^{-d0 n^2 pi^2 x_i}

    // sum_{n>N} e^{rate_n x_i} / n^2 per family, closed-form remainder at x = 0.
    std::vector<double> forward_tail;
    std::vector<double> inverse_tail;
    // sum_{n>N} rate_n e^{rate_n x_i} / n^2 for the inverse family. With f_n
    // the sine coefficients of f, q1n f_n ~ -tail f(1) / (n pi)^2, so this
    // restores the part of the eta_x sum that truncation drops.
    std::vector<double> inverse_tail_x;

    std::size_t nodes() const noexcept { return grid.size(); }
    double p_at(std::size_t i, std::size_t j) const { return p_tri[i * (i + 1) / 2 + j]; }
    double q_at(std::size_t i, std::size_t j) const { return q_tri[i * (i + 1) / 2 + j]; }
};

KernelTables build_tables(const KernelConfig& cfg, int grid_size);

/// \int_0^1 K(x_i, y) f(y) dy on every grid row, K = gamma (Forward) or eta
/// (Inverse). Exact sine coefficients of the piecewise-linear interpolant of
/// f - h^2/12 f'', the truncated modal sum, and the n > N tail for f(1) != 0.
std::vector<double> fredholm_rows(const KernelTables& t, Family family, std::span<const double> f);

/// Weights w_j with fredholm_rows(t, family, f)[i] = sum_j w_j f_j.
std::vector<double> fredholm_row_weights(const KernelTables& t, Family family, std::size_t i);

}  // namespace sdelay::kernels
