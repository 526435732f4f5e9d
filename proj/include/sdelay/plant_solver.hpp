#pragma once

#include <cstddef>
#include <vector>

namespace sdelay::plant {

/// u(x_i, t) on the uniform grid x_i = i dx, i = 0..M.
struct PlantProfile {
    std::vector<double> values;
    double dx = 0.0;
    double t = 0.0;

    std::size_t intervals() const noexcept { return values.empty() ? 0 : values.size() - 1; }
};

/// Crank-Nicolson for u_t = u_xx + lambda u with u(0) = 0 and a time-varying
/// Dirichlet datum at x = 1. The tridiagonal factorization is built once for
/// a fixed (M, lambda, dt) and reused; stepping is const and thread-safe.
class CrankNicolson {
public:
    CrankNicolson(std::size_t intervals, double lambda, double dt);

    std::size_t intervals() const noexcept { return m_; }
    double lambda() const noexcept { return lambda_; }
    double dt() const noexcept { return dt_; }

    /// Advances one step. The right boundary enters the right-hand side at
    /// bc_now and the implicit side at bc_next; afterwards values[0] == 0
    /// and values[M] == bc_next exactly.
    void step(PlantProfile& profile, double bc_now, double bc_next) const;

private:
    std::size_t m_;
    double lambda_;
    double dt_;
    double r_ = 0.0;
    double diag_rhs_ = 0.0;
    std::vector<double> c_prime_;  // modified super-diagonal
    std::vector<double> inv_den_;  // reciprocal pivots
};

/// One-off step; builds the factorization on every call.
PlantProfile step_cn(const PlantProfile& profile, double right_bc_now, double right_bc_next,
                     double lambda, double dt);

}  // namespace sdelay::plant
