#include "sdelay/plant_solver.hpp"

#include <cmath>
#include <stdexcept>

#include "sdelay/errors.hpp"

namespace sdelay::plant {

CrankNicolson::CrankNicolson(std::size_t intervals, double lambda, double dt)
    : m_(intervals), lambda_(lambda), dt_(dt) {
    if (intervals < 2) throw std::invalid_argument("CrankNicolson: need at least 2 intervals");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("CrankNicolson: dt must be > 0");
    if (!std::isfinite(lambda)) throw std::invalid_argument("CrankNicolson: lambda must be finite");

    const double dx = 1.0 / static_cast<double>(intervals);
    r_ = dt / (2.0 * dx * dx);
    diag_rhs_ = 1.0 - 2.0 * r_ + 0.5 * dt * lambda;
    const double diag = 1.0 + 2.0 * r_ - 0.5 * dt * lambda;
    const double off = -r_;

    // Thomas forward sweep on the constant (I - dt/2 A) over interior nodes.
    const std::size_t n = intervals - 1;
    c_prime_.resize(n);
    inv_den_.resize(n);
    double prev_c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double den = diag - off * prev_c;
        if (std::abs(den) < 1e-300) throw NumericalError("CrankNicolson: singular system");
        inv_den_[i] = 1.0 / den;
        c_prime_[i] = off * inv_den_[i];
        prev_c = c_prime_[i];
    }
}

void CrankNicolson::step(PlantProfile& profile, double bc_now, double bc_next) const {
    if (profile.values.size() != m_ + 1) throw std::invalid_argument("CrankNicolson: grid mismatch");
    if (!std::isfinite(bc_now) || !std::isfinite(bc_next)) {
        throw NumericalError("CrankNicolson: non-finite boundary datum");
    }
    auto& u = profile.values;
    const std::size_t n = m_ - 1;
    std::vector<double> d(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = k + 1;
        const double left = (i == 1) ? 0.0 : u[i - 1];
        const double right = (i == m_ - 1) ? bc_now : u[i + 1];
        d[k] = diag_rhs_ * u[i] + r_ * (left + right);
        if (!std::isfinite(d[k])) throw NumericalError("CrankNicolson: non-finite state");
    }
    d[n - 1] += r_ * bc_next;

    const double off = -r_;
    d[0] *= inv_den_[0];
    for (std::size_t k = 1; k < n; ++k) d[k] = (d[k] - off * d[k - 1]) * inv_den_[k];
    for (std::size_t k = n - 1; k-- > 0;) d[k] -= c_prime_[k] * d[k + 1];

    u[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) u[k + 1] = d[k];
    u[m_] = bc_next;
    profile.t += dt_;
}

PlantProfile step_cn(const PlantProfile& profile, double right_bc_now, double right_bc_next,
                     double lambda, double dt) {
    CrankNicolson stepper(profile.intervals(), lambda, dt);
    PlantProfile next = profile;
    stepper.step(next, right_bc_now, right_bc_next);
    return next;
}

}  // namespace sdelay::plant
