#pragma once

#include <cstddef>
#include <vector>

#include "sdelay/actuator.hpp"
#include "sdelay/kernels.hpp"
#include "sdelay/plant_solver.hpp"

namespace sdelay::controller {

/// Discretized delay-compensating law
///   U(t) = \int_0^1 gamma(1,y) u(y,t) dy + d0 \int_0^1 kappa(s) U(t - d0 s) ds.
/// The spatial integral uses the same product rule as the transform's z
/// row at x = 1 (kernels::fredholm_row_weights). The
/// delay integral is product integration on history nodes t - m dt (the
/// earliest node is t - d0, interpolated when d0/dt is not an integer);
/// the weight of the unknown U(t) is finite even though kappa(0) is not.
struct ControllerContext {
    kernels::KernelConfig cfg;
    double dx = 0.0;
    double dt = 0.0;
    std::vector<double> spatial_weights;  // row x = 1 of kernels::fredholm_row_weights
    std::vector<double> weights;  // weights[m] multiplies U(t - lags[m])
    std::vector<double> lags;     // lags[0] = 0, ..., lags.back() = d0
    double implicit_factor = 1.0;  // 1 - weights[0]

    /// Throws ConfigError when lambda, d0 or N differ from cfg.
    void check(const kernels::KernelConfig& active) const;
};

ControllerContext make_context(const kernels::KernelTables& tables, double dt);

/// \int_0^1 gamma(1, y) u(y) dy, the x = 1 row of the transform's rule.
double spatial_term(const ControllerContext& ctx, const plant::PlantProfile& u);

/// U(t) given u(., t) and the control history through t - dt.
double compute_control(const ControllerContext& ctx, const plant::PlantProfile& u,
                       const actuator::ControlHistory& history, double t);

}  // namespace sdelay::controller
