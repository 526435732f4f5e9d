#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sdelay/kernels.hpp"

namespace sdelay::diagnostics {

/// Squared norms on a uniform grid (composite trapezoid).
double l2_sq(std::span<const double> f, double dx);
double h1_sq(std::span<const double> f, double dx);
double l2_sq(const std::vector<std::vector<double>>& f, double dx);
double h1_sq(const std::vector<std::vector<double>>& f, double dx);

/// V = |u|^2_{L2} + |vhat|^2_{H1} + sum_j |vtilde_j|^2_{H1}.
double lyapunov_v(std::span<const double> u, std::span<const double> vhat,
                  const std::vector<std::vector<double>>& vtilde, double dx);

struct NormSnapshot {
    double t = 0.0;
    double u_l2sq = 0.0;
    double vhat_h1sq = 0.0;
    double vtilde_h1sq = 0.0;
    double v_total = 0.0;
    double u_ctrl = 0.0;
    std::size_t delay_index = 0;  // 0-based
};

NormSnapshot make_snapshot(double t, std::span<const double> u, std::span<const double> vhat,
                           const std::vector<std::vector<double>>& vtilde, double dx,
                           double u_ctrl, std::size_t delay_index);

struct TargetSnapshot {
    std::vector<double> w;
    std::vector<double> z;
    std::vector<double> h;
};

struct PlantActuatorPair {
    std::vector<double> u;
    std::vector<double> vhat;
};

/// w = u - int_0^x p u,  z = vhat - int_0^1 gamma u - d0 int_0^x k vhat,
/// h = z_x + int_0^1 eta_x w + d0 (l(x,0) z(0) + int_0^x l(x - y) z_y dy).
/// The last form of h is the integrated-by-parts equivalent of the
/// l(x,x) z + int l_x z expression; it only touches integrable pieces of l.
TargetSnapshot forward_transform(std::span<const double> u, std::span<const double> vhat,
                                 const kernels::KernelTables& tables);

/// u = w + int_0^x q w,  vhat = z + int_0^1 eta w + d0 int_0^x l z.
PlantActuatorPair inverse_transform(std::span<const double> w, std::span<const double> z,
                                    const kernels::KernelTables& tables);

}  // namespace sdelay::diagnostics
