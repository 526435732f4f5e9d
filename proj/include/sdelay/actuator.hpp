#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace sdelay::actuator {

enum class Mode { Pde, ExactHistory };

/// Uniformly sampled control signal U(t_k), t_k = k dt, covering at least
/// [t - span - dt, t]. Times before the first stored sample fall back to the
/// configured pre-initial history (zero unless supplied).
class ControlHistory {
public:
    using InitialFn = std::function<double(double)>;

    /// Primes samples on [-span, 0] from `initial`; the current time is 0.
    ControlHistory(double dt, double span, InitialFn initial = {});

    double dt() const noexcept { return dt_; }
    double span() const noexcept { return span_; }
    double current_time() const noexcept { return static_cast<double>(last_index_) * dt_; }
    double latest() const noexcept { return samples_.back(); }
    std::size_t size() const noexcept { return samples_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    double earliest_time() const noexcept { return static_cast<double>(first_index_) * dt_; }

    /// Appends U(t); t must equal current_time() + dt.
    void push(double t, double value);

    /// Linear interpolation between bracketing samples.
    double sample(double theta) const;

    /// Overwrites the sample at the current time.
    void set_latest(double value) { samples_.back() = value; }

private:
    double dt_;
    double span_;
    InitialFn initial_;
    std::deque<double> samples_;
    long long first_index_ = 0;
    long long last_index_ = 0;
    std::size_t capacity_ = 0;
    bool evicted_ = false;
};

/// Free-function face of ControlHistory::push / sample.
void push_control(ControlHistory& history, double t, double u_val);
double sample_control(const ControlHistory& history, double theta);

/// vhat on the grid and one vtilde_j profile per delay state.
struct ActuatorProfiles {
    std::vector<double> vhat;
    std::vector<std::vector<double>> vtilde;
    Mode mode = Mode::Pde;
};

/// vhat(x_i, t) = U(t + d0 (x_i - 1)).
std::vector<double> vhat_exact(const ControlHistory& history, double t, std::size_t intervals,
                               double d0);
/// vtilde_j(x_i, t) = U(t + D_j (x_i - 1)) - vhat(x_i, t).
std::vector<std::vector<double>> vtilde_exact(const ControlHistory& history, double t,
                                              std::size_t intervals, double d0,
                                              std::span<const double> states);

/// Central differences, second-order one-sided at both ends.
std::vector<double> derivative(std::span<const double> f, double h);

/// 4-point Lagrange interpolation at position `pos` in index units; returns
/// the node value exactly when pos is (numerically) an integer.
double interpolate_cubic(std::span<const double> f, double pos);

/// Semi-Lagrangian integration of
///   d0 vhat_t = vhat_x,                      vhat(1) = U
///   D_j vtilde_t = vtilde_x - sigma_j vhat_x,  vtilde_j(1) = 0
/// along characteristics, with cubic interpolation at the feet and the
/// source integrated by the trapezoid rule in time. The inflow U is linear
/// in time between the current vhat(1) and u_next.
class TransportStepper {
public:
    TransportStepper(std::size_t intervals, double dt, double d0, std::vector<double> states);

    double dt() const noexcept { return dt_; }

    void step(ActuatorProfiles& profiles, double u_next) const;

    /// vhat(0, t + dt) + vtilde_j(0, t + dt) after a step. Independent of the
    /// inflow value because every state delay exceeds dt; bit-identical to the
    /// value step() produces.
    double outflow_after_step(const ActuatorProfiles& profiles, std::size_t j) const;

private:
    std::vector<double> advance_vhat(const std::vector<double>& vhat, double u_next) const;
    double advance_vtilde_node(std::span<const double> vtilde, std::span<const double> dv_old,
                               std::span<const double> dv_new, std::size_t j, std::size_t i) const;

    std::size_t m_;
    double dt_;
    double d0_;
    double h_;
    std::vector<double> states_;
    std::vector<double> source_gain_;  // sigma_j / D_j
};

ActuatorProfiles step_transport_pde(const ActuatorProfiles& profiles, double u_next, double dt,
                                    double d0, std::span<const double> states);

}  // namespace sdelay::actuator
