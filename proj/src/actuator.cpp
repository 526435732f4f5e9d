#include "sdelay/actuator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sdelay/errors.hpp"

namespace sdelay::actuator {

namespace {
constexpr double kIndexSlack = 1e-9;
}

ControlHistory::ControlHistory(double dt, double span, InitialFn initial)
    : dt_(dt), span_(span), initial_(std::move(initial)) {
    if (!(dt > 0.0)) throw std::invalid_argument("ControlHistory: dt must be > 0");
    if (!(span >= 0.0)) throw std::invalid_argument("ControlHistory: span must be >= 0");
    const auto steps = static_cast<long long>(std::ceil(span / dt - kIndexSlack));
    capacity_ = static_cast<std::size_t>(steps) + 2;
    first_index_ = -steps;
    last_index_ = 0;
    for (long long k = first_index_; k <= 0; ++k) {
        const double theta = static_cast<double>(k) * dt_;
        samples_.push_back(initial_ ? initial_(theta) : 0.0);
    }
}

void ControlHistory::push(double t, double value) {
    const double expected = static_cast<double>(last_index_ + 1) * dt_;
    if (std::abs(t - expected) > 1e-6 * dt_) {
        throw std::invalid_argument("ControlHistory::push: expected t = " + std::to_string(expected) +
                                    ", got " + std::to_string(t));
    }
    if (!std::isfinite(value)) throw NumericalError("ControlHistory::push: non-finite control");
    samples_.push_back(value);
    ++last_index_;
    while (samples_.size() > capacity_) {
        samples_.pop_front();
        ++first_index_;
        evicted_ = true;
    }
}

double ControlHistory::sample(double theta) const {
    const double pos = theta / dt_;
    if (pos > static_cast<double>(last_index_) + kIndexSlack) {
        throw std::out_of_range("ControlHistory::sample: theta beyond current time");
    }
    if (pos < static_cast<double>(first_index_) - kIndexSlack) {
        if (evicted_) throw std::out_of_range("ControlHistory::sample: history no longer covers theta");
        return initial_ ? initial_(theta) : 0.0;
    }
    auto k = static_cast<long long>(std::floor(pos + kIndexSlack));
    const double frac = pos - static_cast<double>(k);
    const auto offset = static_cast<std::size_t>(k - first_index_);
    if (frac <= kIndexSlack || k >= last_index_) return samples_[offset];
    return samples_[offset] + frac * (samples_[offset + 1] - samples_[offset]);
}

void push_control(ControlHistory& history, double t, double u_val) { history.push(t, u_val); }

double sample_control(const ControlHistory& history, double theta) { return history.sample(theta); }

std::vector<double> vhat_exact(const ControlHistory& history, double t, std::size_t intervals,
                               double d0) {
    std::vector<double> out(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(intervals);
        out[i] = i == intervals ? history.sample(t) : history.sample(t + d0 * (x - 1.0));
    }
    return out;
}

std::vector<std::vector<double>> vtilde_exact(const ControlHistory& history, double t,
                                              std::size_t intervals, double d0,
                                              std::span<const double> states) {
    const auto vhat = vhat_exact(history, t, intervals, d0);
    std::vector<std::vector<double>> out;
    out.reserve(states.size());
    for (double dj : states) {
        std::vector<double> v(intervals + 1);
        for (std::size_t i = 0; i < intervals; ++i) {
            const double x = static_cast<double>(i) / static_cast<double>(intervals);
            v[i] = history.sample(t + dj * (x - 1.0)) - vhat[i];
        }
        v[intervals] = 0.0;
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<double> derivative(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    if (n < 3) throw std::invalid_argument("derivative: need at least 3 nodes");
    std::vector<double> d(n);
    const double inv = 1.0 / (2.0 * h);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) * inv;
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv;
    return d;
}

double interpolate_cubic(std::span<const double> f, double pos) {
    const auto last = static_cast<long long>(f.size()) - 1;
    auto k = static_cast<long long>(std::floor(pos + kIndexSlack));
    const double frac = pos - static_cast<double>(k);
    if (k >= last) return f[static_cast<std::size_t>(last)];
    if (k < 0) return f[0];
    if (std::abs(frac) <= kIndexSlack) return f[static_cast<std::size_t>(k)];

    // Stencil k-1..k+2, shifted inward at the ends.
    long long start = std::clamp(k - 1, 0LL, last - 3);
    const double s = pos - static_cast<double>(start);
    double acc = 0.0;
    for (int a = 0; a < 4; ++a) {
        double w = 1.0;
        for (int b = 0; b < 4; ++b) {
            if (b != a) w *= (s - b) / static_cast<double>(a - b);
        }
        acc += w * f[static_cast<std::size_t>(start + a)];
    }
    return acc;
}

TransportStepper::TransportStepper(std::size_t intervals, double dt, double d0,
                                   std::vector<double> states)
    : m_(intervals), dt_(dt), d0_(d0), h_(1.0 / static_cast<double>(intervals)),
      states_(std::move(states)) {
    if (intervals < 3) throw std::invalid_argument("TransportStepper: need at least 3 intervals");
    if (!(dt > 0.0) || !(d0 > 0.0)) throw std::invalid_argument("TransportStepper: dt, d0 > 0");
    for (double dj : states_) {
        if (!(dj > dt)) throw std::invalid_argument("TransportStepper: every delay must exceed dt");
        source_gain_.push_back(((dj - d0) / d0) / dj);
    }
    if (!(d0 > dt)) throw std::invalid_argument("TransportStepper: d0 must exceed dt");
}

std::vector<double> TransportStepper::advance_vhat(const std::vector<double>& vhat,
                                                   double u_next) const {
    const double u_now = vhat[m_];
    const double shift = dt_ / (d0_ * h_);  // characteristic displacement in cells
    std::vector<double> out(m_ + 1);
    for (std::size_t i = 0; i < m_; ++i) {
        const double pos = static_cast<double>(i) + shift;
        if (pos <= static_cast<double>(m_) + kIndexSlack) {
            out[i] = interpolate_cubic(vhat, pos);
        } else {
            // Entered through x = 1 at time t + dt - d0 (1 - x_i).
            const double frac = 1.0 - d0_ * (1.0 - static_cast<double>(i) * h_) / dt_;
            out[i] = u_now + frac * (u_next - u_now);
        }
    }
    out[m_] = u_next;
    return out;
}

double TransportStepper::advance_vtilde_node(std::span<const double> vtilde,
                                             std::span<const double> dv_old,
                                             std::span<const double> dv_new, std::size_t j,
                                             std::size_t i) const {
    if (i == m_) return 0.0;
    const double dj = states_[j];
    const double gain = source_gain_[j];
    const double pos = static_cast<double>(i) + dt_ / (dj * h_);
    if (pos <= static_cast<double>(m_) + kIndexSlack) {
        const double source = 0.5 * (interpolate_cubic(dv_old, pos) + dv_new[i]);
        return interpolate_cubic(vtilde, pos) - gain * dt_ * source;
    }
    const double travel = dj * (1.0 - static_cast<double>(i) * h_);
    const double frac = 1.0 - travel / dt_;
    const double dv_entry = dv_old[m_] + frac * (dv_new[m_] - dv_old[m_]);
    return -gain * travel * 0.5 * (dv_entry + dv_new[i]);
}

void TransportStepper::step(ActuatorProfiles& profiles, double u_next) const {
    if (profiles.vhat.size() != m_ + 1 || profiles.vtilde.size() != states_.size()) {
        throw std::invalid_argument("TransportStepper::step: profile shape mismatch");
    }
    if (!std::isfinite(u_next)) throw NumericalError("TransportStepper::step: non-finite input");
    const auto dv_old = derivative(profiles.vhat, h_);
    auto vhat_new = advance_vhat(profiles.vhat, u_next);
    const auto dv_new = derivative(vhat_new, h_);
    for (std::size_t j = 0; j < states_.size(); ++j) {
        const auto& old = profiles.vtilde[j];
        std::vector<double> next(m_ + 1);
        for (std::size_t i = 0; i <= m_; ++i) next[i] = advance_vtilde_node(old, dv_old, dv_new, j, i);
        profiles.vtilde[j] = std::move(next);
    }
    profiles.vhat = std::move(vhat_new);
}

double TransportStepper::outflow_after_step(const ActuatorProfiles& profiles, std::size_t j) const {
    const auto dv_old = derivative(profiles.vhat, h_);
    const auto vhat_new = advance_vhat(profiles.vhat, profiles.vhat[m_]);
    const auto dv_new = derivative(vhat_new, h_);
    return vhat_new[0] + advance_vtilde_node(profiles.vtilde.at(j), dv_old, dv_new, j, 0);
}

ActuatorProfiles step_transport_pde(const ActuatorProfiles& profiles, double u_next, double dt,
                                    double d0, std::span<const double> states) {
    TransportStepper stepper(profiles.vhat.size() - 1, dt, d0,
                             std::vector<double>(states.begin(), states.end()));
    ActuatorProfiles next = profiles;
    stepper.step(next, u_next);
    return next;
}

}  // namespace sdelay::actuator
