#include "sdelay/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "sdelay/errors.hpp"

namespace sdelay::sim {

namespace {

std::vector<double> sample(const Profile& f, std::size_t m) {
    std::vector<double> out(m + 1, 0.0);
    if (!f) return out;
    for (std::size_t i = 0; i <= m; ++i) out[i] = f(static_cast<double>(i) / static_cast<double>(m));
    return out;
}

}  // namespace

std::size_t SimConfig::intervals() const {
    if (!(dx > 0.0)) throw ConfigError("must be > 0", "grid.dx");
    const double m = std::round(1.0 / dx);
    if (m < 10.0 || std::abs(m * dx - 1.0) > 1e-9) {
        throw ConfigError("1/dx must be an integer >= 10", "grid.dx");
    }
    return static_cast<std::size_t>(m);
}

std::size_t SimConfig::steps() const {
    if (!(dt > 0.0)) throw ConfigError("must be > 0", "grid.dt");
    if (!(horizon > 0.0)) throw ConfigError("must be > 0", "sim.horizon");
    const double n = std::round(horizon / dt);
    if (std::abs(n * dt - horizon) > 1e-9 * horizon) {
        throw ConfigError("horizon must be a multiple of grid.dt", "sim.horizon");
    }
    return static_cast<std::size_t>(n);
}

kernels::KernelConfig SimConfig::kernel_config() const {
    kernels::KernelConfig k;
    k.lambda = lambda;
    k.d0 = d0();
    k.n_terms = n_terms;
    k.quad_points = quad_points > 0 ? quad_points : kernels::KernelConfig::default_quad_points(n_terms);
    return k;
}

void SimConfig::validate() const {
    if (!std::isfinite(lambda)) throw ConfigError("must be finite", "plant.lambda");
    intervals();
    steps();
    if (stride < 1) throw ConfigError("must be >= 1", "sim.stride");
    if (initial_index >= model.size()) throw ConfigError("out of range", "delay.initial_index");
    if (!init.vtilde.empty() && init.vtilde.size() != model.size()) {
        throw ConfigError("needs one profile per delay state", "init.vtilde");
    }
    if (model.min_delay() <= dt || d0() <= dt) {
        throw ConfigError("every delay must exceed grid.dt", "delay.states");
    }
    if (controller) kernel_config().validate();
}

ClosedLoop::ClosedLoop(SimConfig cfg)
    : cfg_((cfg.validate(), std::move(cfg))),
      m_(cfg_.intervals()),
      steps_(cfg_.steps()),
      cn_(m_, cfg_.lambda, cfg_.dt) {
    if (cfg_.controller) {
        tables_ = std::make_shared<const kernels::KernelTables>(
            kernels::build_tables(cfg_.kernel_config(), static_cast<int>(m_)));
        ctx_ = std::make_shared<const controller::ControllerContext>(
            controller::make_context(*tables_, cfg_.dt));
    }
    if (cfg_.mode == actuator::Mode::Pde) stepper_.emplace(m_, cfg_.dt, cfg_.d0(), cfg_.model.states());
}

TrajectoryRecord ClosedLoop::run(std::uint64_t seed) const {
    return run(delay::sample_path(cfg_.model, cfg_.initial_index, cfg_.horizon, seed));
}

TrajectoryRecord ClosedLoop::run(const delay::DelayPath& path) const {
    if (path.jump_times.empty() || path.horizon < cfg_.horizon - 1e-12) {
        throw std::invalid_argument("run: delay path does not cover the horizon");
    }
    for (std::size_t idx : path.state_indices) {
        if (idx >= cfg_.model.size()) throw std::invalid_argument("run: path state outside the model");
    }

    const auto& model = cfg_.model;
    const double dt = cfg_.dt;
    const double dx = 1.0 / static_cast<double>(m_);
    const double d0 = cfg_.d0();
    const bool pde = cfg_.mode == actuator::Mode::Pde;

    TrajectoryRecord rec;
    rec.path = path;
    rec.config_hash = cfg_.config_hash;

    plant::PlantProfile u{sample(cfg_.init.u, m_), dx, 0.0};

    actuator::ControlHistory::InitialFn initial;
    if (pde) {
        // The transport state at t = 0 is itself a record of past inputs.
        const Profile vhat0 = cfg_.init.vhat;
        if (vhat0) {
            initial = [vhat0, d0](double theta) {
                return theta >= -d0 ? vhat0(1.0 + theta / d0) : vhat0(0.0);
            };
        }
    } else {
        initial = cfg_.init.history;
    }
    actuator::ControlHistory history(dt, std::max(model.max_delay(), d0), initial);

    actuator::ActuatorProfiles prof;
    prof.mode = cfg_.mode;
    if (pde) {
        prof.vhat = sample(cfg_.init.vhat, m_);
        prof.vtilde.resize(model.size());
        for (std::size_t j = 0; j < model.size(); ++j) {
            prof.vtilde[j] = cfg_.init.vtilde.empty() ? std::vector<double>(m_ + 1, 0.0)
                                                      : sample(cfg_.init.vtilde[j], m_);
        }
    }

    auto snapshot = [&](double t) {
        const std::size_t j = delay::index_at(path, t);
        const double ctrl = history.latest();
        if (pde) {
            rec.snapshots.push_back(
                diagnostics::make_snapshot(t, u.values, prof.vhat, prof.vtilde, dx, ctrl, j));
        } else {
            const auto vhat = actuator::vhat_exact(history, t, m_, d0);
            const auto vtilde = actuator::vtilde_exact(history, t, m_, d0, model.states());
            rec.snapshots.push_back(diagnostics::make_snapshot(t, u.values, vhat, vtilde, dx, ctrl, j));
        }
        if (cfg_.fields) rec.fields.push_back(u.values);
    };

    snapshot(0.0);
    for (std::size_t n = 0; n < steps_; ++n) {
        const double t_now = static_cast<double>(n) * dt;
        const double t_next = static_cast<double>(n + 1) * dt;
        try {
            const std::size_t j = delay::index_at(path, t_now);
            const double bc_next = pde ? stepper_->outflow_after_step(prof, j)
                                       : history.sample(t_next - model.states()[j]);
            cn_.step(u, u.values[m_], bc_next);
            const double ctrl = ctx_ ? controller::compute_control(*ctx_, u, history, t_next) : 0.0;
            history.push(t_next, ctrl);
            if (pde) stepper_->step(prof, ctrl);
        } catch (const NumericalError&) {
            rec.diverged = true;
            rec.diverged_at = t_next;
            break;
        }
        const double norm = std::sqrt(diagnostics::l2_sq(u.values, dx));
        const bool last = n + 1 == steps_;
        if (!(norm <= cfg_.divergence_threshold)) {
            rec.diverged = true;
            rec.diverged_at = t_next;
            snapshot(t_next);
            break;
        }
        if ((n + 1) % cfg_.stride == 0 || last) snapshot(t_next);
    }
    return rec;
}

TrajectoryRecord run_realization(const SimConfig& cfg, const delay::DelayPath& path) {
    return ClosedLoop(cfg).run(path);
}

TrajectoryRecord run_realization(const SimConfig& cfg, std::uint64_t seed) {
    return ClosedLoop(cfg).run(seed);
}

TrajectoryRecord replay(const SimConfig& cfg, const std::string& path_file) {
    std::ifstream in(path_file);
    if (!in) throw std::runtime_error("replay: cannot open " + path_file);
    const auto path = delay::read_path(in);
    if (path.horizon < cfg.horizon - 1e-12) {
        throw ConfigError("recorded path horizon " + std::to_string(path.horizon) +
                          " is shorter than sim.horizon", "sim.horizon");
    }
    return ClosedLoop(cfg).run(path);
}

}  // namespace sdelay::sim
