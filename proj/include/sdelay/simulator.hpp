#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sdelay/actuator.hpp"
#include "sdelay/controller.hpp"
#include "sdelay/delay_process.hpp"
#include "sdelay/diagnostics.hpp"
#include "sdelay/kernels.hpp"
#include "sdelay/plant_solver.hpp"

namespace sdelay::sim {

using Profile = std::function<double(double)>;

struct InitialData {
    Profile u;                    // u(x, 0)
    Profile vhat;                 // vhat(x, 0)
    std::vector<Profile> vtilde;  // one per state, or empty for zero
    Profile history;              // U(theta), theta <= 0, exact-history mode only
};

struct SimConfig {
    explicit SimConfig(delay::DelayModel m) : model(std::move(m)) {}

    double lambda = 11.0;
    delay::DelayModel model;
    std::size_t initial_index = 0;  // 0-based
    double dx = 0.01;
    double dt = 0.01;
    double horizon = 15.0;
    InitialData init;
    actuator::Mode mode = actuator::Mode::Pde;
    bool controller = true;
    std::size_t stride = 1;
    std::uint64_t seed = 0;
    bool fields = false;
    int n_terms = 200;
    int quad_points = 0;  // 0 selects the default for n_terms
    double divergence_threshold = 1e12;
    std::string config_hash;

    double d0() const noexcept { return model.d0(); }
    std::size_t intervals() const;
    std::size_t steps() const;
    kernels::KernelConfig kernel_config() const;
    /// Throws ConfigError on inconsistent values.
    void validate() const;
};

struct TrajectoryRecord {
    std::vector<diagnostics::NormSnapshot> snapshots;
    delay::DelayPath path;
    std::string config_hash;
    bool diverged = false;
    double diverged_at = 0.0;
    std::vector<std::vector<double>> fields;  // u at each snapshot when requested
};

/// Everything shared by realizations of one configuration: kernel tables,
/// controller weights and the stepping factorizations. Immutable, so one
/// instance can drive many realizations concurrently.
class ClosedLoop {
public:
    explicit ClosedLoop(SimConfig cfg);

    const SimConfig& config() const noexcept { return cfg_; }
    const kernels::KernelTables* tables() const noexcept { return tables_.get(); }
    const controller::ControllerContext* controller() const noexcept { return ctx_.get(); }

    TrajectoryRecord run(const delay::DelayPath& path) const;
    TrajectoryRecord run(std::uint64_t seed) const;

private:
    SimConfig cfg_;
    std::size_t m_;
    std::size_t steps_;
    std::shared_ptr<const kernels::KernelTables> tables_;
    std::shared_ptr<const controller::ControllerContext> ctx_;
    plant::CrankNicolson cn_;
    std::optional<actuator::TransportStepper> stepper_;
};

TrajectoryRecord run_realization(const SimConfig& cfg, const delay::DelayPath& path);
TrajectoryRecord run_realization(const SimConfig& cfg, std::uint64_t seed);

/// Reads a path written by delay::write_path and reruns it.
TrajectoryRecord replay(const SimConfig& cfg, const std::string& path_file);

}  // namespace sdelay::sim
