#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sdelay/simulator.hpp"

namespace sdelay::mc {

struct DecayFit {
    double alpha = 0.0;
    double beta = 0.0;
};

/// OLS on (t, log mean_v) over times in [lo, hi]; beta = -slope and
/// alpha = exp(intercept) / v0. Throws NumericalError on non-positive or
/// non-finite values inside the window, or fewer than two points.
DecayFit fit_decay(std::span<const double> times, std::span<const double> mean_v, double lo,
                   double hi, double v0);

struct EnsembleResult {
    std::vector<double> times;
    std::vector<double> mean_v;
    std::vector<double> ci_halfwidth;  // 1.96 sd / sqrt(n); NaN for n = 1
    std::size_t n_realizations = 0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    bool fit_ok = false;
    double fitted_beta = 0.0;
    double fitted_alpha = 0.0;
    std::size_t diverged_count = 0;
    std::vector<double> initial_v;  // per realization, in seed order
    std::vector<double> final_v;    // V(T), +inf for a tripped guard
};

struct EnsembleOptions {
    std::size_t n = 50;
    std::uint64_t master_seed = 0;
    unsigned jobs = 1;
    double window_lo = -1.0;  // negative selects T/3
    double window_hi = -1.0;  // negative selects T
};

/// Realization i uses seed derive_seed(master_seed, i). Diverged
/// realizations contribute +inf from the guard time on, so the mean
/// becomes infinite rather than silently dropping them. The reduction
/// sorts per-time values before summing; the result does not depend on
/// jobs or scheduling.
EnsembleResult run_ensemble(const sim::SimConfig& cfg, const EnsembleOptions& opts);

}  // namespace sdelay::mc
