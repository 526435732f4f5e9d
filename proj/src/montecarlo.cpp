#include "sdelay/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "sdelay/errors.hpp"
#include "sdelay/random.hpp"

namespace sdelay::mc {

DecayFit fit_decay(std::span<const double> times, std::span<const double> mean_v, double lo,
                   double hi, double v0) {
    if (times.size() != mean_v.size()) throw std::invalid_argument("fit_decay: size mismatch");
    if (!(v0 > 0.0) || !std::isfinite(v0)) throw NumericalError("fit_decay: V(0) must be positive");
    const double slack = 1e-9 * std::max(1.0, std::abs(hi));
    double st = 0.0, sy = 0.0;
    std::size_t n = 0;
    std::vector<double> ts, ys;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < lo - slack || times[k] > hi + slack) continue;
        const double v = mean_v[k];
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw NumericalError("fit_decay: non-positive or non-finite mean V at t = " +
                                 std::to_string(times[k]) + " (divergent ensemble)");
        }
        ts.push_back(times[k]);
        ys.push_back(std::log(v));
        st += times[k];
        sy += ys.back();
        ++n;
    }
    if (n < 2) throw NumericalError("fit_decay: fewer than two points in the window");
    const double tm = st / static_cast<double>(n);
    const double ym = sy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (ts[k] - tm) * (ts[k] - tm);
        sxy += (ts[k] - tm) * (ys[k] - ym);
    }
    if (!(sxx > 0.0)) throw NumericalError("fit_decay: degenerate window");
    const double slope = sxy / sxx;
    const double intercept = ym - slope * tm;
    return {std::exp(intercept) / v0, -slope};
}

EnsembleResult run_ensemble(const sim::SimConfig& cfg, const EnsembleOptions& opts) {
    if (opts.n < 1) throw std::invalid_argument("run_ensemble: n must be >= 1");
    const sim::ClosedLoop loop(cfg);
    const std::size_t steps = cfg.steps();
    const std::size_t stride = cfg.stride;
    const double dt = cfg.dt;

    EnsembleResult out;
    for (std::size_t k = 0; k <= steps; k += stride) out.times.push_back(static_cast<double>(k) * dt);
    if (steps % stride != 0) out.times.push_back(static_cast<double>(steps) * dt);
    const std::size_t nt = out.times.size();
    const double inf = std::numeric_limits<double>::infinity();

    // values[i * nt + k]: V of realization i at times[k].
    std::vector<double> values(opts.n * nt, inf);
    std::vector<char> diverged(opts.n, 0);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= opts.n) return;
            try {
                const auto rec = loop.run(derive_seed(opts.master_seed, i));
                diverged[i] = rec.diverged ? 1 : 0;
                std::size_t valid = rec.snapshots.size();
                if (rec.diverged) {
                    valid = 0;
                    while (valid < rec.snapshots.size() &&
                           rec.snapshots[valid].t < rec.diverged_at - 0.5 * dt) {
                        ++valid;
                    }
                }
                for (std::size_t k = 0; k < std::min(valid, nt); ++k) {
                    values[i * nt + k] = rec.snapshots[k].v_total;
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = opts.n;
            }
        }
    };

    const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(opts.n)));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    const std::size_t n = opts.n;
    out.n_realizations = n;
    out.mean_v.resize(nt);
    out.ci_halfwidth.resize(nt);
    std::vector<double> col(n);
    for (std::size_t k = 0; k < nt; ++k) {
        for (std::size_t i = 0; i < n; ++i) col[i] = values[i * nt + k];
        std::sort(col.begin(), col.end());
        if (!std::isfinite(col.back())) {
            out.mean_v[k] = inf;
            out.ci_halfwidth[k] = n > 1 ? inf : std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        if (col.front() == col.back()) {
            out.mean_v[k] = col.front();
            out.ci_halfwidth[k] = n > 1 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        double sum = 0.0;
        for (double v : col) sum += v;
        const double mean = sum / static_cast<double>(n);
        out.mean_v[k] = mean;
        if (n == 1) {
            out.ci_halfwidth[k] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        double ss = 0.0;
        for (double v : col) ss += (v - mean) * (v - mean);
        out.ci_halfwidth[k] = 1.96 * std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
    }

    out.initial_v.resize(n);
    out.final_v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.initial_v[i] = values[i * nt];
        out.final_v[i] = values[i * nt + nt - 1];
        out.diverged_count += diverged[i] ? 1 : 0;
    }

    out.window_lo = opts.window_lo >= 0.0 ? opts.window_lo : cfg.horizon / 3.0;
    out.window_hi = opts.window_hi >= 0.0 ? opts.window_hi : cfg.horizon;
    try {
        const auto fit = fit_decay(out.times, out.mean_v, out.window_lo, out.window_hi, out.mean_v[0]);
        out.fit_ok = true;
        out.fitted_alpha = fit.alpha;
        out.fitted_beta = fit.beta;
    } catch (const NumericalError&) {
        out.fit_ok = false;
        out.fitted_alpha = std::numeric_limits<double>::quiet_NaN();
        out.fitted_beta = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

}  // namespace sdelay::mc
