#include "sdelay/controller.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sdelay/errors.hpp"

namespace sdelay::controller {

void ControllerContext::check(const kernels::KernelConfig& active) const {
    if (active.lambda != cfg.lambda) throw ConfigError("controller tables built for another lambda", "plant.lambda");
    if (active.d0 != cfg.d0) throw ConfigError("controller tables built for another d0", "delay.d0");
    if (active.n_terms != cfg.n_terms) {
        throw ConfigError("controller tables built for another truncation", "kernel.n_terms");
    }
}

ControllerContext make_context(const kernels::KernelTables& tables, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("make_context: dt must be > 0");
    ControllerContext ctx;
    ctx.cfg = tables.cfg;
    ctx.dx = tables.dx;
    ctx.dt = dt;
    ctx.spatial_weights = kernels::fredholm_row_weights(tables, kernels::Family::Forward, tables.nodes() - 1);

    // s = (t - tau) / d0 in [0, 1]; node m sits at s = m h.
    const double d0 = tables.cfg.d0;
    const auto mom = kernels::diagonal_moments(kernels::Family::Forward, tables.coeffs, tables.cfg,
                                               dt / d0, 1.0);
    const std::size_t n = mom.intervals();
    ctx.weights.assign(n + 1, 0.0);
    ctx.lags.assign(n + 1, 0.0);
    double s = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        ctx.weights[m] += d0 * mom.left[m];
        ctx.weights[m + 1] += d0 * mom.right[m];
        ctx.lags[m] = d0 * s;
        s += mom.widths[m];
    }
    ctx.lags[n] = d0;

    ctx.implicit_factor = 1.0 - ctx.weights[0];
    if (std::abs(ctx.implicit_factor) < 1e-8) {
        throw NumericalError("make_context: degenerate implicit factor 1 - W0 = " +
                             std::to_string(ctx.implicit_factor));
    }
    return ctx;
}

double spatial_term(const ControllerContext& ctx, const plant::PlantProfile& u) {
    const auto& w = ctx.spatial_weights;
    if (u.values.size() != w.size()) throw std::invalid_argument("spatial_term: grid mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * u.values[i];
    return acc;
}

double compute_control(const ControllerContext& ctx, const plant::PlantProfile& u,
                       const actuator::ControlHistory& history, double t) {
    if (std::abs(history.dt() - ctx.dt) > 1e-12 * ctx.dt) {
        throw std::invalid_argument("compute_control: history sampled at another dt");
    }
    if (std::abs(history.current_time() - (t - ctx.dt)) > 1e-6 * ctx.dt) {
        throw std::invalid_argument("compute_control: history must end at t - dt");
    }
    double known = spatial_term(ctx, u);
    for (std::size_t m = 1; m < ctx.weights.size(); ++m) {
        known += ctx.weights[m] * history.sample(t - ctx.lags[m]);
    }
    const double value = known / ctx.implicit_factor;
    if (!std::isfinite(value)) throw NumericalError("compute_control: non-finite control");
    return value;
}

}  // namespace sdelay::controller
