#include "sdelay/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>

#include "sdelay/actuator.hpp"
#include "sdelay/controller.hpp"
#include "sdelay/diagnostics.hpp"
#include "sdelay/kernels.hpp"
#include "sdelay/plant_solver.hpp"

namespace sdelay::invariants {

namespace {

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

void run(std::vector<CheckResult>& out, const std::string& name,
         const std::function<std::pair<bool, std::string>()>& check) {
    try {
        auto [ok, detail] = check();
        out.push_back({name, ok, detail});
    } catch (const std::exception& e) {
        out.push_back({name, false, std::string("threw: ") + e.what()});
    }
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

std::vector<CheckResult> run_suite(const sim::SimConfig& cfg) {
    std::vector<CheckResult> out;
    const auto& model = cfg.model;
    const std::size_t r = model.size();

    run(out, "generator conservative", [&] {
        const auto rep = delay::validate_generator(model.generator());
        return std::pair{rep.ok(), rep.ok() ? std::string("ok") : rep.describe()};
    });

    run(out, "transition rows sum to 1", [&] {
        double worst = 0.0;
        for (double t : {0.1, 1.0, 10.0}) {
            const auto p = delay::transition_matrix(model, t);
            for (std::size_t i = 0; i < r; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < r; ++j) s += p(i, j);
                worst = std::max(worst, std::abs(s - 1.0));
            }
        }
        return std::pair{worst <= 1e-10, "max |row sum - 1| = " + sci(worst)};
    });

    run(out, "Chapman-Kolmogorov", [&] {
        const auto lhs = delay::transition_matrix(model, 0.7);
        const auto rhs = delay::transition_matrix(model, 0.3) * delay::transition_matrix(model, 0.4);
        const double d = max_abs_diff(lhs.data(), rhs.data());
        return std::pair{d <= 1e-8, "max |P(0.7) - P(0.3)P(0.4)| = " + sci(d)};
    });

    run(out, "stationary law", [&] {
        const auto pi = delay::stationary_distribution(model);
        double worst = 0.0;
        for (std::size_t j = 0; j < r; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < r; ++i) s += pi[i] * model.generator()(i, j);
            worst = std::max(worst, std::abs(s));
        }
        return std::pair{worst <= 1e-10, "max |(pi Q)_j| = " + sci(worst)};
    });

    const std::size_t m = cfg.intervals();
    if (!cfg.controller) return out;

    const auto kcfg = cfg.kernel_config();
    run(out, "kernel reciprocity", [&] {
        const double res = kernels::reciprocity_residual(kcfg);
        return std::pair{res < 1e-5, "max residual = " + sci(res)};
    });

    const auto tables = kernels::build_tables(kcfg, static_cast<int>(m));

    run(out, "diagonal constancy", [&] {
        const double k0 = kernels::eval_kappa(0.0, tables.coeffs, kcfg);
        const double l0 = kernels::eval_ell(0.0, tables.inverse_coeffs, kcfg);
        bool same = k0 == tables.k_diag;
        for (int a = 0; a <= 10; ++a) {
            const double x = a / 10.0;
            same = same && kernels::eval_l(x, x, tables.inverse_coeffs, kcfg) == l0;
        }
        return std::pair{same, "k(x,x) = " + sci(k0) + ", l(x,x) = " + sci(l0)};
    });

    run(out, "tables finite", [&] {
        bool ok = true;
        for (const auto* v : {&tables.p_1, &tables.gamma_1, &tables.kappa, &tables.eta_row, &tables.l_band}) {
            ok = ok && std::all_of(v->begin(), v->end(), [](double d) { return std::isfinite(d); });
        }
        return std::pair{ok, ok ? std::string("ok") : std::string("non-finite entry")};
    });

    run(out, "transform roundtrip", [&] {
        std::vector<double> u(m + 1), v(m + 1);
        for (std::size_t i = 0; i <= m; ++i) {
            const double x = tables.grid[i];
            u[i] = std::sin(2.0 * std::numbers::pi * x);
            v[i] = x * (1.0 - x);
        }
        const auto target = diagnostics::forward_transform(u, v, tables);
        const auto back = diagnostics::inverse_transform(target.w, target.z, tables);
        const double err = std::max(max_abs_diff(back.u, u), max_abs_diff(back.vhat, v));
        return std::pair{err < 1e-4, "max error = " + sci(err)};
    });

    run(out, "plant boundary exactness", [&] {
        plant::CrankNicolson cn(m, cfg.lambda, cfg.dt);
        plant::PlantProfile p{std::vector<double>(m + 1), 1.0 / static_cast<double>(m), 0.0};
        for (std::size_t i = 0; i <= m; ++i) p.values[i] = std::sin(std::numbers::pi * tables.grid[i]);
        cn.step(p, 0.0, 0.3);
        return std::pair{p.values[0] == 0.0 && p.values[m] == 0.3, std::string("u(0), u(1) after one step")};
    });

    run(out, "actuator boundary exactness", [&] {
        actuator::TransportStepper st(m, cfg.dt, cfg.d0(), model.states());
        actuator::ActuatorProfiles prof{std::vector<double>(m + 1, 0.2),
                                        std::vector<std::vector<double>>(r, std::vector<double>(m + 1, 0.0)),
                                        actuator::Mode::Pde};
        st.step(prof, 0.7);
        bool ok = prof.vhat[m] == 0.7;
        for (const auto& vt : prof.vtilde) ok = ok && vt[m] == 0.0;
        return std::pair{ok, std::string("vhat(1) = U, vtilde(1) = 0")};
    });

    run(out, "controller well-posed", [&] {
        const auto ctx = controller::make_context(tables, cfg.dt);
        ctx.check(kcfg);
        return std::pair{std::abs(ctx.implicit_factor) >= 1e-8,
                         "1 - W0 = " + sci(ctx.implicit_factor)};
    });
    return out;
}

}  // namespace sdelay::invariants
