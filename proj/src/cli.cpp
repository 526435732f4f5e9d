#include "sdelay/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sdelay/config.hpp"
#include "sdelay/errors.hpp"
#include "sdelay/invariants.hpp"
#include "sdelay/io.hpp"
#include "sdelay/kernels.hpp"
#include "sdelay/montecarlo.hpp"
#include "sdelay/simulator.hpp"

namespace sdelay::cli {

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct Common {
    std::string config = "paper_stable";
    std::string out;
    std::vector<std::string> sets;
};

void add_common(CLI::App* sub, Common& c, bool config_required) {
    auto* opt = sub->add_option("config", c.config, "config file or preset name (paper_stable, paper_unstable)");
    if (config_required) opt->required();
    sub->add_option("--out,-o", c.out, "output directory (default: $SDELAY_OUTPUT_DIR or .)");
    sub->add_option("--set", c.sets, "override a config key, key=value (repeatable)");
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void finish(io::RunManifest& manifest, Clock::time_point start) {
    manifest.wall_seconds = seconds_since(start);
    manifest.outputs.push_back("manifest.json");
    io::write_file(manifest.output_dir / "manifest.json", manifest.to_json());
    std::cout << "wrote " << manifest.outputs.size() << " files to " << manifest.output_dir.string()
              << " (manifest " << manifest.hash() << ")\n";
}

io::RunManifest start_manifest(const std::string& sub, const Common& c, const config::LoadedConfig& cfg) {
    io::RunManifest m;
    m.subcommand = sub;
    m.config_path = cfg.source;
    m.canonical_config = cfg.canonical;
    m.output_dir = io::output_directory(c.out);
    return m;
}

void emit(io::RunManifest& m, const std::string& name, const std::string& contents) {
    io::write_file(m.output_dir / name, contents);
    m.outputs.push_back(name);
}

int run_validate(const Common& c) {
    const auto cfg = config::parse_config(c.config, c.sets);
    std::cout << "config " << cfg.source << " (" << cfg.sim.config_hash << ")\n";
    bool all = true;
    for (const auto& r : invariants::run_suite(cfg.sim)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        all = all && r.passed;
    }
    return all ? kOk : kFailure;
}

int run_kernels(const Common& c) {
    const auto start = Clock::now();
    const auto cfg = config::parse_config(c.config, c.sets);
    auto manifest = start_manifest("kernels", c, cfg);
    const auto tables = kernels::build_tables(cfg.sim.kernel_config(), static_cast<int>(cfg.sim.intervals()));
    std::ostringstream s;
    io::write_kernels(s, tables, manifest.hash());
    emit(manifest, "kernels.csv", s.str());
    finish(manifest, start);
    return kOk;
}

void write_record(io::RunManifest& manifest, const sim::TrajectoryRecord& rec, bool fields) {
    std::ostringstream traj;
    io::write_trajectory(traj, rec, manifest.hash());
    emit(manifest, "trajectory.csv", traj.str());
    std::ostringstream path;
    path << "# manifest " << manifest.hash() << "\n";
    delay::write_path(path, rec.path);
    emit(manifest, "delay_path.csv", path.str());
    if (fields) {
        std::ostringstream f;
        io::write_fields(f, rec, manifest.hash());
        emit(manifest, "fields.csv", f.str());
    }
    const auto& last = rec.snapshots.back();
    std::cout << "t = " << io::format_double(last.t) << "  V = " << io::format_double(last.v_total)
              << "  V(0) = " << io::format_double(rec.snapshots.front().v_total)
              << (rec.diverged ? "  (diverged)" : "") << "\n";
}

// --seed goes through the config so the manifest and hash carry it.
std::vector<std::string> with_seed(const Common& c, std::int64_t seed_flag) {
    auto sets = c.sets;
    if (seed_flag >= 0) sets.push_back("sim.seed=" + std::to_string(seed_flag));
    return sets;
}

int run_simulate(const Common& c, std::int64_t seed_flag) {
    const auto start = Clock::now();
    const auto cfg = config::parse_config(c.config, with_seed(c, seed_flag));
    auto manifest = start_manifest("simulate", c, cfg);
    const auto rec = sim::run_realization(cfg.sim, cfg.sim.seed);
    write_record(manifest, rec, cfg.sim.fields);
    finish(manifest, start);
    return kOk;
}

int run_montecarlo(const Common& c, std::int64_t seed_flag, std::int64_t n_flag, unsigned jobs) {
    const auto start = Clock::now();
    const auto cfg = config::parse_config(c.config, with_seed(c, seed_flag));
    mc::EnsembleOptions opts;
    opts.n = n_flag > 0 ? static_cast<std::size_t>(n_flag) : cfg.realizations;
    opts.master_seed = cfg.sim.seed;
    opts.jobs = jobs;
    opts.window_lo = cfg.window_lo;
    opts.window_hi = cfg.window_hi;
    auto manifest = start_manifest("montecarlo", c, cfg);
    manifest.arguments.push_back("n=" + std::to_string(opts.n));
    const auto res = mc::run_ensemble(cfg.sim, opts);
    std::ostringstream s;
    io::write_ensemble(s, res, manifest.hash());
    emit(manifest, "ensemble.csv", s.str());
    std::cout << io::ensemble_summary(res);
    finish(manifest, start);
    return kOk;
}

int run_replay(const Common& c, const std::string& path_file, const std::string& controller) {
    const auto start = Clock::now();
    auto sets = c.sets;
    if (!controller.empty()) sets.push_back("sim.controller=" + controller);
    const auto cfg = config::parse_config(c.config, sets);
    auto manifest = start_manifest("replay", c, cfg);
    std::ifstream probe(path_file, std::ios::binary);
    if (!probe) throw ConfigError("cannot open path file " + path_file);
    const std::string contents((std::istreambuf_iterator<char>(probe)), std::istreambuf_iterator<char>());
    manifest.arguments.push_back("path=" + config::hex64(config::fnv1a(contents)));
    const auto rec = sim::replay(cfg.sim, path_file);
    write_record(manifest, rec, cfg.sim.fields);
    finish(manifest, start);
    return kOk;
}

}  // namespace

int dispatch(int argc, char** argv) {
    CLI::App app{"Reaction-diffusion plant under stochastic input delay: simulation and ensemble tools", "sdelay"};
    app.require_subcommand(1);
    app.set_version_flag("--version", io::kToolVersion);

    Common validate_c, kernels_c, simulate_c, mc_c, replay_c;
    std::int64_t seed = -1;
    std::int64_t mc_seed = -1;
    std::int64_t n = 0;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string path_file;
    std::string controller;

    auto* validate = app.add_subcommand("validate", "run the invariant suite on a configuration");
    add_common(validate, validate_c, false);
    auto* kern = app.add_subcommand("kernels", "dump kernel tables");
    add_common(kern, kernels_c, true);
    auto* simulate = app.add_subcommand("simulate", "run one closed-loop realization");
    add_common(simulate, simulate_c, true);
    simulate->add_option("--seed", seed, "delay-path seed (overrides sim.seed)")->check(CLI::NonNegativeNumber);
    auto* montecarlo = app.add_subcommand("montecarlo", "run an ensemble and fit the decay rate");
    add_common(montecarlo, mc_c, true);
    montecarlo->add_option("--seed", mc_seed, "master seed (overrides sim.seed)")->check(CLI::NonNegativeNumber);
    montecarlo->add_option("-n", n, "number of realizations (overrides montecarlo.realizations)")
        ->check(CLI::PositiveNumber);
    montecarlo->add_option("--jobs,-j", jobs, "worker threads")->check(CLI::PositiveNumber);
    auto* replay = app.add_subcommand("replay", "rerun a recorded delay path");
    add_common(replay, replay_c, true);
    replay->add_option("path", path_file, "delay path file written by simulate")->required();
    replay->add_option("--controller", controller, "override sim.controller")
        ->check(CLI::IsMember({"on", "off", "true", "false"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*validate) return run_validate(validate_c);
        if (*kern) return run_kernels(kernels_c);
        if (*simulate) return run_simulate(simulate_c, seed);
        if (*montecarlo) return run_montecarlo(mc_c, mc_seed, n, jobs);
        if (*replay) return run_replay(replay_c, path_file, controller);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kFailure;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    std::cerr << app.help();
    return kUsage;
}

}  // namespace sdelay::cli
