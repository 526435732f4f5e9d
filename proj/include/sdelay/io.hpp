#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdelay/kernels.hpp"
#include "sdelay/montecarlo.hpp"
#include "sdelay/simulator.hpp"

namespace sdelay::io {

inline constexpr const char* kToolVersion = "0.1.0";

/// Shortest round-trip decimal form ("inf", "-inf", "nan" for the rest).
std::string format_double(double v);

/// Columns t,u_l2,vhat_h1,vtilde_h1,V,U,delay_index. Norms are the square
/// roots of the squared norms; V is the Lyapunov functional itself.
/// delay_index is 1-based.
void write_trajectory(std::ostream& out, const sim::TrajectoryRecord& rec, const std::string& manifest);

/// One row per snapshot: t followed by u at every grid node.
void write_fields(std::ostream& out, const sim::TrajectoryRecord& rec, const std::string& manifest);

/// Columns t,mean_V,ci_halfwidth then a `# summary` comment block.
void write_ensemble(std::ostream& out, const mc::EnsembleResult& res, const std::string& manifest);
std::string ensemble_summary(const mc::EnsembleResult& res);

/// Columns x,p_1,gamma_1,kappa,eta_1,l_0 on the tables' grid.
void write_kernels(std::ostream& out, const kernels::KernelTables& tables, const std::string& manifest);

struct RunManifest {
    std::string subcommand;
    std::string config_path;
    std::string canonical_config;
    std::vector<std::string> arguments;  // extra inputs that change outputs (seed, n, path file)
    std::filesystem::path output_dir;
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;

    /// Hash of everything that determines the output files; timings excluded.
    std::string hash() const;
    std::string to_json() const;
};

/// --out if given, else $SDELAY_OUTPUT_DIR, else the working directory.
std::filesystem::path output_directory(const std::string& flag_value);

/// Writes through a temporary file so a failed run never leaves a partial file.
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace sdelay::io
