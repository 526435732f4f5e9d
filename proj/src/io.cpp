#include "sdelay/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "sdelay/config.hpp"
#include "sdelay/delay_process.hpp"

namespace sdelay::io {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

void write_trajectory(std::ostream& out, const sim::TrajectoryRecord& rec, const std::string& manifest) {
    out << "# manifest " << manifest << "\n";
    out << "# config " << rec.config_hash << "\n";
    if (rec.diverged) out << "# diverged_at " << format_double(rec.diverged_at) << "\n";
    out << "t,u_l2,vhat_h1,vtilde_h1,V,U,delay_index\n";
    for (const auto& s : rec.snapshots) {
        out << format_double(s.t) << ',' << format_double(std::sqrt(s.u_l2sq)) << ','
            << format_double(std::sqrt(s.vhat_h1sq)) << ',' << format_double(std::sqrt(s.vtilde_h1sq))
            << ',' << format_double(s.v_total) << ',' << format_double(s.u_ctrl) << ','
            << s.delay_index + 1 << '\n';
    }
}

void write_fields(std::ostream& out, const sim::TrajectoryRecord& rec, const std::string& manifest) {
    out << "# manifest " << manifest << "\n";
    out << "# rows: t, then u(x_i) for i = 0..M\n";
    for (std::size_t k = 0; k < rec.fields.size(); ++k) {
        out << format_double(rec.snapshots[k].t);
        for (double v : rec.fields[k]) out << ',' << format_double(v);
        out << '\n';
    }
}

std::string ensemble_summary(const mc::EnsembleResult& res) {
    std::ostringstream s;
    s << "n " << res.n_realizations << "\n";
    s << "beta " << format_double(res.fitted_beta) << "\n";
    s << "alpha " << format_double(res.fitted_alpha) << "\n";
    s << "window " << format_double(res.window_lo) << ' ' << format_double(res.window_hi) << "\n";
    s << "diverged_count " << res.diverged_count << "\n";
    s << "mean_V_ratio " << format_double(res.mean_v.back() / res.mean_v.front()) << "\n";
    return s.str();
}

void write_ensemble(std::ostream& out, const mc::EnsembleResult& res, const std::string& manifest) {
    out << "# manifest " << manifest << "\n";
    out << "t,mean_V,ci_halfwidth\n";
    for (std::size_t k = 0; k < res.times.size(); ++k) {
        out << format_double(res.times[k]) << ',' << format_double(res.mean_v[k]) << ','
            << format_double(res.ci_halfwidth[k]) << '\n';
    }
    out << "# summary\n";
    std::istringstream lines(ensemble_summary(res));
    for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
}

void write_kernels(std::ostream& out, const kernels::KernelTables& t, const std::string& manifest) {
    out << "# manifest " << manifest << "\n";
    out << "# lambda " << format_double(t.cfg.lambda) << " d0 " << format_double(t.cfg.d0) << " n_terms "
        << t.cfg.n_terms << "\n";
    out << "x,p_1,gamma_1,kappa,eta_1,l_0\n";
    for (std::size_t i = 0; i < t.nodes(); ++i) {
        out << format_double(t.grid[i]) << ',' << format_double(t.p_1[i]) << ','
            << format_double(t.gamma_1[i]) << ',' << format_double(t.kappa[i]) << ','
            << format_double(t.eta_row[i]) << ',' << format_double(t.l_band[i]) << '\n';
    }
}

std::string RunManifest::hash() const {
    std::string key = std::string(kToolVersion) + "\n" + subcommand + "\n" + canonical_config;
    for (const auto& a : arguments) key += a + "\n";
    return config::hex64(config::fnv1a(key));
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["manifest_hash"] = hash();
    j["tool_version"] = kToolVersion;
    j["subcommand"] = subcommand;
    j["config_path"] = config_path;
    j["arguments"] = arguments;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    std::istringstream lines(canonical_config);
    for (std::string line; std::getline(lines, line);) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) params[line.substr(0, eq)] = line.substr(eq + 3);
    }
    j["resolved_parameters"] = params;
    j["output_dir"] = output_dir.string();
    j["outputs"] = outputs;
    j["timings"] = {{"wall_seconds", wall_seconds}};
    return j.dump(2) + "\n";
}

std::filesystem::path output_directory(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("SDELAY_OUTPUT_DIR"); env && *env) return env;
    return ".";
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace sdelay::io
