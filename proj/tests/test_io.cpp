#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sdelay/cli.hpp"
#include "sdelay/config.hpp"
#include "sdelay/io.hpp"

using namespace sdelay;
namespace fs = std::filesystem;

namespace {

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "sdelay");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli::dispatch(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("sdelay_io_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("numbers print in shortest round-trip form") {
    for (double v : {0.1, 1.0 / 3.0, 80.64071234, -2.5e-300, 1e22}) {
        CHECK(std::stod(io::format_double(v)) == v);
    }
    CHECK(io::format_double(0.5) == "0.5");
    CHECK(io::format_double(INFINITY) == "inf");
    CHECK(io::format_double(-INFINITY) == "-inf");
    CHECK(io::format_double(NAN) == "nan");
}

TEST_CASE("trajectory layout") {
    sim::TrajectoryRecord rec;
    rec.config_hash = "abc";
    rec.snapshots.push_back({0.0, 4.0, 9.0, 16.0, 29.0, 0.5, 2});
    rec.diverged = true;
    rec.diverged_at = 1.5;
    std::ostringstream s;
    io::write_trajectory(s, rec, "m1");
    CHECK(s.str() ==
          "# manifest m1\n# config abc\n# diverged_at 1.5\nt,u_l2,vhat_h1,vtilde_h1,V,U,delay_index\n0,2,3,4,29,0.5,3\n");
}

TEST_CASE("ensemble layout carries a summary block") {
    mc::EnsembleResult r;
    r.times = {0.0, 1.0};
    r.mean_v = {10.0, 5.0};
    r.ci_halfwidth = {0.0, 1.0};
    r.n_realizations = 2;
    r.window_lo = 0.0;
    r.window_hi = 1.0;
    r.fitted_beta = std::log(2.0);
    std::ostringstream s;
    io::write_ensemble(s, r, "m");
    const auto text = s.str();
    CHECK(text.find("t,mean_V,ci_halfwidth\n0,10,0\n1,5,1\n# summary\n# n 2\n") != std::string::npos);
    CHECK(text.find("# mean_V_ratio 0.5\n") != std::string::npos);
}

TEST_CASE("manifest hash ignores timings and output location") {
    io::RunManifest a;
    a.subcommand = "simulate";
    a.canonical_config = "plant.lambda = 11\n";
    a.arguments = {"seed=1"};
    auto b = a;
    b.wall_seconds = 42.0;
    b.output_dir = "/elsewhere";
    CHECK(a.hash() == b.hash());
    b.arguments = {"seed=2"};
    CHECK(a.hash() != b.hash());
    const auto j = nlohmann::json::parse(a.to_json());
    CHECK(j["manifest_hash"] == a.hash());
    CHECK(j["resolved_parameters"]["plant.lambda"] == "11");
    CHECK(j["tool_version"] == io::kToolVersion);
}

TEST_CASE("output directory precedence") {
    ::setenv("SDELAY_OUTPUT_DIR", "/tmp/from_env", 1);
    CHECK(io::output_directory("flag") == fs::path("flag"));
    CHECK(io::output_directory("") == fs::path("/tmp/from_env"));
    ::unsetenv("SDELAY_OUTPUT_DIR");
    CHECK(io::output_directory("") == fs::path("."));
}

TEST_CASE("files are written through a temporary and directories created") {
    const auto dir = scratch("write");
    io::write_file(dir / "a" / "b.txt", "hello\n");
    CHECK(slurp(dir / "a" / "b.txt") == "hello\n");
    CHECK_FALSE(fs::exists(dir / "a" / "b.txt.tmp"));
    fs::remove_all(dir);
}

TEST_CASE("cli exit codes") {
    CHECK(run_cli({"bogus"}) == 2);
    CHECK(run_cli({}) == 2);
    CHECK(run_cli({"simulate"}) == 2);
    CHECK(run_cli({"simulate", "does_not_exist.cfg"}) == 1);
    CHECK(run_cli({"simulate", "paper_stable", "--set", "delay.d0=9"}) == 1);
    CHECK(run_cli({"validate", "paper_stable", "--set", "kernel.n_terms=50"}) == 0);
}

TEST_CASE("cli simulate and replay write their outputs") {
    const auto dir = scratch("cli");
    REQUIRE(run_cli({"simulate", "paper_stable", "--seed", "3", "--set", "sim.horizon=0.5", "--out", dir.string()}) == 0);
    for (const char* f : {"trajectory.csv", "delay_path.csv", "manifest.json"}) CHECK(fs::exists(dir / f));
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["subcommand"] == "simulate");
    CHECK(manifest["outputs"].size() == 3);
    const auto first = slurp(dir / "trajectory.csv");

    const auto rdir = dir / "replay";
    REQUIRE(run_cli({"replay", "paper_stable", (dir / "delay_path.csv").string(), "--set", "sim.horizon=0.5",
                     "--out", rdir.string()}) == 0);
    const auto again = slurp(rdir / "trajectory.csv");
    // Same numbers; the manifest line differs because the inputs differ.
    CHECK(first.substr(first.find("t,u_l2")) == again.substr(again.find("t,u_l2")));
    CHECK(run_cli({"replay", "paper_stable", (dir / "delay_path.csv").string(), "--out", rdir.string()}) == 1);
    fs::remove_all(dir);
}

TEST_CASE("cli kernels dump") {
    const auto dir = scratch("kernels");
    REQUIRE(run_cli({"kernels", "paper_stable", "--set", "kernel.n_terms=40", "-o", dir.string()}) == 0);
    const auto text = slurp(dir / "kernels.csv");
    CHECK(text.find("x,p_1,gamma_1,kappa,eta_1,l_0\n") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3 + 101);
    fs::remove_all(dir);
}
