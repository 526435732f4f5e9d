#include "sdelay/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "sdelay/errors.hpp"
#include "sdelay/expression.hpp"

#ifndef SDELAY_PRESET_DIR
#define SDELAY_PRESET_DIR "presets"
#endif

namespace sdelay::config {

namespace {

constexpr const char* kPaperStable = R"(# lambda = 11, five-state Markov delay, compensated delay 0.5
plant.lambda = 11
delay.states = [0.40, 0.45, 0.5, 0.55, 0.6]
delay.q_matrix = [[-5, 1, 1, 1, 2],
                  [2, -3, 0.4, 0.5, 0.1],
                  [0.1, 0.1, -1, 0.4, 0.4],
                  [2, 1, 0.5, -4.5, 1],
                  [0.1, 0.1, 1, 0.4, -1.6]]
delay.d0 = 0.5
delay.initial_index = 3
grid.dx = 0.01
grid.dt = 0.01
sim.horizon = 15
sim.controller = true
sim.stride = 10
sim.seed = 0
actuator.mode = pde
init.u = sin(pi*x)
init.vhat = cos(pi*x)
init.vtilde = [0.5*sin(pi*x), sin(pi*x), 1.5*sin(pi*x), 2*sin(pi*x), 2.5*sin(pi*x)]
kernel.n_terms = 200
montecarlo.realizations = 50
)";

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "plant.lambda",      "delay.states",           "delay.q_matrix", "delay.d0",
        "delay.initial_index", "grid.dx",              "grid.dt",        "sim.horizon",
        "sim.controller",    "sim.stride",             "sim.seed",       "actuator.mode",
        "actuator.initial_history", "init.u",          "init.vhat",      "init.vtilde",
        "kernel.n_terms",    "kernel.quad_points",     "output.fields",  "montecarlo.realizations",
        "montecarlo.window"};
    return keys;
}

bool is_vtilde_entry(const std::string& key) {
    if (key.rfind("init.vtilde.", 0) != 0) return false;
    const auto rest = key.substr(12);
    return !rest.empty() && std::all_of(rest.begin(), rest.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

int bracket_balance(std::string_view s) {
    int depth = 0;
    for (char c : s) {
        if (c == '[') ++depth;
        if (c == ']') --depth;
    }
    return depth;
}

bool is_list(const std::string& v) { return !v.empty() && v.front() == '['; }

// Top-level elements of "[a, b, [c, d]]"; nested lists are flattened when flatten is set.
std::vector<std::string> split_list(const std::string& key, const std::string& value, bool flatten) {
    if (!is_list(value) || value.back() != ']') throw ConfigError("expected a [list]", key);
    const std::string body = value.substr(1, value.size() - 2);
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    auto flush = [&] {
        auto item = trim(cur);
        cur.clear();
        if (item.empty()) throw ConfigError("empty list element", key);
        if (flatten && is_list(item)) {
            for (auto& sub : split_list(key, item, true)) out.push_back(std::move(sub));
        } else {
            out.push_back(unquote(item));
        }
    };
    for (char c : body) {
        if (c == '[' || c == '(') ++depth;
        if (c == ']' || c == ')') --depth;
        if (c == ',' && depth == 0) {
            flush();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty() || !out.empty()) flush();
    return out;
}

double to_number(const std::string& key, const std::string& text) {
    const auto s = trim(text);
    if (s.empty()) throw ConfigError("expected a number", key);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError("expected a number, got '" + s + "'", key);
    }
    if (used != s.size()) throw ConfigError("expected a number, got '" + s + "'", key);
    if (!std::isfinite(v)) throw ConfigError("must be finite", key);
    return v;
}

long long to_integer(const std::string& key, const std::string& text) {
    const double v = to_number(key, text);
    if (v != std::floor(v) || std::abs(v) > 9e15) throw ConfigError("expected an integer", key);
    return static_cast<long long>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
    std::string s = trim(text);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "on" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "off" || s == "no" || s == "0") return false;
    throw ConfigError("expected true/false, got '" + s + "'", key);
}

std::vector<double> to_numbers(const std::string& key, const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_list(key, text, true)) out.push_back(to_number(key, item));
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s + "]";
}

struct ProfileSpec {
    sim::Profile fn;
    std::string canonical;
};

// Expression in x, or a table of M + 1 samples interpolated linearly.
ProfileSpec to_profile(const std::string& key, const std::string& text, std::size_t intervals) {
    const auto s = unquote(trim(text));
    if (is_list(s)) {
        auto table = to_numbers(key, s);
        if (table.size() != intervals + 1) {
            throw ConfigError("sampled table needs " + std::to_string(intervals + 1) + " values, got " +
                              std::to_string(table.size()), key);
        }
        auto canonical = fmt_list(table);
        auto fn = [table = std::move(table)](double x) {
            const double pos = std::clamp(x, 0.0, 1.0) * static_cast<double>(table.size() - 1);
            const auto k = std::min(static_cast<std::size_t>(pos), table.size() - 2);
            const double frac = pos - static_cast<double>(k);
            return frac == 0.0 ? table[k] : table[k] + frac * (table[k + 1] - table[k]);
        };
        return {fn, canonical};
    }
    try {
        auto expr = Expression::parse(s, "x");
        return {[expr](double x) { return expr(x); }, s};
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what(), key);
    }
}

}  // namespace

RawConfig read_raw(std::istream& in, const std::string& source) {
    RawConfig raw;
    raw.source = source;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const auto key = trim(std::string_view(line).substr(0, eq));
        auto value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
        while (bracket_balance(value) > 0) {
            std::string more;
            if (!std::getline(in, more)) throw ConfigError("unterminated list", key);
            ++lineno;
            if (auto hash = more.find('#'); hash != std::string::npos) more.erase(hash);
            value += " " + trim(more);
        }
        if (bracket_balance(value) != 0) throw ConfigError("unbalanced brackets", key);
        if (raw.values.count(key)) throw ConfigError("duplicate key", key);
        raw.values[key] = value;
    }
    return raw;
}

std::vector<std::string> builtin_presets() { return {"paper_stable", "paper_unstable"}; }

std::string builtin_preset_text(const std::string& name) {
    if (name == "paper_stable") return kPaperStable;
    if (name == "paper_unstable") {
        std::string text = kPaperStable;
        const std::string from = "delay.d0 = 0.5";
        text.replace(text.find(from), from.size(), "delay.d0 = 0.55");
        const std::string head = "compensated delay 0.5";
        text.replace(text.find(head), head.size(), "compensated delay 0.55");
        return text;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

RawConfig load_raw(const std::string& name_or_path) {
    namespace fs = std::filesystem;
    if (fs::is_regular_file(name_or_path)) {
        std::ifstream in(name_or_path);
        if (!in) throw ConfigError("cannot read " + name_or_path);
        return read_raw(in, name_or_path);
    }
    const std::string stem = fs::path(name_or_path).stem().string();
    const auto names = builtin_presets();
    if (std::find(names.begin(), names.end(), stem) == names.end()) {
        throw ConfigError("no such file or preset: " + name_or_path);
    }
    const fs::path shipped = fs::path(SDELAY_PRESET_DIR) / (stem + ".cfg");
    if (fs::is_regular_file(shipped)) {
        std::ifstream in(shipped);
        if (in) return read_raw(in, shipped.string());
    }
    std::istringstream in(builtin_preset_text(stem));
    return read_raw(in, stem);
}

void apply_override(RawConfig& raw, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override must look like key=value: " + assignment);
    const auto key = trim(std::string_view(assignment).substr(0, eq));
    if (key.empty()) throw ConfigError("override with empty key: " + assignment);
    raw.values[key] = trim(std::string_view(assignment).substr(eq + 1));
}

LoadedConfig resolve(const RawConfig& raw) {
    for (const auto& [key, value] : raw.values) {
        if (!known_keys().count(key) && !is_vtilde_entry(key)) throw ConfigError("unknown key", key);
    }
    auto get = [&](const std::string& key) -> const std::string* {
        auto it = raw.values.find(key);
        return it == raw.values.end() ? nullptr : &it->second;
    };
    auto required = [&](const std::string& key) -> const std::string& {
        if (const auto* v = get(key)) return *v;
        throw ConfigError("missing required key", key);
    };
    auto number = [&](const std::string& key, double fallback) {
        const auto* v = get(key);
        return v ? to_number(key, *v) : fallback;
    };

    std::map<std::string, std::string> canon;

    const auto states = to_numbers("delay.states", required("delay.states"));
    if (states.empty()) throw ConfigError("needs at least one state", "delay.states");
    const auto q_flat = to_numbers("delay.q_matrix", required("delay.q_matrix"));
    const std::size_t r = states.size();
    if (q_flat.size() != r * r) {
        throw ConfigError("expected " + std::to_string(r * r) + " entries for " + std::to_string(r) +
                          " states, got " + std::to_string(q_flat.size()), "delay.q_matrix");
    }
    const double d0 = to_number("delay.d0", required("delay.d0"));
    delay::DelayModel model(states, delay::SquareMatrix(r, q_flat), d0);
    canon["delay.states"] = fmt_list(states);
    canon["delay.q_matrix"] = fmt_list(q_flat);
    canon["delay.d0"] = fmt(d0);

    LoadedConfig out{sim::SimConfig(std::move(model)), 50, -1.0, -1.0, {}, {}};
    out.source = raw.source;
    auto& s = out.sim;

    const auto init_idx = to_integer("delay.initial_index", required("delay.initial_index"));
    if (init_idx < 1 || init_idx > static_cast<long long>(r)) {
        throw ConfigError("must be in 1.." + std::to_string(r), "delay.initial_index");
    }
    s.initial_index = static_cast<std::size_t>(init_idx - 1);
    canon["delay.initial_index"] = std::to_string(init_idx);

    s.lambda = number("plant.lambda", 11.0);
    s.dx = number("grid.dx", 0.01);
    s.dt = number("grid.dt", 0.01);
    s.horizon = number("sim.horizon", 15.0);
    canon["plant.lambda"] = fmt(s.lambda);
    canon["grid.dx"] = fmt(s.dx);
    canon["grid.dt"] = fmt(s.dt);
    canon["sim.horizon"] = fmt(s.horizon);
    const std::size_t m = s.intervals();
    s.steps();

    if (const auto* v = get("sim.controller")) s.controller = to_bool("sim.controller", *v);
    canon["sim.controller"] = s.controller ? "true" : "false";
    if (const auto* v = get("sim.stride")) {
        const auto stride = to_integer("sim.stride", *v);
        if (stride < 1) throw ConfigError("must be >= 1", "sim.stride");
        s.stride = static_cast<std::size_t>(stride);
    } else {
        s.stride = 10;
    }
    canon["sim.stride"] = std::to_string(s.stride);
    if (const auto* v = get("sim.seed")) {
        const auto seed = to_integer("sim.seed", *v);
        if (seed < 0) throw ConfigError("must be >= 0", "sim.seed");
        s.seed = static_cast<std::uint64_t>(seed);
    }
    canon["sim.seed"] = std::to_string(s.seed);

    std::string mode = "pde";
    if (const auto* v = get("actuator.mode")) mode = unquote(trim(*v));
    if (mode == "pde") {
        s.mode = actuator::Mode::Pde;
    } else if (mode == "exact-history") {
        s.mode = actuator::Mode::ExactHistory;
    } else {
        throw ConfigError("expected pde or exact-history, got '" + mode + "'", "actuator.mode");
    }
    canon["actuator.mode"] = mode;

    std::string hist = "0";
    if (const auto* v = get("actuator.initial_history")) hist = unquote(trim(*v));
    try {
        auto expr = Expression::parse(hist, "t");
        s.init.history = [expr](double t) { return expr(t); };
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what(), "actuator.initial_history");
    }
    canon["actuator.initial_history"] = hist;

    auto profile = [&](const std::string& key, const std::string& fallback) {
        const auto* v = get(key);
        auto spec = to_profile(key, v ? *v : fallback, m);
        canon[key] = spec.canonical;
        return spec.fn;
    };
    s.init.u = profile("init.u", "sin(pi*x)");
    s.init.vhat = profile("init.vhat", "0");

    std::vector<std::string> vtilde(r, "0");
    if (const auto* v = get("init.vtilde")) {
        auto items = split_list("init.vtilde", unquote(trim(*v)), false);
        if (items.size() != r) {
            throw ConfigError("needs " + std::to_string(r) + " profiles, got " + std::to_string(items.size()),
                              "init.vtilde");
        }
        vtilde = std::move(items);
    }
    for (const auto& [key, value] : raw.values) {
        if (!is_vtilde_entry(key)) continue;
        const auto j = std::stoul(key.substr(12));
        if (j < 1 || j > r) throw ConfigError("state index out of range", key);
        vtilde[j - 1] = value;
    }
    s.init.vtilde.clear();
    std::string vt_canon = "[";
    for (std::size_t j = 0; j < r; ++j) {
        auto spec = to_profile("init.vtilde." + std::to_string(j + 1), vtilde[j], m);
        s.init.vtilde.push_back(spec.fn);
        vt_canon += (j ? ", " : "") + spec.canonical;
    }
    canon["init.vtilde"] = vt_canon + "]";

    if (const auto* v = get("kernel.n_terms")) {
        const auto n = to_integer("kernel.n_terms", *v);
        if (n < 1 || n > 100000) throw ConfigError("must be in 1..100000", "kernel.n_terms");
        s.n_terms = static_cast<int>(n);
    }
    if (const auto* v = get("kernel.quad_points")) {
        const auto n = to_integer("kernel.quad_points", *v);
        if (n < 2 || n > 100000000) throw ConfigError("out of range", "kernel.quad_points");
        s.quad_points = static_cast<int>(n);
    }
    canon["kernel.n_terms"] = std::to_string(s.n_terms);
    canon["kernel.quad_points"] = std::to_string(s.kernel_config().quad_points);

    if (const auto* v = get("output.fields")) s.fields = to_bool("output.fields", *v);
    canon["output.fields"] = s.fields ? "true" : "false";

    if (const auto* v = get("montecarlo.realizations")) {
        const auto n = to_integer("montecarlo.realizations", *v);
        if (n < 1) throw ConfigError("must be >= 1", "montecarlo.realizations");
        out.realizations = static_cast<std::size_t>(n);
    }
    canon["montecarlo.realizations"] = std::to_string(out.realizations);
    out.window_lo = s.horizon / 3.0;
    out.window_hi = s.horizon;
    if (const auto* v = get("montecarlo.window")) {
        const auto w = to_numbers("montecarlo.window", *v);
        if (w.size() != 2 || !(w[0] >= 0.0) || !(w[1] > w[0]) || w[1] > s.horizon + 1e-12) {
            throw ConfigError("expected [lo, hi] with 0 <= lo < hi <= sim.horizon", "montecarlo.window");
        }
        out.window_lo = w[0];
        out.window_hi = w[1];
    }
    canon["montecarlo.window"] = fmt_list({out.window_lo, out.window_hi});

    s.validate();

    for (const auto& [key, value] : canon) out.canonical += key + " = " + value + "\n";
    s.config_hash = hex64(fnv1a(out.canonical));
    return out;
}

LoadedConfig parse_config(const std::string& name_or_path, const std::vector<std::string>& overrides) {
    auto raw = load_raw(name_or_path);
    for (const auto& o : overrides) apply_override(raw, o);
    return resolve(raw);
}

std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace sdelay::config
