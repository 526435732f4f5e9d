#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sdelay/simulator.hpp"

namespace sdelay::config {

/// Flat `key = value` text. `#` starts a comment, values in brackets are
/// lists and may span lines until the brackets balance.
struct RawConfig {
    std::map<std::string, std::string> values;
    std::string source;
};

RawConfig read_raw(std::istream& in, const std::string& source = "<stream>");

/// A readable file path, or a preset name such as `paper_stable` (any
/// directory prefix and `.cfg` suffix are ignored for preset lookup).
RawConfig load_raw(const std::string& name_or_path);

/// Applies one `key=value` override.
void apply_override(RawConfig& raw, const std::string& assignment);

struct LoadedConfig {
    sim::SimConfig sim;
    std::size_t realizations = 50;
    double window_lo = -1.0;
    double window_hi = -1.0;
    std::string source;
    std::string canonical;  // sorted resolved `key = value` lines
};

/// Validates types and ranges; errors are ConfigError naming the key.
LoadedConfig resolve(const RawConfig& raw);

LoadedConfig parse_config(const std::string& name_or_path,
                          const std::vector<std::string>& overrides = {});

/// Names of the presets compiled into the library.
std::vector<std::string> builtin_presets();
std::string builtin_preset_text(const std::string& name);

std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t v);

}  // namespace sdelay::config
