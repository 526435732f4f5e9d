#pragma once

#include <stdexcept>
#include <string>

namespace sdelay {

/// Invalid or inconsistent configuration. `key()` names the offending
/// dotted config key when the error originates from a config file.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg, std::string key = {})
        : std::runtime_error(key.empty() ? msg : key + ": " + msg), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// A numerical operation could not produce a meaningful result
/// (non-finite input, singular system, divergent ensemble).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sdelay
