#pragma once

#include <stdexcept>
#include <string>

namespace coae {

// Shape or size mismatch between operands.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A NaN or infinity showed up where a finite value is required.
class NonFiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unreadable, truncated, or inconsistent checkpoint file.
class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid run configuration. `key_path` names the offending entry, e.g. "train.linewidth_hz".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key_path, const std::string& message)
        : std::runtime_error(key_path.empty() ? message : key_path + ": " + message),
          key_path_(std::move(key_path)) {}

    const std::string& key_path() const noexcept { return key_path_; }

private:
    std::string key_path_;
};

} // namespace coae
