#pragma once

#include <stdexcept>
#include <string>

namespace sketchpnp {

/// Invalid configuration: mismatched grids, bad stage plans, unknown keys.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid input data (non-finite pixels, negative attenuation, ...).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterate became non-finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int stage, int iteration)
      : std::runtime_error(what), stage_(stage), iteration_(iteration) {}

  int stage() const noexcept { return stage_; }
  int iteration() const noexcept { return iteration_; }

 private:
  int stage_;
  int iteration_;
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sketchpnp
