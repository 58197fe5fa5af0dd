#include "gripest/errors.hpp"

#include <cstdio>

namespace gripest {

ConfigError::ConfigError(std::string field, const std::string& what)
    : Error(what.empty() ? "invalid configuration field '" + field + "'"
                         : "invalid configuration field '" + field + "': " + what),
      field_(std::move(field)) {}

namespace {
std::string divergence_message(double t) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "truth simulation diverged (|vy| > vx) at t=%.3f s", t);
  return buf;
}
}  // namespace

TruthDivergenceError::TruthDivergenceError(double t) : Error(divergence_message(t)), t_(t) {}

}  // namespace gripest
