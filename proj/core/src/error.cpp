#include "cglab/error.hpp"

#include <utility>

namespace cglab {

NumericalError::NumericalError(const std::string& what, double location)
    : Error(what), location_(location) {}

NonConvergenceError::NonConvergenceError(const std::string& what, double violation)
    : Error(what), violation_(violation) {}

ConfigError::ConfigError(const std::string& what, std::string key)
    : Error(what), key_(std::move(key)) {}

}  // namespace cglab
