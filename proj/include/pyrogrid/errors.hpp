#pragma once

#include <stdexcept>
#include <string>

namespace pyrogrid {

/// Bad input: malformed files, violated invariants, inconsistent configuration.
/// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Failure while a simulation is running (I/O, numerical degeneracy).
/// The CLI maps this to exit code 2.
class SimulationError : public std::runtime_error {
public:
    explicit SimulationError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace pyrogrid
