#pragma once

#include <stdexcept>
#include <string>

namespace gnf {

// Base for all library errors. Subclasses map onto the CLI exit-code
// contract: parse -> 2, evaluation -> 3, pipeline stage -> 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inference-time failures: missing input values, unresolved rule
// references, or a zero aggregate (no rule fired).
class EvalError : public Error {
public:
    using Error::Error;
};

// Vector/matrix shape mismatches.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Invalid configuration values (population size, tolerances, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, int epoch)
        : Error(what), epoch(epoch) {}
    int epoch;
};

}  // namespace gnf
