#pragma once

#include <stdexcept>
#include <string>

namespace fharm {

// Error taxonomy mirrors the CLI exit codes: config/input problems,
// numerical failures (non-convergence, singular data), and
// consistency failures (stale or mismatched artifacts).

struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error("input error: " + msg) {}
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error("numerical error: " + msg) {}
};

struct ConsistencyError : std::runtime_error {
    explicit ConsistencyError(const std::string& msg) : std::runtime_error("consistency error: " + msg) {}
};

} // namespace fharm
