#pragma once

#include <stdexcept>
#include <string>

namespace hsi {

// Malformed input, schema violations, bad arguments. CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File system and parse failures. Also reported as exit code 2 by the CLI.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite energy or similar numerical abort. CLI exit code 3.
class OptimizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Failure raised by an inpainting backend, tagged with the denoising step.
class BackendError : public std::runtime_error {
public:
    BackendError(const std::string& what, int step)
        : std::runtime_error(what), step_(step) {}
    int step() const { return step_; }

private:
    int step_;
};

}  // namespace hsi
