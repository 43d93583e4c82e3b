#pragma once

#include <stdexcept>
#include <string>

namespace repsim {

/// Failure categories surfaced by the library. The CLI maps these to its
/// exit-code contract (user/input faults exit 2, internal faults exit 1)
/// and prints the kind string in its machine-readable error output.
enum class ErrorKind {
    format,                // malformed file contents
    unsupported,           // recognized but outside the supported surface
    data,                  // non-finite or otherwise unusable values
    io,                    // filesystem failures
    shape,                 // dimension mismatches
    consistency,           // cross-layer/cross-file disagreements
    manifest,              // activation manifest violations
    insufficient_samples,  // estimator needs more examples
    degenerate,            // zero-information input (constant rows, zero bandwidth/variance)
    alignment,             // compared sets were not evaluated on the same examples
    aggregation,           // incompatible inputs to an averaging step
    argument,              // bad in-memory argument
    validation,            // descriptor failed validation
    usage,                 // bad command-line invocation
    internal,
};

const char* to_string(ErrorKind kind) noexcept;

/// True for kinds caused by user-supplied inputs rather than library bugs.
bool user_fault(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace repsim
