#pragma once

#include <stdexcept>
#include <string>

namespace lpm {

/// Failure categories. The C API maps these one-to-one onto `lpm_status`.
enum class ErrorCode {
    domain = 1,         // point outside the kernel domain
    range,              // a kernel leaves [0,1]
    unsupported,        // operation not defined for this kernel family
    parameter,          // argument out of its admissible range
    config,             // malformed configuration or input file
    numeric,            // solver failure
    incompatible,       // mismatched signatures / shapes
    rank_deficient,     // no nonzero eigenpair to retain
    io,                 // filesystem failure
    isolated_nodes,     // Laplacian of a graph with degree-zero nodes
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) fail(code, what);
}

}  // namespace lpm
