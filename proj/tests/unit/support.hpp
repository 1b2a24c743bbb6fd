#pragma once

#include <cmath>
#include <optional>
#include <span>

#include "lpm/error.hpp"
#include "lpm/types.hpp"

namespace test {

/// Code of the lpm::Error thrown by f, empty when it returns normally.
template <class F>
std::optional<lpm::ErrorCode> error_of(F&& f) {
    try {
        f();
    } catch (const lpm::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

inline std::span<const double> pt(const double& x) { return {&x, 1}; }

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace test
