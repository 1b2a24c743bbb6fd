#pragma once

#include <cstdint>

#include "lpm/spectrum.hpp"

namespace lpm {

struct CurvatureReport {
    double alpha_hat = 1.0;
    double c_hat = 0.0;
    double max_violation_ratio = 0.0;
    int pairs_tested = 0;
    int pairs_used = 0;  // pairs above the numerical floor, used in the fit
    bool degenerate = false;
};

/// Fits max(D2 f+, D2 f-)(x,y) ~ c |x-y|^(2 alpha) over nearby sampled pairs,
/// with f+ and f- taken from the spectrum's truncated eigenexpansion.
CurvatureReport check_curvature(const KernelSpec& spec, const OperatorSpectrum& spectrum, int n_pairs,
                                std::uint64_t seed);

}  // namespace lpm
