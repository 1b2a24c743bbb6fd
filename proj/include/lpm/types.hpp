#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lpm {

/// Row-major point tables: row i is a contiguous point, so it can be handed
/// out as a span.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> row_span(const RowMatrix& m, Eigen::Index i) {
    return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

/// Counts of positive (p) and negative (q) retained eigenvalues.
struct Signature {
    int p = 0;
    int q = 0;

    int dim() const { return p + q; }
    friend bool operator==(const Signature&, const Signature&) = default;
};

inline Signature signature_from_signs(const std::vector<int>& signs) {
    Signature s;
    for (int v : signs) (v >= 0 ? s.p : s.q) += 1;
    return s;
}

}  // namespace lpm
