#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lpm/kernels.hpp"
#include "lpm/types.hpp"

namespace lpm {

enum class QuadratureScheme { gauss_legendre_tensor, uniform_midpoint, monte_carlo };
enum class Weighting { lebesgue, latent_density };

std::string to_string(QuadratureScheme s);
std::string to_string(Weighting w);
QuadratureScheme quadrature_scheme_from_string(const std::string& s);
Weighting weighting_from_string(const std::string& s);

/// Nodes and positive weights standing in for an integral over a box.
/// Lebesgue weights sum to the box volume; latent-density weights sum to 1.
struct QuadratureGrid {
    RowMatrix nodes;  // m x d
    Eigen::VectorXd weights;
    QuadratureScheme scheme = QuadratureScheme::gauss_legendre_tensor;
    Weighting weighting = Weighting::lebesgue;
    std::vector<std::string> warnings;

    Eigen::Index size() const { return nodes.rows(); }
    int dim() const { return static_cast<int>(nodes.cols()); }
    Point node(Eigen::Index i) const { return row_span(nodes, i); }
};

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int m);

/// Tensor grid with `per_axis` nodes per coordinate. For d > 3 the tensor
/// schemes are replaced by `mc_nodes` Monte-Carlo nodes with equal weights,
/// and a warning is recorded.
QuadratureGrid make_grid(const Box& box, int per_axis,
                         QuadratureScheme scheme = QuadratureScheme::gauss_legendre_tensor,
                         int mc_nodes = 2048, std::uint64_t seed = 0);

/// Reweights by a probability density and renormalises to total mass 1.
/// Nodes where the density vanishes are dropped.
QuadratureGrid weight_by_density(const QuadratureGrid& grid, const std::function<double(Point)>& density);

}  // namespace lpm
