#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpm/types.hpp"

namespace lpm {

enum class DimMethod { local_pca, mle_knn, simplex_skewness };

std::string to_string(DimMethod m);
DimMethod dim_method_from_string(const std::string& s);

struct DimParams {
    std::optional<int> k;          // default max(10, floor(sqrt(n)/2))
    double pca_threshold = 0.05;   // fraction of the largest local eigenvalue
};

struct DimensionEstimate {
    DimMethod method = DimMethod::local_pca;
    double value = 0.0;
    Eigen::VectorXd per_point;     // NaN at excluded points
    int k = 0;
    double pca_threshold = 0.05;
    int excluded = 0;              // points dropped for duplicate neighbours

    nlohmann::json to_json() const;
};

int default_neighbourhood(Eigen::Index n);

/// Indices of the k nearest neighbours of every row (self excluded),
/// nearest first; ties broken by index.
std::vector<std::vector<int>> knn(const RowMatrix& points, int k);

DimensionEstimate intrinsic_dim(const RowMatrix& points, DimMethod method, const DimParams& params = {});

/// Expected |sin| of the angle between two independent uniform directions
/// in R^m; 0 for m = 1.
double simplex_skewness_reference(int m);

struct RidgeOptions {
    std::optional<double> bandwidth;   // auto: normal-reference rule
    int ridge_dim = 1;
    std::optional<std::vector<int>> starts;  // default: 10% random subsample
    std::uint64_t seed = 0;
    int max_iterations = 500;
    double tol = 1e-6;                 // step norm relative to bandwidth
};

struct RidgeSet {
    RowMatrix points;
    std::vector<bool> converged;
    std::vector<int> iterations;
    std::vector<int> start_indices;
    double bandwidth = 0.0;
    int ridge_dim = 1;

    int converged_count() const;
};

double normal_reference_bandwidth(const RowMatrix& points);

/// Subspace-constrained mean shift on a Gaussian KDE.
RidgeSet scms_ridge(const RowMatrix& points, const RidgeOptions& options = {});

double hausdorff_distance(const RowMatrix& A, const RowMatrix& B);

/// Distance from each row of `points` to the polyline through the rows of `curve`.
Eigen::VectorXd distance_to_polyline(const RowMatrix& points, const RowMatrix& curve);

}  // namespace lpm
