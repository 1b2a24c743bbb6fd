#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lpm {

/// Symmetric operator given by a matrix-vector product, with an optional
/// dense materialisation for the direct path.
struct SymmetricOperator {
    Eigen::Index n = 0;
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> apply;
    std::function<Eigen::MatrixXd()> dense;
};

struct EigenOptions {
    double tol = 1e-10;             // Lanczos Ritz residual, relative to |lambda_max|
    double residual_tol = 1e-8;     // accepted |Av - lambda v| / |A|
    Eigen::Index dense_max_n = 2000;
    int dense_min_k = 33;           // k at or above this always goes dense
    Eigen::Index dense_limit = 12000;
    int max_krylov = 800;
};

struct EigenResult {
    Eigen::VectorXd values;   // descending |lambda|, positive first on ties
    Eigen::MatrixXd vectors;  // n x k, largest-magnitude entry positive
    double norm = 0.0;        // |lambda_max| of the operator
    double max_residual = 0.0;
    std::string solver;
    int iterations = 0;
    std::vector<std::string> notes;
};

/// The k largest-magnitude eigenpairs.
EigenResult top_eigenpairs(const SymmetricOperator& op, int k, const EigenOptions& options = {});

/// Dense path: tridiagonal reduction, all eigenvalues, then eigenvectors only
/// for the selected index ranges.
EigenResult dense_top_eigenpairs(Eigen::MatrixXd a, int k);

}  // namespace lpm
