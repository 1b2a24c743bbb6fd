#pragma once

#include <utility>
#include <vector>

#include <json.hpp>

#include "lpm/embedding.hpp"
#include "lpm/spectrum.hpp"
#include "lpm/types.hpp"

namespace lpm {

struct AlignOptions {
    int max_iterations = 500;
    double step_tol = 1e-12;
    bool fit_scaling = true;     // extra diagonal scaling, see AlignmentResult
    double scaling_band = 0.1;   // scaling applied only within this of identity
};

struct AlignmentResult {
    Eigen::MatrixXd Q;           // rows are aligned as Q * xhat_i
    double max_error = 0.0;
    double mean_error = 0.0;
    double constraint_residual = 0.0;  // max-entry |Q S Q^T - S|
    int iterations = 0;
    bool converged = true;
    double objective_initial = 0.0;    // Frobenius misfit after Procrustes
    double objective_final = 0.0;
    Eigen::VectorXd scaling;           // fitted diagonal, per column
    bool scaling_applied = false;      // errors measured after the scaling
    bool scaling_flagged = false;      // scaling outside the band: not applied
    std::vector<double> objective_trace;

    nlohmann::json to_json() const;
};

/// Fits Q in O(p,q) (with respect to diag(signs)) minimising
/// sum_i |Q xhat_i - x_i|^2.
AlignmentResult align_indefinite(const RowMatrix& X_hat, const std::vector<int>& signs, const RowMatrix& X_target,
                                 Signature signature, const AlignOptions& options = {});
AlignmentResult align_indefinite(const EmbeddingMatrix& X_hat, const RowMatrix& X_target, Signature signature,
                                 const AlignOptions& options = {});

/// Constraint residual of an arbitrary transform.
double constraint_residual(const Eigen::MatrixXd& Q, const std::vector<int>& signs);

/// Row i divided by sqrt([x_i, sum_j x_j]).
RowMatrix lse_target(const RowMatrix& X, const std::vector<int>& signs);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double standard_error = 0.0;
    double half_width = 0.0;  // 2 x standard error
    int points = 0;
};

/// Least-squares slope of log(error) on log(n).
RateFit rate_fit(const std::vector<std::pair<double, double>>& errors);

/// phi at each latent row, with spectrum columns chosen so their sign
/// sequence matches `signs` (next unused eigenpair of the same sign).
RowMatrix phi_targets(const OperatorSpectrum& spectrum, const RowMatrix& latents, const std::vector<int>& signs);

}  // namespace lpm
