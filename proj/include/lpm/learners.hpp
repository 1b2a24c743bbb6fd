#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "lpm/types.hpp"

namespace lpm {

struct LinearFit {
    Eigen::VectorXd beta;  // coefficients on the raw features
    double intercept = 0.0;
    bool rank_deficient = false;
    double lambda = 0.0;   // lasso penalty (0 for least squares)

    Eigen::VectorXd predict(const RowMatrix& X) const;
};

/// Least squares with intercept, minimum-norm solution when singular.
LinearFit fit_least_squares(const RowMatrix& X, const Eigen::VectorXd& y);

/// Lasso by coordinate descent on standardised features, penalty chosen by
/// `folds`-fold cross-validation over a log-spaced path.
LinearFit fit_lasso_cv(const RowMatrix& X, const Eigen::VectorXd& y, int folds, std::uint64_t seed,
                       int path_length = 40, double min_ratio = 1e-3);

/// Lasso at a fixed penalty on standardised features.
LinearFit fit_lasso(const RowMatrix& X, const Eigen::VectorXd& y, double lambda);

struct KnnFit {
    RowMatrix X;
    Eigen::VectorXd y;
    int k = 5;
    std::vector<double> cv_mse;  // per candidate k

    Eigen::VectorXd predict(const RowMatrix& Xq) const;
};

KnnFit fit_knn_cv(const RowMatrix& X, const Eigen::VectorXd& y, const std::vector<int>& grid, int folds,
                  std::uint64_t seed);

/// Mean of y over the k nearest training rows of each query row.
Eigen::VectorXd knn_predict(const RowMatrix& Xtrain, const Eigen::VectorXd& ytrain, const RowMatrix& Xq, int k);

double mse(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Fold label in [0, folds) per row, balanced, shuffled by seed.
std::vector<int> fold_labels(Eigen::Index n, int folds, std::uint64_t seed);

}  // namespace lpm
