#include "lpm/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lpm/error.hpp"
#include "lpm/rng.hpp"

namespace lpm {

Eigen::VectorXd LinearFit::predict(const RowMatrix& X) const {
    return (X * beta).array() + intercept;
}

double mse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    require(a.size() == b.size() && a.size() > 0, ErrorCode::incompatible, "mse: length mismatch");
    return (a - b).squaredNorm() / static_cast<double>(a.size());
}

std::vector<int> fold_labels(Eigen::Index n, int folds, std::uint64_t seed) {
    require(folds >= 2 && folds <= n, ErrorCode::parameter, "cross-validation needs 2 <= folds <= n");
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    for (std::size_t t = perm.size(); t > 1; --t) std::swap(perm[t - 1], perm[rng.index(t)]);
    std::vector<int> label(static_cast<std::size_t>(n));
    for (std::size_t t = 0; t < perm.size(); ++t) label[perm[t]] = static_cast<int>(t % folds);
    return label;
}

namespace {

RowMatrix select_rows(const RowMatrix& X, const std::vector<int>& rows) {
    RowMatrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t t = 0; t < rows.size(); ++t) out.row(static_cast<Eigen::Index>(t)) = X.row(rows[t]);
    return out;
}

Eigen::VectorXd select_rows(const Eigen::VectorXd& y, const std::vector<int>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t t = 0; t < rows.size(); ++t) out(static_cast<Eigen::Index>(t)) = y(rows[t]);
    return out;
}

struct Standardised {
    Eigen::MatrixXd Z;  // column-major for coordinate sweeps
    Eigen::RowVectorXd mean, scale;
    Eigen::VectorXd yc;
    double ymean = 0.0;
};

Standardised standardise(const RowMatrix& X, const Eigen::VectorXd& y) {
    Standardised s;
    const auto n = static_cast<double>(X.rows());
    s.mean = X.colwise().mean();
    s.Z = X.rowwise() - s.mean;
    s.scale = (s.Z.array().square().colwise().sum() / n).sqrt();
    for (Eigen::Index j = 0; j < s.Z.cols(); ++j) {
        if (s.scale(j) > 0.0) s.Z.col(j) /= s.scale(j);
        else s.scale(j) = 0.0;
    }
    s.ymean = y.mean();
    s.yc = y.array() - s.ymean;
    return s;
}

// Coordinate descent for (1/2n)|y - Z b|^2 + lambda |b|_1, warm-started in b.
void lasso_cd(const Standardised& s, double lambda, Eigen::VectorXd& b, Eigen::VectorXd& resid) {
    const auto n = static_cast<double>(s.Z.rows());
    for (int sweep = 0; sweep < 2000; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < s.Z.cols(); ++j) {
            if (s.scale(j) == 0.0) continue;
            const double old = b(j);
            const double rho = s.Z.col(j).dot(resid) / n + old;  // columns have unit mean square
            const double nb = rho > lambda ? rho - lambda : (rho < -lambda ? rho + lambda : 0.0);
            if (nb != old) {
                resid -= (nb - old) * s.Z.col(j);
                b(j) = nb;
                max_change = std::max(max_change, std::abs(nb - old));
            }
        }
        if (max_change < 1e-8) break;
    }
}

LinearFit unstandardise(const Standardised& s, const Eigen::VectorXd& b, double lambda) {
    LinearFit fit;
    fit.lambda = lambda;
    fit.beta = Eigen::VectorXd::Zero(b.size());
    for (Eigen::Index j = 0; j < b.size(); ++j)
        if (s.scale(j) > 0.0) fit.beta(j) = b(j) / s.scale(j);
    fit.intercept = s.ymean - s.mean.dot(fit.beta);
    return fit;
}

std::vector<double> lambda_path(const Standardised& s, int length, double min_ratio) {
    const double lmax = (s.Z.transpose() * s.yc).cwiseAbs().maxCoeff() / static_cast<double>(s.Z.rows());
    std::vector<double> path(static_cast<std::size_t>(length));
    for (int t = 0; t < length; ++t)
        path[t] = lmax * std::pow(min_ratio, length > 1 ? static_cast<double>(t) / (length - 1) : 0.0);
    return path;
}

}  // namespace

LinearFit fit_least_squares(const RowMatrix& X, const Eigen::VectorXd& y) {
    require(X.rows() == y.size() && X.rows() > 0, ErrorCode::incompatible, "least squares: shape mismatch");
    Eigen::MatrixXd A(X.rows(), X.cols() + 1);
    A.col(0).setOnes();
    A.rightCols(X.cols()) = X;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    const Eigen::VectorXd sol = cod.solve(y);
    LinearFit fit;
    fit.intercept = sol(0);
    fit.beta = sol.tail(X.cols());
    fit.rank_deficient = cod.rank() < A.cols();
    return fit;
}

LinearFit fit_lasso(const RowMatrix& X, const Eigen::VectorXd& y, double lambda) {
    const Standardised s = standardise(X, y);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(X.cols());
    Eigen::VectorXd resid = s.yc;
    for (double l : lambda_path(s, 40, 1e-3)) {
        if (l <= lambda) break;
        lasso_cd(s, l, b, resid);
    }
    lasso_cd(s, lambda, b, resid);
    return unstandardise(s, b, lambda);
}

LinearFit fit_lasso_cv(const RowMatrix& X, const Eigen::VectorXd& y, int folds, std::uint64_t seed, int path_length,
                       double min_ratio) {
    require(X.rows() == y.size(), ErrorCode::incompatible, "lasso: shape mismatch");
    const Standardised full = standardise(X, y);
    const std::vector<double> path = lambda_path(full, path_length, min_ratio);
    const auto labels = fold_labels(X.rows(), folds, seed);
    std::vector<double> cv(path.size(), 0.0);
    for (int f = 0; f < folds; ++f) {
        std::vector<int> tr, va;
        for (Eigen::Index i = 0; i < X.rows(); ++i) (labels[i] == f ? va : tr).push_back(static_cast<int>(i));
        const RowMatrix Xtr = select_rows(X, tr), Xva = select_rows(X, va);
        const Eigen::VectorXd ytr = select_rows(y, tr), yva = select_rows(y, va);
        const Standardised s = standardise(Xtr, ytr);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(X.cols());
        Eigen::VectorXd resid = s.yc;
        for (std::size_t t = 0; t < path.size(); ++t) {
            lasso_cd(s, path[t], b, resid);
            cv[t] += mse(unstandardise(s, b, path[t]).predict(Xva), yva) * static_cast<double>(va.size());
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(cv.begin(), cv.end()) - cv.begin());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(X.cols());
    Eigen::VectorXd resid = full.yc;
    for (std::size_t t = 0; t <= best; ++t) lasso_cd(full, path[t], b, resid);
    return unstandardise(full, b, path[best]);
}

Eigen::VectorXd knn_predict(const RowMatrix& Xtrain, const Eigen::VectorXd& ytrain, const RowMatrix& Xq, int k) {
    require(k >= 1 && k <= Xtrain.rows(), ErrorCode::parameter, "k-NN needs 1 <= k <= training rows");
    const Eigen::VectorXd sqt = Xtrain.rowwise().squaredNorm();
    Eigen::VectorXd out(Xq.rows());
    std::vector<std::pair<double, int>> cand(static_cast<std::size_t>(Xtrain.rows()));
    constexpr Eigen::Index block = 256;
    for (Eigen::Index r0 = 0; r0 < Xq.rows(); r0 += block) {
        const Eigen::Index rows = std::min(block, Xq.rows() - r0);
        const Eigen::MatrixXd gram = Xq.middleRows(r0, rows) * Xtrain.transpose();
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double sq = Xq.row(r0 + r).squaredNorm();
            for (Eigen::Index j = 0; j < Xtrain.rows(); ++j)
                cand[j] = {sq + sqt(j) - 2.0 * gram(r, j), static_cast<int>(j)};
            std::nth_element(cand.begin(), cand.begin() + (k - 1), cand.end());
            double acc = 0.0;
            for (int t = 0; t < k; ++t) acc += ytrain(cand[t].second);
            out(r0 + r) = acc / k;
        }
    }
    return out;
}

Eigen::VectorXd KnnFit::predict(const RowMatrix& Xq) const { return knn_predict(X, y, Xq, k); }

KnnFit fit_knn_cv(const RowMatrix& X, const Eigen::VectorXd& y, const std::vector<int>& grid, int folds,
                  std::uint64_t seed) {
    require(!grid.empty(), ErrorCode::parameter, "k-NN grid is empty");
    const auto labels = fold_labels(X.rows(), folds, seed);
    KnnFit fit;
    fit.X = X;
    fit.y = y;
    fit.cv_mse.assign(grid.size(), 0.0);
    for (int f = 0; f < folds; ++f) {
        std::vector<int> tr, va;
        for (Eigen::Index i = 0; i < X.rows(); ++i) (labels[i] == f ? va : tr).push_back(static_cast<int>(i));
        const RowMatrix Xtr = select_rows(X, tr), Xva = select_rows(X, va);
        const Eigen::VectorXd ytr = select_rows(y, tr), yva = select_rows(y, va);
        for (std::size_t g = 0; g < grid.size(); ++g)
            fit.cv_mse[g] += mse(knn_predict(Xtr, ytr, Xva, grid[g]), yva) * static_cast<double>(va.size());
    }
    for (auto& v : fit.cv_mse) v /= static_cast<double>(X.rows());
    fit.k = grid[static_cast<std::size_t>(std::min_element(fit.cv_mse.begin(), fit.cv_mse.end()) - fit.cv_mse.begin())];
    return fit;
}

}  // namespace lpm
