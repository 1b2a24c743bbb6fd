#include "lpm/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lpm/error.hpp"
#include "lpm/parallel.hpp"
#include "lpm/rng.hpp"

namespace lpm {

std::string to_string(DimMethod m) {
    switch (m) {
        case DimMethod::local_pca: return "local_pca";
        case DimMethod::mle_knn: return "mle_knn";
        case DimMethod::simplex_skewness: return "simplex_skewness";
    }
    return "unknown";
}

DimMethod dim_method_from_string(const std::string& s) {
    if (s == "local_pca" || s == "pca") return DimMethod::local_pca;
    if (s == "mle_knn" || s == "mle") return DimMethod::mle_knn;
    if (s == "simplex_skewness" || s == "ess") return DimMethod::simplex_skewness;
    fail(ErrorCode::config, "unknown intrinsic-dimension method '" + s + "'");
}

nlohmann::json DimensionEstimate::to_json() const {
    return {{"method", to_string(method)}, {"value", value},         {"k", k},
            {"pca_threshold", pca_threshold}, {"excluded", excluded}};
}

int default_neighbourhood(Eigen::Index n) {
    return std::max(10, static_cast<int>(std::floor(std::sqrt(static_cast<double>(n)) / 2.0)));
}

std::vector<std::vector<int>> knn(const RowMatrix& points, int k) {
    const Eigen::Index n = points.rows();
    require(k >= 1 && k < n, ErrorCode::parameter, "knn needs 1 <= k < n");
    std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
    const Eigen::VectorXd sq = points.rowwise().squaredNorm();
    constexpr Eigen::Index block = 256;
    parallel_for(0, (n + block - 1) / block, [&](long b) {
        const Eigen::Index r0 = b * block;
        const Eigen::Index rows = std::min(block, n - r0);
        const Eigen::MatrixXd gram = points.middleRows(r0, rows) * points.transpose();
        std::vector<std::pair<double, int>> cand(static_cast<std::size_t>(n));
        for (Eigen::Index r = 0; r < rows; ++r) {
            const Eigen::Index i = r0 + r;
            for (Eigen::Index j = 0; j < n; ++j) {
                const double d2 = j == i ? std::numeric_limits<double>::infinity()
                                         : std::max(0.0, sq(i) + sq(j) - 2.0 * gram(r, j));
                cand[j] = {d2, static_cast<int>(j)};
            }
            std::nth_element(cand.begin(), cand.begin() + k, cand.end());
            // exact distances for the candidates so near-ties resolve consistently
            std::vector<std::pair<double, int>> top;
            const double cut = cand[k].first;
            for (const auto& c : cand)
                if (c.first <= cut * (1.0 + 1e-9) + 1e-300 && c.second != i)
                    top.emplace_back((points.row(i) - points.row(c.second)).squaredNorm(), c.second);
            std::sort(top.begin(), top.end());
            auto& nb = out[i];
            nb.resize(static_cast<std::size_t>(k));
            for (int t = 0; t < k; ++t) nb[t] = top[t].second;
        }
    });
    return out;
}

double simplex_skewness_reference(int m) {
    require(m >= 1, ErrorCode::parameter, "simplex skewness reference needs m >= 1");
    if (m == 1) return 0.0;
    return std::exp(2.0 * std::lgamma(m / 2.0) - std::lgamma((m - 1) / 2.0) - std::lgamma((m + 1) / 2.0));
}

namespace {

double invert_skewness(double s, int D) {
    if (s <= 0.0) return 1.0;
    for (int m = 1; m < D; ++m) {
        const double a = simplex_skewness_reference(m), b = simplex_skewness_reference(m + 1);
        if (s <= b) return m + (s - a) / (b - a);
    }
    return D;
}

}  // namespace

DimensionEstimate intrinsic_dim(const RowMatrix& points, DimMethod method, const DimParams& params) {
    const Eigen::Index n = points.rows();
    const int D = static_cast<int>(points.cols());
    const int k = params.k ? *params.k : default_neighbourhood(n);
    require(D >= 1, ErrorCode::parameter, "intrinsic_dim needs at least one coordinate");
    require(k < n, ErrorCode::parameter, "intrinsic_dim needs n > k");
    require(k >= (method == DimMethod::mle_knn ? 3 : 2), ErrorCode::parameter,
            "neighbourhood size too small for " + to_string(method));
    require(params.pca_threshold > 0.0 && params.pca_threshold < 1.0, ErrorCode::parameter,
            "pca_threshold must lie in (0, 1)");

    const auto nb = knn(points, k);
    DimensionEstimate est;
    est.method = method;
    est.k = k;
    est.pca_threshold = params.pca_threshold;
    est.per_point = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());

    // MLE averages inverse local estimates, so per-point values hold those.
    Eigen::VectorXd local(n);
    std::vector<char> excluded(static_cast<std::size_t>(n), 0);
    parallel_for(0, n, [&](long i) {
        const auto& nbi = nb[i];
        if ((points.row(i) - points.row(nbi[0])).squaredNorm() == 0.0) {
            excluded[i] = 1;
            return;
        }
        switch (method) {
            case DimMethod::local_pca: {
                Eigen::MatrixXd P(k + 1, D);
                P.row(0) = points.row(i);
                for (int t = 0; t < k; ++t) P.row(t + 1) = points.row(nbi[t]);
                const Eigen::MatrixXd C = P.rowwise() - P.colwise().mean();
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C.transpose() * C, Eigen::EigenvaluesOnly);
                const Eigen::VectorXd ev = es.eigenvalues();
                const double top = ev.maxCoeff();
                local(i) = static_cast<double>((ev.array() >= params.pca_threshold * top).count());
                break;
            }
            case DimMethod::mle_knn: {
                const double Tk = (points.row(i) - points.row(nbi[k - 1])).norm();
                double acc = 0.0;
                for (int j = 0; j < k - 1; ++j) acc += std::log(Tk / (points.row(i) - points.row(nbi[j])).norm());
                local(i) = acc / (k - 1);  // inverse of the local dimension
                break;
            }
            case DimMethod::simplex_skewness: {
                Eigen::MatrixXd P(k + 1, D);
                P.row(0) = points.row(i);
                for (int t = 0; t < k; ++t) P.row(t + 1) = points.row(nbi[t]);
                const Eigen::MatrixXd C = P.rowwise() - P.colwise().mean();
                const Eigen::MatrixXd G = C * C.transpose();
                double num = 0.0, den = 0.0;
                for (int a = 0; a <= k; ++a) {
                    for (int b = a + 1; b <= k; ++b) {
                        const double nn = G(a, a) * G(b, b);
                        num += std::sqrt(std::max(0.0, nn - G(a, b) * G(a, b)));
                        den += std::sqrt(nn);
                    }
                }
                local(i) = den > 0.0 ? invert_skewness(num / den, D) : 1.0;
                break;
            }
        }
    });

    double acc = 0.0;
    int used = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (excluded[i]) {
            ++est.excluded;
            continue;
        }
        est.per_point(i) = method == DimMethod::mle_knn ? (local(i) > 0.0 ? 1.0 / local(i) : D) : local(i);
        acc += local(i);
        ++used;
    }
    require(used > 0, ErrorCode::parameter, "every point has a duplicate neighbour");
    est.value = acc / used;
    if (method == DimMethod::mle_knn) est.value = est.value > 0.0 ? 1.0 / est.value : D;
    est.value = std::clamp(est.value, 0.0, static_cast<double>(D));
    return est;
}

int RidgeSet::converged_count() const {
    return static_cast<int>(std::count(converged.begin(), converged.end(), true));
}

double normal_reference_bandwidth(const RowMatrix& points) {
    const Eigen::Index n = points.rows();
    const auto D = static_cast<double>(points.cols());
    require(n >= 2, ErrorCode::parameter, "bandwidth rule needs at least 2 points");
    const Eigen::RowVectorXd mean = points.colwise().mean();
    const Eigen::RowVectorXd sd = ((points.rowwise() - mean).array().square().colwise().sum() / (n - 1.0)).sqrt();
    const double sigma = sd.mean();
    require(sigma > 0.0, ErrorCode::parameter, "bandwidth rule: point cloud has zero spread");
    return std::pow(4.0 / (D + 2.0), 1.0 / (D + 4.0)) * std::pow(static_cast<double>(n), -1.0 / (D + 4.0)) * sigma;
}

RidgeSet scms_ridge(const RowMatrix& points, const RidgeOptions& options) {
    const Eigen::Index n = points.rows();
    const int D = static_cast<int>(points.cols());
    require(n >= 2, ErrorCode::parameter, "scms_ridge needs at least 2 points");
    require(options.ridge_dim >= 0 && options.ridge_dim < D, ErrorCode::parameter, "ridge_dim must lie in [0, D)");
    const double h = options.bandwidth ? *options.bandwidth : normal_reference_bandwidth(points);
    require(h > 0.0, ErrorCode::parameter, "bandwidth must be positive");

    RidgeSet out;
    out.bandwidth = h;
    out.ridge_dim = options.ridge_dim;
    if (options.starts) {
        out.start_indices = *options.starts;
        for (int s : out.start_indices)
            require(s >= 0 && s < n, ErrorCode::parameter, "ridge start index out of range");
    } else {
        std::vector<int> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        Rng rng(options.seed);
        const auto m = static_cast<std::size_t>(std::max<Eigen::Index>(1, (n + 9) / 10));
        for (std::size_t t = 0; t < m; ++t) std::swap(all[t], all[t + rng.index(all.size() - t)]);
        all.resize(m);
        std::sort(all.begin(), all.end());
        out.start_indices = std::move(all);
    }
    const auto r = static_cast<Eigen::Index>(out.start_indices.size());
    out.points.resize(r, D);
    out.converged.assign(static_cast<std::size_t>(r), false);
    out.iterations.assign(static_cast<std::size_t>(r), 0);
    const double inv2h2 = 1.0 / (2.0 * h * h);
    const int codim = D - options.ridge_dim;

    std::vector<char> conv(static_cast<std::size_t>(r), 0);
    parallel_for(0, r, [&](long s) {
        Eigen::VectorXd x = points.row(out.start_indices[s]).transpose();
        Eigen::VectorXd c(n);
        int it = 0;
        for (; it < options.max_iterations; ++it) {
            const Eigen::MatrixXd diff = points.rowwise() - x.transpose();  // n x D, x_i - x
            c = (-diff.rowwise().squaredNorm() * inv2h2).array().exp();
            const double total = c.sum();
            if (!(total > 0.0)) break;
            const Eigen::VectorXd shift = diff.transpose() * c / total;
            // Hessian of the KDE up to a positive factor
            Eigen::MatrixXd H = diff.transpose() * c.asDiagonal() * diff / (h * h);
            H.diagonal().array() -= total;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
            const Eigen::MatrixXd V = es.eigenvectors().leftCols(codim);
            const Eigen::VectorXd step = V * (V.transpose() * shift);
            x += step;
            if (step.norm() <= options.tol * h) {
                conv[s] = 1;
                ++it;
                break;
            }
        }
        out.points.row(s) = x.transpose();
        out.iterations[s] = it;
    });
    for (Eigen::Index s = 0; s < r; ++s) out.converged[s] = conv[s] != 0;
    return out;
}

double hausdorff_distance(const RowMatrix& A, const RowMatrix& B) {
    require(A.rows() > 0 && B.rows() > 0, ErrorCode::parameter, "hausdorff_distance needs nonempty sets");
    require(A.cols() == B.cols(), ErrorCode::incompatible, "hausdorff_distance: dimension mismatch");
    auto directed = [](const RowMatrix& X, const RowMatrix& Y) {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            worst = std::max(worst, (Y.rowwise() - X.row(i)).rowwise().squaredNorm().minCoeff());
        return std::sqrt(worst);
    };
    return std::max(directed(A, B), directed(B, A));
}

Eigen::VectorXd distance_to_polyline(const RowMatrix& points, const RowMatrix& curve) {
    require(curve.rows() >= 1 && curve.cols() == points.cols(), ErrorCode::incompatible,
            "distance_to_polyline: dimension mismatch");
    Eigen::VectorXd out(points.rows());
    parallel_for(0, points.rows(), [&](long i) {
        const Eigen::RowVectorXd p = points.row(i);
        double best = (curve.row(0) - p).squaredNorm();
        for (Eigen::Index s = 0; s + 1 < curve.rows(); ++s) {
            const Eigen::RowVectorXd a = curve.row(s), ab = curve.row(s + 1) - a;
            const double len2 = ab.squaredNorm();
            const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
            best = std::min(best, (a + t * ab - p).squaredNorm());
        }
        out(i) = std::sqrt(best);
    });
    return out;
}

}  // namespace lpm
