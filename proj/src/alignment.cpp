#include "lpm/alignment.hpp"

#include <cmath>
#include <set>

#include <unsupported/Eigen/MatrixFunctions>

#include "lpm/error.hpp"

namespace lpm {

namespace {

Eigen::VectorXd sign_vector(const std::vector<int>& signs) {
    Eigen::VectorXd s(static_cast<Eigen::Index>(signs.size()));
    for (std::size_t j = 0; j < signs.size(); ++j) s(static_cast<Eigen::Index>(j)) = signs[j] >= 0 ? 1.0 : -1.0;
    return s;
}

double misfit(const RowMatrix& X_hat, const Eigen::MatrixXd& Q, const RowMatrix& X) {
    return (X_hat * Q.transpose() - X).squaredNorm();
}

// Orthogonal Procrustes on each sign block separately.
Eigen::MatrixXd block_procrustes(const RowMatrix& X_hat, const RowMatrix& X, const std::vector<int>& signs) {
    const auto D = static_cast<Eigen::Index>(signs.size());
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(D, D);
    for (int sgn : {1, -1}) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < D; ++j)
            if ((signs[j] >= 0 ? 1 : -1) == sgn) idx.push_back(j);
        if (idx.empty()) continue;
        const auto b = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd A(X_hat.rows(), b), B(X.rows(), b);
        for (Eigen::Index t = 0; t < b; ++t) {
            A.col(t) = X_hat.col(idx[t]);
            B.col(t) = X.col(idx[t]);
        }
        // min |A R^T - B|: R^T = U V^T with A^T B = U S V^T
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(A.transpose() * B, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Eigen::MatrixXd R = svd.matrixV() * svd.matrixU().transpose();
        for (Eigen::Index r = 0; r < b; ++r)
            for (Eigen::Index c = 0; c < b; ++c) Q(idx[r], idx[c]) = R(r, c);
    }
    return Q;
}

}  // namespace

double constraint_residual(const Eigen::MatrixXd& Q, const std::vector<int>& signs) {
    const Eigen::MatrixXd S = sign_vector(signs).asDiagonal();
    return (Q * S * Q.transpose() - S).cwiseAbs().maxCoeff();
}

AlignmentResult align_indefinite(const RowMatrix& X_hat, const std::vector<int>& signs, const RowMatrix& X_target,
                                 Signature signature, const AlignOptions& options) {
    const auto D = static_cast<Eigen::Index>(signs.size());
    require(D >= 1, ErrorCode::parameter, "alignment needs at least one coordinate");
    require(signature_from_signs(signs) == signature, ErrorCode::incompatible,
            "signature does not match the embedding's eigenvalue signs");
    require(X_hat.cols() == D && X_target.cols() == D && X_hat.rows() == X_target.rows(), ErrorCode::incompatible,
            "embedding and target shapes differ");
    const Eigen::VectorXd s = sign_vector(signs);

    AlignmentResult res;
    Eigen::MatrixXd Q = block_procrustes(X_hat, X_target, signs);
    double obj = misfit(X_hat, Q, X_target);
    res.objective_initial = obj;
    res.objective_trace.push_back(obj);

    // Levenberg-Marquardt on Q <- exp(K S) Q, K skew-symmetric.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> gens;
    for (Eigen::Index a = 0; a < D; ++a)
        for (Eigen::Index b = a + 1; b < D; ++b) gens.emplace_back(a, b);
    const auto P = static_cast<Eigen::Index>(gens.size());
    const Eigen::Index n = X_hat.rows();
    res.converged = true;
    if (P > 0 && obj > 0.0) {
        res.converged = false;
        double mu = 1e-3;
        for (int it = 0; it < options.max_iterations; ++it) {
            res.iterations = it + 1;
            const Eigen::MatrixXd Y = X_hat * Q.transpose();
            const Eigen::MatrixXd R = Y - X_target;
            const Eigen::MatrixXd YS = Y * s.asDiagonal();
            // dY/dK_ab = Y (G_ab)^T with G_ab = (e_a e_b^T - e_b e_a^T) S:
            // column a gains YS_b and column b loses YS_a.
            Eigen::MatrixXd J(n * D, P);
            for (Eigen::Index t = 0; t < P; ++t) {
                const auto [a, b] = gens[t];
                Eigen::MatrixXd dY = Eigen::MatrixXd::Zero(n, D);
                dY.col(a) = YS.col(b);
                dY.col(b) = -YS.col(a);
                J.col(t) = Eigen::Map<const Eigen::VectorXd>(dY.data(), n * D);
            }
            const Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(R.data(), n * D);
            const Eigen::MatrixXd JtJ = J.transpose() * J;
            const Eigen::VectorXd g = J.transpose() * r;
            if (g.norm() <= 1e-15 * std::max(1.0, obj)) {
                res.converged = true;
                break;
            }
            bool accepted = false;
            Eigen::VectorXd delta;
            for (int tries = 0; tries < 40 && !accepted; ++tries) {
                Eigen::MatrixXd H = JtJ;
                H.diagonal() += mu * (JtJ.diagonal().array() + 1e-12).matrix();
                delta = -H.ldlt().solve(g);
                Eigen::MatrixXd K = Eigen::MatrixXd::Zero(D, D);
                for (Eigen::Index t = 0; t < P; ++t) {
                    K(gens[t].first, gens[t].second) = delta(t);
                    K(gens[t].second, gens[t].first) = -delta(t);
                }
                const Eigen::MatrixXd E = (K * s.asDiagonal()).exp();
                const Eigen::MatrixXd Qn = E * Q;
                const double on = misfit(X_hat, Qn, X_target);
                if (on <= obj) {
                    accepted = true;
                    Q = Qn;
                    const double decrease = obj - on;
                    obj = on;
                    mu = std::max(mu / 3.0, 1e-12);
                    res.objective_trace.push_back(obj);
                    if (delta.norm() < options.step_tol || decrease <= 1e-15 * std::max(obj, 1e-300)) res.converged = true;
                } else {
                    mu *= 4.0;
                }
            }
            if (!accepted || res.converged) {
                res.converged = true;  // no descent direction left at machine precision
                break;
            }
        }
    }
    res.Q = Q;
    res.objective_final = obj;
    res.constraint_residual = constraint_residual(Q, signs);

    RowMatrix Y = X_hat * Q.transpose();
    res.scaling = Eigen::VectorXd::Ones(D);
    if (options.fit_scaling) {
        for (Eigen::Index j = 0; j < D; ++j) {
            const double yy = Y.col(j).squaredNorm();
            if (yy > 0.0) res.scaling(j) = Y.col(j).dot(X_target.col(j)) / yy;
        }
        const double dev = (res.scaling.array() - 1.0).abs().maxCoeff();
        if (dev <= options.scaling_band) {
            res.scaling_applied = true;
            Y = Y * res.scaling.asDiagonal();
        } else {
            res.scaling_flagged = true;
        }
    }
    const Eigen::VectorXd err = (Y - X_target).rowwise().norm();
    res.max_error = n > 0 ? err.maxCoeff() : 0.0;
    res.mean_error = n > 0 ? err.mean() : 0.0;
    return res;
}

AlignmentResult align_indefinite(const EmbeddingMatrix& X_hat, const RowMatrix& X_target, Signature signature,
                                 const AlignOptions& options) {
    return align_indefinite(X_hat.coords, X_hat.eig_signs, X_target, signature, options);
}

nlohmann::json AlignmentResult::to_json() const {
    nlohmann::json q = nlohmann::json::array();
    for (Eigen::Index r = 0; r < Q.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(Q.cols()));
        for (Eigen::Index c = 0; c < Q.cols(); ++c) row[c] = Q(r, c);
        q.push_back(row);
    }
    return {
        {"Q", q},
        {"max_error", max_error},
        {"mean_error", mean_error},
        {"constraint_residual", constraint_residual},
        {"iterations", iterations},
        {"converged", converged},
        {"objective_initial", objective_initial},
        {"objective_final", objective_final},
        {"scaling", std::vector<double>(scaling.data(), scaling.data() + scaling.size())},
        {"scaling_applied", scaling_applied},
        {"scaling_flagged", scaling_flagged},
    };
}

RowMatrix lse_target(const RowMatrix& X, const std::vector<int>& signs) {
    require(X.cols() == static_cast<Eigen::Index>(signs.size()), ErrorCode::incompatible,
            "lse_target: sign vector length differs from the column count");
    const Eigen::VectorXd s = sign_vector(signs);
    const Eigen::VectorXd total = X.colwise().sum().transpose();
    const Eigen::VectorXd bracket = X * s.cwiseProduct(total);
    RowMatrix out(X.rows(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        require(bracket(i) > 0.0, ErrorCode::parameter,
                "lse_target: non-positive bracket at row " + std::to_string(i));
        out.row(i) = X.row(i) / std::sqrt(bracket(i));
    }
    return out;
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& errors) {
    std::set<double> distinct;
    for (const auto& [n, e] : errors) {
        require(n > 0.0, ErrorCode::parameter, "rate_fit: n must be positive");
        require(e > 0.0, ErrorCode::domain, "rate_fit: non-positive error value cannot be log-transformed");
        distinct.insert(n);
    }
    require(distinct.size() >= 3, ErrorCode::parameter, "rate_fit needs at least 3 distinct n values");
    const auto m = static_cast<double>(errors.size());
    double sx = 0, sy = 0;
    for (const auto& [n, e] : errors) {
        sx += std::log(n);
        sy += std::log(e);
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (const auto& [n, e] : errors) {
        const double dx = std::log(n) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(e) - my);
    }
    RateFit fit;
    fit.points = static_cast<int>(errors.size());
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0;
    for (const auto& [n, e] : errors) {
        const double r = std::log(e) - fit.intercept - fit.slope * std::log(n);
        rss += r * r;
    }
    fit.standard_error = errors.size() > 2 ? std::sqrt(rss / (m - 2.0) / sxx) : 0.0;
    fit.half_width = 2.0 * fit.standard_error;
    return fit;
}

RowMatrix phi_targets(const OperatorSpectrum& spectrum, const RowMatrix& latents, const std::vector<int>& signs) {
    const RowMatrix full = phi_matrix(spectrum, latents);
    const auto sp = spectrum.signs();
    std::vector<bool> used(sp.size(), false);
    RowMatrix out(latents.rows(), static_cast<Eigen::Index>(signs.size()));
    for (std::size_t c = 0; c < signs.size(); ++c) {
        const int want = signs[c] >= 0 ? 1 : -1;
        std::size_t j = 0;
        while (j < sp.size() && (used[j] || sp[j] != want)) ++j;
        require(j < sp.size(), ErrorCode::incompatible,
                "spectrum has too few eigenvalues of sign " + std::to_string(want) + " to match the embedding");
        used[j] = true;
        out.col(static_cast<Eigen::Index>(c)) = full.col(static_cast<Eigen::Index>(j));
    }
    return out;
}

}  // namespace lpm
