#include "lpm/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <lapacke.h>

#include "lpm/error.hpp"
#include "lpm/rng.hpp"

namespace lpm {

namespace {

// Orders columns by |lambda| descending (positive first on ties) and flips
// each vector so its largest-magnitude entry is positive.
void canonicalise(EigenResult& r) {
    const Eigen::Index k = r.values.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    const double tie = 1e-12 * std::max(r.norm, r.values.cwiseAbs().maxCoeff());
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double da = std::abs(r.values(a)), db = std::abs(r.values(b));
        if (std::abs(da - db) > tie) return da > db;
        return r.values(a) > r.values(b);
    });
    Eigen::VectorXd values(k);
    Eigen::MatrixXd vectors(r.vectors.rows(), k);
    for (Eigen::Index j = 0; j < k; ++j) {
        values(j) = r.values(order[j]);
        Eigen::VectorXd v = r.vectors.col(order[j]);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) v = -v;
        vectors.col(j) = v;
    }
    r.values = std::move(values);
    r.vectors = std::move(vectors);
}

double max_relative_residual(const SymmetricOperator& op, const EigenResult& r) {
    if (r.norm == 0.0) return 0.0;
    double worst = 0.0;
    Eigen::VectorXd av(op.n);
    for (Eigen::Index j = 0; j < r.values.size(); ++j) {
        op.apply(r.vectors.col(j), av);
        worst = std::max(worst, (av - r.values(j) * r.vectors.col(j)).norm() / r.norm);
    }
    return worst;
}

bool lanczos(const SymmetricOperator& op, int k, const EigenOptions& opt, EigenResult& out) {
    const Eigen::Index n = op.n;
    const int kmax = static_cast<int>(std::min<Eigen::Index>(n, std::max(opt.max_krylov, 4 * k + 40)));
    Eigen::MatrixXd V(n, kmax);
    std::vector<double> alpha, beta;
    Rng rng(0x5eedULL);
    auto random_unit = [&]() {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
        return v;
    };
    auto orthogonalise = [&](Eigen::VectorXd& w, int cols) {
        for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(cols) * (V.leftCols(cols).transpose() * w);
    };
    Eigen::VectorXd v = random_unit();
    V.col(0) = v / v.norm();
    Eigen::VectorXd w(n);
    const int check_every = 10;
    for (int j = 0; j < kmax; ++j) {
        op.apply(V.col(j), w);
        const double a = V.col(j).dot(w);
        alpha.push_back(a);
        orthogonalise(w, j + 1);
        double b = w.norm();
        const int m = j + 1;
        const bool last = m == kmax;
        const bool breakdown = b < 1e-13 * std::max(1.0, std::abs(a));
        if (m >= k && (m % check_every == 0 || last || breakdown)) {
            Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
            Eigen::VectorXd sub = beta.empty() ? Eigen::VectorXd() : Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
            tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
            const Eigen::VectorXd& theta = tri.eigenvalues();
            std::vector<int> idx(static_cast<std::size_t>(m));
            std::iota(idx.begin(), idx.end(), 0);
            std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) { return std::abs(theta(x)) > std::abs(theta(y)); });
            const double scale = std::abs(theta(idx[0]));
            const double resid_beta = breakdown ? 0.0 : b;
            bool converged = scale > 0.0;
            for (int t = 0; t < k && converged; ++t)
                converged = resid_beta * std::abs(tri.eigenvectors()(m - 1, idx[t])) <= opt.tol * scale;
            if (converged || last) {
                out.values.resize(k);
                out.vectors.resize(n, k);
                for (int t = 0; t < k; ++t) {
                    out.values(t) = theta(idx[t]);
                    out.vectors.col(t) = V.leftCols(m) * tri.eigenvectors().col(idx[t]);
                    out.vectors.col(t).normalize();
                }
                out.norm = scale;
                out.iterations = m;
                if (converged) return true;
                out.notes.push_back("Lanczos reached the Krylov limit " + std::to_string(kmax) + " without converging");
                return false;
            }
        }
        if (last) break;
        if (breakdown) {
            // invariant subspace: continue from a fresh direction
            w = random_unit();
            orthogonalise(w, m);
            b = 0.0;
            V.col(m) = w / w.norm();
        } else {
            V.col(m) = w / b;
        }
        beta.push_back(b);
    }
    return false;
}

}  // namespace

EigenResult dense_top_eigenpairs(Eigen::MatrixXd a, int k) {
    const auto n = static_cast<lapack_int>(a.rows());
    require(k >= 1 && k <= n, ErrorCode::parameter, "requested eigenpair count must lie in [1, n]");
    EigenResult r;
    r.solver = "dense";
    std::vector<double> d(n), e(std::max<lapack_int>(n, 1)), tau(std::max<lapack_int>(n - 1, 1));
    lapack_int info = LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'L', n, a.data(), n, d.data(), e.data(), tau.data());
    require(info == 0, ErrorCode::numeric, "dsytrd failed, info=" + std::to_string(info));

    std::vector<double> all = d, ework(e.begin(), e.end());
    info = LAPACKE_dsterf(n, all.data(), ework.data());
    require(info == 0, ErrorCode::numeric, "dsterf failed to converge, info=" + std::to_string(info));
    r.norm = n > 0 ? std::max(std::abs(all.front()), std::abs(all.back())) : 0.0;

    // two-pointer walk over the ascending spectrum picks the k largest |lambda|
    lapack_int lo = 0, hi = n - 1;
    int kneg = 0, kpos = 0;
    const double tie = 1e-12 * r.norm;
    for (int t = 0; t < k; ++t) {
        if (std::abs(all[hi]) + tie >= std::abs(all[lo])) {
            --hi;
            ++kpos;
        } else {
            ++lo;
            ++kneg;
        }
    }

    r.values.resize(k);
    r.vectors.resize(n, k);
    auto stemr = [&](lapack_int il, lapack_int iu, int col0) {
        const lapack_int cnt = iu - il + 1;
        std::vector<double> dd = d, ee(e.begin(), e.end()), w(n);
        Eigen::MatrixXd z(n, cnt);
        std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(cnt));
        lapack_int found = 0;
        lapack_logical tryrac = 1;
        const lapack_int st = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', n, dd.data(), ee.data(), 0.0, 0.0, il, iu,
                                             &found, w.data(), z.data(), n, cnt, isuppz.data(), &tryrac);
        require(st == 0 && found == cnt, ErrorCode::numeric, "dstemr failed, info=" + std::to_string(st));
        for (lapack_int c = 0; c < cnt; ++c) {
            r.values(col0 + c) = w[c];
            r.vectors.col(col0 + c) = z.col(c);
        }
    };
    if (kneg > 0) stemr(1, kneg, 0);
    if (kpos > 0) stemr(n - kpos + 1, n, kneg);
    if (n > 1) {
        info = LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'L', 'N', n, k, a.data(), n, tau.data(), r.vectors.data(), n);
        require(info == 0, ErrorCode::numeric, "dormtr failed, info=" + std::to_string(info));
    }
    canonicalise(r);
    return r;
}

EigenResult top_eigenpairs(const SymmetricOperator& op, int k, const EigenOptions& options) {
    require(k >= 1 && k <= op.n, ErrorCode::parameter, "requested eigenpair count must lie in [1, n]");
    const bool want_dense = op.n <= options.dense_max_n || k >= options.dense_min_k;
    const bool dense_ok = static_cast<bool>(op.dense) && op.n <= options.dense_limit;
    EigenResult r;
    std::vector<std::string> notes;
    if (!(want_dense && dense_ok)) {
        if (lanczos(op, k, options, r)) {
            r.solver = "lanczos";
            canonicalise(r);
            r.max_residual = max_relative_residual(op, r);
            if (r.max_residual <= options.residual_tol) return r;
            notes.push_back("Lanczos residual " + std::to_string(r.max_residual) + " above tolerance");
        }
        for (auto& s : r.notes) notes.push_back(s);
        if (!dense_ok)
            fail(ErrorCode::numeric, "Lanczos did not converge after " + std::to_string(r.iterations) +
                                         " iterations and the operator is too large for the dense solver");
        notes.push_back("fell back to the dense solver");
    }
    r = dense_top_eigenpairs(op.dense(), k);
    r.notes = std::move(notes);
    r.max_residual = max_relative_residual(op, r);
    require(r.max_residual <= options.residual_tol, ErrorCode::numeric,
            "eigenpair residual " + std::to_string(r.max_residual) + " exceeds tolerance");
    return r;
}

}  // namespace lpm
