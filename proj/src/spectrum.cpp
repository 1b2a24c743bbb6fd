#include "lpm/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lpm/error.hpp"
#include "lpm/io.hpp"

namespace lpm {

std::vector<int> OperatorSpectrum::signs() const {
    std::vector<int> s(static_cast<std::size_t>(eigenvalues.size()));
    for (Eigen::Index j = 0; j < eigenvalues.size(); ++j) s[j] = eigenvalues(j) >= 0.0 ? 1 : -1;
    return s;
}

namespace {

void check_grid(const KernelSpec& spec, const QuadratureGrid& grid) {
    require(grid.dim() == spec.latent_dim(), ErrorCode::incompatible,
            "quadrature grid dimension does not match the kernel's latent dimension");
    require(grid.size() >= 2, ErrorCode::parameter, "quadrature grid needs at least 2 nodes");
    require(grid.weights.size() == grid.size(), ErrorCode::parameter, "quadrature weights and nodes differ in count");
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        require(grid.weights(i) > 0.0, ErrorCode::parameter, "quadrature weights must be positive");
        require(spec.domain().contains(grid.node(i)), ErrorCode::domain, "quadrature node outside the kernel domain");
    }
}

}  // namespace

OperatorSpectrum nystrom_spectrum(const KernelSpec& spec, const QuadratureGrid& grid, const SpectrumOptions& options) {
    check_grid(spec, grid);
    const Eigen::Index m = grid.size();
    require(!options.J || (*options.J >= 0 && *options.J <= m), ErrorCode::parameter, "J must lie in [0, m]");
    require(options.tail_tol > 0.0, ErrorCode::parameter, "tail_tol must be positive");

    const Eigen::VectorXd sw = grid.weights.cwiseSqrt();
    Eigen::MatrixXd M(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = sw(i) * spec.eval_unchecked(grid.node(i), grid.node(j)) * sw(j);
            M(i, j) = v;
            M(j, i) = v;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M);
    require(solver.info() == Eigen::Success, ErrorCode::numeric, "Nystrom eigensolver failed to converge");
    const Eigen::VectorXd& values = solver.eigenvalues();
    const double lmax = values.cwiseAbs().maxCoeff();

    OperatorSpectrum out(spec);
    out.grid = grid;
    out.noise_floor = options.noise_floor;
    out.lambda_max = lmax;
    for (const auto& w : grid.warnings) out.notes.push_back(w);

    std::vector<Eigen::Index> order;
    if (lmax > 0.0) {
        const double floor = options.noise_floor * lmax;
        for (Eigen::Index j = 0; j < m; ++j)
            if (std::abs(values(j)) > floor) order.push_back(j);
        const double tie = 1e-12 * lmax;
        std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            const double da = std::abs(values(a)), db = std::abs(values(b));
            if (std::abs(da - db) > tie) return da > db;
            if ((values(a) >= 0.0) != (values(b) >= 0.0)) return values(a) >= 0.0;
            return a > b;
        });
    }
    out.rank_estimate = static_cast<int>(order.size());
    if (order.empty()) {
        out.notes.push_back("zero operator: no eigenvalue above the noise floor");
        out.eigvecs.resize(m, 0);
        return out;
    }
    out.rank_infinite = std::abs(values(order.back())) < 1e-6 * lmax;

    // suffix[j] = sum of |lambda| beyond the first j retained values
    std::vector<double> suffix(order.size() + 1, 0.0);
    for (std::size_t j = order.size(); j-- > 0;) suffix[j] = suffix[j + 1] + std::abs(values(order[j]));
    std::size_t J = 0;
    if (options.J) {
        J = static_cast<std::size_t>(*options.J);
        if (J > order.size()) {
            out.notes.push_back("requested J=" + std::to_string(J) + " exceeds the " + std::to_string(order.size()) +
                                " eigenvalues above the noise floor; truncated");
            J = order.size();
        }
    } else {
        while (J < order.size() && suffix[J] >= options.tail_tol) ++J;
    }
    out.tail_mass = suffix[J];
    out.eigenvalues.resize(static_cast<Eigen::Index>(J));
    out.eigvecs.resize(m, static_cast<Eigen::Index>(J));
    for (std::size_t j = 0; j < J; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        out.eigenvalues(jj) = values(order[j]);
        Eigen::VectorXd u = solver.eigenvectors().col(order[j]).cwiseQuotient(sw);
        Eigen::Index arg;
        u.cwiseAbs().maxCoeff(&arg);
        if (u(arg) < 0.0) u = -u;
        out.eigvecs.col(jj) = u;
    }
    out.signature = signature_from_signs(out.signs());
    if (out.rank_infinite) out.notes.push_back("eigenvalues decay gradually to the noise floor: rank effectively infinite");
    return out;
}

PhiCoordinates phi(const OperatorSpectrum& spectrum, Point x) {
    require(spectrum.kernel.domain().contains(x), ErrorCode::domain, "phi: point outside the kernel domain");
    PhiCoordinates out;
    out.signs = spectrum.signs();
    out.signature = spectrum.signature;
    out.source_point.assign(x.begin(), x.end());
    const Eigen::Index m = spectrum.grid.size();
    const int J = spectrum.J();
    out.coords = Eigen::VectorXd::Zero(J);
    if (J == 0) return out;
    Eigen::VectorXd kw(m);
    for (Eigen::Index i = 0; i < m; ++i)
        kw(i) = spectrum.grid.weights(i) * spectrum.kernel.eval_unchecked(x, spectrum.grid.node(i));
    const double floor = spectrum.noise_floor * spectrum.lambda_max;
    for (int j = 0; j < J; ++j) {
        const double lam = spectrum.eigenvalues(j);
        if (std::abs(lam) <= floor) {
            out.notes.push_back("coordinate " + std::to_string(j) + " set to 0: eigenvalue below the noise floor");
            continue;
        }
        out.coords(j) = kw.dot(spectrum.eigvecs.col(j)) / lam * std::sqrt(std::abs(lam));
    }
    return out;
}

RowMatrix phi_matrix(const OperatorSpectrum& spectrum, const RowMatrix& points) {
    const Eigen::Index n = points.rows();
    const Eigen::Index m = spectrum.grid.size();
    const int J = spectrum.J();
    RowMatrix out = RowMatrix::Zero(n, J);
    if (J == 0) return out;
    require(points.cols() == spectrum.kernel.latent_dim(), ErrorCode::incompatible,
            "phi: point dimension does not match the kernel");
    Eigen::VectorXd scale(J);
    const double floor = spectrum.noise_floor * spectrum.lambda_max;
    for (int j = 0; j < J; ++j) {
        const double lam = spectrum.eigenvalues(j);
        scale(j) = std::abs(lam) <= floor ? 0.0 : std::sqrt(std::abs(lam)) / lam;
    }
    const Eigen::MatrixXd basis = spectrum.eigvecs * scale.asDiagonal();
    Eigen::RowVectorXd kw(m);
    for (Eigen::Index r = 0; r < n; ++r) {
        const Point x = row_span(points, r);
        require(spectrum.kernel.domain().contains(x), ErrorCode::domain, "phi: point outside the kernel domain");
        for (Eigen::Index i = 0; i < m; ++i)
            kw(i) = spectrum.grid.weights(i) * spectrum.kernel.eval_unchecked(x, spectrum.grid.node(i));
        out.row(r) = kw * basis;
    }
    return out;
}

double indefinite_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const std::vector<int>& signs) {
    require(a.size() == b.size() && static_cast<std::size_t>(a.size()) == signs.size(), ErrorCode::incompatible,
            "indefinite inner product: length mismatch");
    double s = 0.0;
    for (Eigen::Index j = 0; j < a.size(); ++j) s += (signs[j] >= 0 ? 1.0 : -1.0) * a(j) * b(j);
    return s;
}

double indefinite_inner(const PhiCoordinates& a, const PhiCoordinates& b) {
    require(a.signature == b.signature && a.signs == b.signs, ErrorCode::incompatible,
            "indefinite inner product: signature mismatch");
    return indefinite_inner(a.coords, b.coords, a.signs);
}

TraceReport trace_diagnostics(const OperatorSpectrum& spectrum, const KernelSpec& spec) {
    TraceReport r;
    r.partial_sum = spectrum.eigenvalues.cwiseAbs().sum();
    r.tail_estimate = spectrum.tail_mass;
    r.sum_abs_eigs = r.partial_sum + r.tail_estimate;
    for (Eigen::Index i = 0; i < spectrum.grid.size(); ++i) {
        const Point x = spectrum.grid.node(i);
        r.diagonal_integral += spectrum.grid.weights(i) * spec.eval_unchecked(x, x);
    }
    r.is_positive_definite = spectrum.signature.q == 0;
    return r;
}

Signature signature_of(const OperatorSpectrum& spectrum, double tol) {
    Signature s;
    for (Eigen::Index j = 0; j < spectrum.eigenvalues.size(); ++j) {
        if (spectrum.eigenvalues(j) > tol) ++s.p;
        else if (spectrum.eigenvalues(j) < -tol) ++s.q;
    }
    return s;
}

void save_spectrum(const OperatorSpectrum& spectrum, const std::filesystem::path& dir) {
    io::ensure_directory(dir);
    const Eigen::Index m = spectrum.grid.size();
    const int d = spectrum.grid.dim();
    RowMatrix ev(spectrum.J(), 1);
    for (int j = 0; j < spectrum.J(); ++j) ev(j, 0) = spectrum.eigenvalues(j);
    io::write_csv(dir / "eigenvalues.csv", ev, {"lambda"});

    std::vector<std::string> header;
    for (int j = 0; j < spectrum.J(); ++j) header.push_back("u" + std::to_string(j + 1));
    io::write_csv(dir / "eigvecs.csv", RowMatrix(spectrum.eigvecs), header);

    RowMatrix g(m, d + 1);
    g.leftCols(d) = spectrum.grid.nodes;
    g.col(d) = spectrum.grid.weights;
    header.clear();
    for (int k = 0; k < d; ++k) header.push_back("x" + std::to_string(k + 1));
    header.push_back("weight");
    io::write_csv(dir / "grid.csv", g, header);

    nlohmann::json meta = {
        {"kernel", spectrum.kernel.to_json()},
        {"J", spectrum.J()},
        {"signature", {{"p", spectrum.signature.p}, {"q", spectrum.signature.q}}},
        {"tail_mass", spectrum.tail_mass},
        {"lambda_max", spectrum.lambda_max},
        {"noise_floor", spectrum.noise_floor},
        {"rank_estimate", spectrum.rank_estimate},
        {"rank_infinite", spectrum.rank_infinite},
        {"scheme", to_string(spectrum.grid.scheme)},
        {"weighting", to_string(spectrum.grid.weighting)},
        {"notes", spectrum.notes},
    };
    io::write_json(dir / "meta.json", meta);
}

OperatorSpectrum load_spectrum(const std::filesystem::path& dir) {
    const nlohmann::json meta = io::read_json(dir / "meta.json");
    try {
        OperatorSpectrum s(KernelSpec::from_json(meta.at("kernel")));
        const int J = meta.at("J").get<int>();
        const RowMatrix g = io::read_csv(dir / "grid.csv");
        const int d = s.kernel.latent_dim();
        require(g.cols() == d + 1, ErrorCode::config, "grid.csv has the wrong number of columns");
        s.grid.nodes = g.leftCols(d);
        s.grid.weights = g.col(d);
        s.grid.scheme = quadrature_scheme_from_string(meta.at("scheme").get<std::string>());
        s.grid.weighting = weighting_from_string(meta.at("weighting").get<std::string>());
        s.eigenvalues.resize(J);
        s.eigvecs.resize(g.rows(), J);
        if (J > 0) {
            const RowMatrix ev = io::read_csv(dir / "eigenvalues.csv");
            const RowMatrix U = io::read_csv(dir / "eigvecs.csv");
            require(ev.rows() == J && U.rows() == g.rows() && U.cols() == J, ErrorCode::config,
                    "spectrum bundle files disagree in shape");
            s.eigenvalues = ev.col(0);
            s.eigvecs = U;
        }
        s.signature = signature_from_signs(s.signs());
        require(s.signature.p == meta.at("signature").at("p").get<int>() &&
                    s.signature.q == meta.at("signature").at("q").get<int>(),
                ErrorCode::config, "spectrum bundle signature disagrees with its eigenvalues");
        s.tail_mass = meta.at("tail_mass").get<double>();
        s.lambda_max = meta.at("lambda_max").get<double>();
        s.noise_floor = meta.at("noise_floor").get<double>();
        s.rank_estimate = meta.at("rank_estimate").get<int>();
        s.rank_infinite = meta.at("rank_infinite").get<bool>();
        s.notes = meta.value("notes", std::vector<std::string>{});
        return s;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::config, std::string("malformed spectrum meta.json: ") + e.what());
    }
}

}  // namespace lpm
