#include "lpm/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "lpm/error.hpp"
#include "lpm/io.hpp"

namespace lpm {

std::string to_string(EmbeddingSource s) { return s == EmbeddingSource::adjacency ? "adjacency" : "laplacian"; }

RankSelection select_rank_zg(const std::vector<double>& values) {
    require(!values.empty(), ErrorCode::parameter, "select_rank_zg needs at least one value");
    RankSelection sel;
    const auto p = static_cast<int>(values.size());
    if (p < 3) {
        sel.rank = p;
        sel.low_confidence = true;
        return sel;
    }
    std::vector<double> x(values.size());
    std::transform(values.begin(), values.end(), x.begin(), [](double v) { return std::abs(v); });
    double scale = 0.0;
    for (double v : x) scale = std::max(scale, v);
    const double ss_floor = 1e-24 * std::max(scale * scale, std::numeric_limits<double>::min());
    double best = -std::numeric_limits<double>::infinity();
    for (int q = 1; q < p; ++q) {
        double m1 = 0, m2 = 0;
        for (int i = 0; i < q; ++i) m1 += x[i];
        for (int i = q; i < p; ++i) m2 += x[i];
        m1 /= q;
        m2 /= p - q;
        double ss = 0;
        for (int i = 0; i < q; ++i) ss += (x[i] - m1) * (x[i] - m1);
        for (int i = q; i < p; ++i) ss += (x[i] - m2) * (x[i] - m2);
        double ll;
        if (ss <= ss_floor) {
            ll = std::numeric_limits<double>::infinity();
        } else {
            const double var = ss / (p - 2);
            ll = -0.5 * p * std::log(2.0 * M_PI * var) - ss / (2.0 * var);
        }
        sel.log_likelihood.push_back(ll);
        const bool better = std::isinf(best) ? ll > best : ll > best + 1e-12 * std::max(1.0, std::abs(best));
        if (better) {
            best = ll;
            sel.rank = q;
        }
    }
    return sel;
}

namespace {

struct Csr {
    std::vector<long> offsets;
    std::vector<int> cols;
};

std::shared_ptr<Csr> build_csr(const Graph& g) {
    auto csr = std::make_shared<Csr>();
    const auto deg = g.degrees();
    csr->offsets.assign(static_cast<std::size_t>(g.n) + 1, 0);
    for (int i = 0; i < g.n; ++i) csr->offsets[i + 1] = csr->offsets[i] + deg[i];
    csr->cols.resize(static_cast<std::size_t>(csr->offsets.back()));
    std::vector<long> fill(csr->offsets.begin(), csr->offsets.end() - 1);
    for (const auto& [i, j] : g.edges) {
        csr->cols[fill[i]++] = j;
        csr->cols[fill[j]++] = i;
    }
    return csr;
}

SymmetricOperator scaled_operator(const Graph& g, Eigen::VectorXd scale) {
    auto csr = build_csr(g);
    auto s = std::make_shared<Eigen::VectorXd>(std::move(scale));
    SymmetricOperator op;
    op.n = g.n;
    op.apply = [csr, s](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        const Eigen::Index n = x.size();
        y.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double acc = 0.0;
            for (long t = csr->offsets[i]; t < csr->offsets[i + 1]; ++t) acc += (*s)(csr->cols[t]) * x(csr->cols[t]);
            y(i) = (*s)(i) * acc;
        }
    };
    op.dense = [g, s]() {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n, g.n);
        for (const auto& [i, j] : g.edges) a(i, j) = a(j, i) = (*s)(i) * (*s)(j);
        return a;
    };
    return op;
}

EmbeddingMatrix embed(const Graph& g, const SymmetricOperator& op, std::optional<int> D_hat,
                      const EigenOptions& options, EmbeddingSource source) {
    require(g.n >= 1, ErrorCode::parameter, "cannot embed an empty node set");
    if (D_hat) require(*D_hat >= 1 && *D_hat <= g.n, ErrorCode::parameter, "D_hat must lie in [1, n]");
    const int k = D_hat ? *D_hat : std::min(g.n, 50);
    EigenResult eig = top_eigenpairs(op, k, options);
    require(eig.norm > 0.0, ErrorCode::rank_deficient,
            "matrix is zero: no nonzero eigenpair to retain for D_hat >= 1");
    EmbeddingMatrix emb;
    emb.source = source;
    emb.solver = eig.solver;
    emb.max_residual = eig.max_residual;
    emb.notes = eig.notes;
    int dim = k;
    if (!D_hat) {
        const std::vector<double> vals(eig.values.data(), eig.values.data() + eig.values.size());
        const RankSelection sel = select_rank_zg(vals);
        dim = sel.rank;
        emb.notes.push_back("D_hat selected by profile likelihood: " + std::to_string(dim) +
                            (sel.low_confidence ? " (low confidence)" : ""));
    }
    emb.eigenvalues = eig.values.head(dim);
    emb.coords.resize(g.n, dim);
    for (int j = 0; j < dim; ++j) {
        emb.coords.col(j) = eig.vectors.col(j) * std::sqrt(std::abs(eig.values(j)));
        emb.eig_signs.push_back(eig.values(j) >= 0.0 ? 1 : -1);
    }
    emb.lineage = {{"graph_seed", g.seed}, {"kernel", g.kernel_id}, {"rho", g.rho}, {"n", g.n}};
    return emb;
}

}  // namespace

SymmetricOperator adjacency_operator(const Graph& graph) {
    return scaled_operator(graph, Eigen::VectorXd::Ones(graph.n));
}

SymmetricOperator laplacian_operator(const Graph& graph) {
    const auto iso = isolated_nodes(graph);
    if (!iso.empty()) {
        std::string list;
        const std::size_t shown = std::min<std::size_t>(iso.size(), 20);
        for (std::size_t t = 0; t < shown; ++t) list += (t ? "," : "") + std::to_string(iso[t]);
        if (iso.size() > shown) list += ",...";
        fail(ErrorCode::isolated_nodes, "Laplacian undefined: " + std::to_string(iso.size()) +
                                            " isolated node(s) [" + list + "]; drop them first (--drop-isolated)");
    }
    const auto deg = graph.degrees();
    Eigen::VectorXd s(graph.n);
    for (int i = 0; i < graph.n; ++i) s(i) = 1.0 / std::sqrt(static_cast<double>(deg[i]));
    return scaled_operator(graph, s);
}

EmbeddingMatrix ase(const Graph& graph, std::optional<int> D_hat, const EigenOptions& options) {
    return embed(graph, adjacency_operator(graph), D_hat, options, EmbeddingSource::adjacency);
}

EmbeddingMatrix lse(const Graph& graph, std::optional<int> D_hat, const EigenOptions& options) {
    return embed(graph, laplacian_operator(graph), D_hat, options, EmbeddingSource::laplacian);
}

void save_embedding(const EmbeddingMatrix& emb, const std::filesystem::path& dir) {
    io::ensure_directory(dir);
    std::vector<std::string> header;
    for (int j = 0; j < emb.dim(); ++j) header.push_back("x" + std::to_string(j + 1));
    io::write_csv(dir / "embedding.csv", emb.coords, header);
    nlohmann::json meta = {
        {"source", to_string(emb.source)},
        {"D_hat", emb.dim()},
        {"eigenvalues", std::vector<double>(emb.eigenvalues.data(), emb.eigenvalues.data() + emb.eigenvalues.size())},
        {"signs", emb.eig_signs},
        {"solver", emb.solver},
        {"max_residual", emb.max_residual},
        {"notes", emb.notes},
        {"lineage", emb.lineage},
    };
    io::write_json(dir / "meta.json", meta);
}

EmbeddingMatrix load_embedding(const std::filesystem::path& dir) {
    const auto meta = io::read_json(dir / "meta.json");
    EmbeddingMatrix emb;
    try {
        emb.coords = io::read_csv(dir / "embedding.csv");
        const auto vals = meta.at("eigenvalues").get<std::vector<double>>();
        emb.eigenvalues = Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
        emb.eig_signs = meta.at("signs").get<std::vector<int>>();
        emb.source = meta.at("source").get<std::string>() == "laplacian" ? EmbeddingSource::laplacian
                                                                          : EmbeddingSource::adjacency;
        emb.solver = meta.value("solver", "");
        emb.max_residual = meta.value("max_residual", 0.0);
        emb.notes = meta.value("notes", std::vector<std::string>{});
        emb.lineage = meta.value("lineage", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::config, std::string("malformed embedding meta.json: ") + e.what());
    }
    require(emb.eig_signs.size() == static_cast<std::size_t>(emb.coords.cols()) &&
                emb.eigenvalues.size() == emb.coords.cols(),
            ErrorCode::config, "embedding meta.json disagrees with embedding.csv");
    return emb;
}

}  // namespace lpm
