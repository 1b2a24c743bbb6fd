#include <cmath>
#include <filesystem>

#include <doctest.h>

#include "lpm/eigensolver.hpp"
#include "lpm/embedding.hpp"
#include "lpm/graphsim.hpp"
#include "lpm/rng.hpp"
#include "support.hpp"

using namespace lpm;

namespace {

Graph complete_graph(int n, int offset = 0, int total = -1) {
    Graph g;
    g.n = total < 0 ? n : total;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) g.edges.emplace_back(offset + i, offset + j);
    return g;
}

Eigen::MatrixXd dense_adjacency(const Graph& g) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n, g.n);
    for (const auto& [i, j] : g.edges) a(i, j) = a(j, i) = 1.0;
    return a;
}

Graph simulate(const std::string& preset, int n, std::uint64_t seed) {
    const auto k = kernel_preset(preset);
    const auto dist = preset == "sociability" ? LatentDistribution::truncated_gamma(1.0, 1.0, 3.0)
                                              : LatentDistribution::uniform(k.domain());
    return sample_graph(k, sample_latents(dist, n, derive_seed(seed, 1)), 1.0, derive_seed(seed, 2));
}

}  // namespace

TEST_CASE("full-rank ASE reconstructs the adjacency matrix") {
    const auto g = simulate("rbf", 40, 3);
    const auto e = ase(g, 40);
    Eigen::VectorXd s(40);
    for (int j = 0; j < 40; ++j) s(j) = e.eig_signs[j];
    const Eigen::MatrixXd rec = e.coords * s.asDiagonal() * e.coords.transpose();
    CHECK(test::max_abs(rec - dense_adjacency(g)) < 1e-8);
}

TEST_CASE("ASE invariants") {
    const auto g = simulate("sociability", 600, 8);
    const auto e = ase(g, 4);
    CHECK(e.dim() == 4);
    CHECK(e.max_residual <= 1e-8);
    for (int j = 0; j < 4; ++j) {
        CHECK(e.coords.col(j).squaredNorm() == doctest::Approx(std::abs(e.eigenvalues(j))).epsilon(1e-10));
        Eigen::Index at;
        e.coords.col(j).cwiseAbs().maxCoeff(&at);
        CHECK(e.coords(at, j) > 0.0);
        if (j > 0) CHECK(std::abs(e.eigenvalues(j)) <= std::abs(e.eigenvalues(j - 1)));
    }
}

TEST_CASE("empty graph is rank deficient") {
    Graph g;
    g.n = 30;
    CHECK(test::error_of([&] { ase(g, 1); }) == ErrorCode::rank_deficient);
}

TEST_CASE("rank-one kernel: ASE recovers the latents") {
    const auto k = kernel_preset("xy");
    const auto z = sample_latents(LatentDistribution::uniform(k.domain()), 4000, 2024);
    const auto g = sample_graph(k, z, 1.0, 2025);
    const auto e = ase(g, 1);
    const Eigen::VectorXd x = e.coords.col(0);
    const double sign = x.dot(z.points.col(0)) > 0 ? 1.0 : -1.0;
    CHECK((sign * x - z.points.col(0)).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("two-block graphon signature") {
    const auto g = simulate("two_block", 4000, 12);
    const auto e = ase(g, 2);
    CHECK(e.signature() == Signature{1, 1});
}

TEST_CASE("ASE column norms grow like sqrt(n)") {
    std::vector<double> norms;
    for (int n : {1000, 2000, 4000}) norms.push_back(ase(simulate("rbf", n, 40 + n), 1).coords.col(0).norm());
    for (std::size_t i = 1; i < norms.size(); ++i) {
        const double ratio = norms[i] / norms[i - 1] / std::sqrt(2.0);
        CHECK(ratio == doctest::Approx(1.0).epsilon(0.2));
    }
}

TEST_CASE("LSE on complete graphs") {
    const int n = 50;
    const auto e = lse(complete_graph(n), n);
    CHECK(e.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-12));
    for (Eigen::Index i = 0; i < n; ++i) REQUIRE(e.coords(i, 0) == doctest::Approx(1.0 / std::sqrt(n)).epsilon(1e-10));
    CHECK(e.eigenvalues.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);

    auto two = complete_graph(20, 0, 40);
    const auto other = complete_graph(20, 20, 40);
    two.edges.insert(two.edges.end(), other.edges.begin(), other.edges.end());
    const auto e2 = lse(two, 3);
    CHECK(e2.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(e2.eigenvalues(1) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(e2.eigenvalues(2)) < 1.0 - 1e-6);

    const auto r = simulate("sociability", 300, 5);
    const auto full = lse(drop_isolated(r), 40);
    CHECK(full.eigenvalues.cwiseAbs().maxCoeff() <= 1.0 + 1e-10);
}

TEST_CASE("LSE refuses isolated nodes") {
    Graph g;
    g.n = 4;
    g.edges = {{0, 1}, {1, 2}};
    const auto err = test::error_of([&] { lse(g, 1); });
    CHECK(err == ErrorCode::isolated_nodes);
    try {
        lse(g, 1);
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find('3') != std::string::npos);
        CHECK(std::string(e.what()).find("--drop-isolated") != std::string::npos);
    }
}

TEST_CASE("profile-likelihood rank selection") {
    const auto r = select_rank_zg({10, 9, 8, 1, 0.9, 0.8, 0.7, 0.6});
    CHECK(r.rank == 3);
    CHECK_FALSE(r.low_confidence);
    // exhaustive reference over all seven splits
    const double ref[7] = {-20.9692, -18.303, -6.1522, -18.8366, -20.702, -21.6227, -22.196};
    REQUIRE(r.log_likelihood.size() == 7);
    for (int q = 0; q < 7; ++q) CHECK(r.log_likelihood[q] == doctest::Approx(ref[q]).epsilon(1e-4));

    const auto one = select_rank_zg({1.0});
    CHECK(one.rank == 1);
    CHECK(one.low_confidence);
    const auto two = select_rank_zg({3.0, 1.0});
    CHECK(two.rank == 2);
    CHECK(two.low_confidence);
    CHECK(select_rank_zg({2, 2, 2, 2, 2}).rank == 1);
    CHECK(select_rank_zg({-10, 9, -8, 1, -0.9, 0.8, 0.7, 0.6}).rank == 3);
}

TEST_CASE("automatic dimension on ASE") {
    const auto g = simulate("two_block", 1500, 3);
    const auto e = ase(g, std::nullopt);
    CHECK(e.dim() == 2);
}

TEST_CASE("Lanczos agrees with the dense solver") {
    const auto g = simulate("sociability", 2500, 77);
    const auto op = adjacency_operator(g);
    EigenOptions lanczos;
    lanczos.dense_max_n = 0;
    const auto a = top_eigenpairs(op, 6, lanczos);
    const auto b = dense_top_eigenpairs(dense_adjacency(g), 6);
    CHECK(a.solver != b.solver);
    CHECK(test::max_abs(a.values - b.values) < 1e-8 * b.norm);
    for (int j = 0; j < 6; ++j) CHECK(std::abs(a.vectors.col(j).dot(b.vectors.col(j))) > 1.0 - 1e-8);
    CHECK(a.max_residual <= 1e-8);
}

TEST_CASE("embedding bundle round trip") {
    const auto e = ase(simulate("rbf", 200, 1), 3);
    const auto dir = std::filesystem::temp_directory_path() / "lpm_unit_embedding";
    std::filesystem::remove_all(dir);
    save_embedding(e, dir);
    CHECK(std::filesystem::exists(dir / "embedding.csv"));
    CHECK(std::filesystem::exists(dir / "meta.json"));
    const auto back = load_embedding(dir);
    CHECK(back.coords == e.coords);
    CHECK(back.eig_signs == e.eig_signs);
    CHECK(back.eigenvalues == e.eigenvalues);
    CHECK(back.source == e.source);
    std::filesystem::remove_all(dir);
}
