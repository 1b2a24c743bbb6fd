#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "lpm/graphsim.hpp"
#include "lpm/parallel.hpp"
#include "lpm/rng.hpp"
#include "support.hpp"

using namespace lpm;

namespace {

LatentSample fixed_latents(std::initializer_list<double> z) {
    LatentSample s;
    s.points.resize(static_cast<Eigen::Index>(z.size()), 1);
    Eigen::Index i = 0;
    for (double v : z) s.points(i++, 0) = v;
    return s;
}

bool simple_and_sorted(const Graph& g) {
    for (const auto& [i, j] : g.edges)
        if (!(0 <= i && i < j && j < g.n)) return false;
    return std::is_sorted(g.edges.begin(), g.edges.end()) &&
           std::adjacent_find(g.edges.begin(), g.edges.end()) == g.edges.end() &&
           static_cast<long>(g.edges.size()) <= static_cast<long>(g.n) * (g.n - 1) / 2;
}

// sociability on the scaled support [0, r B] so that f_3 = 2xy stays admissible
KernelSpec coupling_kernel(double r) { return KernelSpec::sociability(Box::interval(0.0, r * 3.0)); }

long coupled_disagreements(double r, int k, int n, std::uint64_t seed) {
    const auto w = sample_latents(LatentDistribution::truncated_gamma(1.0, 1.0, 3.0), n, derive_seed(seed, 1));
    return couple_graphs(coupling_kernel(r), k, w, r, derive_seed(seed, 2)).disagreements;
}

}  // namespace

TEST_CASE("latent sampling") {
    const auto uni = LatentDistribution::uniform(Box::interval(0.0, 1.0));
    CHECK(sample_latents(uni, 0, 1).points.rows() == 0);

    const auto a = sample_latents(uni, 500, 42), b = sample_latents(uni, 500, 42);
    CHECK(a.points == b.points);
    CHECK_FALSE(a.points == sample_latents(uni, 500, 43).points);

    const auto g = sample_latents(LatentDistribution::truncated_gamma(1.0, 1.0, 3.0), 100000, 7);
    CHECK(g.points.minCoeff() >= 0.0);
    CHECK(g.points.maxCoeff() <= 3.0);
    const double mean = g.points.mean();
    const double sd = std::sqrt(0.5037309504814621 / 100000.0);
    CHECK(std::abs(mean - 0.8428129105262321) < 3.0 * sd);

    const auto c = sample_latents(LatentDistribution::circle(), 2000, 3);
    CHECK(c.points.minCoeff() >= 0.0);
    CHECK(c.points.maxCoeff() < 2.0 * M_PI);

    const auto pw = LatentDistribution::piecewise({0.0, 0.5, 1.0}, {3.0, 1.0});
    const auto p = sample_latents(pw, 40000, 9);
    const double left = (p.points.array() < 0.5).cast<double>().mean();
    CHECK(std::abs(left - 0.75) < 4.0 * std::sqrt(0.75 * 0.25 / 40000.0));

    const auto doc = LatentDistribution::truncated_gamma(2.0, 1.5, 4.0).to_json();
    const auto back = LatentDistribution::from_json(doc);
    CHECK(back.to_json() == doc);
    CHECK(test::error_of([] { LatentDistribution::from_json(nlohmann::json{{"kind", "bogus"}}); }) ==
          ErrorCode::config);
}

TEST_CASE("constant kernels give complete and empty graphs") {
    const Box unit = Box::interval(0.0, 1.0);
    const auto z = sample_latents(LatentDistribution::uniform(unit), 60, 1);
    const auto full = sample_graph(KernelSpec::constant(1.0, unit), z, 1.0, 5);
    CHECK(full.edges.size() == 60u * 59u / 2u);
    CHECK(simple_and_sorted(full));
    const auto empty = sample_graph(KernelSpec::constant(0.0, unit), z, 1.0, 5);
    CHECK(empty.edges.empty());
}

TEST_CASE("sample_graph checks its arguments") {
    const auto k = kernel_preset("rbf");
    const auto z = sample_latents(LatentDistribution::uniform(k.domain()), 10, 1);
    CHECK(test::error_of([&] { sample_graph(k, z, 0.0, 1); }) == ErrorCode::parameter);
    CHECK(test::error_of([&] { sample_graph(k, z, 1.5, 1); }) == ErrorCode::parameter);
    const auto outside = fixed_latents({0.5, 2.0});
    CHECK(test::error_of([&] { sample_graph(k, outside, 1.0, 1); }) == ErrorCode::domain);
}

TEST_CASE("rbf edge density matches the kernel mean") {
    const auto k = kernel_preset("rbf");
    const int n = 2000;
    const auto z = sample_latents(LatentDistribution::uniform(k.domain()), n, 101);
    const auto g = sample_graph(k, z, 1.0, 202);
    CHECK(simple_and_sorted(g));
    const double density = g.density();
    // Monte-Carlo reference over 10^6 independent pairs and its standard error
    const double ef = 0.7640934325662586, se_ref = 0.00023027983836240582;
    // standard error of the simulated density (U-statistic, first-order term)
    const auto deg = g.degrees();
    Eigen::VectorXd h(n);
    for (int i = 0; i < n; ++i) h(i) = deg[i] / double(n - 1);
    const double var_h = (h.array() - h.mean()).square().sum() / (n - 1);
    const double se_sim = std::sqrt(4.0 * var_h / n + 2.0 * density * (1 - density) / (double(n) * (n - 1)));
    CHECK(std::abs(density - ef) <= 3.0 * std::sqrt(se_ref * se_ref + se_sim * se_sim));
    // the quadrature value agrees with the Monte-Carlo reference
    CHECK(std::abs(ef - 0.7639556549409147) <= 3.0 * se_ref);
}

TEST_CASE("sample_graph is reproducible across thread counts") {
    const auto k = kernel_preset("sociability");
    const auto z = sample_latents(LatentDistribution::truncated_gamma(1.0, 1.0, 3.0), 700, 4);
    set_thread_count(1);
    const auto a = sample_graph(k, z, 0.4, 99);
    set_thread_count(4);
    const auto b = sample_graph(k, z, 0.4, 99);
    set_thread_count(1);
    CHECK(a.edges == b.edges);
    CHECK(a.rho == 0.4);
    CHECK(a.kernel_id == b.kernel_id);
}

TEST_CASE("edge marginals") {
    const auto k = kernel_preset("sociability");
    const auto z = fixed_latents({0.3, 1.1, 2.5});
    const double rho = 0.7;
    const int reps = 100000;
    int count[3] = {0, 0, 0};
    for (int r = 0; r < reps; ++r) {
        const auto g = sample_graph(k, z, rho, static_cast<std::uint64_t>(r));
        for (const auto& [i, j] : g.edges) count[i + j - 1] += 1;  // (0,1)->0, (0,2)->1, (1,2)->2
    }
    const std::pair<int, int> pairs[3] = {{0, 1}, {0, 2}, {1, 2}};
    for (int e = 0; e < 3; ++e) {
        const auto [i, j] = pairs[e];
        const double p = rho * (1.0 - std::exp(-2.0 * z.points(i, 0) * z.points(j, 0)));
        const double freq = count[e] / double(reps);
        CHECK(std::abs(freq - p) <= 4.0 * std::sqrt(p * (1 - p) / reps));
    }
}

TEST_CASE("coupled graphs") {
    SUBCASE("truncation beyond the degree never disagrees") {
        const auto xy = kernel_preset("xy");
        const auto w = sample_latents(LatentDistribution::uniform(xy.domain()), 150, 1);
        const auto c = couple_graphs(xy, 5, w, 1.0, 3);
        CHECK(c.disagreements == 0);
        CHECK(c.full.edges == c.truncated.edges);
    }
    SUBCASE("each coupled graph has its own kernel's marginals") {
        const double r = 0.2;
        const auto spec = coupling_kernel(r);
        const auto w = fixed_latents({2.0, 2.8, 1.5});
        const int reps = 10000;
        int full[3] = {0, 0, 0}, trunc[3] = {0, 0, 0};
        long diff = 0;
        for (int t = 0; t < reps; ++t) {
            const auto c = couple_graphs(spec, 3, w, r, static_cast<std::uint64_t>(t));
            for (const auto& [i, j] : c.full.edges) full[i + j - 1] += 1;
            for (const auto& [i, j] : c.truncated.edges) trunc[i + j - 1] += 1;
            diff += c.disagreements;
        }
        const std::pair<int, int> pairs[3] = {{0, 1}, {0, 2}, {1, 2}};
        double gap = 0.0;
        for (int e = 0; e < 3; ++e) {
            const double zi = r * w.points(pairs[e].first, 0), zj = r * w.points(pairs[e].second, 0);
            const double pf = 1.0 - std::exp(-2.0 * zi * zj), pk = 2.0 * zi * zj;
            gap += pk - pf;
            CHECK(std::abs(full[e] / double(reps) - pf) <= 4.0 * std::sqrt(pf * (1 - pf) / reps));
            CHECK(std::abs(trunc[e] / double(reps) - pk) <= 4.0 * std::sqrt(pk * (1 - pk) / reps));
        }
        // maximal coupling: disagreement probability per pair is |f - f_k|
        CHECK(std::abs(diff / double(reps) - gap) <= 4.0 * std::sqrt(gap / reps));
    }
    SUBCASE("analytic bound at n = 200, k = 3, r = 0.05") {
        const int trials = 500;
        int differ = 0;
        for (int t = 0; t < trials; ++t) differ += coupled_disagreements(0.05, 3, 200, 1000 + t) > 0;
        const double bound = 200.0 * 200.0 * 1.828171e-05;  // Monte-Carlo reference for E|f - f_3|
        CHECK(differ / double(trials) <= bound);
    }
    SUBCASE("disagreements shrink with the latent scale") {
        std::vector<double> medians;
        for (double r : {0.2, 0.1, 0.05}) {
            std::vector<long> d;
            for (int t = 0; t < 100; ++t) d.push_back(coupled_disagreements(r, 3, 200, 5000 + t));
            std::nth_element(d.begin(), d.begin() + 50, d.end());
            medians.push_back(double(d[50]));
        }
        CHECK(medians[1] <= medians[0]);
        CHECK(medians[2] <= medians[1]);
    }
    SUBCASE("inadmissible truncation propagates the range error") {
        const auto soc = kernel_preset("sociability");
        const auto w = sample_latents(LatentDistribution::truncated_gamma(1.0, 1.0, 3.0), 20, 1);
        CHECK(test::error_of([&] { couple_graphs(soc, 3, w, 1.0, 1); }) == ErrorCode::range);
    }
}

TEST_CASE("isolated nodes") {
    Graph g;
    g.n = 5;
    g.edges = {{0, 2}, {2, 4}};
    CHECK(isolated_nodes(g) == std::vector<int>{1, 3});
    std::vector<int> kept;
    const auto d = drop_isolated(g, &kept);
    CHECK(kept == std::vector<int>{0, 2, 4});
    CHECK(d.n == 3);
    CHECK(d.edges == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});
}

TEST_CASE("graph file round trip and validation") {
    const auto dir = std::filesystem::temp_directory_path() / "lpm_unit_graph";
    std::filesystem::create_directories(dir);
    Graph g;
    g.n = 4;
    g.edges = {{0, 1}, {0, 3}, {2, 3}};
    write_graph(dir / "g.txt", g);
    const auto back = read_graph(dir / "g.txt");
    CHECK(back.n == 4);
    CHECK(back.edges == g.edges);

    auto write = [&](const char* text) {
        std::ofstream(dir / "bad.txt") << text;
        return test::error_of([&] { read_graph(dir / "bad.txt"); });
    };
    CHECK(write("3 1\n0 0\n") == ErrorCode::config);
    CHECK(write("3 2\n0 1\n1 0\n") == ErrorCode::config);
    CHECK(write("3 2\n0 1\n") == ErrorCode::config);
    CHECK(write("3 1\n0 5\n") == ErrorCode::config);
    CHECK(test::error_of([&] { read_graph(dir / "missing.txt"); }) == ErrorCode::io);
    std::filesystem::remove_all(dir);
}
