#include <cmath>
#include <filesystem>
#include <random>

#include <doctest.h>

#include "lpm/graphsim.hpp"
#include "lpm/quadrature.hpp"
#include "lpm/spectrum.hpp"
#include "support.hpp"

using namespace lpm;
using test::pt;

namespace {

const Box kUnit = Box::interval(0.0, 1.0);

double gram_error(const KernelSpec& k, const OperatorSpectrum& s, int pairs, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    const Box& box = k.domain();
    std::uniform_real_distribution<double> u(box.lo[0], box.hi[0]);
    double worst = 0.0;
    for (int r = 0; r < pairs; ++r) {
        const double x = u(gen), y = u(gen);
        const double rep = indefinite_inner(phi(s, pt(x)), phi(s, pt(y)));
        worst = std::max(worst, std::abs(rep - k(pt(x), pt(y))));
    }
    return worst;
}

}  // namespace

TEST_CASE("gauss-legendre rule integrates polynomials exactly") {
    const auto [x, w] = gauss_legendre(8);
    double s0 = 0, s14 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s0 += w[i];
        s14 += w[i] * std::pow(x[i], 14);
    }
    CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s14 == doctest::Approx(2.0 / 15.0).epsilon(1e-13));
    CHECK(std::is_sorted(x.begin(), x.end()));
}

TEST_CASE("quadrature grid invariants") {
    const Box box{{0.0, -1.0}, {3.0, 1.0}};
    for (auto scheme : {QuadratureScheme::gauss_legendre_tensor, QuadratureScheme::uniform_midpoint}) {
        const auto g = make_grid(box, 12, scheme);
        CHECK(g.size() == 144);
        CHECK(g.weights.minCoeff() > 0.0);
        CHECK(g.weights.sum() == doctest::Approx(box.volume()).epsilon(1e-12));
        for (Eigen::Index i = 0; i < g.size(); ++i) REQUIRE(box.contains(g.node(i)));
    }
    const auto hi = make_grid(Box::cube(4, 0.0, 1.0), 8);
    CHECK(hi.scheme == QuadratureScheme::monte_carlo);
    CHECK_FALSE(hi.warnings.empty());
    CHECK(hi.weights.sum() == doctest::Approx(1.0));

    const auto gamma = LatentDistribution::truncated_gamma(1.0, 1.0, 3.0);
    const auto wg = weight_by_density(make_grid(gamma.support(), 64), [&](Point z) { return gamma.density(z); });
    CHECK(wg.weighting == Weighting::latent_density);
    CHECK(wg.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
    double mean = 0.0;
    for (Eigen::Index i = 0; i < wg.size(); ++i) mean += wg.weights(i) * wg.nodes(i, 0);
    CHECK(mean == doctest::Approx(0.8428129105262321).epsilon(1e-10));
}

TEST_CASE("two-block graphon oracle") {
    const auto k = kernel_preset("two_block");
    const auto s = nystrom_spectrum(k, make_grid(kUnit, 64));
    REQUIRE(s.J() == 2);
    CHECK(std::abs(s.eigenvalues(0) - 0.5) < 1e-6);
    CHECK(std::abs(s.eigenvalues(1) + 0.3) < 1e-6);
    CHECK(s.signature == Signature{1, 1});
    CHECK(signature_of(s, 1e-9) == Signature{1, 1});
    const double x = 0.2, y = 0.7, z = 0.35;
    CHECK(indefinite_inner(phi(s, pt(x)), phi(s, pt(y))) == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(indefinite_inner(phi(s, pt(x)), phi(s, pt(z))) == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("xy kernel: one eigenvalue and phi is the identity") {
    const auto k = kernel_preset("xy");
    const auto s = nystrom_spectrum(k, make_grid(kUnit, 64));
    REQUIRE(s.J() == 1);
    CHECK(std::abs(s.eigenvalues(0) - 1.0 / 3.0) < 1e-8);
    CHECK_FALSE(s.rank_infinite);
    CHECK(s.rank_estimate == 1);
    const double sign = phi(s, pt(0.5)).coords(0) > 0 ? 1.0 : -1.0;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double x = (i + 0.5) / 100.0;
        worst = std::max(worst, std::abs(sign * phi(s, pt(x)).coords(0) - x));
    }
    CHECK(worst < 1e-6);
    const auto t = trace_diagnostics(s, k);
    CHECK(t.sum_abs_eigs == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(t.diagonal_integral == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(t.is_positive_definite);
}

TEST_CASE("zero kernel") {
    const auto k = KernelSpec::constant(0.0, kUnit);
    const auto s = nystrom_spectrum(k, make_grid(kUnit, 32));
    CHECK(s.empty());
    CHECK(s.signature == Signature{0, 0});
    CHECK(signature_of(s, 1e-12) == Signature{0, 0});
    CHECK(phi(s, pt(0.4)).coords.size() == 0);
    const auto t = trace_diagnostics(s, k);
    CHECK(t.sum_abs_eigs == 0.0);
    CHECK(t.diagonal_integral == 0.0);
}

TEST_CASE("rbf: trace formula, unit norm, positive signature") {
    const auto k = kernel_preset("rbf");
    const auto s = nystrom_spectrum(k, make_grid(kUnit, 256));
    CHECK(s.signature.q == 0);
    const auto t = trace_diagnostics(s, k);
    CHECK(std::abs(t.sum_abs_eigs - 1.0) <= 1e-4);
    CHECK(t.diagonal_integral == doctest::Approx(1.0).epsilon(1e-12));
    for (double x : {0.0, 0.13, 0.5, 0.99}) {
        const auto p = phi(s, pt(x));
        CHECK(p.coords.squaredNorm() == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(indefinite_inner(p, p) == doctest::Approx(p.coords.squaredNorm()).epsilon(1e-15));
    }
}

TEST_CASE("sociability inner product reproduces f") {
    const auto k = KernelSpec::sociability(kUnit);
    SpectrumOptions opts;
    opts.tail_tol = 1e-6;
    const auto s = nystrom_spectrum(k, make_grid(kUnit, 256), opts);
    const double x = 0.5, y = 0.8;
    CHECK(std::abs(indefinite_inner(phi(s, pt(x)), phi(s, pt(y))) - 0.5506710358827784) < 1e-4);
}

TEST_CASE("indefinite inner product rejects mismatched coordinates") {
    const auto a = nystrom_spectrum(kernel_preset("two_block"), make_grid(kUnit, 16));
    const auto b = nystrom_spectrum(kernel_preset("xy"), make_grid(kUnit, 16));
    CHECK(test::error_of([&] { indefinite_inner(phi(a, pt(0.1)), phi(b, pt(0.1))); }) == ErrorCode::incompatible);
}

TEST_CASE("gram reproduction on presets") {
    for (const char* name : {"rbf", "sociability"}) {
        CAPTURE(name);
        const auto k = kernel_preset(name);
        SpectrumOptions opts;
        opts.tail_tol = 1e-6;
        const auto s = nystrom_spectrum(k, make_grid(k.domain(), 512), opts);
        CHECK(gram_error(k, s, 100, 17) <= 1e-3);
    }
}

TEST_CASE("orthonormality and reconstruction") {
    const auto k = kernel_preset("sociability");
    const auto g = make_grid(k.domain(), 128);
    const auto s = nystrom_spectrum(k, g);
    const Eigen::MatrixXd gram = s.eigvecs.transpose() * g.weights.asDiagonal() * s.eigvecs;
    CHECK(test::max_abs(gram - Eigen::MatrixXd::Identity(s.J(), s.J())) < 1e-8);

    Eigen::MatrixXd K(g.size(), g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i)
        for (Eigen::Index j = 0; j < g.size(); ++j) K(i, j) = k(g.node(i), g.node(j));
    const Eigen::MatrixXd rec = s.eigvecs * s.eigenvalues.asDiagonal() * s.eigvecs.transpose();
    CHECK(test::max_abs(rec - K) < 1e-5);
}

TEST_CASE("tail mass shrinks as J grows") {
    const auto k = kernel_preset("rbf");
    const auto g = make_grid(kUnit, 128);
    double prev = INFINITY;
    for (int J = 1; J <= 8; ++J) {
        SpectrumOptions o;
        o.J = J;
        const auto s = nystrom_spectrum(k, g, o);
        CHECK(s.tail_mass >= 0.0);
        CHECK(s.tail_mass < prev);
        prev = s.tail_mass;
    }
}

TEST_CASE("grid refinement converges") {
    for (const char* name : {"rbf", "sociability", "circle_rbf", "branching"}) {
        CAPTURE(name);
        const auto k = kernel_preset(name);
        SpectrumOptions o;
        o.J = 4;
        const auto s1 = nystrom_spectrum(k, make_grid(k.domain(), 24), o);
        const auto s2 = nystrom_spectrum(k, make_grid(k.domain(), 48), o);
        const auto s3 = nystrom_spectrum(k, make_grid(k.domain(), 96), o);
        for (int j = 0; j < 4; ++j) {
            const double d1 = std::abs(s2.eigenvalues(j) - s1.eigenvalues(j));
            const double d2 = std::abs(s3.eigenvalues(j) - s2.eigenvalues(j));
            CHECK(d2 <= d1 + 1e-14);
        }
    }
}

TEST_CASE("positive eigenvalue first on magnitude ties") {
    Eigen::MatrixXd b(2, 2);
    b << 0.5, 0.0, 0.0, 0.5;  // eigenvalues 0.25, 0.25 of (1/2) B
    Eigen::MatrixXd c(2, 2);
    c << 0.5, 0.5, 0.5, 0.5;  // 0.5 and 0
    const auto s = nystrom_spectrum(KernelSpec::blockwise_graphon(b, {0.0, 0.5, 1.0}), make_grid(kUnit, 16));
    CHECK(s.J() == 2);
    CHECK(s.eigenvalues(0) == doctest::Approx(0.25));
    const auto s2 = nystrom_spectrum(KernelSpec::blockwise_graphon(c, {0.0, 0.5, 1.0}), make_grid(kUnit, 16));
    CHECK(s2.J() == 1);
}

TEST_CASE("spectrum bundle round trip") {
    const auto k = kernel_preset("two_block");
    const auto s = nystrom_spectrum(k, make_grid(kUnit, 16));
    const auto dir = std::filesystem::temp_directory_path() / "lpm_unit_spectrum";
    std::filesystem::remove_all(dir);
    save_spectrum(s, dir);
    for (const char* f : {"eigenvalues.csv", "eigvecs.csv", "grid.csv", "meta.json"})
        CHECK(std::filesystem::exists(dir / f));
    const auto back = load_spectrum(dir);
    CHECK(back.J() == s.J());
    CHECK(back.signature == s.signature);
    CHECK(test::max_abs(back.eigenvalues - s.eigenvalues) == 0.0);
    CHECK(test::max_abs(back.eigvecs - s.eigvecs) == 0.0);
    const double x = 0.3;
    CHECK(phi(back, pt(x)).coords == phi(s, pt(x)).coords);
    std::filesystem::remove_all(dir);
}
