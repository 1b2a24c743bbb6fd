#include <cmath>
#include <random>

#include <doctest.h>

#include "lpm/curvature.hpp"
#include "lpm/kernels.hpp"
#include "lpm/quadrature.hpp"
#include "lpm/spectrum.hpp"
#include "support.hpp"

using namespace lpm;
using test::pt;

namespace {

double series_value(const std::vector<PolyTerm>& terms, double x, double y) {
    double s = 0.0;
    for (const auto& t : terms) s += t.coef * std::pow(x, t.alpha[0]) * std::pow(y, t.beta[0]);
    return s;
}

std::vector<double> random_point(const Box& box, std::mt19937_64& gen) {
    std::vector<double> p(box.dim());
    for (int i = 0; i < box.dim(); ++i) p[i] = std::uniform_real_distribution<double>(box.lo[i], box.hi[i])(gen);
    return p;
}

}  // namespace

TEST_CASE("sociability closed forms") {
    const auto soc = kernel_preset("sociability");
    const double zero = 0.0, one = 1.0, y = 2.7;
    CHECK(eval_kernel(soc, pt(zero), pt(y)) == 0.0);
    CHECK(eval_kernel(soc, pt(one), pt(one)) == doctest::Approx(0.8646647167633873).epsilon(1e-15));
}

TEST_CASE("rbf is one on the diagonal") {
    const auto rbf = kernel_preset("rbf");
    for (double x : {0.0, 0.3, 1.0}) CHECK(eval_kernel(rbf, pt(x), pt(x)) == 1.0);
}

TEST_CASE("evaluation outside the domain is rejected") {
    const auto rbf = kernel_preset("rbf");
    const double in = 0.5, out = 1.5;
    CHECK(test::error_of([&] { eval_kernel(rbf, pt(in), pt(out)); }) == ErrorCode::domain);
}

TEST_CASE("every preset is exactly symmetric and stays in [0,1]") {
    std::mt19937_64 gen(11);
    for (const auto& name : kernel_preset_names()) {
        CAPTURE(name);
        const auto k = kernel_preset(name);
        for (int r = 0; r < 10000; ++r) {
            const auto x = random_point(k.domain(), gen), y = random_point(k.domain(), gen);
            const double a = k(x, y), b = k(y, x);
            REQUIRE(a == b);
            REQUIRE(a >= 0.0);
            REQUIRE(a <= 1.0);
        }
        // grid scan with about 10^3 points
        const int d = k.latent_dim();
        const int per_axis = d == 1 ? 1000 : static_cast<int>(std::ceil(std::pow(1000.0, 1.0 / d)));
        const auto grid = make_grid(k.domain(), per_axis, QuadratureScheme::uniform_midpoint);
        double lo = 1.0, hi = 0.0;
        for (Eigen::Index i = 0; i < grid.size(); i += 7)
            for (Eigen::Index j = 0; j < grid.size(); ++j) {
                const double v = k(grid.node(i), grid.node(j));
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        CHECK(lo >= 0.0);
        CHECK(hi <= 1.0);
    }
}

TEST_CASE("polynomial tables must be symmetric and in range") {
    const Box unit = Box::interval(0.0, 1.0);
    CHECK(test::error_of([&] { KernelSpec::polynomial({{{1}, {0}, 0.5}}, unit); }).has_value());
    CHECK(test::error_of([&] { KernelSpec::polynomial({{{1}, {1}, 2.0}}, unit); }) == ErrorCode::range);
    CHECK_FALSE(test::error_of([&] { KernelSpec::polynomial({{{1}, {0}, 0.5}, {{0}, {1}, 0.5}}, unit); }));
}

TEST_CASE("json round trip") {
    for (const auto& name : kernel_preset_names()) {
        CAPTURE(name);
        const auto k = kernel_preset(name);
        const auto back = KernelSpec::from_json(k.to_json());
        CHECK(back.to_json() == k.to_json());
    }
    const auto doc = nlohmann::json::parse(
        R"({"family":"rbf","params":{"sigma":0.25},"domain":{"lo":[0],"hi":[2]},"latent_dim":1})");
    const auto k = KernelSpec::from_json(doc);
    const double a = 0.0, b = 0.25;
    CHECK(k(pt(a), pt(b)) == doctest::Approx(std::exp(-0.5)));
    CHECK(test::error_of([] { KernelSpec::from_json(nlohmann::json::parse(R"({"family":"nope"})")); }) ==
          ErrorCode::config);
}

TEST_CASE("polynomial rank bound") {
    const Box unit = Box::interval(0.0, 1.0);
    CHECK(polynomial_rank_bound(kernel_preset("xy")) == 1);

    // (1 + xy)^2 / 4 = 1/4 + xy/2 + x^2 y^2 / 4
    const auto sq = KernelSpec::polynomial({{{0}, {0}, 0.25}, {{1}, {1}, 0.5}, {{2}, {2}, 0.25}}, unit);
    CHECK(polynomial_rank_bound(sq) == 3);

    std::vector<PolyTerm> full;
    const double c[3][3] = {{0.3, 0.05, 0.05}, {0.05, 0.2, 0.05}, {0.05, 0.05, 0.1}};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) full.push_back({{a}, {b}, c[a][b]});
    const auto dense = KernelSpec::polynomial(full, unit);
    CHECK(polynomial_rank_bound(dense) == 3);

    const auto grid = make_grid(unit, 64);
    for (const auto* k : {&sq, &dense}) {
        SpectrumOptions opts;
        opts.J = 10;
        const auto s = nystrom_spectrum(*k, grid, opts);
        int above = 0;
        for (Eigen::Index j = 0; j < s.eigenvalues.size(); ++j) above += std::abs(s.eigenvalues(j)) > 1e-8 * s.lambda_max;
        CHECK(above == 3);
    }
    CHECK(test::error_of([] { polynomial_rank_bound(kernel_preset("rbf")); }) == ErrorCode::unsupported);
}

TEST_CASE("analytic truncation") {
    const auto soc = kernel_preset("sociability");
    const auto t3 = series_terms(soc, 3);
    REQUIRE(t3.size() == 1);
    CHECK(t3[0].alpha == std::vector<int>{1});
    CHECK(t3[0].beta == std::vector<int>{1});
    CHECK(t3[0].coef == doctest::Approx(2.0));

    // |f - f_3| <= 2 (xy)^2 on [0,1]^2
    double worst = -1.0;
    for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j) {
            const double x = i / 100.0, y = j / 100.0;
            const double f = 1.0 - std::exp(-2.0 * x * y);
            worst = std::max(worst, std::abs(f - series_value(t3, x, y)) - 2.0 * x * x * y * y);
        }
    CHECK(worst <= 1e-15);

    // f_3 = 2xy exceeds 1 on [0,3]; admissible on [0, 0.5]
    CHECK(test::error_of([&] { truncate_analytic(soc, 3); }) == ErrorCode::range);
    const auto small = KernelSpec::sociability(Box::interval(0.0, 0.5));
    const auto f3 = truncate_analytic(small, 3);
    const double x = 0.3, y = 0.4;
    CHECK(f3(pt(x), pt(y)) == doctest::Approx(2 * x * y));

    const auto f2 = truncate_analytic(small, 2);
    CHECK(f2(pt(x), pt(y)) == 0.0);

    const auto xy = kernel_preset("xy");
    const auto same = truncate_analytic(xy, 7);
    for (double a : {0.0, 0.2, 0.9})
        for (double b : {0.1, 0.5, 1.0}) CHECK(same(pt(a), pt(b)) == xy(pt(a), pt(b)));

    CHECK(test::error_of([&] { series_terms(kernel_preset("rbf"), 3); }) == ErrorCode::unsupported);
    CHECK(test::error_of([&] { truncate_analytic(small, 1); }) == ErrorCode::parameter);
}

TEST_CASE("curvature") {
    const Box unit = Box::interval(0.0, 1.0);
    const auto grid = make_grid(unit, 256);

    SUBCASE("rbf has alpha near 1 and obeys the explicit bound") {
        const auto rbf = kernel_preset("rbf");
        const auto s = nystrom_spectrum(rbf, grid);
        const auto r = check_curvature(rbf, s, 2000, 1);
        CHECK(r.alpha_hat == doctest::Approx(1.0).epsilon(0.1));
        CHECK(r.alpha_hat <= 1.0);
        CHECK(r.max_violation_ratio >= 0.0);
        CHECK(r.pairs_tested == 2000);
        CHECK_FALSE(r.degenerate);

        std::mt19937_64 gen(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double sigma = 0.5;
        for (int i = 0; i < 10000; ++i) {
            const double x = u(gen), y = std::clamp(x + 0.2 * (u(gen) - 0.5), 0.0, 1.0);
            const double d2 = rbf(pt(x), pt(x)) + rbf(pt(y), pt(y)) - 2.0 * rbf(pt(x), pt(y));
            REQUIRE(d2 <= (x - y) * (x - y) / (sigma * sigma) + 1e-15);
        }
    }
    SUBCASE("xy has alpha 1 and c 1") {
        const auto xy = kernel_preset("xy");
        const auto s = nystrom_spectrum(xy, grid);
        const auto r = check_curvature(xy, s, 500, 3);
        CHECK(r.alpha_hat == doctest::Approx(1.0).epsilon(0.01));
        CHECK(r.c_hat == doctest::Approx(1.0).epsilon(0.01));
    }
    SUBCASE("constant kernel is degenerate") {
        const auto c = KernelSpec::constant(0.5, unit);
        const auto s = nystrom_spectrum(c, grid);
        const auto r = check_curvature(c, s, 200, 1);
        CHECK(r.degenerate);
        CHECK(r.alpha_hat == 1.0);
        CHECK(r.c_hat == 0.0);
    }
}
