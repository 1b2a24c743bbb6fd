#include <cmath>
#include <random>

#include <doctest.h>

#include "lpm/manifold.hpp"
#include "support.hpp"

using namespace lpm;

namespace {

RowMatrix line_in(int D, int n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd dir(D);
    for (int j = 0; j < D; ++j) dir(j) = j + 1.0;
    dir.normalize();
    RowMatrix x(n, D);
    for (int i = 0; i < n; ++i) x.row(i) = u(gen) * dir.transpose();
    return x;
}

RowMatrix circle(int n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
    RowMatrix x(n, 2);
    for (int i = 0; i < n; ++i) {
        const double t = u(gen);
        x(i, 0) = std::cos(t);
        x(i, 1) = std::sin(t);
    }
    return x;
}

RowMatrix ball3(int n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RowMatrix x(n, 3);
    for (int i = 0; i < n;) {
        const Eigen::RowVector3d p(u(gen), u(gen), u(gen));
        if (p.squaredNorm() <= 1.0) x.row(i++) = p;
    }
    return x;
}

Eigen::MatrixXd random_orthogonal(int D, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(D, D);
    for (int i = 0; i < D; ++i)
        for (int j = 0; j < D; ++j) a(i, j) = g(gen);
    return Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
}

constexpr DimMethod kMethods[] = {DimMethod::local_pca, DimMethod::mle_knn, DimMethod::simplex_skewness};

}  // namespace

TEST_CASE("k nearest neighbours") {
    RowMatrix x(5, 1);
    x << 0.0, 1.0, 3.0, 3.5, 10.0;
    const auto nb = knn(x, 2);
    CHECK(nb[0] == std::vector<int>{1, 2});
    CHECK(nb[2] == std::vector<int>{3, 1});
    CHECK(nb[4] == std::vector<int>{3, 2});
    RowMatrix tie(3, 1);
    tie << 0.0, -1.0, 1.0;
    CHECK(knn(tie, 2)[0] == std::vector<int>{1, 2});
    CHECK(test::error_of([&] { knn(x, 5); }) == ErrorCode::parameter);
}

TEST_CASE("simplex skewness reference") {
    CHECK(simplex_skewness_reference(1) == 0.0);
    CHECK(simplex_skewness_reference(2) == doctest::Approx(2.0 / M_PI).epsilon(1e-14));
    for (int m = 2; m < 10; ++m) CHECK(simplex_skewness_reference(m + 1) > simplex_skewness_reference(m));
}

TEST_CASE("line in ten dimensions") {
    const auto x = line_in(10, 1000, 1);
    const auto e = intrinsic_dim(x, DimMethod::local_pca);
    CHECK(e.value == 1.0);
    CHECK(e.k == default_neighbourhood(1000));
    for (auto m : {DimMethod::mle_knn, DimMethod::simplex_skewness}) {
        CAPTURE(to_string(m));
        CHECK(intrinsic_dim(x, m).value == doctest::Approx(1.0).epsilon(0.2));
    }
}

TEST_CASE("circle is one dimensional") {
    const auto x = circle(3000, 2);
    for (auto m : kMethods) {
        CAPTURE(to_string(m));
        const double v = intrinsic_dim(x, m).value;
        CHECK(v >= 0.8);
        CHECK(v <= 1.6);
    }
}

TEST_CASE("solid ball is three dimensional") {
    const auto x = ball3(4000, 3);
    for (auto m : kMethods) {
        CAPTURE(to_string(m));
        DimParams p;
        p.k = 30;
        const double v = intrinsic_dim(x, m, p).value;
        CHECK(v >= 2.4);
        CHECK(v <= 3.6);
    }
}

TEST_CASE("estimates are invariant to rotation and zero padding") {
    const auto x = circle(800, 4);
    RowMatrix padded = RowMatrix::Zero(800, 5);
    padded.leftCols(2) = x;
    const RowMatrix rotated = padded * random_orthogonal(5, 9).transpose();
    for (auto m : kMethods) {
        CAPTURE(to_string(m));
        const double a = intrinsic_dim(x, m).value;
        CHECK(intrinsic_dim(padded, m).value == doctest::Approx(a).epsilon(1e-8));
        CHECK(intrinsic_dim(rotated, m).value == doctest::Approx(a).epsilon(1e-8));
    }
}

TEST_CASE("duplicate points are excluded") {
    auto x = circle(300, 5);
    x.row(7) = x.row(3);
    x.row(11) = x.row(3);
    const auto e = intrinsic_dim(x, DimMethod::mle_knn);
    CHECK(e.excluded == 3);
    CHECK(std::isnan(e.per_point(3)));
    CHECK(std::isfinite(e.value));
    DimParams bad;
    bad.pca_threshold = 1.5;
    CHECK(test::error_of([&] { intrinsic_dim(x, DimMethod::local_pca, bad); }) == ErrorCode::parameter);
}

TEST_CASE("mean shift on an exact line stays on the line") {
    const auto x = line_in(3, 400, 6);
    RidgeOptions o;
    o.seed = 3;
    const auto r = scms_ridge(x, o);
    REQUIRE(r.points.rows() == 40);
    Eigen::VectorXd dir = x.row(0).transpose().normalized();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < r.points.rows(); ++i) {
        const Eigen::VectorXd p = r.points.row(i).transpose();
        worst = std::max(worst, (p - p.dot(dir) * dir).norm());
    }
    CHECK(worst <= 1e-8);
    CHECK(r.bandwidth == doctest::Approx(normal_reference_bandwidth(x)));
}

TEST_CASE("zero-dimensional ridge of a gaussian blob is the KDE mode") {
    std::mt19937_64 gen(8);
    std::normal_distribution<double> g;
    RowMatrix x(10000, 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) << 2.0 + g(gen), -1.0 + g(gen);
    RidgeOptions o;
    o.ridge_dim = 0;
    o.starts = std::vector<int>{0, 1, 2, 3, 4};
    const auto r = scms_ridge(x, o);
    const double h = r.bandwidth;

    // dense grid argmax of the KDE around the sample mean
    const Eigen::RowVector2d mean = x.colwise().mean();
    auto kde = [&](const Eigen::RowVector2d& p) {
        return (x.rowwise() - p).rowwise().squaredNorm().array().unaryExpr([&](double d) {
            return std::exp(-d / (2.0 * h * h));
        }).sum();
    };
    Eigen::RowVector2d best = mean;
    double top = -1.0;
    const int half = 50;
    const double step = 0.3 / half;
    for (int a = -half; a <= half; ++a)
        for (int b = -half; b <= half; ++b) {
            const Eigen::RowVector2d p = mean + Eigen::RowVector2d(a * step, b * step);
            const double v = kde(p);
            if (v > top) top = v, best = p;
        }
    for (Eigen::Index i = 0; i < r.points.rows(); ++i) {
        CHECK(r.converged[i]);
        CHECK((r.points.row(i) - best).norm() <= h / 10.0);
        CHECK(kde(r.points.row(i)) >= top * (1.0 - 1e-9));
    }
    o.ridge_dim = 2;
    CHECK(test::error_of([&] { scms_ridge(x, o); }) == ErrorCode::parameter);
}

TEST_CASE("hausdorff distance") {
    RowMatrix a(2, 2), b(1, 2);
    a << 0, 0, 1, 0;
    b << 0, 0;
    CHECK(hausdorff_distance(a, b) == 1.0);
    CHECK(hausdorff_distance(a, a) == 0.0);
    RowMatrix c(1, 2);
    c << 3, 4;
    CHECK(hausdorff_distance(b, c) == 5.0);

    std::mt19937_64 gen(10);
    std::uniform_int_distribution<int> sz(1, 6);
    std::normal_distribution<double> g;
    auto cloud = [&] {
        RowMatrix m(sz(gen), 3);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(gen);
        return m;
    };
    for (int t = 0; t < 1000; ++t) {
        const auto p = cloud(), q = cloud(), r = cloud();
        const double pq = hausdorff_distance(p, q);
        REQUIRE(pq == hausdorff_distance(q, p));
        REQUIRE(hausdorff_distance(p, r) <= pq + hausdorff_distance(q, r) + 1e-12);
    }
    RowMatrix empty(0, 2);
    CHECK(test::error_of([&] { hausdorff_distance(a, empty); }) == ErrorCode::parameter);
}

TEST_CASE("distance to a polyline") {
    RowMatrix curve(3, 2), p(3, 2);
    curve << 0, 0, 1, 0, 1, 1;
    p << 0.5, 0.3, 2.0, 0.5, -1.0, 0.0;
    const auto d = distance_to_polyline(p, curve);
    CHECK(d(0) == doctest::Approx(0.3));
    CHECK(d(1) == doctest::Approx(1.0));
    CHECK(d(2) == doctest::Approx(1.0));
}
