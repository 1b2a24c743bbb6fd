#include "lpm/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "lpm/error.hpp"
#include "lpm/rng.hpp"

namespace lpm {

std::string to_string(QuadratureScheme s) {
    switch (s) {
        case QuadratureScheme::gauss_legendre_tensor: return "gauss_legendre_tensor";
        case QuadratureScheme::uniform_midpoint: return "uniform_midpoint";
        case QuadratureScheme::monte_carlo: return "monte_carlo";
    }
    return "unknown";
}

std::string to_string(Weighting w) { return w == Weighting::lebesgue ? "lebesgue" : "latent_density"; }

QuadratureScheme quadrature_scheme_from_string(const std::string& s) {
    if (s == "gauss_legendre_tensor" || s == "gauss_legendre") return QuadratureScheme::gauss_legendre_tensor;
    if (s == "uniform_midpoint" || s == "midpoint") return QuadratureScheme::uniform_midpoint;
    if (s == "monte_carlo") return QuadratureScheme::monte_carlo;
    fail(ErrorCode::config, "unknown quadrature scheme '" + s + "'");
}

Weighting weighting_from_string(const std::string& s) {
    if (s == "lebesgue") return Weighting::lebesgue;
    if (s == "latent_density") return Weighting::latent_density;
    fail(ErrorCode::config, "unknown weighting '" + s + "'");
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int m) {
    require(m >= 1, ErrorCode::parameter, "Gauss-Legendre needs m >= 1");
    std::vector<double> x(m), w(m);
    for (int i = 0; i < (m + 1) / 2; ++i) {
        // Tricomi's initial guess, then Newton on P_m.
        double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= m; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (m == 1) p0 = 1.0;
            dp = m * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        if (m == 1) {
            z = 0.0;
            dp = 1.0;
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = w[m - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    if (m % 2 == 1) x[m / 2] = 0.0;
    return {x, w};
}

QuadratureGrid make_grid(const Box& box, int per_axis, QuadratureScheme scheme, int mc_nodes, std::uint64_t seed) {
    const int d = box.dim();
    require(per_axis >= 2, ErrorCode::parameter, "quadrature needs at least 2 nodes per axis");
    QuadratureGrid grid;
    grid.scheme = scheme;
    if (d > 3 && scheme != QuadratureScheme::monte_carlo) {
        grid.warnings.push_back("latent_dim " + std::to_string(d) +
                                " > 3: tensor quadrature replaced by Monte-Carlo nodes");
        scheme = QuadratureScheme::monte_carlo;
        grid.scheme = scheme;
    }
    if (scheme == QuadratureScheme::monte_carlo) {
        require(mc_nodes >= 2, ErrorCode::parameter, "Monte-Carlo quadrature needs >= 2 nodes");
        Rng rng(seed);
        grid.nodes.resize(mc_nodes, d);
        for (int i = 0; i < mc_nodes; ++i)
            for (int k = 0; k < d; ++k) grid.nodes(i, k) = rng.uniform(box.lo[k], box.hi[k]);
        grid.weights = Eigen::VectorXd::Constant(mc_nodes, box.volume() / mc_nodes);
        return grid;
    }

    std::vector<double> ref_x(per_axis), ref_w(per_axis);
    if (scheme == QuadratureScheme::gauss_legendre_tensor) {
        std::tie(ref_x, ref_w) = gauss_legendre(per_axis);
    } else {
        for (int t = 0; t < per_axis; ++t) {
            ref_x[t] = -1.0 + (2.0 * t + 1.0) / per_axis;
            ref_w[t] = 2.0 / per_axis;
        }
    }
    long m = 1;
    for (int k = 0; k < d; ++k) m *= per_axis;
    grid.nodes.resize(m, d);
    grid.weights.resize(m);
    for (long idx = 0; idx < m; ++idx) {
        long rem = idx;
        double w = 1.0;
        // last coordinate varies fastest
        for (int k = d - 1; k >= 0; --k) {
            const int t = static_cast<int>(rem % per_axis);
            rem /= per_axis;
            const double half = 0.5 * (box.hi[k] - box.lo[k]);
            grid.nodes(idx, k) = box.lo[k] + half * (ref_x[t] + 1.0);
            w *= half * ref_w[t];
        }
        grid.weights(idx) = w;
    }
    return grid;
}

QuadratureGrid weight_by_density(const QuadratureGrid& grid, const std::function<double(Point)>& density) {
    std::vector<Eigen::Index> keep;
    std::vector<double> w;
    double total = 0.0;
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const double v = grid.weights(i) * density(grid.node(i));
        if (v > 0.0) {
            keep.push_back(i);
            w.push_back(v);
            total += v;
        }
    }
    require(total > 0.0, ErrorCode::parameter, "latent density vanishes on every quadrature node");
    QuadratureGrid out;
    out.scheme = grid.scheme;
    out.weighting = Weighting::latent_density;
    out.warnings = grid.warnings;
    out.nodes.resize(static_cast<Eigen::Index>(keep.size()), grid.dim());
    out.weights.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t t = 0; t < keep.size(); ++t) {
        out.nodes.row(static_cast<Eigen::Index>(t)) = grid.nodes.row(keep[t]);
        out.weights(static_cast<Eigen::Index>(t)) = w[t] / total;
    }
    return out;
}

}  // namespace lpm
