#include "lpm/curvature.hpp"

#include <algorithm>
#include <cmath>

#include "lpm/error.hpp"
#include "lpm/rng.hpp"

namespace lpm {

CurvatureReport check_curvature(const KernelSpec& spec, const OperatorSpectrum& spectrum, int n_pairs,
                                std::uint64_t seed) {
    require(n_pairs >= 2, ErrorCode::parameter, "check_curvature needs at least 2 pairs");
    require(spectrum.kernel.family() == spec.family() && spectrum.grid.dim() == spec.latent_dim(),
            ErrorCode::incompatible, "spectrum was not computed for this kernel");
    const Box& box = spec.domain();
    const int d = box.dim();
    const double rmax = 0.1 * box.diameter();
    const double rmin = 1e-3 * box.diameter();

    Rng rng(seed);
    RowMatrix xs(n_pairs, d), ys(n_pairs, d);
    std::vector<double> dist(n_pairs);
    std::vector<double> dir(d);
    for (int t = 0; t < n_pairs; ++t) {
        for (;;) {
            const double r = rmin * std::pow(rmax / rmin, rng.uniform());
            double norm = 0.0;
            for (auto& v : dir) {
                v = rng.normal();
                norm += v * v;
            }
            norm = std::sqrt(norm);
            bool inside = true;
            for (int k = 0; k < d; ++k) {
                xs(t, k) = rng.uniform(box.lo[k], box.hi[k]);
                ys(t, k) = xs(t, k) + r * dir[k] / norm;
                inside = inside && ys(t, k) >= box.lo[k] && ys(t, k) <= box.hi[k];
            }
            if (inside) {
                dist[t] = r;
                break;
            }
        }
    }

    const RowMatrix px = phi_matrix(spectrum, xs);
    const RowMatrix py = phi_matrix(spectrum, ys);
    const std::vector<int> signs = spectrum.signs();
    std::vector<double> d2(n_pairs);
    for (int t = 0; t < n_pairs; ++t) {
        double plus = 0.0, minus = 0.0;
        for (int j = 0; j < spectrum.J(); ++j) {
            const double diff = px(t, j) - py(t, j);
            (signs[j] > 0 ? plus : minus) += diff * diff;
        }
        d2[t] = std::max(plus, minus);
    }

    CurvatureReport rep;
    rep.pairs_tested = n_pairs;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int used = 0;
    for (int t = 0; t < n_pairs; ++t) {
        if (d2[t] < 1e-14) continue;
        const double lx = std::log(dist[t]), ly = std::log(d2[t]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++used;
    }
    rep.pairs_used = used;
    if (used < 2) {
        rep.degenerate = true;
        rep.alpha_hat = 1.0;
        rep.c_hat = 0.0;
        rep.max_violation_ratio = 0.0;
        return rep;
    }
    const double slope = (used * sxy - sx * sy) / (used * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / used;
    rep.alpha_hat = std::clamp(slope / 2.0, 1e-12, 1.0);
    rep.c_hat = std::exp(intercept);
    for (int t = 0; t < n_pairs; ++t)
        rep.max_violation_ratio =
            std::max(rep.max_violation_ratio, d2[t] / (rep.c_hat * std::pow(dist[t], 2.0 * rep.alpha_hat)));
    return rep;
}

}  // namespace lpm
