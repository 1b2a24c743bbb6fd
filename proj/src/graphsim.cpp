#include "lpm/graphsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "lpm/error.hpp"
#include "lpm/parallel.hpp"
#include "lpm/rng.hpp"

namespace lpm {

std::string to_string(LatentKind k) {
    switch (k) {
        case LatentKind::uniform_box: return "uniform_box";
        case LatentKind::truncated_gamma: return "truncated_gamma";
        case LatentKind::circle_angle_uniform: return "circle_angle_uniform";
        case LatentKind::piecewise_density: return "piecewise_density";
    }
    return "unknown";
}

LatentDistribution LatentDistribution::uniform(Box box) {
    require(box.dim() >= 1, ErrorCode::config, "uniform_box needs a nonempty box");
    for (int k = 0; k < box.dim(); ++k)
        require(box.lo[k] < box.hi[k], ErrorCode::config, "uniform_box needs lo < hi on every axis");
    LatentDistribution d;
    d.kind = LatentKind::uniform_box;
    d.box = std::move(box);
    return d;
}

LatentDistribution LatentDistribution::truncated_gamma(double shape, double rate, double bound, int dim) {
    require(shape > 0.0 && rate > 0.0 && bound > 0.0, ErrorCode::config,
            "truncated_gamma needs positive shape, rate and bound");
    require(dim >= 1, ErrorCode::config, "truncated_gamma needs dim >= 1");
    LatentDistribution d;
    d.kind = LatentKind::truncated_gamma;
    d.shape = shape;
    d.rate = rate;
    d.bound = bound;
    d.dim = dim;
    return d;
}

LatentDistribution LatentDistribution::circle() {
    LatentDistribution d;
    d.kind = LatentKind::circle_angle_uniform;
    return d;
}

LatentDistribution LatentDistribution::piecewise(std::vector<double> boundaries, std::vector<double> heights) {
    require(boundaries.size() >= 2 && heights.size() + 1 == boundaries.size(), ErrorCode::config,
            "piecewise_density needs K+1 boundaries for K heights");
    double mass = 0.0;
    for (std::size_t k = 0; k < heights.size(); ++k) {
        require(boundaries[k] < boundaries[k + 1], ErrorCode::config, "piecewise_density boundaries must ascend");
        require(heights[k] >= 0.0, ErrorCode::config, "piecewise_density heights must be nonnegative");
        mass += heights[k] * (boundaries[k + 1] - boundaries[k]);
    }
    require(mass > 0.0, ErrorCode::config, "piecewise_density has zero mass");
    LatentDistribution d;
    d.kind = LatentKind::piecewise_density;
    d.boundaries = std::move(boundaries);
    d.heights = std::move(heights);
    return d;
}

int LatentDistribution::latent_dim() const {
    switch (kind) {
        case LatentKind::uniform_box: return box.dim();
        case LatentKind::truncated_gamma: return dim;
        default: return 1;
    }
}

Box LatentDistribution::support() const {
    Box b;
    switch (kind) {
        case LatentKind::uniform_box: b = box; break;
        case LatentKind::truncated_gamma: b = Box::cube(dim, 0.0, bound); break;
        case LatentKind::circle_angle_uniform: b = Box::interval(0.0, 2.0 * std::numbers::pi); break;
        case LatentKind::piecewise_density: b = Box::interval(boundaries.front(), boundaries.back()); break;
    }
    for (auto& v : b.lo) v *= scale;
    for (auto& v : b.hi) v *= scale;
    return b;
}

double LatentDistribution::density(Point z) const {
    if (!support().contains(z)) return 0.0;
    switch (kind) {
        case LatentKind::uniform_box:
        case LatentKind::circle_angle_uniform: return 1.0;
        case LatentKind::truncated_gamma: {
            double p = 1.0;
            for (double v : z) {
                const double w = v / scale;
                p *= std::pow(w, shape - 1.0) * std::exp(-rate * w);
            }
            return p;
        }
        case LatentKind::piecewise_density: {
            const double w = z[0] / scale;
            auto it = std::upper_bound(boundaries.begin(), boundaries.end(), w);
            auto k = static_cast<std::size_t>(std::max<long>(0, it - boundaries.begin() - 1));
            k = std::min(k, heights.size() - 1);
            return heights[k];
        }
    }
    return 0.0;
}

LatentDistribution LatentDistribution::from_json(const nlohmann::json& doc) {
    try {
        const std::string kind = doc.at("kind").get<std::string>();
        LatentDistribution d;
        if (kind == "uniform_box") {
            d = uniform(Box{doc.at("lo").get<std::vector<double>>(), doc.at("hi").get<std::vector<double>>()});
        } else if (kind == "truncated_gamma") {
            d = truncated_gamma(doc.value("shape", 1.0), doc.value("rate", 1.0), doc.value("B", 3.0),
                                doc.value("dim", 1));
        } else if (kind == "circle_angle_uniform") {
            d = circle();
        } else if (kind == "piecewise_density") {
            d = piecewise(doc.at("boundaries").get<std::vector<double>>(), doc.at("heights").get<std::vector<double>>());
        } else {
            fail(ErrorCode::config, "unknown latent distribution '" + kind + "'");
        }
        d.scale = doc.value("scale", 1.0);
        require(d.scale > 0.0, ErrorCode::config, "latent scale must be positive");
        return d;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::config, std::string("malformed latent distribution: ") + e.what());
    }
}

nlohmann::json LatentDistribution::to_json() const {
    nlohmann::json doc = {{"kind", to_string(kind)}, {"scale", scale}};
    switch (kind) {
        case LatentKind::uniform_box: doc["lo"] = box.lo; doc["hi"] = box.hi; break;
        case LatentKind::truncated_gamma:
            doc["shape"] = shape;
            doc["rate"] = rate;
            doc["B"] = bound;
            doc["dim"] = dim;
            break;
        case LatentKind::circle_angle_uniform: break;
        case LatentKind::piecewise_density:
            doc["boundaries"] = boundaries;
            doc["heights"] = heights;
            break;
    }
    return doc;
}

LatentSample sample_latents(const LatentDistribution& dist, Eigen::Index n, std::uint64_t seed) {
    require(n >= 0, ErrorCode::parameter, "sample_latents needs n >= 0");
    LatentSample s;
    s.distribution = dist;
    s.seed = seed;
    const int d = dist.latent_dim();
    s.points.resize(n, d);
    Rng rng(seed);
    std::vector<double> cumulative;
    if (dist.kind == LatentKind::piecewise_density) {
        double acc = 0.0;
        for (std::size_t k = 0; k < dist.heights.size(); ++k) {
            acc += dist.heights[k] * (dist.boundaries[k + 1] - dist.boundaries[k]);
            cumulative.push_back(acc);
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) {
            double w = 0.0;
            switch (dist.kind) {
                case LatentKind::uniform_box: w = rng.uniform(dist.box.lo[k], dist.box.hi[k]); break;
                case LatentKind::truncated_gamma:
                    do {
                        w = rng.gamma(dist.shape) / dist.rate;
                    } while (w > dist.bound);
                    break;
                case LatentKind::circle_angle_uniform: w = rng.uniform(0.0, 2.0 * std::numbers::pi); break;
                case LatentKind::piecewise_density: {
                    const double u = rng.uniform() * cumulative.back();
                    auto piece = static_cast<std::size_t>(
                        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
                    piece = std::min(piece, dist.heights.size() - 1);
                    w = rng.uniform(dist.boundaries[piece], dist.boundaries[piece + 1]);
                    break;
                }
            }
            s.points(i, k) = dist.scale * w;
        }
    }
    return s;
}

std::vector<int> Graph::degrees() const {
    std::vector<int> deg(static_cast<std::size_t>(n), 0);
    for (const auto& [i, j] : edges) {
        ++deg[i];
        ++deg[j];
    }
    return deg;
}

double Graph::density() const {
    if (n < 2) return 0.0;
    return static_cast<double>(edges.size()) / (0.5 * n * (n - 1.0));
}

namespace {

void check_latents(const KernelSpec& spec, const RowMatrix& z) {
    require(z.cols() == spec.latent_dim() || z.rows() == 0, ErrorCode::incompatible,
            "latent dimension does not match the kernel");
    for (Eigen::Index i = 0; i < z.rows(); ++i)
        require(spec.domain().contains(row_span(z, i)), ErrorCode::domain,
                "latent position " + std::to_string(i) + " lies outside the kernel domain");
}

template <class Emit>
void for_each_pair_row(int n, std::vector<std::vector<int>>& rows, Emit&& emit) {
    rows.assign(static_cast<std::size_t>(n), {});
    parallel_for(0, n, [&](long i) { emit(static_cast<int>(i), rows[i]); });
}

std::vector<std::pair<int, int>> flatten(const std::vector<std::vector<int>>& rows) {
    std::size_t total = 0;
    for (const auto& r : rows) total += r.size();
    std::vector<std::pair<int, int>> edges;
    edges.reserve(total);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j : rows[i]) edges.emplace_back(static_cast<int>(i), j);
    return edges;
}

}  // namespace

Graph sample_graph(const KernelSpec& spec, const LatentSample& latents, double rho, std::uint64_t seed) {
    require(rho > 0.0 && rho <= 1.0, ErrorCode::parameter, "rho must lie in (0, 1]");
    check_latents(spec, latents.points);
    const int n = static_cast<int>(latents.n());
    const Philox4x32 gen(seed);
    std::vector<std::vector<int>> rows;
    for_each_pair_row(n, rows, [&](int i, std::vector<int>& out) {
        const Point zi = row_span(latents.points, i);
        for (int j = i + 1; j < n; ++j) {
            const double p = rho * spec.eval_unchecked(zi, row_span(latents.points, j));
            if (gen.uniform(0u, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)) < p) out.push_back(j);
        }
    });
    Graph g;
    g.n = n;
    g.edges = flatten(rows);
    g.rho = rho;
    g.seed = seed;
    g.kernel_id = spec.name();
    return g;
}

CoupledGraphs couple_graphs(const KernelSpec& spec, int k, const LatentSample& latents_base, double r_n,
                            std::uint64_t seed) {
    require(r_n > 0.0, ErrorCode::parameter, "r_n must be positive");
    const KernelSpec fk = truncate_analytic(spec, k);
    const RowMatrix z = latents_base.points * r_n;
    check_latents(spec, z);
    const int n = static_cast<int>(z.rows());
    const Philox4x32 gen(seed);
    std::vector<std::vector<int>> rows_f, rows_k;
    rows_f.assign(static_cast<std::size_t>(n), {});
    rows_k.assign(static_cast<std::size_t>(n), {});
    parallel_for(0, n, [&](long il) {
        const int i = static_cast<int>(il);
        const Point zi = row_span(z, i);
        for (int j = i + 1; j < n; ++j) {
            const Point zj = row_span(z, j);
            const double u = gen.uniform(0u, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
            if (u < spec.eval_unchecked(zi, zj)) rows_f[i].push_back(j);
            if (u < fk.eval_unchecked(zi, zj)) rows_k[i].push_back(j);
        }
    });
    CoupledGraphs out;
    out.full.n = out.truncated.n = n;
    out.full.edges = flatten(rows_f);
    out.truncated.edges = flatten(rows_k);
    out.full.seed = out.truncated.seed = seed;
    out.full.kernel_id = spec.name();
    out.truncated.kernel_id = fk.name();
    std::vector<std::pair<int, int>> diff;
    std::set_symmetric_difference(out.full.edges.begin(), out.full.edges.end(), out.truncated.edges.begin(),
                                  out.truncated.edges.end(), std::back_inserter(diff));
    out.disagreements = static_cast<long>(diff.size());
    return out;
}

std::vector<int> isolated_nodes(const Graph& g) {
    std::vector<int> out;
    const auto deg = g.degrees();
    for (int i = 0; i < g.n; ++i)
        if (deg[i] == 0) out.push_back(i);
    return out;
}

Graph drop_isolated(const Graph& g, std::vector<int>* kept) {
    const auto deg = g.degrees();
    std::vector<int> remap(static_cast<std::size_t>(g.n), -1);
    std::vector<int> keep;
    for (int i = 0; i < g.n; ++i) {
        if (deg[i] > 0) {
            remap[i] = static_cast<int>(keep.size());
            keep.push_back(i);
        }
    }
    Graph out = g;
    out.n = static_cast<int>(keep.size());
    for (auto& [i, j] : out.edges) {
        i = remap[i];
        j = remap[j];
    }
    if (kept) *kept = std::move(keep);
    return out;
}

void write_graph(const std::filesystem::path& path, const Graph& g) {
    std::ofstream os(path);
    require(static_cast<bool>(os), ErrorCode::io, "cannot write " + path.string());
    os << g.n << ' ' << g.edges.size() << '\n';
    for (const auto& [i, j] : g.edges) os << i << ' ' << j << '\n';
    require(static_cast<bool>(os), ErrorCode::io, "write failed for " + path.string());
}

Graph read_graph(const std::filesystem::path& path) {
    std::ifstream is(path);
    require(static_cast<bool>(is), ErrorCode::io, "cannot read " + path.string());
    Graph g;
    long m = 0;
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), ErrorCode::config, path.string() + ": missing header line");
    {
        std::istringstream hs(line);
        require(static_cast<bool>(hs >> g.n >> m) && g.n >= 0 && m >= 0, ErrorCode::config,
                path.string() + ": header must be 'n m'");
    }
    g.edges.reserve(static_cast<std::size_t>(m));
    long lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        int i, j;
        require(static_cast<bool>(ls >> i >> j), ErrorCode::config,
                path.string() + ":" + std::to_string(lineno) + ": expected 'i j'");
        if (i > j) std::swap(i, j);
        require(i >= 0 && j < g.n && i != j, ErrorCode::config,
                path.string() + ":" + std::to_string(lineno) + ": invalid edge");
        g.edges.emplace_back(i, j);
    }
    std::sort(g.edges.begin(), g.edges.end());
    require(std::adjacent_find(g.edges.begin(), g.edges.end()) == g.edges.end(), ErrorCode::config,
            path.string() + ": duplicate edge");
    require(static_cast<long>(g.edges.size()) == m, ErrorCode::config,
            path.string() + ": edge count disagrees with header");
    return g;
}

}  // namespace lpm
