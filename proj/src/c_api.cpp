#include "lpm/lpm.h"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <string>

#include "lpm/alignment.hpp"
#include "lpm/curvature.hpp"
#include "lpm/embedding.hpp"
#include "lpm/graphsim.hpp"
#include "lpm/harness.hpp"
#include "lpm/io.hpp"
#include "lpm/kernels.hpp"
#include "lpm/manifold.hpp"
#include "lpm/parallel.hpp"
#include "lpm/spectrum.hpp"
#include "lpm/svg.hpp"

struct lpm_kernel {
    lpm::KernelSpec spec;
};
struct lpm_spectrum {
    lpm::OperatorSpectrum spectrum;
};
struct lpm_latents {
    lpm::LatentSample sample;
};
struct lpm_graph {
    lpm::Graph graph;
};
struct lpm_embedding {
    lpm::EmbeddingMatrix emb;
};
struct lpm_ridge {
    lpm::RidgeSet ridge;
};

namespace {

thread_local std::string t_last_error;

lpm_status to_status(lpm::ErrorCode code) {
    switch (code) {
        case lpm::ErrorCode::domain: return LPM_ERR_DOMAIN;
        case lpm::ErrorCode::range: return LPM_ERR_RANGE;
        case lpm::ErrorCode::unsupported: return LPM_ERR_UNSUPPORTED;
        case lpm::ErrorCode::parameter: return LPM_ERR_PARAMETER;
        case lpm::ErrorCode::config: return LPM_ERR_CONFIG;
        case lpm::ErrorCode::numeric: return LPM_ERR_NUMERIC;
        case lpm::ErrorCode::incompatible: return LPM_ERR_INCOMPATIBLE;
        case lpm::ErrorCode::rank_deficient: return LPM_ERR_RANK_DEFICIENT;
        case lpm::ErrorCode::io: return LPM_ERR_IO;
        case lpm::ErrorCode::isolated_nodes: return LPM_ERR_ISOLATED_NODES;
    }
    return LPM_ERR_INTERNAL;
}

template <class F>
lpm_status guarded(F&& body) {
    try {
        body();
        return LPM_OK;
    } catch (const lpm::Error& e) {
        t_last_error = e.what();
        return to_status(e.code());
    } catch (const nlohmann::json::exception& e) {
        t_last_error = std::string("configuration: ") + e.what();
        return LPM_ERR_CONFIG;
    } catch (const std::bad_alloc&) {
        t_last_error = "out of memory";
        return LPM_ERR_INTERNAL;
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return LPM_ERR_INTERNAL;
    } catch (...) {
        t_last_error = "unknown exception";
        return LPM_ERR_INTERNAL;
    }
}

void need(const void* p, const char* name) {
    if (!p) lpm::fail(lpm::ErrorCode::parameter, std::string("null argument: ") + name);
}

void need_capacity(size_t have, size_t want) {
    if (have < want)
        lpm::fail(lpm::ErrorCode::parameter,
                  "buffer holds " + std::to_string(have) + " values, " + std::to_string(want) + " needed");
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

lpm::RowMatrix view_points(const double* data, int64_t n, int d) {
    need(data, "points");
    if (n <= 0 || d <= 0) lpm::fail(lpm::ErrorCode::parameter, "point table must be non-empty");
    return Eigen::Map<const lpm::RowMatrix>(data, n, d);
}

nlohmann::json parse_json(const char* text) {
    need(text, "json");
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        lpm::fail(lpm::ErrorCode::config, std::string("invalid JSON: ") + e.what());
    }
}

template <class M>
void copy_out(const M& m, double* out, size_t capacity) {
    need(out, "out");
    need_capacity(capacity, static_cast<size_t>(m.size()));
    std::copy(m.data(), m.data() + m.size(), out);
}

}  // namespace

extern "C" {

const char* lpm_version(void) { return "1.0.0"; }

const char* lpm_last_error(void) { return t_last_error.c_str(); }

const char* lpm_status_string(lpm_status status) {
    switch (status) {
        case LPM_OK: return "ok";
        case LPM_ERR_DOMAIN: return "domain error";
        case LPM_ERR_RANGE: return "range error";
        case LPM_ERR_UNSUPPORTED: return "unsupported operation";
        case LPM_ERR_PARAMETER: return "invalid parameter";
        case LPM_ERR_CONFIG: return "configuration error";
        case LPM_ERR_NUMERIC: return "numerical failure";
        case LPM_ERR_INCOMPATIBLE: return "incompatible inputs";
        case LPM_ERR_RANK_DEFICIENT: return "rank deficient";
        case LPM_ERR_IO: return "i/o error";
        case LPM_ERR_ISOLATED_NODES: return "isolated nodes";
        case LPM_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

lpm_status lpm_set_threads(int threads) {
    return guarded([&] {
        if (threads < 0) lpm::fail(lpm::ErrorCode::parameter, "thread count must be >= 0");
        lpm::set_thread_count(threads);
    });
}

void lpm_string_free(char* s) { std::free(s); }
void lpm_buffer_free(double* p) { std::free(p); }

/* kernels */

lpm_status lpm_kernel_preset(const char* name, lpm_kernel** out) {
    return guarded([&] {
        need(name, "name");
        need(out, "out");
        *out = new lpm_kernel{lpm::kernel_preset(name)};
    });
}

lpm_status lpm_kernel_from_json(const char* json, lpm_kernel** out) {
    return guarded([&] {
        need(out, "out");
        *out = new lpm_kernel{lpm::KernelSpec::from_json(parse_json(json))};
    });
}

lpm_status lpm_kernel_to_json(const lpm_kernel* k, char** out) {
    return guarded([&] {
        need(k, "kernel");
        need(out, "out");
        *out = dup_string(k->spec.to_json().dump());
    });
}

lpm_status lpm_kernel_latent_dim(const lpm_kernel* k, int* out) {
    return guarded([&] {
        need(k, "kernel");
        need(out, "out");
        *out = k->spec.latent_dim();
    });
}

lpm_status lpm_kernel_eval(const lpm_kernel* k, const double* x, const double* y, double* out) {
    return guarded([&] {
        need(k, "kernel");
        need(x, "x");
        need(y, "y");
        need(out, "out");
        const auto d = static_cast<size_t>(k->spec.latent_dim());
        *out = lpm::eval_kernel(k->spec, {x, d}, {y, d});
    });
}

lpm_status lpm_kernel_truncate(const lpm_kernel* k, int degree, lpm_kernel** out) {
    return guarded([&] {
        need(k, "kernel");
        need(out, "out");
        *out = new lpm_kernel{lpm::truncate_analytic(k->spec, degree)};
    });
}

lpm_status lpm_kernel_rank_bound(const lpm_kernel* k, size_t* out) {
    return guarded([&] {
        need(k, "kernel");
        need(out, "out");
        *out = lpm::polynomial_rank_bound(k->spec);
    });
}

void lpm_kernel_free(lpm_kernel* k) { delete k; }

lpm_status lpm_kernel_check_curvature(const lpm_kernel* k, const lpm_spectrum* s, int n_pairs, uint64_t seed,
                                      lpm_curvature_report* out) {
    return guarded([&] {
        need(k, "kernel");
        need(s, "spectrum");
        need(out, "out");
        const lpm::CurvatureReport r = lpm::check_curvature(k->spec, s->spectrum, n_pairs, seed);
        *out = {r.alpha_hat, r.c_hat, r.max_violation_ratio, r.pairs_tested, r.degenerate ? 1 : 0};
    });
}

/* spectrum */

lpm_spectrum_options lpm_spectrum_options_default(void) {
    lpm_spectrum_options o;
    o.nodes_per_axis = 256;
    o.scheme = 0;
    o.J = 0;
    o.tail_tol = 1e-6;
    o.noise_floor = 1e-10;
    o.latent_json = nullptr;
    o.seed = 0;
    return o;
}

lpm_status lpm_spectrum_compute(const lpm_kernel* k, const lpm_spectrum_options* options, lpm_spectrum** out) {
    return guarded([&] {
        need(k, "kernel");
        need(out, "out");
        const lpm_spectrum_options o = options ? *options : lpm_spectrum_options_default();
        if (o.scheme < 0 || o.scheme > 2) lpm::fail(lpm::ErrorCode::parameter, "unknown quadrature scheme");
        const auto scheme = static_cast<lpm::QuadratureScheme>(o.scheme);
        lpm::QuadratureGrid grid;
        if (o.latent_json) {
            const auto dist = lpm::LatentDistribution::from_json(parse_json(o.latent_json));
            if (dist.latent_dim() != k->spec.latent_dim())
                lpm::fail(lpm::ErrorCode::incompatible, "latent and kernel dimensions differ");
            grid = lpm::weight_by_density(lpm::make_grid(dist.support(), o.nodes_per_axis, scheme, 2048, o.seed),
                                          [&](lpm::Point z) { return dist.density(z); });
        } else {
            grid = lpm::make_grid(k->spec.domain(), o.nodes_per_axis, scheme, 2048, o.seed);
        }
        lpm::SpectrumOptions so;
        if (o.J > 0) so.J = o.J;
        so.tail_tol = o.tail_tol;
        so.noise_floor = o.noise_floor;
        *out = new lpm_spectrum{lpm::nystrom_spectrum(k->spec, grid, so)};
    });
}

lpm_status lpm_spectrum_size(const lpm_spectrum* s, int* J) {
    return guarded([&] {
        need(s, "spectrum");
        need(J, "J");
        *J = s->spectrum.J();
    });
}

lpm_status lpm_spectrum_eigenvalues(const lpm_spectrum* s, double* out, size_t capacity) {
    return guarded([&] {
        need(s, "spectrum");
        copy_out(s->spectrum.eigenvalues, out, capacity);
    });
}

lpm_status lpm_spectrum_signature(const lpm_spectrum* s, int* p, int* q) {
    return guarded([&] {
        need(s, "spectrum");
        need(p, "p");
        need(q, "q");
        *p = s->spectrum.signature.p;
        *q = s->spectrum.signature.q;
    });
}

lpm_status lpm_spectrum_tail_mass(const lpm_spectrum* s, double* out) {
    return guarded([&] {
        need(s, "spectrum");
        need(out, "out");
        *out = s->spectrum.tail_mass;
    });
}

lpm_status lpm_spectrum_rank(const lpm_spectrum* s, int* rank, int* effectively_infinite) {
    return guarded([&] {
        need(s, "spectrum");
        if (rank) *rank = s->spectrum.rank_estimate;
        if (effectively_infinite) *effectively_infinite = s->spectrum.rank_infinite ? 1 : 0;
    });
}

lpm_status lpm_spectrum_phi(const lpm_spectrum* s, const double* x, double* out, size_t capacity) {
    return guarded([&] {
        need(s, "spectrum");
        need(x, "x");
        const auto d = static_cast<size_t>(s->spectrum.kernel.latent_dim());
        copy_out(lpm::phi(s->spectrum, {x, d}).coords, out, capacity);
    });
}

lpm_status lpm_spectrum_phi_batch(const lpm_spectrum* s, const double* points, int64_t n, double* out,
                                  size_t capacity) {
    return guarded([&] {
        need(s, "spectrum");
        const lpm::RowMatrix pts = view_points(points, n, s->spectrum.kernel.latent_dim());
        copy_out(lpm::phi_matrix(s->spectrum, pts), out, capacity);
    });
}

lpm_status lpm_spectrum_indefinite_inner(const lpm_spectrum* s, const double* x, const double* y, double* out) {
    return guarded([&] {
        need(s, "spectrum");
        need(x, "x");
        need(y, "y");
        need(out, "out");
        const auto d = static_cast<size_t>(s->spectrum.kernel.latent_dim());
        *out = lpm::indefinite_inner(lpm::phi(s->spectrum, {x, d}), lpm::phi(s->spectrum, {y, d}));
    });
}

lpm_status lpm_spectrum_trace(const lpm_spectrum* s, double* sum_abs_eigs, double* diagonal_integral,
                              int* positive_definite) {
    return guarded([&] {
        need(s, "spectrum");
        const lpm::TraceReport t = lpm::trace_diagnostics(s->spectrum, s->spectrum.kernel);
        if (sum_abs_eigs) *sum_abs_eigs = t.sum_abs_eigs;
        if (diagonal_integral) *diagonal_integral = t.diagonal_integral;
        if (positive_definite) *positive_definite = t.is_positive_definite ? 1 : 0;
    });
}

lpm_status lpm_spectrum_save(const lpm_spectrum* s, const char* dir) {
    return guarded([&] {
        need(s, "spectrum");
        need(dir, "dir");
        lpm::save_spectrum(s->spectrum, dir);
    });
}

lpm_status lpm_spectrum_load(const char* dir, lpm_spectrum** out) {
    return guarded([&] {
        need(dir, "dir");
        need(out, "out");
        *out = new lpm_spectrum{lpm::load_spectrum(dir)};
    });
}

void lpm_spectrum_free(lpm_spectrum* s) { delete s; }

/* latents */

lpm_status lpm_latents_sample(const char* distribution_json, int64_t n, uint64_t seed, lpm_latents** out) {
    return guarded([&] {
        need(out, "out");
        if (n <= 0) lpm::fail(lpm::ErrorCode::parameter, "n must be positive");
        const auto dist = lpm::LatentDistribution::from_json(parse_json(distribution_json));
        *out = new lpm_latents{lpm::sample_latents(dist, n, seed)};
    });
}

lpm_status lpm_latents_from_array(const double* data, int64_t n, int d, lpm_latents** out) {
    return guarded([&] {
        need(out, "out");
        lpm::LatentSample z;
        z.points = view_points(data, n, d);
        z.distribution.dim = d;
        if (d > 1) z.distribution.box = lpm::Box::cube(d, 0.0, 1.0);
        *out = new lpm_latents{std::move(z)};
    });
}

lpm_status lpm_latents_shape(const lpm_latents* z, int64_t* n, int* d) {
    return guarded([&] {
        need(z, "latents");
        if (n) *n = z->sample.points.rows();
        if (d) *d = static_cast<int>(z->sample.points.cols());
    });
}

lpm_status lpm_latents_data(const lpm_latents* z, double* out, size_t capacity) {
    return guarded([&] {
        need(z, "latents");
        copy_out(z->sample.points, out, capacity);
    });
}

lpm_status lpm_latents_save_csv(const lpm_latents* z, const char* path) {
    return guarded([&] {
        need(z, "latents");
        need(path, "path");
        std::vector<std::string> header;
        for (Eigen::Index c = 0; c < z->sample.points.cols(); ++c) header.push_back("z" + std::to_string(c + 1));
        lpm::io::write_csv(path, z->sample.points, header);
    });
}

lpm_status lpm_latents_load_csv(const char* path, lpm_latents** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        lpm::LatentSample z;
        z.points = lpm::io::read_csv(path);
        if (z.points.rows() == 0) lpm::fail(lpm::ErrorCode::config, std::string("no rows in ") + path);
        *out = new lpm_latents{std::move(z)};
    });
}

void lpm_latents_free(lpm_latents* z) { delete z; }

/* graphs */

lpm_status lpm_graph_sample(const lpm_kernel* k, const lpm_latents* z, double rho, uint64_t seed, lpm_graph** out) {
    return guarded([&] {
        need(k, "kernel");
        need(z, "latents");
        need(out, "out");
        *out = new lpm_graph{lpm::sample_graph(k->spec, z->sample, rho, seed)};
    });
}

lpm_status lpm_graph_couple(const lpm_kernel* k, int degree, const lpm_latents* base, double r_n, uint64_t seed,
                            lpm_graph** full, lpm_graph** truncated, int64_t* disagreements) {
    return guarded([&] {
        need(k, "kernel");
        need(base, "latents");
        lpm::CoupledGraphs c = lpm::couple_graphs(k->spec, degree, base->sample, r_n, seed);
        if (disagreements) *disagreements = c.disagreements;
        std::unique_ptr<lpm_graph> f(full ? new lpm_graph{std::move(c.full)} : nullptr);
        std::unique_ptr<lpm_graph> t(truncated ? new lpm_graph{std::move(c.truncated)} : nullptr);
        if (full) *full = f.release();
        if (truncated) *truncated = t.release();
    });
}

lpm_status lpm_graph_shape(const lpm_graph* g, int* nodes, int64_t* edges) {
    return guarded([&] {
        need(g, "graph");
        if (nodes) *nodes = g->graph.n;
        if (edges) *edges = static_cast<int64_t>(g->graph.edges.size());
    });
}

lpm_status lpm_graph_edges(const lpm_graph* g, int32_t* pairs, size_t capacity) {
    return guarded([&] {
        need(g, "graph");
        need(pairs, "pairs");
        need_capacity(capacity, 2 * g->graph.edges.size());
        for (size_t e = 0; e < g->graph.edges.size(); ++e) {
            pairs[2 * e] = g->graph.edges[e].first;
            pairs[2 * e + 1] = g->graph.edges[e].second;
        }
    });
}

lpm_status lpm_graph_isolated(const lpm_graph* g, int32_t* nodes, size_t capacity, int* count) {
    return guarded([&] {
        need(g, "graph");
        need(count, "count");
        const std::vector<int> iso = lpm::isolated_nodes(g->graph);
        *count = static_cast<int>(iso.size());
        if (nodes) {
            need_capacity(capacity, iso.size());
            std::copy(iso.begin(), iso.end(), nodes);
        }
    });
}

lpm_status lpm_graph_drop_isolated(const lpm_graph* g, lpm_graph** out) {
    return guarded([&] {
        need(g, "graph");
        need(out, "out");
        *out = new lpm_graph{lpm::drop_isolated(g->graph)};
    });
}

lpm_status lpm_graph_save(const lpm_graph* g, const char* path) {
    return guarded([&] {
        need(g, "graph");
        need(path, "path");
        lpm::write_graph(path, g->graph);
    });
}

lpm_status lpm_graph_load(const char* path, lpm_graph** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new lpm_graph{lpm::read_graph(path)};
    });
}

void lpm_graph_free(lpm_graph* g) { delete g; }

/* embeddings */

lpm_status lpm_embed(const lpm_graph* g, int d_hat, int laplacian, lpm_embedding** out) {
    return guarded([&] {
        need(g, "graph");
        need(out, "out");
        std::optional<int> D;
        if (d_hat > 0) D = d_hat;
        *out = new lpm_embedding{laplacian ? lpm::lse(g->graph, D) : lpm::ase(g->graph, D)};
    });
}

lpm_status lpm_embedding_shape(const lpm_embedding* e, int64_t* n, int* d) {
    return guarded([&] {
        need(e, "embedding");
        if (n) *n = e->emb.coords.rows();
        if (d) *d = e->emb.dim();
    });
}

lpm_status lpm_embedding_coords(const lpm_embedding* e, double* out, size_t capacity) {
    return guarded([&] {
        need(e, "embedding");
        copy_out(e->emb.coords, out, capacity);
    });
}

lpm_status lpm_embedding_eigenvalues(const lpm_embedding* e, double* out, size_t capacity) {
    return guarded([&] {
        need(e, "embedding");
        copy_out(e->emb.eigenvalues, out, capacity);
    });
}

lpm_status lpm_embedding_signs(const lpm_embedding* e, int* out, size_t capacity) {
    return guarded([&] {
        need(e, "embedding");
        need(out, "out");
        need_capacity(capacity, e->emb.eig_signs.size());
        std::copy(e->emb.eig_signs.begin(), e->emb.eig_signs.end(), out);
    });
}

lpm_status lpm_embedding_save(const lpm_embedding* e, const char* dir) {
    return guarded([&] {
        need(e, "embedding");
        need(dir, "dir");
        lpm::save_embedding(e->emb, dir);
    });
}

lpm_status lpm_embedding_load(const char* dir, lpm_embedding** out) {
    return guarded([&] {
        need(dir, "dir");
        need(out, "out");
        *out = new lpm_embedding{lpm::load_embedding(dir)};
    });
}

void lpm_embedding_free(lpm_embedding* e) { delete e; }

lpm_status lpm_select_rank(const double* values, size_t count, int* rank, int* low_confidence) {
    return guarded([&] {
        need(values, "values");
        need(rank, "rank");
        const lpm::RankSelection r = lpm::select_rank_zg(std::vector<double>(values, values + count));
        *rank = r.rank;
        if (low_confidence) *low_confidence = r.low_confidence ? 1 : 0;
    });
}

/* alignment */

namespace {

lpm::AlignmentResult run_align(const lpm_embedding* e, const double* target, int64_t n, int d) {
    need(e, "embedding");
    const lpm::RowMatrix X = view_points(target, n, d);
    if (n != e->emb.coords.rows() || d != e->emb.dim())
        lpm::fail(lpm::ErrorCode::incompatible, "target is " + std::to_string(n) + " x " + std::to_string(d) +
                                                    ", embedding is " + std::to_string(e->emb.coords.rows()) +
                                                    " x " + std::to_string(e->emb.dim()));
    return lpm::align_indefinite(e->emb, X, e->emb.signature());
}

}  // namespace

lpm_status lpm_align(const lpm_embedding* e, const double* target, int64_t n, int d, double* Q,
                     lpm_alignment_result* out) {
    return guarded([&] {
        const lpm::AlignmentResult r = run_align(e, target, n, d);
        if (Q) Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(Q, d, d) = r.Q;
        if (out)
            *out = {r.max_error,  r.mean_error, r.constraint_residual,  r.iterations,
                    r.converged ? 1 : 0, r.scaling_applied ? 1 : 0, r.scaling_flagged ? 1 : 0};
    });
}

lpm_status lpm_align_json(const lpm_embedding* e, const double* target, int64_t n, int d, double* aligned,
                          char** json) {
    return guarded([&] {
        need(json, "json");
        const lpm::AlignmentResult r = run_align(e, target, n, d);
        if (aligned) {
            lpm::RowMatrix A = e->emb.coords * r.Q.transpose();
            if (r.scaling_applied) A = A * r.scaling.asDiagonal();
            std::copy(A.data(), A.data() + A.size(), aligned);
        }
        *json = dup_string(r.to_json().dump(2));
    });
}

lpm_status lpm_phi_targets(const lpm_spectrum* s, const lpm_latents* z, const int* signs, int d, double* out,
                           size_t capacity) {
    return guarded([&] {
        need(s, "spectrum");
        need(z, "latents");
        need(signs, "signs");
        copy_out(lpm::phi_targets(s->spectrum, z->sample.points, std::vector<int>(signs, signs + d)), out, capacity);
    });
}

lpm_status lpm_lse_target(const double* x, int64_t n, int d, const int* signs, double* out) {
    return guarded([&] {
        need(signs, "signs");
        need(out, "out");
        const lpm::RowMatrix X = view_points(x, n, d);
        const lpm::RowMatrix T = lpm::lse_target(X, std::vector<int>(signs, signs + d));
        std::copy(T.data(), T.data() + T.size(), out);
    });
}

lpm_status lpm_rate_fit(const double* n, const double* error, size_t count, double* slope, double* half_width) {
    return guarded([&] {
        need(n, "n");
        need(error, "error");
        std::vector<std::pair<double, double>> pts;
        for (size_t i = 0; i < count; ++i) pts.emplace_back(n[i], error[i]);
        const lpm::RateFit f = lpm::rate_fit(pts);
        if (slope) *slope = f.slope;
        if (half_width) *half_width = f.half_width;
    });
}

/* manifold tools */

lpm_status lpm_intrinsic_dim(const double* points, int64_t n, int d, lpm_dim_method method, int k, double threshold,
                             double* value, int* excluded) {
    return guarded([&] {
        need(value, "value");
        if (method < LPM_DIM_LOCAL_PCA || method > LPM_DIM_SIMPLEX_SKEWNESS)
            lpm::fail(lpm::ErrorCode::parameter, "unknown dimension method");
        const lpm::RowMatrix pts = view_points(points, n, d);
        lpm::DimParams p;
        if (k > 0) p.k = k;
        if (threshold > 0) p.pca_threshold = threshold;
        const auto est = lpm::intrinsic_dim(pts, static_cast<lpm::DimMethod>(method), p);
        *value = est.value;
        if (excluded) *excluded = est.excluded;
    });
}

lpm_status lpm_scms_ridge(const double* points, int64_t n, int d, double bandwidth, int ridge_dim,
                          const int32_t* starts, int64_t n_starts, uint64_t seed, lpm_ridge** out) {
    return guarded([&] {
        need(out, "out");
        const lpm::RowMatrix pts = view_points(points, n, d);
        lpm::RidgeOptions o;
        if (bandwidth > 0) o.bandwidth = bandwidth;
        o.ridge_dim = ridge_dim;
        o.seed = seed;
        if (starts) o.starts = std::vector<int>(starts, starts + n_starts);
        *out = new lpm_ridge{lpm::scms_ridge(pts, o)};
    });
}

lpm_status lpm_ridge_shape(const lpm_ridge* r, int64_t* count, int* d) {
    return guarded([&] {
        need(r, "ridge");
        if (count) *count = r->ridge.points.rows();
        if (d) *d = static_cast<int>(r->ridge.points.cols());
    });
}

lpm_status lpm_ridge_points(const lpm_ridge* r, double* out, size_t capacity) {
    return guarded([&] {
        need(r, "ridge");
        copy_out(r->ridge.points, out, capacity);
    });
}

lpm_status lpm_ridge_converged(const lpm_ridge* r, int* out, size_t capacity) {
    return guarded([&] {
        need(r, "ridge");
        need(out, "out");
        need_capacity(capacity, r->ridge.converged.size());
        for (size_t i = 0; i < r->ridge.converged.size(); ++i) out[i] = r->ridge.converged[i] ? 1 : 0;
    });
}

lpm_status lpm_ridge_bandwidth(const lpm_ridge* r, double* out) {
    return guarded([&] {
        need(r, "ridge");
        need(out, "out");
        *out = r->ridge.bandwidth;
    });
}

void lpm_ridge_free(lpm_ridge* r) { delete r; }

lpm_status lpm_hausdorff(const double* a, int64_t na, const double* b, int64_t nb, int d, double* out) {
    return guarded([&] {
        need(out, "out");
        *out = lpm::hausdorff_distance(view_points(a, na, d), view_points(b, nb, d));
    });
}

/* files */

lpm_status lpm_csv_read(const char* path, double** data, int64_t* rows, int64_t* cols) {
    return guarded([&] {
        need(path, "path");
        need(data, "data");
        const lpm::RowMatrix m = lpm::io::read_csv(path);
        auto* buf = static_cast<double*>(std::malloc(sizeof(double) * std::max<Eigen::Index>(1, m.size())));
        if (!buf) throw std::bad_alloc();
        std::copy(m.data(), m.data() + m.size(), buf);
        *data = buf;
        if (rows) *rows = m.rows();
        if (cols) *cols = m.cols();
    });
}

lpm_status lpm_csv_write(const char* path, const double* data, int64_t rows, int64_t cols, const char* header) {
    return guarded([&] {
        need(path, "path");
        const lpm::RowMatrix m = view_points(data, rows, static_cast<int>(cols));
        std::vector<std::string> names;
        if (header) {
            std::string h(header), cell;
            for (char c : h) {
                if (c == ',') {
                    names.push_back(cell);
                    cell.clear();
                } else {
                    cell += c;
                }
            }
            names.push_back(cell);
        }
        lpm::io::write_csv(path, m, names);
    });
}

lpm_status lpm_svg_scatter(const char* path, const double* points, int64_t n, int d, const double* overlay,
                           int64_t n_overlay) {
    return guarded([&] {
        need(path, "path");
        lpm::SvgScatter svg;
        svg.add_points(view_points(points, n, d), "#1f77b4", 1.0);
        if (overlay && n_overlay > 0) svg.add_points(view_points(overlay, n_overlay, d), "#d62728", 1.5);
        svg.write(path);
    });
}

/* experiments */

lpm_status lpm_bench_run(const char* config_json, const char* out_dir, char** report_json, double* wall_clock_s,
                         int* all_pass) {
    return guarded([&] {
        auto cfg = lpm::ExperimentConfig::from_json(parse_json(config_json));
        if (out_dir) cfg.out_dir = out_dir;
        const lpm::BenchReport report = lpm::run_experiment(cfg);
        if (!cfg.out_dir.empty()) lpm::save_report(report, cfg.out_dir);
        if (report_json) *report_json = dup_string(report.to_json().dump(2));
        if (wall_clock_s) *wall_clock_s = report.wall_clock_s;
        if (all_pass) *all_pass = report.all_pass() ? 1 : 0;
    });
}

}  // extern "C"
