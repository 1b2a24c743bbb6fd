/* C interface to the latent position manifold library.
 *
 * Every function returns an lpm_status. On failure the message is available
 * from lpm_last_error() on the calling thread until the next failing call.
 * Objects are opaque handles released with the matching *_free function;
 * strings and buffers returned through out-pointers are released with
 * lpm_string_free / lpm_buffer_free. Matrices are row-major doubles.
 */
#ifndef LPM_H
#define LPM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LPM_API __declspec(dllexport)
#else
#define LPM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lpm_status {
    LPM_OK = 0,
    LPM_ERR_DOMAIN = 1,
    LPM_ERR_RANGE = 2,
    LPM_ERR_UNSUPPORTED = 3,
    LPM_ERR_PARAMETER = 4,
    LPM_ERR_CONFIG = 5,
    LPM_ERR_NUMERIC = 6,
    LPM_ERR_INCOMPATIBLE = 7,
    LPM_ERR_RANK_DEFICIENT = 8,
    LPM_ERR_IO = 9,
    LPM_ERR_ISOLATED_NODES = 10,
    LPM_ERR_INTERNAL = 99
} lpm_status;

typedef struct lpm_kernel lpm_kernel;
typedef struct lpm_spectrum lpm_spectrum;
typedef struct lpm_latents lpm_latents;
typedef struct lpm_graph lpm_graph;
typedef struct lpm_embedding lpm_embedding;
typedef struct lpm_ridge lpm_ridge;

LPM_API const char* lpm_version(void);
LPM_API const char* lpm_last_error(void);
LPM_API const char* lpm_status_string(lpm_status status);
/* 0 selects the hardware concurrency. */
LPM_API lpm_status lpm_set_threads(int threads);
LPM_API void lpm_string_free(char* s);
LPM_API void lpm_buffer_free(double* p);

/* ---- kernels ---- */
LPM_API lpm_status lpm_kernel_preset(const char* name, lpm_kernel** out);
/* Accepts a preset name as a JSON string or a full kernel document. */
LPM_API lpm_status lpm_kernel_from_json(const char* json, lpm_kernel** out);
LPM_API lpm_status lpm_kernel_to_json(const lpm_kernel* k, char** out);
LPM_API lpm_status lpm_kernel_latent_dim(const lpm_kernel* k, int* out);
LPM_API lpm_status lpm_kernel_eval(const lpm_kernel* k, const double* x, const double* y, double* out);
LPM_API lpm_status lpm_kernel_truncate(const lpm_kernel* k, int degree, lpm_kernel** out);
LPM_API lpm_status lpm_kernel_rank_bound(const lpm_kernel* k, size_t* out);
LPM_API void lpm_kernel_free(lpm_kernel* k);

typedef struct lpm_curvature_report {
    double alpha_hat;
    double c_hat;
    double max_violation_ratio;
    int pairs_tested;
    int degenerate;
} lpm_curvature_report;

LPM_API lpm_status lpm_kernel_check_curvature(const lpm_kernel* k, const lpm_spectrum* s, int n_pairs,
                                              uint64_t seed, lpm_curvature_report* out);

/* ---- operator spectrum ---- */
typedef struct lpm_spectrum_options {
    int nodes_per_axis;      /* quadrature nodes per latent axis */
    int scheme;              /* 0 Gauss-Legendre tensor, 1 midpoint, 2 Monte-Carlo */
    int J;                   /* <= 0: chosen from tail_tol */
    double tail_tol;
    double noise_floor;
    const char* latent_json; /* NULL: Lebesgue weights; else latent-density weights */
    uint64_t seed;           /* Monte-Carlo nodes only */
} lpm_spectrum_options;

LPM_API lpm_spectrum_options lpm_spectrum_options_default(void);
LPM_API lpm_status lpm_spectrum_compute(const lpm_kernel* k, const lpm_spectrum_options* options,
                                        lpm_spectrum** out);
LPM_API lpm_status lpm_spectrum_size(const lpm_spectrum* s, int* J);
LPM_API lpm_status lpm_spectrum_eigenvalues(const lpm_spectrum* s, double* out, size_t capacity);
LPM_API lpm_status lpm_spectrum_signature(const lpm_spectrum* s, int* p, int* q);
LPM_API lpm_status lpm_spectrum_tail_mass(const lpm_spectrum* s, double* out);
LPM_API lpm_status lpm_spectrum_rank(const lpm_spectrum* s, int* rank, int* effectively_infinite);
/* out receives J coordinates. */
LPM_API lpm_status lpm_spectrum_phi(const lpm_spectrum* s, const double* x, double* out, size_t capacity);
/* points is n x d; out is n x J. */
LPM_API lpm_status lpm_spectrum_phi_batch(const lpm_spectrum* s, const double* points, int64_t n, double* out,
                                          size_t capacity);
LPM_API lpm_status lpm_spectrum_indefinite_inner(const lpm_spectrum* s, const double* x, const double* y,
                                                 double* out);
LPM_API lpm_status lpm_spectrum_trace(const lpm_spectrum* s, double* sum_abs_eigs, double* diagonal_integral,
                                      int* positive_definite);
LPM_API lpm_status lpm_spectrum_save(const lpm_spectrum* s, const char* dir);
LPM_API lpm_status lpm_spectrum_load(const char* dir, lpm_spectrum** out);
LPM_API void lpm_spectrum_free(lpm_spectrum* s);

/* ---- latent positions ---- */
LPM_API lpm_status lpm_latents_sample(const char* distribution_json, int64_t n, uint64_t seed, lpm_latents** out);
LPM_API lpm_status lpm_latents_from_array(const double* data, int64_t n, int d, lpm_latents** out);
LPM_API lpm_status lpm_latents_shape(const lpm_latents* z, int64_t* n, int* d);
LPM_API lpm_status lpm_latents_data(const lpm_latents* z, double* out, size_t capacity);
LPM_API lpm_status lpm_latents_save_csv(const lpm_latents* z, const char* path);
LPM_API lpm_status lpm_latents_load_csv(const char* path, lpm_latents** out);
LPM_API void lpm_latents_free(lpm_latents* z);

/* ---- graphs ---- */
LPM_API lpm_status lpm_graph_sample(const lpm_kernel* k, const lpm_latents* z, double rho, uint64_t seed,
                                    lpm_graph** out);
LPM_API lpm_status lpm_graph_couple(const lpm_kernel* k, int degree, const lpm_latents* base, double r_n,
                                    uint64_t seed, lpm_graph** full, lpm_graph** truncated,
                                    int64_t* disagreements);
LPM_API lpm_status lpm_graph_shape(const lpm_graph* g, int* nodes, int64_t* edges);
/* pairs receives 2 * edges ints, i < j, sorted. */
LPM_API lpm_status lpm_graph_edges(const lpm_graph* g, int32_t* pairs, size_t capacity);
/* count receives the number of isolated nodes; their indices go to nodes
 * (may be NULL) when capacity allows. */
LPM_API lpm_status lpm_graph_isolated(const lpm_graph* g, int32_t* nodes, size_t capacity, int* count);
LPM_API lpm_status lpm_graph_drop_isolated(const lpm_graph* g, lpm_graph** out);
LPM_API lpm_status lpm_graph_save(const lpm_graph* g, const char* path);
LPM_API lpm_status lpm_graph_load(const char* path, lpm_graph** out);
LPM_API void lpm_graph_free(lpm_graph* g);

/* ---- embeddings ---- */
/* d_hat <= 0 selects the dimension by profile likelihood. */
LPM_API lpm_status lpm_embed(const lpm_graph* g, int d_hat, int laplacian, lpm_embedding** out);
LPM_API lpm_status lpm_embedding_shape(const lpm_embedding* e, int64_t* n, int* d);
LPM_API lpm_status lpm_embedding_coords(const lpm_embedding* e, double* out, size_t capacity);
LPM_API lpm_status lpm_embedding_eigenvalues(const lpm_embedding* e, double* out, size_t capacity);
LPM_API lpm_status lpm_embedding_signs(const lpm_embedding* e, int* out, size_t capacity);
LPM_API lpm_status lpm_embedding_save(const lpm_embedding* e, const char* dir);
LPM_API lpm_status lpm_embedding_load(const char* dir, lpm_embedding** out);
LPM_API void lpm_embedding_free(lpm_embedding* e);

LPM_API lpm_status lpm_select_rank(const double* values, size_t count, int* rank, int* low_confidence);

/* ---- alignment ---- */
typedef struct lpm_alignment_result {
    double max_error;
    double mean_error;
    double constraint_residual;
    int iterations;
    int converged;
    int scaling_applied;
    int scaling_flagged;
} lpm_alignment_result;

/* target is n x d with d the embedding dimension; Q receives d x d (may be NULL). */
LPM_API lpm_status lpm_align(const lpm_embedding* e, const double* target, int64_t n, int d, double* Q,
                             lpm_alignment_result* out);
/* Same, with the full result serialised as JSON and the aligned rows (n x d, may be NULL). */
LPM_API lpm_status lpm_align_json(const lpm_embedding* e, const double* target, int64_t n, int d, double* aligned,
                                  char** json);
/* phi at each latent row, spectrum columns matched to the embedding signs; out is n x d. */
LPM_API lpm_status lpm_phi_targets(const lpm_spectrum* s, const lpm_latents* z, const int* signs, int d, double* out,
                                   size_t capacity);
LPM_API lpm_status lpm_lse_target(const double* x, int64_t n, int d, const int* signs, double* out);
LPM_API lpm_status lpm_rate_fit(const double* n, const double* error, size_t count, double* slope,
                                double* half_width);

/* ---- manifold tools ---- */
typedef enum lpm_dim_method { LPM_DIM_LOCAL_PCA = 0, LPM_DIM_MLE = 1, LPM_DIM_SIMPLEX_SKEWNESS = 2 } lpm_dim_method;

/* k <= 0 selects max(10, sqrt(n)/2); threshold <= 0 selects 0.05. */
LPM_API lpm_status lpm_intrinsic_dim(const double* points, int64_t n, int d, lpm_dim_method method, int k,
                                     double threshold, double* value, int* excluded);
/* bandwidth <= 0 selects the normal-reference rule; starts NULL selects a 10% subsample. */
LPM_API lpm_status lpm_scms_ridge(const double* points, int64_t n, int d, double bandwidth, int ridge_dim,
                                  const int32_t* starts, int64_t n_starts, uint64_t seed, lpm_ridge** out);
LPM_API lpm_status lpm_ridge_shape(const lpm_ridge* r, int64_t* count, int* d);
LPM_API lpm_status lpm_ridge_points(const lpm_ridge* r, double* out, size_t capacity);
LPM_API lpm_status lpm_ridge_converged(const lpm_ridge* r, int* out, size_t capacity);
LPM_API lpm_status lpm_ridge_bandwidth(const lpm_ridge* r, double* out);
LPM_API void lpm_ridge_free(lpm_ridge* r);
LPM_API lpm_status lpm_hausdorff(const double* a, int64_t na, const double* b, int64_t nb, int d, double* out);

/* ---- files ---- */
LPM_API lpm_status lpm_csv_read(const char* path, double** data, int64_t* rows, int64_t* cols);
LPM_API lpm_status lpm_csv_write(const char* path, const double* data, int64_t rows, int64_t cols,
                                 const char* header);

/* Scatter of the first two coordinates; overlay (may be NULL) is drawn as a second colour. */
LPM_API lpm_status lpm_svg_scatter(const char* path, const double* points, int64_t n, int d, const double* overlay,
                                   int64_t n_overlay);

/* ---- experiments ---- */
/* Runs the experiment described by config_json; out_dir may be NULL.
 * report_json receives the deterministic report; wall-clock time goes to
 * wall_clock_s (may be NULL); all_pass reports the built-in checks. */
LPM_API lpm_status lpm_bench_run(const char* config_json, const char* out_dir, char** report_json,
                                 double* wall_clock_s, int* all_pass);

#ifdef __cplusplus
}
#endif

#endif
