// lpm: command-line front end over the C API in lpm/lpm.h.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lpm/lpm.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CliError : std::runtime_error {
    int code;
    CliError(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

int exit_code(lpm_status s) {
    switch (s) {
        case LPM_ERR_NUMERIC:
        case LPM_ERR_RANK_DEFICIENT:
        case LPM_ERR_INTERNAL: return kExitNumeric;
        default: return kExitConfig;
    }
}

void check(lpm_status s, const std::string& what) {
    if (s != LPM_OK) throw CliError(exit_code(s), what + ": " + lpm_last_error());
}

[[noreturn]] void config_error(const std::string& what) { throw CliError(kExitConfig, what); }

struct Free {
    void operator()(lpm_kernel* p) const { lpm_kernel_free(p); }
    void operator()(lpm_spectrum* p) const { lpm_spectrum_free(p); }
    void operator()(lpm_latents* p) const { lpm_latents_free(p); }
    void operator()(lpm_graph* p) const { lpm_graph_free(p); }
    void operator()(lpm_embedding* p) const { lpm_embedding_free(p); }
    void operator()(lpm_ridge* p) const { lpm_ridge_free(p); }
    void operator()(char* p) const { lpm_string_free(p); }
    void operator()(double* p) const { lpm_buffer_free(p); }
};
template <class T>
using Owned = std::unique_ptr<T, Free>;

std::string take(char* s) {
    Owned<char> owned(s);
    return s ? std::string(s) : std::string();
}

struct Table {
    std::vector<double> data;
    int64_t rows = 0;
    int cols = 0;
};

Table read_table(const std::string& path) {
    double* buf = nullptr;
    int64_t rows = 0, cols = 0;
    check(lpm_csv_read(path.c_str(), &buf, &rows, &cols), "reading " + path);
    Owned<double> owned(buf);
    Table t;
    t.rows = rows;
    t.cols = static_cast<int>(cols);
    t.data.assign(buf, buf + rows * cols);
    if (t.rows == 0) config_error(path + " has no data rows");
    return t;
}

void write_table(const fs::path& path, const std::vector<double>& data, int64_t rows, int cols,
                 const std::string& prefix) {
    std::string header;
    for (int c = 0; c < cols; ++c) header += (c ? "," : "") + prefix + std::to_string(c + 1);
    check(lpm_csv_write(path.string().c_str(), data.data(), rows, cols, header.c_str()), "writing " + path.string());
}

void write_json(const fs::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) config_error("cannot write " + path.string());
    out << doc.dump(2) << "\n";
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) config_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        config_error(path + ": " + e.what());
    }
}

/// Inline JSON, a JSON file, or a bare word (returned as a JSON string).
json json_argument(const std::string& arg) {
    if (!arg.empty() && (arg.front() == '{' || arg.front() == '[' || arg.front() == '"')) {
        try {
            return json::parse(arg);
        } catch (const json::parse_error& e) {
            config_error("invalid JSON argument: " + std::string(e.what()));
        }
    }
    if (fs::is_regular_file(arg)) return read_json_file(arg);
    return json(arg);
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) config_error("cannot create " + dir.string() + ": " + ec.message());
}

struct Globals {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::string out_dir = "out";
    bool out_given = false;
    int threads = 1;
    json config = json::object();

    uint64_t seed_or(uint64_t fallback) const { return seed.value_or(fallback); }

    /// Section of the config file for one subcommand (falls back to the top level).
    json section(const std::string& name) const {
        if (config.contains(name) && config.at(name).is_object()) return config.at(name);
        return config;
    }
};

/// Fills `var` from the config section when the option was not given.
template <class T>
void from_config(const CLI::Option* opt, T& var, const json& sec, const std::string& key) {
    if (opt->count() > 0 || !sec.contains(key)) return;
    try {
        if constexpr (std::is_same_v<T, std::string>) {
            var = sec.at(key).is_string() ? sec.at(key).get<std::string>() : sec.at(key).dump();
        } else {
            var = sec.at(key).get<T>();
        }
    } catch (const json::exception& e) {
        config_error("config key '" + key + "': " + e.what());
    }
}

Owned<lpm_kernel> load_kernel(const std::string& arg) {
    if (arg.empty()) config_error("a kernel is required (--kernel NAME|JSON|FILE)");
    const json doc = json_argument(arg);
    lpm_kernel* k = nullptr;
    check(lpm_kernel_from_json(doc.dump().c_str(), &k), "kernel");
    return Owned<lpm_kernel>(k);
}

json kernel_json(const lpm_kernel* k) {
    char* s = nullptr;
    check(lpm_kernel_to_json(k, &s), "kernel");
    return json::parse(take(s));
}

/// Latent law from an argument; empty or "uniform" gives the uniform law on the kernel domain.
json latent_json(const std::string& arg, const lpm_kernel* k) {
    const json dom = kernel_json(k).at("domain");
    if (arg.empty() || arg == "uniform")
        return {{"kind", "uniform_box"}, {"lo", dom.at("lo")}, {"hi", dom.at("hi")}};
    if (arg == "circle") return {{"kind", "circle_angle_uniform"}};
    if (arg == "gamma") return {{"kind", "truncated_gamma"}, {"shape", 1.0}, {"rate", 1.0}, {"B", 3.0}};
    json doc = json_argument(arg);
    if (!doc.is_object()) config_error("unknown latent law '" + arg + "'");
    return doc;
}

/// Kernel with its domain shrunk to the bounding box of scale * z, when that
/// box lies inside the original domain; otherwise the kernel unchanged.
Owned<lpm_kernel> restrict_to_sample(const lpm_kernel* k, const lpm_latents* z, double scale) {
    int64_t n = 0;
    int d = 0;
    check(lpm_latents_shape(z, &n, &d), "latents");
    json doc = kernel_json(k);
    if (n > 0) {
        std::vector<double> pts(static_cast<size_t>(n) * d);
        check(lpm_latents_data(z, pts.data(), pts.size()), "latents");
        auto lo = doc.at("domain").at("lo").get<std::vector<double>>();
        auto hi = doc.at("domain").at("hi").get<std::vector<double>>();
        std::vector<double> blo(d, INFINITY), bhi(d, -INFINITY);
        for (int64_t i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) {
                blo[j] = std::min(blo[j], scale * pts[i * d + j]);
                bhi[j] = std::max(bhi[j], scale * pts[i * d + j]);
            }
        bool inside = static_cast<int>(lo.size()) == d;
        for (int j = 0; inside && j < d; ++j) inside = lo[j] <= blo[j] && bhi[j] <= hi[j];
        if (inside) doc["domain"] = {{"lo", blo}, {"hi", bhi}};
    }
    lpm_kernel* out = nullptr;
    check(lpm_kernel_from_json(doc.dump().c_str(), &out), "kernel");
    return Owned<lpm_kernel>(out);
}

// ------------------------------------------------------------ simulate

struct SimulateArgs {
    std::string kernel, latent;
    int64_t n = 1000;
    double rho = 1.0;
    int truncate = 0;
    double scale = 1.0;
    CLI::Option *o_kernel, *o_latent, *o_n, *o_rho, *o_truncate, *o_scale;
};

int run_simulate(SimulateArgs& a, const Globals& g) {
    const json sec = g.section("simulate");
    from_config(a.o_kernel, a.kernel, sec, "kernel");
    from_config(a.o_latent, a.latent, sec, "latent");
    from_config(a.o_n, a.n, sec, "n");
    from_config(a.o_rho, a.rho, sec, "rho");
    from_config(a.o_truncate, a.truncate, sec, "truncate");
    from_config(a.o_scale, a.scale, sec, "scale");
    const uint64_t seed = g.seed_or(sec.value("seed", uint64_t{1}));

    auto k = load_kernel(a.kernel);
    const json lat = latent_json(a.latent, k.get());
    lpm_latents* zp = nullptr;
    check(lpm_latents_sample(lat.dump().c_str(), a.n, seed, &zp), "latents");
    Owned<lpm_latents> z(zp);

    const fs::path out = g.out_dir;
    make_dir(out);
    check(lpm_latents_save_csv(z.get(), (out / "latents.csv").string().c_str()), "latents");

    json meta = {{"kernel", kernel_json(k.get())}, {"latent", lat}, {"n", a.n}, {"seed", seed}};
    lpm_graph* gp = nullptr;
    if (a.truncate > 0) {
        lpm_graph* tp = nullptr;
        int64_t disagreements = 0;
        // truncation only has to be admissible where the scaled latents lie
        auto kc = restrict_to_sample(k.get(), z.get(), a.scale);
        check(lpm_graph_couple(kc.get(), a.truncate, z.get(), a.scale, seed, &gp, &tp, &disagreements), "coupling");
        Owned<lpm_graph> trunc(tp);
        check(lpm_graph_save(trunc.get(), (out / "graph_truncated.txt").string().c_str()), "graph");
        int nodes = 0;
        int64_t edges = 0;
        check(lpm_graph_shape(trunc.get(), &nodes, &edges), "graph");
        meta["coupling"] = {{"degree", a.truncate}, {"scale", a.scale}, {"disagreements", disagreements},
                            {"truncated_edges", edges}};
    } else {
        check(lpm_graph_sample(k.get(), z.get(), a.rho, seed, &gp), "graph");
        meta["rho"] = a.rho;
    }
    Owned<lpm_graph> graph(gp);
    check(lpm_graph_save(graph.get(), (out / "graph.txt").string().c_str()), "graph");

    int nodes = 0, isolated = 0;
    int64_t edges = 0;
    check(lpm_graph_shape(graph.get(), &nodes, &edges), "graph");
    check(lpm_graph_isolated(graph.get(), nullptr, 0, &isolated), "graph");
    meta["edges"] = edges;
    meta["isolated_nodes"] = isolated;
    write_json(out / "meta.json", meta);

    std::cout << "simulated n=" << nodes << " edges=" << edges << " isolated=" << isolated;
    if (meta.contains("coupling")) std::cout << " disagreements=" << meta["coupling"]["disagreements"];
    std::cout << " -> " << out.string() << "\n";
    return 0;
}

// ------------------------------------------------------------ embed

struct EmbedArgs {
    std::string input, dhat = "auto";
    bool laplacian = false, drop_isolated = false, svg = false;
    CLI::Option *o_input, *o_dhat, *o_laplacian, *o_drop;
};

int run_embed(EmbedArgs& a, const Globals& g) {
    const json sec = g.section("embed");
    from_config(a.o_input, a.input, sec, "input");
    from_config(a.o_dhat, a.dhat, sec, "dhat");
    from_config(a.o_laplacian, a.laplacian, sec, "laplacian");
    from_config(a.o_drop, a.drop_isolated, sec, "drop_isolated");
    if (a.input.empty()) config_error("embed needs --input GRAPH");

    int d_hat = 0;
    if (a.dhat != "auto") {
        try {
            size_t used = 0;
            d_hat = std::stoi(a.dhat, &used);
            if (used != a.dhat.size() || d_hat <= 0) throw std::invalid_argument(a.dhat);
        } catch (const std::exception&) {
            config_error("--dhat must be a positive integer or 'auto', got '" + a.dhat + "'");
        }
    }

    lpm_graph* gp = nullptr;
    check(lpm_graph_load(a.input.c_str(), &gp), "graph");
    Owned<lpm_graph> graph(gp);

    const fs::path out = g.out_dir;
    make_dir(out);
    if (a.drop_isolated) {
        int n = 0, count = 0;
        check(lpm_graph_shape(graph.get(), &n, nullptr), "graph");
        check(lpm_graph_isolated(graph.get(), nullptr, 0, &count), "graph");
        std::vector<int32_t> iso(count);
        check(lpm_graph_isolated(graph.get(), iso.data(), iso.size(), &count), "graph");
        std::vector<double> kept;
        size_t next = 0;
        for (int i = 0; i < n; ++i) {
            if (next < iso.size() && iso[next] == i) {
                ++next;
                continue;
            }
            kept.push_back(i);
        }
        lpm_graph* dp = nullptr;
        check(lpm_graph_drop_isolated(graph.get(), &dp), "graph");
        graph.reset(dp);
        check(lpm_csv_write((out / "kept_nodes.csv").string().c_str(), kept.data(),
                            static_cast<int64_t>(kept.size()), 1, "node"),
              "kept_nodes.csv");
        std::cout << "dropped " << count << " isolated nodes\n";
    }

    lpm_embedding* ep = nullptr;
    check(lpm_embed(graph.get(), d_hat, a.laplacian ? 1 : 0, &ep), "embedding");
    Owned<lpm_embedding> emb(ep);
    check(lpm_embedding_save(emb.get(), out.string().c_str()), "embedding");

    int64_t n = 0;
    int d = 0;
    check(lpm_embedding_shape(emb.get(), &n, &d), "embedding");
    std::vector<int> signs(d);
    check(lpm_embedding_signs(emb.get(), signs.data(), signs.size()), "embedding");
    int p = 0;
    for (int s : signs) p += s > 0;
    if (a.svg && d >= 2) {
        std::vector<double> coords(n * d);
        check(lpm_embedding_coords(emb.get(), coords.data(), coords.size()), "embedding");
        check(lpm_svg_scatter((out / "scatter.svg").string().c_str(), coords.data(), n, d, nullptr, 0), "svg");
    }
    std::cout << (a.laplacian ? "LSE" : "ASE") << " n=" << n << " D_hat=" << d << " signature=(" << p << ","
              << d - p << ") -> " << out.string() << "\n";
    return 0;
}

// ------------------------------------------------------------ spectrum

struct SpectrumArgs {
    std::string kernel, latent, scheme = "gauss_legendre", phi_input;
    int nodes = 256, J = 0, curvature_pairs = 0;
    double tail_tol = 1e-6;
    CLI::Option *o_kernel, *o_latent, *o_scheme, *o_nodes, *o_J, *o_tail;
};

int scheme_code(const std::string& s) {
    if (s == "gauss_legendre" || s == "gl") return 0;
    if (s == "midpoint" || s == "uniform_midpoint") return 1;
    if (s == "monte_carlo" || s == "mc") return 2;
    config_error("unknown quadrature scheme '" + s + "'");
}

int run_spectrum(SpectrumArgs& a, const Globals& g) {
    const json sec = g.section("spectrum");
    from_config(a.o_kernel, a.kernel, sec, "kernel");
    from_config(a.o_latent, a.latent, sec, "latent");
    from_config(a.o_scheme, a.scheme, sec, "scheme");
    from_config(a.o_nodes, a.nodes, sec, "nodes");
    from_config(a.o_J, a.J, sec, "J");
    from_config(a.o_tail, a.tail_tol, sec, "tail_tol");

    auto k = load_kernel(a.kernel);
    lpm_spectrum_options opts = lpm_spectrum_options_default();
    opts.nodes_per_axis = a.nodes;
    opts.scheme = scheme_code(a.scheme);
    opts.J = a.J;
    opts.tail_tol = a.tail_tol;
    opts.seed = g.seed_or(0);
    std::string lat;
    if (!a.latent.empty()) {
        lat = latent_json(a.latent, k.get()).dump();
        opts.latent_json = lat.c_str();
    }
    lpm_spectrum* sp = nullptr;
    check(lpm_spectrum_compute(k.get(), &opts, &sp), "spectrum");
    Owned<lpm_spectrum> spec(sp);

    const fs::path out = g.out_dir;
    make_dir(out);
    check(lpm_spectrum_save(spec.get(), out.string().c_str()), "spectrum");

    int J = 0, p = 0, q = 0, rank = 0, inf = 0;
    double tail = 0.0;
    check(lpm_spectrum_size(spec.get(), &J), "spectrum");
    check(lpm_spectrum_signature(spec.get(), &p, &q), "spectrum");
    check(lpm_spectrum_tail_mass(spec.get(), &tail), "spectrum");
    check(lpm_spectrum_rank(spec.get(), &rank, &inf), "spectrum");
    std::vector<double> eig(J);
    if (J > 0) check(lpm_spectrum_eigenvalues(spec.get(), eig.data(), eig.size()), "spectrum");

    std::cout << "J=" << J << " signature=(" << p << "," << q << ") tail_mass=" << tail << " rank="
              << (inf ? "infinite" : std::to_string(rank)) << "\n";
    for (int j = 0; j < std::min(J, 10); ++j) std::cout << "  lambda_" << j + 1 << " = " << eig[j] << "\n";

    if (!a.phi_input.empty()) {
        const Table pts = read_table(a.phi_input);
        std::vector<double> phi(static_cast<size_t>(pts.rows) * J);
        check(lpm_spectrum_phi_batch(spec.get(), pts.data.data(), pts.rows, phi.data(), phi.size()), "phi");
        write_table(out / "phi.csv", phi, pts.rows, J, "phi");
    }
    if (a.curvature_pairs > 0) {
        lpm_curvature_report r;
        check(lpm_kernel_check_curvature(k.get(), spec.get(), a.curvature_pairs, g.seed_or(1), &r), "curvature");
        std::cout << "curvature alpha_hat=" << r.alpha_hat << " c_hat=" << r.c_hat
                  << (r.degenerate ? " (degenerate)" : "") << "\n";
        write_json(out / "curvature.json", {{"alpha_hat", r.alpha_hat},
                                            {"c_hat", r.c_hat},
                                            {"max_violation_ratio", r.max_violation_ratio},
                                            {"pairs_tested", r.pairs_tested},
                                            {"degenerate", r.degenerate != 0}});
    }
    return 0;
}

// ------------------------------------------------------------ align

struct AlignArgs {
    std::string embedding, target, spectrum, latents;
    bool laplacian = false, svg = false;
    CLI::Option *o_embedding, *o_target, *o_spectrum, *o_latents;
};

int run_align(AlignArgs& a, const Globals& g) {
    const json sec = g.section("align");
    from_config(a.o_embedding, a.embedding, sec, "embedding");
    from_config(a.o_target, a.target, sec, "target");
    from_config(a.o_spectrum, a.spectrum, sec, "spectrum");
    from_config(a.o_latents, a.latents, sec, "latents");
    if (a.embedding.empty()) config_error("align needs --embedding DIR");
    if (a.target.empty() == (a.spectrum.empty() || a.latents.empty()))
        config_error("align needs either --target CSV or both --spectrum DIR and --latents CSV");

    lpm_embedding* ep = nullptr;
    check(lpm_embedding_load(a.embedding.c_str(), &ep), "embedding");
    Owned<lpm_embedding> emb(ep);
    int64_t n = 0;
    int d = 0;
    check(lpm_embedding_shape(emb.get(), &n, &d), "embedding");

    std::vector<double> target;
    if (!a.target.empty()) {
        Table t = read_table(a.target);
        if (t.rows != n || t.cols != d)
            config_error("target is " + std::to_string(t.rows) + " x " + std::to_string(t.cols) +
                         ", embedding is " + std::to_string(n) + " x " + std::to_string(d));
        target = std::move(t.data);
    } else {
        lpm_spectrum* sp = nullptr;
        check(lpm_spectrum_load(a.spectrum.c_str(), &sp), "spectrum");
        Owned<lpm_spectrum> spec(sp);
        lpm_latents* zp = nullptr;
        check(lpm_latents_load_csv(a.latents.c_str(), &zp), "latents");
        Owned<lpm_latents> z(zp);
        int64_t nz = 0;
        check(lpm_latents_shape(z.get(), &nz, nullptr), "latents");
        if (nz != n) config_error("latents have " + std::to_string(nz) + " rows, embedding " + std::to_string(n));
        std::vector<int> signs(d);
        check(lpm_embedding_signs(emb.get(), signs.data(), signs.size()), "embedding");
        target.resize(static_cast<size_t>(n) * d);
        check(lpm_phi_targets(spec.get(), z.get(), signs.data(), d, target.data(), target.size()), "targets");
        if (a.laplacian) {
            std::vector<double> scaled(target.size());
            check(lpm_lse_target(target.data(), n, d, signs.data(), scaled.data()), "targets");
            target = std::move(scaled);
        }
    }

    std::vector<double> aligned(static_cast<size_t>(n) * d);
    char* js = nullptr;
    check(lpm_align_json(emb.get(), target.data(), n, d, aligned.data(), &js), "alignment");
    const json result = json::parse(take(js));

    const fs::path out = g.out_dir;
    make_dir(out);
    write_json(out / "alignment.json", result);
    write_table(out / "aligned.csv", aligned, n, d, "x");
    write_table(out / "target.csv", target, n, d, "x");
    if (a.svg && d >= 2)
        check(lpm_svg_scatter((out / "scatter.svg").string().c_str(), aligned.data(), n, d, target.data(), n), "svg");
    std::cout << "max_error=" << result.value("max_error", 0.0) << " mean_error=" << result.value("mean_error", 0.0)
              << " constraint_residual=" << result.value("constraint_residual", 0.0) << "\n";
    return 0;
}

// ------------------------------------------------------------ dimest

struct DimestArgs {
    std::string input, method = "all";
    int k = 0;
    double threshold = 0.05;
    CLI::Option *o_input, *o_method, *o_k, *o_threshold;
};

int run_dimest(DimestArgs& a, const Globals& g) {
    const json sec = g.section("dimest");
    from_config(a.o_input, a.input, sec, "input");
    from_config(a.o_method, a.method, sec, "method");
    from_config(a.o_k, a.k, sec, "k");
    from_config(a.o_threshold, a.threshold, sec, "threshold");
    if (a.input.empty()) config_error("dimest needs --input CSV");

    std::vector<std::pair<std::string, lpm_dim_method>> methods;
    const std::vector<std::pair<std::string, lpm_dim_method>> all = {{"local_pca", LPM_DIM_LOCAL_PCA},
                                                                     {"mle", LPM_DIM_MLE},
                                                                     {"simplex_skewness", LPM_DIM_SIMPLEX_SKEWNESS}};
    if (a.method == "all") {
        methods = all;
    } else if (a.method == "local_pca" || a.method == "pca") {
        methods = {all[0]};
    } else if (a.method == "mle" || a.method == "mle_knn") {
        methods = {all[1]};
    } else if (a.method == "simplex_skewness" || a.method == "ess") {
        methods = {all[2]};
    } else {
        config_error("unknown method '" + a.method + "'");
    }

    const Table pts = read_table(a.input);
    json summary = {{"input", a.input}, {"n", pts.rows}, {"ambient_dim", pts.cols}, {"k", a.k}};
    for (const auto& [name, m] : methods) {
        double value = 0.0;
        int excluded = 0;
        check(lpm_intrinsic_dim(pts.data.data(), pts.rows, pts.cols, m, a.k, a.threshold, &value, &excluded), name);
        std::cout << name << " " << value << "\n";
        summary[name] = {{"value", value}, {"excluded", excluded}};
    }
    if (g.out_given) {
        make_dir(g.out_dir);
        write_json(fs::path(g.out_dir) / "dimest.json", summary);
    }
    return 0;
}

// ------------------------------------------------------------ ridge

struct RidgeArgs {
    std::string input, bandwidth = "auto";
    int ridge_dim = 1;
    bool svg = false;
    CLI::Option *o_input, *o_bandwidth, *o_ridge_dim;
};

int run_ridge(RidgeArgs& a, const Globals& g) {
    const json sec = g.section("ridge");
    from_config(a.o_input, a.input, sec, "input");
    from_config(a.o_bandwidth, a.bandwidth, sec, "bandwidth");
    from_config(a.o_ridge_dim, a.ridge_dim, sec, "ridge_dim");
    if (a.input.empty()) config_error("ridge needs --input CSV");
    double h = 0.0;
    if (a.bandwidth != "auto") {
        try {
            h = std::stod(a.bandwidth);
        } catch (const std::exception&) {
            config_error("--bandwidth must be a number or 'auto'");
        }
        if (!(h > 0.0)) config_error("--bandwidth must be positive");
    }

    const Table pts = read_table(a.input);
    lpm_ridge* rp = nullptr;
    check(lpm_scms_ridge(pts.data.data(), pts.rows, pts.cols, h, a.ridge_dim, nullptr, 0, g.seed_or(1), &rp), "ridge");
    Owned<lpm_ridge> ridge(rp);
    int64_t count = 0;
    int d = 0;
    double bw = 0.0;
    check(lpm_ridge_shape(ridge.get(), &count, &d), "ridge");
    check(lpm_ridge_bandwidth(ridge.get(), &bw), "ridge");
    std::vector<double> rpts(static_cast<size_t>(count) * d);
    std::vector<int> conv(count);
    check(lpm_ridge_points(ridge.get(), rpts.data(), rpts.size()), "ridge");
    check(lpm_ridge_converged(ridge.get(), conv.data(), conv.size()), "ridge");
    int converged = 0;
    for (int c : conv) converged += c;

    const fs::path out = g.out_dir;
    make_dir(out);
    write_table(out / "ridge.csv", rpts, count, d, "x");
    write_json(out / "ridge.json", {{"input", a.input},
                                    {"bandwidth", bw},
                                    {"ridge_dim", a.ridge_dim},
                                    {"points", count},
                                    {"converged", converged}});
    if (a.svg && d >= 2)
        check(lpm_svg_scatter((out / "scatter.svg").string().c_str(), pts.data.data(), pts.rows, d, rpts.data(),
                              count),
              "svg");
    std::cout << "ridge points=" << count << " converged=" << converged << " bandwidth=" << bw << "\n";
    return 0;
}

// ------------------------------------------------------------ bench

struct BenchArgs {
    std::string experiment, dhat;
    int n = 0;
    std::vector<std::string> params;
    std::vector<uint64_t> seeds;
};

int run_bench(BenchArgs& a, const Globals& g) {
    json cfg = g.config.is_object() ? g.config : json::object();
    if (cfg.contains("bench") && cfg.at("bench").is_object()) cfg = cfg.at("bench");
    cfg["experiment"] = a.experiment;
    if (a.n > 0) cfg["n"] = a.n;
    if (!a.dhat.empty()) {
        if (a.dhat == "auto") {
            cfg["D_hat"] = "auto";
        } else {
            try {
                cfg["D_hat"] = std::stoi(a.dhat);
            } catch (const std::exception&) {
                config_error("--dhat must be an integer or 'auto'");
            }
        }
    }
    if (!a.seeds.empty()) cfg["seeds"] = a.seeds;
    if (g.seed) cfg["seeds"] = {*g.seed};
    for (const std::string& kv : a.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) config_error("--param expects key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        json v;
        try {
            v = json::parse(val);
        } catch (const json::parse_error&) {
            v = val;
        }
        cfg["params"][key] = v;
    }

    const std::string out = g.out_given ? g.out_dir : std::string();
    char* rep = nullptr;
    double secs = 0.0;
    int pass = 0;
    check(lpm_bench_run(cfg.dump().c_str(), out.empty() ? nullptr : out.c_str(), &rep, &secs, &pass), "bench");
    const json report = json::parse(take(rep));

    for (const auto& c : report.value("checks", json::array()))
        std::cout << (c.value("pass", false) ? "PASS " : "FAIL ") << c.value("name", "") << "  "
                  << c.value("detail", "") << "\n";
    std::cout << "summary " << report.value("summary", json::object()).dump() << "\n";
    std::cout << a.experiment << ": " << (pass ? "all checks pass" : "some checks fail") << " in " << secs << " s";
    if (!out.empty()) std::cout << " -> " << out;
    std::cout << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Latent position random graphs: simulation, embedding, spectral maps and manifold checks"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Random seed");
    auto* o_out = app.add_option("--out", g.out_dir, "Output directory");
    app.add_option("--threads", g.threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Sample latents and a graph");
    sim.o_kernel = c_sim->add_option("--kernel", sim.kernel, "Kernel preset, JSON or JSON file");
    sim.o_latent = c_sim->add_option("--latent", sim.latent, "Latent law: uniform, gamma, circle, JSON or file");
    sim.o_n = c_sim->add_option("--n", sim.n, "Number of nodes")->check(CLI::PositiveNumber);
    sim.o_rho = c_sim->add_option("--rho", sim.rho, "Sparsity factor in (0,1]");
    sim.o_truncate = c_sim->add_option("--truncate", sim.truncate, "Also emit the coupled degree-k truncated graph");
    sim.o_scale = c_sim->add_option("--scale", sim.scale, "Latent scale r for the coupled pair");

    EmbedArgs emb;
    auto* c_emb = app.add_subcommand("embed", "Spectral embedding of a graph");
    emb.o_input = c_emb->add_option("--input", emb.input, "Graph file");
    emb.o_dhat = c_emb->add_option("--dhat", emb.dhat, "Embedding dimension or 'auto'");
    emb.o_laplacian = c_emb->add_flag("--laplacian", emb.laplacian, "Laplacian spectral embedding");
    emb.o_drop = c_emb->add_flag("--drop-isolated", emb.drop_isolated, "Remove degree-zero nodes first");
    c_emb->add_flag("--svg", emb.svg, "Write scatter.svg of the first two coordinates");

    SpectrumArgs spc;
    auto* c_spc = app.add_subcommand("spectrum", "Discretised operator spectrum and spectral map");
    spc.o_kernel = c_spc->add_option("--kernel", spc.kernel, "Kernel preset, JSON or JSON file");
    spc.o_latent = c_spc->add_option("--latent", spc.latent, "Weight nodes by this latent density");
    spc.o_scheme = c_spc->add_option("--scheme", spc.scheme, "gauss_legendre, midpoint or monte_carlo");
    spc.o_nodes = c_spc->add_option("--nodes", spc.nodes, "Quadrature nodes per axis")->check(CLI::PositiveNumber);
    spc.o_J = c_spc->add_option("--J", spc.J, "Retained eigenpairs (0: from tail tolerance)");
    spc.o_tail = c_spc->add_option("--tail-tol", spc.tail_tol, "Tail-mass tolerance");
    c_spc->add_option("--phi", spc.phi_input, "CSV of latent points; writes phi.csv");
    c_spc->add_option("--curvature", spc.curvature_pairs, "Run the curvature check on this many pairs");

    AlignArgs aln;
    auto* c_aln = app.add_subcommand("align", "Indefinite orthogonal alignment of an embedding");
    aln.o_embedding = c_aln->add_option("--embedding", aln.embedding, "Embedding directory");
    aln.o_target = c_aln->add_option("--target", aln.target, "Target CSV (n x D_hat)");
    aln.o_spectrum = c_aln->add_option("--spectrum", aln.spectrum, "Spectrum directory for phi targets");
    aln.o_latents = c_aln->add_option("--latents", aln.latents, "Latent CSV for phi targets");
    c_aln->add_flag("--laplacian", aln.laplacian, "Rescale phi targets to the Laplacian embedding");
    c_aln->add_flag("--svg", aln.svg, "Write scatter.svg of aligned and target points");

    DimestArgs dim;
    auto* c_dim = app.add_subcommand("dimest", "Intrinsic dimension estimates");
    dim.o_input = c_dim->add_option("--input", dim.input, "Point CSV");
    dim.o_method = c_dim->add_option("--method", dim.method, "all, local_pca, mle or ess");
    dim.o_k = c_dim->add_option("--k", dim.k, "Neighbourhood size (0: default)");
    dim.o_threshold = c_dim->add_option("--threshold", dim.threshold, "Local PCA eigenvalue fraction");

    RidgeArgs rdg;
    auto* c_rdg = app.add_subcommand("ridge", "Density ridge by subspace-constrained mean shift");
    rdg.o_input = c_rdg->add_option("--input", rdg.input, "Point CSV");
    rdg.o_bandwidth = c_rdg->add_option("--bandwidth", rdg.bandwidth, "Kernel bandwidth or 'auto'");
    rdg.o_ridge_dim = c_rdg->add_option("--ridge-dim", rdg.ridge_dim, "Ridge dimension");
    c_rdg->add_flag("--svg", rdg.svg, "Write scatter.svg of points and ridge");

    BenchArgs bch;
    auto* c_bch = app.add_subcommand("bench", "Run a reproducible experiment");
    c_bch->add_option("experiment", bch.experiment,
                      "fig1a_sociability, fig1b_branching_graphon, fig1c_circle_rbf, regression, rate_study, "
                      "coupling_study")
        ->required();
    c_bch->add_option("--n", bch.n, "Override the number of nodes");
    c_bch->add_option("--dhat", bch.dhat, "Override the embedding dimension (integer or 'auto')");
    c_bch->add_option("--seeds", bch.seeds, "Seed list");
    c_bch->add_option("--param", bch.params, "Experiment parameter key=value (value parsed as JSON)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (!g.config_path.empty()) g.config = read_json_file(g.config_path);
        if (!g.config.is_object()) config_error("configuration must be a JSON object");
        if (o_out->count() == 0 && g.config.contains("out")) g.out_dir = g.config.at("out").get<std::string>();
        if (o_out->count() == 0 && g.config.contains("out_dir"))
            g.out_dir = g.config.at("out_dir").get<std::string>();
        g.out_given = o_out->count() > 0 || g.config.contains("out") || g.config.contains("out_dir");
        if (!g.seed && g.config.contains("seed")) g.seed = g.config.at("seed").get<uint64_t>();
        check(lpm_set_threads(g.threads), "threads");

        if (c_sim->parsed()) return run_simulate(sim, g);
        if (c_emb->parsed()) return run_embed(emb, g);
        if (c_spc->parsed()) return run_spectrum(spc, g);
        if (c_aln->parsed()) return run_align(aln, g);
        if (c_dim->parsed()) return run_dimest(dim, g);
        if (c_rdg->parsed()) return run_ridge(rdg, g);
        if (c_bch->parsed()) return run_bench(bch, g);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code;
    } catch (const json::exception& e) {
        std::cerr << "error: configuration: " << e.what() << "\n";
        return kExitConfig;
    }
    return 0;
}
