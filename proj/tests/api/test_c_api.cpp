#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "lpm/lpm.h"

namespace {

struct Kernel {
    lpm_kernel* p = nullptr;
    ~Kernel() { lpm_kernel_free(p); }
};
struct Spectrum {
    lpm_spectrum* p = nullptr;
    ~Spectrum() { lpm_spectrum_free(p); }
};
struct Latents {
    lpm_latents* p = nullptr;
    ~Latents() { lpm_latents_free(p); }
};
struct Graph {
    lpm_graph* p = nullptr;
    ~Graph() { lpm_graph_free(p); }
};
struct Embedding {
    lpm_embedding* p = nullptr;
    ~Embedding() { lpm_embedding_free(p); }
};

std::filesystem::path scratch(const char* name) {
    const auto d = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("status strings and last error") {
    CHECK(std::strlen(lpm_version()) > 0);
    CHECK(std::string(lpm_status_string(LPM_OK)) == "ok");
    CHECK(std::string(lpm_status_string(LPM_ERR_ISOLATED_NODES)).size() > 0);
    Kernel k;
    CHECK(lpm_kernel_preset("no_such_kernel", &k.p) != LPM_OK);
    CHECK(k.p == nullptr);
    CHECK(std::strlen(lpm_last_error()) > 0);
    CHECK(lpm_kernel_preset(nullptr, &k.p) == LPM_ERR_PARAMETER);
    CHECK(lpm_set_threads(-1) == LPM_ERR_PARAMETER);
    CHECK(lpm_set_threads(1) == LPM_OK);
    lpm_string_free(nullptr);
    lpm_buffer_free(nullptr);
    lpm_kernel_free(nullptr);
}

TEST_CASE("kernel handles") {
    Kernel k;
    REQUIRE(lpm_kernel_preset("sociability", &k.p) == LPM_OK);
    int d = 0;
    CHECK(lpm_kernel_latent_dim(k.p, &d) == LPM_OK);
    CHECK(d == 1);
    const double x = 1.0, y = 1.0, out_of = 5.0;
    double v = 0.0;
    CHECK(lpm_kernel_eval(k.p, &x, &y, &v) == LPM_OK);
    CHECK(v == doctest::Approx(0.8646647167633873).epsilon(1e-15));
    CHECK(lpm_kernel_eval(k.p, &x, &out_of, &v) == LPM_ERR_DOMAIN);

    char* json = nullptr;
    REQUIRE(lpm_kernel_to_json(k.p, &json) == LPM_OK);
    Kernel back;
    CHECK(lpm_kernel_from_json(json, &back.p) == LPM_OK);
    lpm_string_free(json);
    CHECK(lpm_kernel_from_json("{not json", &back.p) == LPM_ERR_CONFIG);

    Kernel t;
    CHECK(lpm_kernel_truncate(k.p, 3, &t.p) == LPM_ERR_RANGE);
    size_t rank = 0;
    CHECK(lpm_kernel_rank_bound(k.p, &rank) == LPM_ERR_UNSUPPORTED);
    Kernel xy;
    REQUIRE(lpm_kernel_preset("xy", &xy.p) == LPM_OK);
    CHECK(lpm_kernel_rank_bound(xy.p, &rank) == LPM_OK);
    CHECK(rank == 1);
}

TEST_CASE("spectrum through the C API") {
    Kernel k;
    REQUIRE(lpm_kernel_preset("two_block", &k.p) == LPM_OK);
    auto opts = lpm_spectrum_options_default();
    opts.nodes_per_axis = 64;
    Spectrum s;
    REQUIRE(lpm_spectrum_compute(k.p, &opts, &s.p) == LPM_OK);
    int J = 0, p = 0, q = 0;
    CHECK(lpm_spectrum_size(s.p, &J) == LPM_OK);
    CHECK(J == 2);
    CHECK(lpm_spectrum_signature(s.p, &p, &q) == LPM_OK);
    CHECK(p == 1);
    CHECK(q == 1);
    double ev[2];
    CHECK(lpm_spectrum_eigenvalues(s.p, ev, 1) == LPM_ERR_PARAMETER);
    CHECK(lpm_spectrum_eigenvalues(s.p, ev, 2) == LPM_OK);
    CHECK(std::abs(ev[0] - 0.5) < 1e-6);
    CHECK(std::abs(ev[1] + 0.3) < 1e-6);
    const double a = 0.2, b = 0.7;
    double inner = 0.0;
    CHECK(lpm_spectrum_indefinite_inner(s.p, &a, &b, &inner) == LPM_OK);
    CHECK(inner == doctest::Approx(0.8).epsilon(1e-9));

    const auto dir = scratch("lpm_api_spectrum");
    CHECK(lpm_spectrum_save(s.p, dir.c_str()) == LPM_OK);
    Spectrum back;
    CHECK(lpm_spectrum_load(dir.c_str(), &back.p) == LPM_OK);
    CHECK(lpm_spectrum_load((dir / "missing").c_str(), &back.p) == LPM_ERR_IO);
    std::filesystem::remove_all(dir);
}

TEST_CASE("graph, embedding and alignment pipeline") {
    Kernel k;
    REQUIRE(lpm_kernel_preset("xy", &k.p) == LPM_OK);
    Latents z;
    REQUIRE(lpm_latents_sample(R"({"kind":"uniform_box","lo":[0],"hi":[1]})", 1500, 11, &z.p) == LPM_OK);
    int64_t n = 0;
    int d = 0;
    CHECK(lpm_latents_shape(z.p, &n, &d) == LPM_OK);
    CHECK(n == 1500);
    Graph g;
    REQUIRE(lpm_graph_sample(k.p, z.p, 1.0, 12, &g.p) == LPM_OK);
    int nodes = 0;
    int64_t edges = 0;
    CHECK(lpm_graph_shape(g.p, &nodes, &edges) == LPM_OK);
    CHECK(nodes == 1500);
    CHECK(edges > 0);
    std::vector<int32_t> pairs(static_cast<size_t>(2 * edges));
    CHECK(lpm_graph_edges(g.p, pairs.data(), pairs.size() - 1) == LPM_ERR_PARAMETER);
    CHECK(lpm_graph_edges(g.p, pairs.data(), pairs.size()) == LPM_OK);
    CHECK(pairs[0] < pairs[1]);

    Embedding e;
    REQUIRE(lpm_embed(g.p, 1, 0, &e.p) == LPM_OK);
    int sign = 0;
    CHECK(lpm_embedding_signs(e.p, &sign, 1) == LPM_OK);
    CHECK(sign == 1);

    std::vector<double> target(1500);
    CHECK(lpm_latents_data(z.p, target.data(), target.size()) == LPM_OK);
    double Q = 0.0;
    lpm_alignment_result res{};
    CHECK(lpm_align(e.p, target.data(), 1500, 1, &Q, &res) == LPM_OK);
    CHECK(std::abs(std::abs(Q) - 1.0) < 0.2);
    CHECK(res.max_error < 0.15);
    CHECK(lpm_align(e.p, target.data(), 1500, 2, nullptr, &res) == LPM_ERR_INCOMPATIBLE);
    char* json = nullptr;
    CHECK(lpm_align_json(e.p, target.data(), 1500, 1, nullptr, &json) == LPM_OK);
    CHECK(std::string(json).find("max_error") != std::string::npos);
    lpm_string_free(json);

    Graph coupled_full, coupled_trunc;
    int64_t diff = -1;
    CHECK(lpm_graph_couple(k.p, 5, z.p, 1.0, 3, &coupled_full.p, &coupled_trunc.p, &diff) == LPM_OK);
    CHECK(diff == 0);
}

TEST_CASE("isolated nodes through the C API") {
    const auto dir = scratch("lpm_api_graph");
    const auto path = (dir / "g.txt").string();
    {
        FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("4 2\n0 1\n1 2\n", f);
        std::fclose(f);
    }
    Graph g;
    REQUIRE(lpm_graph_load(path.c_str(), &g.p) == LPM_OK);
    int32_t iso[4];
    int count = 0;
    CHECK(lpm_graph_isolated(g.p, iso, 4, &count) == LPM_OK);
    CHECK(count == 1);
    CHECK(iso[0] == 3);
    Embedding e;
    CHECK(lpm_embed(g.p, 1, 1, &e.p) == LPM_ERR_ISOLATED_NODES);
    CHECK(std::string(lpm_last_error()).find("--drop-isolated") != std::string::npos);
    Graph kept;
    CHECK(lpm_graph_drop_isolated(g.p, &kept.p) == LPM_OK);
    CHECK(lpm_embed(kept.p, 1, 1, &e.p) == LPM_OK);
    std::filesystem::remove_all(dir);
}

TEST_CASE("numeric helpers") {
    const double scree[] = {10, 9, 8, 1, 0.9, 0.8, 0.7, 0.6};
    int rank = 0, low = 1;
    CHECK(lpm_select_rank(scree, 8, &rank, &low) == LPM_OK);
    CHECK(rank == 3);
    CHECK(low == 0);

    const double ns[] = {1000, 2000, 4000}, err[] = {1.0 / std::sqrt(1000.0), 1.0 / std::sqrt(2000.0), 0.5 / std::sqrt(1000.0)};
    double slope = 0, hw = 0;
    CHECK(lpm_rate_fit(ns, err, 3, &slope, &hw) == LPM_OK);
    CHECK(slope == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(lpm_rate_fit(ns, err, 2, &slope, &hw) == LPM_ERR_PARAMETER);

    const double a[] = {0, 0, 1, 0}, b[] = {3, 4};
    double h = 0;
    CHECK(lpm_hausdorff(a, 2, b, 1, 2, &h) == LPM_OK);
    CHECK(h == 5.0);

    std::vector<double> line(2 * 300);
    for (int i = 0; i < 300; ++i) line[2 * i] = line[2 * i + 1] = i / 300.0;
    double dim = 0;
    int excluded = -1;
    CHECK(lpm_intrinsic_dim(line.data(), 300, 2, LPM_DIM_LOCAL_PCA, 0, 0.0, &dim, &excluded) == LPM_OK);
    CHECK(dim == 1.0);
    CHECK(excluded == 0);
}

TEST_CASE("csv buffers") {
    const auto dir = scratch("lpm_api_csv");
    const auto path = (dir / "m.csv").string();
    const double m[] = {1.5, -2.0, 3.25, 4.0};
    CHECK(lpm_csv_write(path.c_str(), m, 2, 2, "a,b") == LPM_OK);
    double* data = nullptr;
    int64_t rows = 0, cols = 0;
    REQUIRE(lpm_csv_read(path.c_str(), &data, &rows, &cols) == LPM_OK);
    CHECK(rows == 2);
    CHECK(cols == 2);
    for (int i = 0; i < 4; ++i) CHECK(data[i] == m[i]);
    lpm_buffer_free(data);
    CHECK(lpm_csv_read((dir / "none.csv").c_str(), &data, &rows, &cols) == LPM_ERR_IO);
    std::filesystem::remove_all(dir);
}

TEST_CASE("bench through the C API") {
    char* report = nullptr;
    double wall = -1;
    int pass = 0;
    REQUIRE(lpm_bench_run(R"({"experiment":"coupling_study","n":60,"params":{"trials":10}})", nullptr, &report,
                          &wall, &pass) == LPM_OK);
    CHECK(std::string(report).find("coupling_study") != std::string::npos);
    CHECK(std::string(report).find("wall_clock") == std::string::npos);
    CHECK(wall >= 0.0);
    lpm_string_free(report);
    CHECK(lpm_bench_run(R"({"experiment":"nope"})", nullptr, &report, nullptr, &pass) == LPM_ERR_CONFIG);
}

#ifdef LPM_CLI_PATH
namespace {
int cli(const std::string& args) {
    const std::string cmd = std::string(LPM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}
}  // namespace

TEST_CASE("command-line exit codes") {
    const auto dir = scratch("lpm_api_cli");
    const std::string out = (dir / "sim").string();
    CHECK(cli("--help") == 0);
    CHECK(cli("") == 2);
    CHECK(cli("simulate --kernel no_such_kernel --n 10 --out " + out) == 2);
    CHECK(cli("simulate --kernel sociability --n 200 --seed 4 --out " + out) == 0);
    CHECK(std::filesystem::exists(dir / "sim" / "graph.txt"));
    CHECK(cli("embed --input " + (dir / "sim" / "graph.txt").string() + " --dhat 2 --out " + (dir / "emb").string()) ==
          0);
    CHECK(std::filesystem::exists(dir / "emb" / "embedding.csv"));
    CHECK(cli("embed --input " + (dir / "missing.txt").string() + " --out " + (dir / "emb").string()) == 2);
    CHECK(cli("simulate --kernel sociability --latent gamma --n 150 --truncate 3 --scale 0.05 --out " +
              (dir / "pair").string()) == 0);
    CHECK(std::filesystem::exists(dir / "pair" / "graph_truncated.txt"));
    CHECK(cli("simulate --kernel sociability --latent gamma --n 150 --truncate 3 --scale 0.5 --out " +
              (dir / "pair").string()) == 2);
    CHECK(cli("spectrum --kernel xy --out " + (dir / "spec").string()) == 0);
    CHECK(cli("bench coupling_study --n 40 --param trials=5 --out " + (dir / "bench").string()) == 0);
    CHECK(std::filesystem::exists(dir / "bench" / "report.json"));
    std::filesystem::remove_all(dir);
}
#endif
