#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "lpm/harness.hpp"
#include "support.hpp"

using namespace lpm;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const Check* find_check(const BenchReport& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return &c;
    return nullptr;
}

}  // namespace

TEST_CASE("experiment names") {
    CHECK(experiment_from_string("fig1a") == Experiment::fig1a_sociability);
    CHECK(experiment_from_string("fig1c_circle_rbf") == Experiment::fig1c_circle_rbf);
    for (const auto& name : experiment_names()) CHECK(to_string(experiment_from_string(name)) == name);
    CHECK(test::error_of([] { experiment_from_string("fig9"); }) == ErrorCode::config);
}

TEST_CASE("config parsing and defaults") {
    const auto d = ExperimentConfig::defaults(Experiment::fig1c_circle_rbf);
    CHECK(d.n == 5000);
    CHECK(d.D_hat == 10);
    CHECK(ExperimentConfig::defaults(Experiment::regression).seeds.size() == 10);

    const auto c = ExperimentConfig::from_json(json::parse(R"({"experiment":"rate_study","n":800,"seeds":[4,5],
        "params":{"n_grid":[200,400,800]}})"));
    CHECK(c.experiment == Experiment::rate_study);
    CHECK(c.n == 800);
    CHECK(c.seeds == std::vector<std::uint64_t>{4, 5});
    CHECK_FALSE(c.D_hat.has_value());
    CHECK(c.param("n_grid", std::vector<int>{}) == std::vector<int>{200, 400, 800});
    CHECK(c.param("missing", 7) == 7);
    CHECK(ExperimentConfig::from_json(c.to_json()).to_json() == c.to_json());

    CHECK(test::error_of([] { ExperimentConfig::from_json(json::array()); }) == ErrorCode::config);
    CHECK(test::error_of([] { ExperimentConfig::from_json(json{{"n", 10}}); }) == ErrorCode::config);
    CHECK(test::error_of([] { ExperimentConfig::from_json(json{{"experiment", "fig1a"}, {"n", "many"}}); }) ==
          ErrorCode::config);
}

TEST_CASE("expected truncation gap agrees with Monte Carlo") {
    struct Ref {
        int k;
        double r, mean, se;
    };
    const Ref refs[] = {{3, 0.2, 4.323880e-03, 1.2e-05}, {3, 0.05, 1.828171e-05, 5.5e-08},
                        {5, 0.1, 6.442287e-06, 3.2e-08}, {5, 0.02, 4.233301e-10, 2.1e-12}};
    for (const auto& r : refs) {
        CAPTURE(r.k);
        CAPTURE(r.r);
        CHECK(std::abs(coupling_expected_gap(r.k, r.r, 1.0, 1.0, 3.0) - r.mean) <= 4.0 * r.se);
    }
}

TEST_CASE("coupling study report is deterministic") {
    const auto cfg = ExperimentConfig::from_json(
        json::parse(R"({"experiment":"coupling_study","n":100,"seeds":[3],"params":{"trials":30}})"));
    const auto dir = std::filesystem::temp_directory_path() / "lpm_unit_harness";
    std::filesystem::remove_all(dir);
    auto a = cfg, b = cfg;
    a.out_dir = (dir / "a").string();
    b.out_dir = (dir / "b").string();
    const auto ra = run_experiment(a);
    const auto rb = run_experiment(b);
    CHECK(ra.experiment == "coupling_study");
    CHECK(std::filesystem::exists(dir / "a" / "timing.json"));
    CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
    CHECK_FALSE(slurp(dir / "a" / "report.json").empty());
    for (const auto& row : ra.rows) CHECK(row.contains("seed"));
    const auto* c = find_check(ra, "empirical_within_bound");
    REQUIRE(c);
    CHECK(c->pass);
    CHECK(ra.to_json().at("checks").size() == ra.checks.size());
    std::filesystem::remove_all(dir);
}

TEST_CASE("small rate study") {
    const auto cfg = ExperimentConfig::from_json(json::parse(
        R"({"experiment":"rate_study","seeds":[1,2],"params":{"n_grid":[150,300,600],"lse":false}})"));
    const auto r = run_rate_study(cfg);
    CHECK(r.rows.size() == 6);
    const auto* zero = find_check(r, "zero_noise_identity");
    REQUIRE(zero);
    CHECK(zero->pass);
    CHECK(r.summary.contains("ase_rate"));
    CHECK(r.summary.at("D_hat") == 1);
    for (const auto& row : r.rows) CHECK(row.at("constraint_residual").get<double>() <= 1e-8);
}

TEST_CASE("experiment runners reject mismatched configs") {
    auto cfg = ExperimentConfig::defaults(Experiment::coupling_study);
    CHECK(test::error_of([&] { run_rate_study(cfg); }) == ErrorCode::config);
    cfg.seeds.clear();
    CHECK(test::error_of([&] { run_coupling_study(cfg); }) == ErrorCode::config);
}
