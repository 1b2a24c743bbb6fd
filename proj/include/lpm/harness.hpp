#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpm/graphsim.hpp"
#include "lpm/kernels.hpp"

namespace lpm {

enum class Experiment {
    fig1a_sociability,
    fig1b_branching_graphon,
    fig1c_circle_rbf,
    regression,
    rate_study,
    coupling_study,
};

std::string to_string(Experiment e);
/// Accepts the full name or the short forms fig1a, fig1b, fig1c.
Experiment experiment_from_string(const std::string& s);
std::vector<std::string> experiment_names();

struct ExperimentConfig {
    Experiment experiment = Experiment::fig1a_sociability;
    int n = 5000;
    std::optional<int> D_hat;          // empty: profile-likelihood selection
    std::vector<std::uint64_t> seeds;
    std::optional<nlohmann::json> kernel;  // KernelSpec override
    std::optional<nlohmann::json> latent;  // LatentDistribution override
    std::string out_dir;               // empty: no artifacts
    nlohmann::json params = nlohmann::json::object();

    static ExperimentConfig defaults(Experiment e);
    /// Unspecified fields take the experiment's defaults.
    static ExperimentConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

    template <class T>
    T param(const std::string& key, const T& fallback) const {
        return params.contains(key) ? params.at(key).get<T>() : fallback;
    }
};

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct BenchReport {
    std::string experiment;
    nlohmann::json config;
    nlohmann::json rows = nlohmann::json::array();  // every row carries its seed
    nlohmann::json summary = nlohmann::json::object();
    std::vector<Check> checks;
    double wall_clock_s = 0.0;  // kept out of to_json so reports stay byte-identical

    nlohmann::json to_json() const;
    bool all_pass() const;
};

BenchReport run_experiment(const ExperimentConfig& config);
BenchReport run_fig1(const ExperimentConfig& config);
BenchReport run_regression(const ExperimentConfig& config);
BenchReport run_rate_study(const ExperimentConfig& config);
BenchReport run_coupling_study(const ExperimentConfig& config);

/// E|f - f_k| for the scaled truncated-Gamma latents Z = r W, by tensor
/// Gauss-Legendre quadrature in W.
double coupling_expected_gap(int k, double r, double shape, double rate, double bound, int nodes = 200);

/// Writes report.json (deterministic) and timing.json into `dir`.
void save_report(const BenchReport& report, const std::string& dir);

}  // namespace lpm
