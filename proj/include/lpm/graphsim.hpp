#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lpm/kernels.hpp"
#include "lpm/types.hpp"

namespace lpm {

enum class LatentKind { uniform_box, truncated_gamma, circle_angle_uniform, piecewise_density };

std::string to_string(LatentKind k);

/// Latent law F_Z. Draws are multiplied by `scale` after sampling
/// (Z = r W in the coupling construction).
struct LatentDistribution {
    LatentKind kind = LatentKind::uniform_box;
    Box box = Box::interval(0.0, 1.0);   // uniform_box support
    double shape = 1.0;                  // truncated_gamma
    double rate = 1.0;
    double bound = 3.0;                  // truncation B
    int dim = 1;                         // truncated_gamma: iid coordinates
    std::vector<double> boundaries;      // piecewise_density, ascending
    std::vector<double> heights;         // density value on each piece
    double scale = 1.0;

    static LatentDistribution uniform(Box box);
    static LatentDistribution truncated_gamma(double shape, double rate, double bound, int dim = 1);
    static LatentDistribution circle();
    static LatentDistribution piecewise(std::vector<double> boundaries, std::vector<double> heights);

    int latent_dim() const;
    /// Smallest box holding the (scaled) support.
    Box support() const;
    /// Density of Z up to a constant factor; zero off the support.
    double density(Point z) const;

    static LatentDistribution from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

struct LatentSample {
    RowMatrix points;  // n x d
    LatentDistribution distribution;
    std::uint64_t seed = 0;

    Eigen::Index n() const { return points.rows(); }
};

struct Graph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;  // i < j, sorted row-major
    double rho = 1.0;
    std::uint64_t seed = 0;
    std::string kernel_id;

    std::vector<int> degrees() const;
    double density() const;
};

LatentSample sample_latents(const LatentDistribution& dist, Eigen::Index n, std::uint64_t seed);

/// Includes each pair {i,j} with probability rho f(Z_i, Z_j).
Graph sample_graph(const KernelSpec& spec, const LatentSample& latents, double rho, std::uint64_t seed);

struct CoupledGraphs {
    Graph full;        // thresholded against f
    Graph truncated;   // thresholded against f_k
    long disagreements = 0;  // unordered pairs present in exactly one graph
};

/// One uniform per pair, thresholded against f and f_k. Latents are scaled
/// by r_n before use.
CoupledGraphs couple_graphs(const KernelSpec& spec, int k, const LatentSample& latents_base, double r_n,
                            std::uint64_t seed);

/// Removes degree-zero nodes; `kept` maps new indices to old.
Graph drop_isolated(const Graph& g, std::vector<int>* kept = nullptr);
std::vector<int> isolated_nodes(const Graph& g);

void write_graph(const std::filesystem::path& path, const Graph& g);
Graph read_graph(const std::filesystem::path& path);

}  // namespace lpm
