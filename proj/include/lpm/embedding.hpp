#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpm/eigensolver.hpp"
#include "lpm/graphsim.hpp"
#include "lpm/types.hpp"

namespace lpm {

enum class EmbeddingSource { adjacency, laplacian };

std::string to_string(EmbeddingSource s);

struct EmbeddingMatrix {
    RowMatrix coords;              // n x D_hat
    std::vector<int> eig_signs;
    Eigen::VectorXd eigenvalues;   // descending |lambda|
    EmbeddingSource source = EmbeddingSource::adjacency;
    std::string solver;
    double max_residual = 0.0;
    std::vector<std::string> notes;
    nlohmann::json lineage;        // seeds and kernel id of the input graph

    int dim() const { return static_cast<int>(coords.cols()); }
    Signature signature() const { return signature_from_signs(eig_signs); }
};

struct RankSelection {
    int rank = 1;
    bool low_confidence = false;
    std::vector<double> log_likelihood;  // entry q-1 is the split after q values
};

/// Zhu-Ghodsi profile likelihood on |values|; ties go to the smaller rank.
RankSelection select_rank_zg(const std::vector<double>& values);

/// Top-|lambda| eigenpairs of the adjacency matrix. D_hat empty selects the
/// rank by Zhu-Ghodsi over the leading min(n, 50) magnitudes.
EmbeddingMatrix ase(const Graph& graph, std::optional<int> D_hat, const EigenOptions& options = {});
/// Same on D^{-1/2} A D^{-1/2}; throws ErrorCode::isolated_nodes listing them.
EmbeddingMatrix lse(const Graph& graph, std::optional<int> D_hat, const EigenOptions& options = {});

/// Adjacency matrix-vector product on the sorted edge list.
SymmetricOperator adjacency_operator(const Graph& graph);
SymmetricOperator laplacian_operator(const Graph& graph);

/// embedding.csv and meta.json in `dir`.
void save_embedding(const EmbeddingMatrix& emb, const std::filesystem::path& dir);
EmbeddingMatrix load_embedding(const std::filesystem::path& dir);

}  // namespace lpm
