#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lpm/kernels.hpp"
#include "lpm/quadrature.hpp"
#include "lpm/types.hpp"

namespace lpm {

struct SpectrumOptions {
    std::optional<int> J;       // fixed truncation; auto when empty
    double tail_tol = 1e-6;     // auto J: smallest J with tail_mass < tail_tol
    double noise_floor = 1e-10; // relative to |lambda_1|
};

/// Quadrature-discretised eigensystem of the kernel integral operator.
struct OperatorSpectrum {
    explicit OperatorSpectrum(KernelSpec k) : kernel(std::move(k)) {}

    Eigen::VectorXd eigenvalues;  // J, descending |lambda|, positive first on ties
    Eigen::MatrixXd eigvecs;      // m x J eigenfunction values u_j(x_i)
    QuadratureGrid grid;
    KernelSpec kernel;
    Signature signature;
    double tail_mass = 0.0;
    double lambda_max = 0.0;      // |lambda_1| before truncation
    double noise_floor = 1e-10;
    int rank_estimate = 0;        // eigenvalues above the noise floor
    bool rank_infinite = false;
    std::vector<std::string> notes;

    int J() const { return static_cast<int>(eigenvalues.size()); }
    bool empty() const { return eigenvalues.size() == 0; }
    std::vector<int> signs() const;
};

struct PhiCoordinates {
    Eigen::VectorXd coords;
    std::vector<int> signs;
    Signature signature;
    std::vector<double> source_point;
    std::vector<std::string> notes;
};

struct TraceReport {
    double sum_abs_eigs = 0.0;      // partial sum plus tail estimate
    double partial_sum = 0.0;
    double tail_estimate = 0.0;
    double diagonal_integral = 0.0; // quadrature value of the integral of f(x,x)
    bool is_positive_definite = false;
};

OperatorSpectrum nystrom_spectrum(const KernelSpec& spec, const QuadratureGrid& grid,
                                  const SpectrumOptions& options = {});

PhiCoordinates phi(const OperatorSpectrum& spectrum, Point x);
/// Row i holds phi(points.row(i)).
RowMatrix phi_matrix(const OperatorSpectrum& spectrum, const RowMatrix& points);

double indefinite_inner(const PhiCoordinates& a, const PhiCoordinates& b);
/// Same product on raw coordinate vectors with an explicit sign vector.
double indefinite_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const std::vector<int>& signs);

TraceReport trace_diagnostics(const OperatorSpectrum& spectrum, const KernelSpec& spec);
Signature signature_of(const OperatorSpectrum& spectrum, double tol);

/// eigenvalues.csv, eigvecs.csv, grid.csv (nodes then weight) and meta.json.
void save_spectrum(const OperatorSpectrum& spectrum, const std::filesystem::path& dir);
OperatorSpectrum load_spectrum(const std::filesystem::path& dir);

}  // namespace lpm
