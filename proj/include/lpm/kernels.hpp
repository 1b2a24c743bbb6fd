#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "lpm/error.hpp"

namespace lpm {

using Point = std::span<const double>;

/// Closed axis-aligned box [lo, hi] in R^d.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    static Box interval(double lo, double hi) { return Box{{lo}, {hi}}; }
    static Box cube(int d, double lo, double hi) {
        return Box{std::vector<double>(d, lo), std::vector<double>(d, hi)};
    }

    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(Point x) const;
    double diameter() const;
    double volume() const;
};

enum class KernelFamily {
    rbf,
    sociability,
    logistic_distance,
    logistic_bilinear,
    probit_bilinear,
    polynomial,
    blockwise_graphon,
    geodesic_rbf,
    branching_graphon,
};

enum class Norm { l1, l2, linf };

/// One entry c(alpha, beta) of a polynomial kernel's coefficient table.
struct PolyTerm {
    std::vector<int> alpha;
    std::vector<int> beta;
    double coef = 0.0;

    int degree() const;
};

namespace family {
struct Rbf { double sigma; };
struct Sociability {};
struct LogisticDistance { double alpha; Norm norm; };
struct LogisticBilinear { double alpha; };
struct ProbitBilinear { double alpha; std::vector<double> lambda; };
struct Polynomial {
    std::vector<PolyTerm> table;  // full symmetric table, as supplied
    // Unordered pairs {alpha, beta} with alpha <= beta; evaluation sums
    // each pair symmetrically so f(x,y) and f(y,x) agree bit for bit.
    struct Pair { std::vector<int> a, b; double coef; bool diagonal; };
    std::vector<Pair> pairs;
};
struct BlockwiseGraphon { Eigen::MatrixXd blocks; std::vector<double> boundaries; };
struct GeodesicRbf { double sigma; double radius; };
struct BranchingGraphon { double sigma; double height; };
}  // namespace family

/// A symmetric kernel f : Z x Z -> [0,1] on a box Z in R^d.
class KernelSpec {
public:
    using Params = std::variant<family::Rbf, family::Sociability, family::LogisticDistance,
                                family::LogisticBilinear, family::ProbitBilinear,
                                family::Polynomial, family::BlockwiseGraphon,
                                family::GeodesicRbf, family::BranchingGraphon>;

    static KernelSpec rbf(double sigma, Box domain);
    static KernelSpec sociability(Box domain);
    static KernelSpec logistic_distance(double alpha, Norm norm, Box domain);
    /// logistic(alpha + x1 + y1 + x2'y2) with x = (x1, x2); needs d >= 2.
    static KernelSpec logistic_bilinear(double alpha, Box domain);
    /// Phi(alpha + x' diag(lambda) y).
    static KernelSpec probit_bilinear(double alpha, std::vector<double> lambda, Box domain);
    /// Validates table symmetry and, by grid scan, that values stay in [0,1].
    static KernelSpec polynomial(std::vector<PolyTerm> table, Box domain);
    /// f == value on the domain (degree-zero polynomial).
    static KernelSpec constant(double value, Box domain);
    /// Piecewise-constant graphon. Oracle-only: its latent support is discrete.
    static KernelSpec blockwise_graphon(Eigen::MatrixXd blocks, std::vector<double> boundaries);
    /// exp(-d_circ(x,y)^2 / (2 sigma^2)) for angles on [0, 2pi].
    static KernelSpec geodesic_rbf(double sigma, double radius = 1.0);
    /// height * exp(-|psi(x) - psi(y)|^2 / (2 sigma^2)) where psi sends
    /// [0,1] onto a Y-shaped curve in the plane (trunk, then two arms).
    static KernelSpec branching_graphon(double sigma, double height = 0.9);

    static KernelSpec from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

    /// Domain-checked evaluation.
    double operator()(Point x, Point y) const;
    /// Evaluation without the domain check (hot loops over validated points).
    double eval_unchecked(Point x, Point y) const;

    KernelFamily family() const;
    const Params& params() const { return params_; }
    const Box& domain() const { return domain_; }
    int latent_dim() const { return domain_.dim(); }
    bool oracle_only() const { return family() == KernelFamily::blockwise_graphon; }
    std::string name() const;

private:
    KernelSpec(Params params, Box domain);
    void validate_polynomial_range() const;

    Params params_;
    Box domain_;
};

std::string to_string(KernelFamily family);

/// f(x, y); throws ErrorCode::domain when either point leaves the domain.
double eval_kernel(const KernelSpec& spec, Point x, Point y);

/// Number of distinct monomials x^alpha in a polynomial kernel: an upper
/// bound on the rank of its integral operator.
std::size_t polynomial_rank_bound(const KernelSpec& spec);

/// Terms of total degree < k of the kernel's power series, unvalidated.
/// Polynomial kernels keep their own terms; sociability expands
/// 1 - exp(-2 x'y). Other families throw ErrorCode::unsupported.
std::vector<PolyTerm> series_terms(const KernelSpec& spec, int k);

/// The degree-truncated kernel f_k. Throws ErrorCode::range, naming the
/// violating point, when f_k leaves [0,1] on the domain.
KernelSpec truncate_analytic(const KernelSpec& spec, int k);

/// Named presets shipped with the library (see README for the list).
KernelSpec kernel_preset(const std::string& name);
std::vector<std::string> kernel_preset_names();

}  // namespace lpm
