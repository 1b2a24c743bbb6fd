#include "lpm/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace lpm {

namespace {

constexpr double kRangeTol = 1e-12;
constexpr int kRangeScanBudget = 256;  // per-axis resolution when d = 1

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }
double std_normal_cdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

double dot(Point x, Point y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double squared_distance(Point x, Point y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = x[i] - y[i];
        s += t * t;
    }
    return s;
}

double monomial(Point x, const std::vector<int>& alpha) {
    double v = 1.0;
    for (std::size_t i = 0; i < alpha.size(); ++i)
        for (int p = 0; p < alpha[i]; ++p) v *= x[i];
    return v;
}

double polynomial_value(const family::Polynomial& p, Point x, Point y) {
    double s = 0.0;
    for (const auto& t : p.pairs) {
        if (t.diagonal) {
            s += t.coef * (monomial(x, t.a) * monomial(y, t.a));
        } else {
            s += t.coef * (monomial(x, t.a) * monomial(y, t.b) + monomial(x, t.b) * monomial(y, t.a));
        }
    }
    return s;
}

std::string format_point(Point x) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ')';
    return os.str();
}

// Y-shaped embedding of [0,1]: trunk on [0,1/3], arms on (1/3,2/3] and (2/3,1].
std::array<double, 2> branch_curve(double z) {
    constexpr double c = std::numbers::sqrt2 / 2.0;
    if (z <= 1.0 / 3.0) return {0.0, 3.0 * z - 1.0};
    if (z <= 2.0 / 3.0) {
        const double t = 3.0 * z - 1.0;
        return {-c * t, c * t};
    }
    const double t = 3.0 * z - 2.0;
    return {c * t, c * t};
}

template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

family::Polynomial build_polynomial(std::vector<PolyTerm> table, int d) {
    std::map<std::pair<std::vector<int>, std::vector<int>>, double> coef;
    for (const auto& t : table) {
        require(static_cast<int>(t.alpha.size()) == d && static_cast<int>(t.beta.size()) == d,
                ErrorCode::parameter, "polynomial term multi-index length must equal latent_dim");
        for (int a : t.alpha) require(a >= 0, ErrorCode::parameter, "negative exponent");
        for (int b : t.beta) require(b >= 0, ErrorCode::parameter, "negative exponent");
        coef[{t.alpha, t.beta}] += t.coef;
    }
    family::Polynomial poly;
    for (const auto& [key, c] : coef) {
        const auto it = coef.find({key.second, key.first});
        const double mirrored = it == coef.end() ? 0.0 : it->second;
        require(c == mirrored, ErrorCode::parameter,
                "polynomial coefficient table is not symmetric: c(alpha,beta) != c(beta,alpha)");
        if (c == 0.0) continue;
        poly.table.push_back({key.first, key.second, c});
        if (key.first < key.second) {
            poly.pairs.push_back({key.first, key.second, c, false});
        } else if (key.first == key.second) {
            poly.pairs.push_back({key.first, key.second, c, true});
        }
    }
    return poly;
}

}  // namespace

bool Box::contains(Point x) const {
    if (static_cast<int>(x.size()) != dim()) return false;
    for (int i = 0; i < dim(); ++i)
        if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
    return true;
}

double Box::diameter() const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    return std::sqrt(s);
}

double Box::volume() const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= hi[i] - lo[i];
    return v;
}

int PolyTerm::degree() const {
    int s = 0;
    for (int a : alpha) s += a;
    for (int b : beta) s += b;
    return s;
}

KernelSpec::KernelSpec(Params params, Box domain) : params_(std::move(params)), domain_(std::move(domain)) {
    require(domain_.dim() >= 1 && domain_.lo.size() == domain_.hi.size(), ErrorCode::parameter,
            "kernel domain must be a box of dimension >= 1");
    for (int i = 0; i < domain_.dim(); ++i)
        require(domain_.lo[i] < domain_.hi[i], ErrorCode::parameter, "kernel domain has empty extent");
}

KernelSpec KernelSpec::rbf(double sigma, Box domain) {
    require(sigma > 0.0, ErrorCode::parameter, "rbf sigma must be positive");
    return KernelSpec(family::Rbf{sigma}, std::move(domain));
}

KernelSpec KernelSpec::sociability(Box domain) {
    for (double lo : domain.lo)
        require(lo >= 0.0, ErrorCode::parameter, "sociability kernel needs a non-negative domain");
    return KernelSpec(family::Sociability{}, std::move(domain));
}

KernelSpec KernelSpec::logistic_distance(double alpha, Norm norm, Box domain) {
    return KernelSpec(family::LogisticDistance{alpha, norm}, std::move(domain));
}

KernelSpec KernelSpec::logistic_bilinear(double alpha, Box domain) {
    require(domain.dim() >= 2, ErrorCode::parameter, "logistic_bilinear needs latent_dim >= 2");
    return KernelSpec(family::LogisticBilinear{alpha}, std::move(domain));
}

KernelSpec KernelSpec::probit_bilinear(double alpha, std::vector<double> lambda, Box domain) {
    require(static_cast<int>(lambda.size()) == domain.dim(), ErrorCode::parameter,
            "probit_bilinear lambda must have latent_dim entries");
    return KernelSpec(family::ProbitBilinear{alpha, std::move(lambda)}, std::move(domain));
}

KernelSpec KernelSpec::polynomial(std::vector<PolyTerm> table, Box domain) {
    const int d = domain.dim();
    KernelSpec spec(build_polynomial(std::move(table), d), std::move(domain));
    spec.validate_polynomial_range();
    return spec;
}

KernelSpec KernelSpec::constant(double value, Box domain) {
    const int d = domain.dim();
    std::vector<PolyTerm> table;
    if (value != 0.0) table.push_back({std::vector<int>(d, 0), std::vector<int>(d, 0), value});
    return polynomial(std::move(table), std::move(domain));
}

KernelSpec KernelSpec::blockwise_graphon(Eigen::MatrixXd blocks, std::vector<double> boundaries) {
    const auto k = static_cast<std::size_t>(blocks.rows());
    require(k >= 1 && blocks.cols() == blocks.rows(), ErrorCode::parameter, "block matrix must be square");
    require(boundaries.size() == k + 1, ErrorCode::parameter, "need one more boundary than blocks");
    require(std::is_sorted(boundaries.begin(), boundaries.end()) &&
                std::adjacent_find(boundaries.begin(), boundaries.end()) == boundaries.end(),
            ErrorCode::parameter, "block boundaries must be strictly increasing");
    require(blocks.isApprox(blocks.transpose(), 0.0), ErrorCode::parameter, "block matrix must be symmetric");
    require(blocks.minCoeff() >= 0.0 && blocks.maxCoeff() <= 1.0, ErrorCode::range,
            "block probabilities must lie in [0,1]");
    Box domain = Box::interval(boundaries.front(), boundaries.back());
    return KernelSpec(family::BlockwiseGraphon{std::move(blocks), std::move(boundaries)}, std::move(domain));
}

KernelSpec KernelSpec::geodesic_rbf(double sigma, double radius) {
    require(sigma > 0.0 && radius > 0.0, ErrorCode::parameter, "geodesic_rbf needs sigma, radius > 0");
    return KernelSpec(family::GeodesicRbf{sigma, radius}, Box::interval(0.0, 2.0 * std::numbers::pi));
}

KernelSpec KernelSpec::branching_graphon(double sigma, double height) {
    require(sigma > 0.0, ErrorCode::parameter, "branching_graphon sigma must be positive");
    require(height > 0.0 && height <= 1.0, ErrorCode::range, "branching_graphon height must lie in (0,1]");
    return KernelSpec(family::BranchingGraphon{sigma, height}, Box::interval(0.0, 1.0));
}

KernelFamily KernelSpec::family() const { return static_cast<KernelFamily>(params_.index()); }

std::string to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::rbf: return "rbf";
        case KernelFamily::sociability: return "sociability";
        case KernelFamily::logistic_distance: return "logistic_distance";
        case KernelFamily::logistic_bilinear: return "logistic_bilinear";
        case KernelFamily::probit_bilinear: return "probit_bilinear";
        case KernelFamily::polynomial: return "polynomial";
        case KernelFamily::blockwise_graphon: return "blockwise_graphon";
        case KernelFamily::geodesic_rbf: return "geodesic_rbf";
        case KernelFamily::branching_graphon: return "branching_graphon";
    }
    return "unknown";
}

std::string KernelSpec::name() const { return to_string(family()); }

double KernelSpec::eval_unchecked(Point x, Point y) const {
    const double v = std::visit(
        overloaded{
            [&](const family::Rbf& p) { return std::exp(-squared_distance(x, y) / (2.0 * p.sigma * p.sigma)); },
            [&](const family::Sociability&) { return -std::expm1(-2.0 * dot(x, y)); },
            [&](const family::LogisticDistance& p) {
                double dist = 0.0;
                switch (p.norm) {
                    case Norm::l2: dist = std::sqrt(squared_distance(x, y)); break;
                    case Norm::l1:
                        for (std::size_t i = 0; i < x.size(); ++i) dist += std::abs(x[i] - y[i]);
                        break;
                    case Norm::linf:
                        for (std::size_t i = 0; i < x.size(); ++i) dist = std::max(dist, std::abs(x[i] - y[i]));
                        break;
                }
                return logistic(p.alpha - dist);
            },
            [&](const family::LogisticBilinear& p) {
                return logistic(p.alpha + (x[0] + y[0]) + dot(x.subspan(1), y.subspan(1)));
            },
            [&](const family::ProbitBilinear& p) {
                double s = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * p.lambda[i] * y[i];
                return std_normal_cdf(p.alpha + s);
            },
            [&](const family::Polynomial& p) { return polynomial_value(p, x, y); },
            [&](const family::BlockwiseGraphon& p) {
                auto block = [&](double z) {
                    const auto it = std::upper_bound(p.boundaries.begin(), p.boundaries.end(), z);
                    const auto idx = static_cast<Eigen::Index>(it - p.boundaries.begin()) - 1;
                    return std::clamp<Eigen::Index>(idx, 0, p.blocks.rows() - 1);
                };
                return p.blocks(block(x[0]), block(y[0]));
            },
            [&](const family::GeodesicRbf& p) {
                const double a = std::abs(x[0] - y[0]);
                const double arc = p.radius * std::min(a, 2.0 * std::numbers::pi - a);
                return std::exp(-arc * arc / (2.0 * p.sigma * p.sigma));
            },
            [&](const family::BranchingGraphon& p) {
                const auto a = branch_curve(x[0]);
                const auto b = branch_curve(y[0]);
                const double dx = a[0] - b[0], dy = a[1] - b[1];
                return p.height * std::exp(-(dx * dx + dy * dy) / (2.0 * p.sigma * p.sigma));
            },
        },
        params_);
    return std::clamp(v, 0.0, 1.0);
}

double KernelSpec::operator()(Point x, Point y) const {
    if (!domain_.contains(x)) fail(ErrorCode::domain, "point " + format_point(x) + " outside kernel domain");
    if (!domain_.contains(y)) fail(ErrorCode::domain, "point " + format_point(y) + " outside kernel domain");
    return eval_unchecked(x, y);
}

double eval_kernel(const KernelSpec& spec, Point x, Point y) { return spec(x, y); }

void KernelSpec::validate_polynomial_range() const {
    const auto& poly = std::get<family::Polynomial>(params_);
    const int d = latent_dim();
    // Per-axis resolution r with r^(2d) <= 256^2 evaluations (256 when d = 1).
    int r = static_cast<int>(std::floor(std::pow(static_cast<double>(kRangeScanBudget), 1.0 / d) + 1e-9));
    r = std::max(r, 3);
    std::vector<std::vector<double>> axis(d);
    for (int i = 0; i < d; ++i) {
        axis[i].resize(r);
        for (int t = 0; t < r; ++t)
            axis[i][t] = domain_.lo[i] + (domain_.hi[i] - domain_.lo[i]) * t / (r - 1);
    }
    const long total = static_cast<long>(std::pow(r, d));
    std::vector<std::vector<double>> pts(total, std::vector<double>(d));
    for (long idx = 0; idx < total; ++idx) {
        long rem = idx;
        for (int i = 0; i < d; ++i) {
            pts[idx][i] = axis[i][rem % r];
            rem /= r;
        }
    }
    for (long a = 0; a < total; ++a) {
        for (long b = a; b < total; ++b) {
            const double s = polynomial_value(poly, pts[a], pts[b]);
            if (s < -kRangeTol || s > 1.0 + kRangeTol) {
                std::ostringstream os;
                os.precision(17);
                os << "polynomial kernel leaves [0,1]: f" << format_point(pts[a]) << format_point(pts[b])
                   << " = " << s;
                fail(ErrorCode::range, os.str());
            }
        }
    }
}

std::size_t polynomial_rank_bound(const KernelSpec& spec) {
    const auto* poly = std::get_if<family::Polynomial>(&spec.params());
    if (!poly) fail(ErrorCode::unsupported, "polynomial_rank_bound needs a polynomial kernel, got " + spec.name());
    std::set<std::vector<int>> monomials;
    for (const auto& t : poly->table) monomials.insert(t.alpha);
    return monomials.size();
}

std::vector<PolyTerm> series_terms(const KernelSpec& spec, int k) {
    require(k >= 1, ErrorCode::parameter, "truncation order k must be >= 1");
    const int d = spec.latent_dim();
    if (const auto* poly = std::get_if<family::Polynomial>(&spec.params())) {
        std::vector<PolyTerm> kept;
        for (const auto& t : poly->table)
            if (t.degree() < k) kept.push_back(t);
        return kept;
    }
    if (std::holds_alternative<family::Sociability>(spec.params())) {
        // 1 - exp(-2s) = sum_{m>=1} (-1)^{m+1} 2^m s^m / m!, s = x'y,
        // s^m = sum_{|g|=m} m!/g! x^g y^g. Total degree of each term is 2m.
        std::vector<PolyTerm> terms;
        for (int m = 1; 2 * m < k; ++m) {
            const double series = (m % 2 ? 1.0 : -1.0) * std::pow(2.0, m) / std::tgamma(m + 1.0);
            std::vector<int> g(d, 0);
            // enumerate compositions of m into d non-negative parts
            std::function<void(int, int)> rec = [&](int pos, int left) {
                if (pos == d - 1) {
                    g[pos] = left;
                    double multinomial = std::tgamma(m + 1.0);
                    for (int gi : g) multinomial /= std::tgamma(gi + 1.0);
                    terms.push_back({g, g, series * multinomial});
                    return;
                }
                for (int v = left; v >= 0; --v) {
                    g[pos] = v;
                    rec(pos + 1, left - v);
                }
            };
            rec(0, m);
        }
        return terms;
    }
    fail(ErrorCode::unsupported, "no registered power series for kernel family " + spec.name());
}

KernelSpec truncate_analytic(const KernelSpec& spec, int k) {
    require(k >= 2, ErrorCode::parameter, "truncate_analytic needs k >= 2");
    return KernelSpec::polynomial(series_terms(spec, k), spec.domain());
}

// ---------------------------------------------------------------- JSON

namespace {

Box box_from_json(const nlohmann::json& j) {
    return Box{j.at("lo").get<std::vector<double>>(), j.at("hi").get<std::vector<double>>()};
}

nlohmann::json box_to_json(const Box& b) { return {{"lo", b.lo}, {"hi", b.hi}}; }

Norm norm_from_string(const std::string& s) {
    if (s == "l1") return Norm::l1;
    if (s == "l2") return Norm::l2;
    if (s == "linf") return Norm::linf;
    fail(ErrorCode::config, "unknown norm '" + s + "'");
}

const char* norm_name(Norm n) {
    switch (n) {
        case Norm::l1: return "l1";
        case Norm::l2: return "l2";
        case Norm::linf: return "linf";
    }
    return "l2";
}

}  // namespace

KernelSpec KernelSpec::from_json(const nlohmann::json& doc) {
    try {
        if (doc.is_string()) return kernel_preset(doc.get<std::string>());
        if (doc.contains("preset")) return kernel_preset(doc.at("preset").get<std::string>());
        const auto fam = doc.at("family").get<std::string>();
        const nlohmann::json params = doc.value("params", nlohmann::json::object());
        auto domain = [&]() -> Box {
            if (doc.contains("domain")) return box_from_json(doc.at("domain"));
            const int d = doc.value("latent_dim", 1);
            return Box::cube(d, 0.0, 1.0);
        };
        KernelSpec spec = [&]() -> KernelSpec {
            if (fam == "rbf") return rbf(params.at("sigma").get<double>(), domain());
            if (fam == "sociability") return sociability(domain());
            if (fam == "logistic_distance")
                return logistic_distance(params.at("alpha").get<double>(),
                                         norm_from_string(params.value("norm", std::string("l2"))), domain());
            if (fam == "logistic_bilinear") return logistic_bilinear(params.at("alpha").get<double>(), domain());
            if (fam == "probit_bilinear")
                return probit_bilinear(params.at("alpha").get<double>(),
                                       params.at("lambda").get<std::vector<double>>(), domain());
            if (fam == "polynomial") {
                std::vector<PolyTerm> table;
                for (const auto& t : params.at("terms"))
                    table.push_back({t.at("alpha").get<std::vector<int>>(), t.at("beta").get<std::vector<int>>(),
                                     t.at("coef").get<double>()});
                return polynomial(std::move(table), domain());
            }
            if (fam == "blockwise_graphon") {
                const auto rows = params.at("B").get<std::vector<std::vector<double>>>();
                Eigen::MatrixXd b(rows.size(), rows.size());
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    require(rows[i].size() == rows.size(), ErrorCode::config, "B must be square");
                    for (std::size_t j = 0; j < rows.size(); ++j) b(i, j) = rows[i][j];
                }
                return blockwise_graphon(b, params.at("boundaries").get<std::vector<double>>());
            }
            if (fam == "geodesic_rbf")
                return geodesic_rbf(params.at("sigma").get<double>(), params.value("radius", 1.0));
            if (fam == "branching_graphon")
                return branching_graphon(params.at("sigma").get<double>(), params.value("height", 0.9));
            fail(ErrorCode::config, "unknown kernel family '" + fam + "'");
        }();
        if (doc.contains("latent_dim"))
            require(doc.at("latent_dim").get<int>() == spec.latent_dim(), ErrorCode::config,
                    "latent_dim disagrees with domain dimension");
        return spec;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::config, std::string("kernel JSON: ") + e.what());
    }
}

nlohmann::json KernelSpec::to_json() const {
    nlohmann::json params = std::visit(
        overloaded{
            [](const family::Rbf& p) { return nlohmann::json{{"sigma", p.sigma}}; },
            [](const family::Sociability&) { return nlohmann::json::object(); },
            [](const family::LogisticDistance& p) {
                return nlohmann::json{{"alpha", p.alpha}, {"norm", norm_name(p.norm)}};
            },
            [](const family::LogisticBilinear& p) { return nlohmann::json{{"alpha", p.alpha}}; },
            [](const family::ProbitBilinear& p) { return nlohmann::json{{"alpha", p.alpha}, {"lambda", p.lambda}}; },
            [](const family::Polynomial& p) {
                nlohmann::json terms = nlohmann::json::array();
                for (const auto& t : p.table) terms.push_back({{"alpha", t.alpha}, {"beta", t.beta}, {"coef", t.coef}});
                return nlohmann::json{{"terms", terms}};
            },
            [](const family::BlockwiseGraphon& p) {
                std::vector<std::vector<double>> rows(p.blocks.rows());
                for (Eigen::Index i = 0; i < p.blocks.rows(); ++i)
                    for (Eigen::Index j = 0; j < p.blocks.cols(); ++j) rows[i].push_back(p.blocks(i, j));
                return nlohmann::json{{"B", rows}, {"boundaries", p.boundaries}};
            },
            [](const family::GeodesicRbf& p) { return nlohmann::json{{"sigma", p.sigma}, {"radius", p.radius}}; },
            [](const family::BranchingGraphon& p) {
                return nlohmann::json{{"sigma", p.sigma}, {"height", p.height}};
            },
        },
        params_);
    return {{"family", name()}, {"params", params}, {"domain", box_to_json(domain_)}, {"latent_dim", latent_dim()}};
}

// -------------------------------------------------------------- presets

KernelSpec kernel_preset(const std::string& name) {
    if (name == "rbf") return KernelSpec::rbf(0.5, Box::interval(0.0, 1.0));
    if (name == "sociability") return KernelSpec::sociability(Box::interval(0.0, 3.0));
    if (name == "two_block") {
        Eigen::MatrixXd b(2, 2);
        b << 0.2, 0.8, 0.8, 0.2;
        return KernelSpec::blockwise_graphon(b, {0.0, 0.5, 1.0});
    }
    if (name == "xy") return KernelSpec::polynomial({{{1}, {1}, 1.0}}, Box::interval(0.0, 1.0));
    if (name == "xy_rate") return KernelSpec::polynomial({{{1}, {1}, 1.0}}, Box::interval(0.1, 0.9));
    if (name == "circle_rbf") return KernelSpec::geodesic_rbf(0.3, 1.0);
    if (name == "branching") return KernelSpec::branching_graphon(0.25, 0.9);
    if (name == "logistic_distance") return KernelSpec::logistic_distance(1.0, Norm::l2, Box::cube(2, 0.0, 1.0));
    if (name == "logistic_bilinear") return KernelSpec::logistic_bilinear(-1.0, Box::cube(2, 0.0, 1.0));
    if (name == "probit_bilinear") return KernelSpec::probit_bilinear(0.0, {1.0, -1.0}, Box::cube(2, 0.0, 1.0));
    fail(ErrorCode::config, "unknown kernel preset '" + name + "'");
}

std::vector<std::string> kernel_preset_names() {
    return {"rbf", "sociability", "two_block", "xy", "xy_rate", "circle_rbf",
            "branching", "logistic_distance", "logistic_bilinear", "probit_bilinear"};
}

}  // namespace lpm
