#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nodal/fields.hpp"
#include "nodal/quadrature.hpp"

namespace nodal {

/// Below this gradient norm the direction-dependent ratio
/// Hess(f)(grad f, grad f) / |grad f|^2 is replaced by its directional
/// average laplacian/n, and arctan(x)/x, tanh(x)/x use 1 - x^2/3.
inline constexpr double kGradGuard = 1e-7;

/// |grad f / f| above which cosh^-2 is taken as 0.
inline constexpr double kCoshCutoff = 350.0;

/// A profile g with g(+inf) = 1 and integrable g'. Used by the g1/g2 families.
/// The g2 small-argument series assumes g(0) = 0.
struct GSpec {
    std::string name;
    std::function<double(double)> g;
    std::function<double(double)> g_prime;
};

/// A profile G with G(x) ~ 1/x at +inf. Used by the general family.
struct GBigSpec {
    std::string name;
    std::function<double(double)> G;
    std::function<double(double)> G_prime;
};

/// Builtin profiles: "one", "tanh", "arctan" (meaning (2/pi) arctan).
GSpec builtin_g(std::string_view name);
/// Builtin profiles: "invsqrt" (1/sqrt(1+x^2)), "arctan" ((2/pi) arctan(x)/x).
GBigSpec builtin_G(std::string_view name);

enum class EstimatorKind { Algebraic, Arctan, Tanh, GeneralG, G1, G2, Lipschitz, Corner };

/// A volume formula. Integrands return the bracketed expression only; the
/// outer factor (1/2, or 1/pi for arctan) is applied by estimate().
class Estimator {
public:
    static Estimator algebraic();
    static Estimator arctan();
    static Estimator tanh();
    static Estimator lipschitz(bool include_ricci = true);
    static Estimator general(GBigSpec G);
    static Estimator g1(GSpec g);
    static Estimator g2(GSpec g);
    static Estimator corner();

    /// "algebraic", "arctan", "tanh", "lipschitz", "g1:<g>", "g2:<g>", "G:<G>",
    /// "corner", plus the diagnostic "lipschitz:noricci" (Ricci term dropped).
    static Estimator parse(std::string_view name);

    /// Every name accepted on a closed manifold, in canonical order.
    static std::vector<std::string> closed_manifold_names();

    EstimatorKind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }
    double prefactor() const noexcept;
    double integrand(const CovariantJet2& j) const;

private:
    Estimator(EstimatorKind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

    EstimatorKind kind_;
    std::string name_;
    GSpec g_;
    GBigSpec G_;
    bool include_ricci_ = true;
};

double integrand_algebraic(const CovariantJet2& j);
double integrand_arctan(const CovariantJet2& j);
double integrand_tanh(const CovariantJet2& j);
double integrand_general_G(const GBigSpec& spec, const CovariantJet2& j);
double integrand_g1(const GSpec& spec, const CovariantJet2& j);
double integrand_g2(const GSpec& spec, const CovariantJet2& j);
/// Continuous integrand obtained from the algebraic one by integrating the
/// sign-discontinuous part by parts. include_ricci = false drops the curvature term.
double integrand_lipschitz(const CovariantJet2& j, bool include_ricci = true);

struct EstimateReport {
    std::string estimator;
    std::string manifold;
    std::string rule;
    std::vector<int> resolution;
    double value = 0.0;
    double min_eta = 0.0;
    double integrand_min = 0.0;
    double integrand_max = 0.0;
    std::size_t node_count = 0;
    std::size_t zero_nodes = 0;  // nodes with f == 0 exactly, integrand taken as 0
    double runtime_ms = 0.0;
    double min_face_eta = std::numeric_limits<double>::quiet_NaN();  // corner formula only
};

/// Evaluates the jets once per node and integrates every estimator.
/// Rejects degenerate fields (DegenerateFieldError) using a vertex scan at the
/// rule resolution together with the eta values at the rule nodes. A non-finite
/// integrand raises NumericalError naming the node. Results do not depend on
/// the worker count.
std::vector<EstimateReport> estimate_many(const ScalarField& field, std::span<const Estimator> estimators,
                                          const QuadratureRule& rule);

EstimateReport estimate(const ScalarField& field, const Estimator& est, const QuadratureRule& rule);
EstimateReport estimate(const FieldSpec& spec, const Manifold& m, const Estimator& est, const QuadratureRule& rule);

/// Boundary-corrected formula on the flat box: half of the outward flux of
/// sigma grad f / eta through the faces plus the interior algebraic integrand.
/// Requires the zero set to cross faces transversally and to avoid corners;
/// otherwise throws DegenerateFieldError naming the face.
EstimateReport estimate_corner(const ScalarField& field, int n);

/// Dispatches to estimate_many or estimate_corner. Resolution is {N} or {N_theta, N_phi}.
std::vector<EstimateReport> run_estimators(const ScalarField& field, std::span<const Estimator> estimators,
                                           const std::vector<int>& resolution);

}  // namespace nodal
