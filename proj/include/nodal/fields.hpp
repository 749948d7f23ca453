#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "nodal/geometry.hpp"
#include "nodal/linalg.hpp"

namespace nodal {

/// f(x) = a cos(2 pi k.x) + b sin(2 pi k.x). On tori k must be integral;
/// on boxes any real frequency is allowed.
struct TrigTerm {
    Vector k;
    double a = 0.0;
    double b = 0.0;
};

struct TrigPolynomial {
    int dim = 1;
    std::vector<TrigTerm> terms;
};

/// c * Y_l^m on the unit sphere, unnormalized real convention:
///   m = 0: P_l(cos theta)
///   m > 0: cos(m phi)   P_l^m(cos theta)
///   m < 0: sin(|m| phi) P_l^|m|(cos theta)
/// with P_l^m(u) = (1 - u^2)^(m/2) d^m/du^m P_l(u) (no Condon-Shortley phase).
struct HarmonicTerm {
    int l = 0;
    int m = 0;
    double c = 0.0;
};

inline constexpr int kMaxHarmonicDegree = 6;

struct SphericalHarmonicSum {
    std::vector<HarmonicTerm> terms;
};

/// Seeded pseudo-Gaussian trigonometric polynomial; see expand_random().
struct RandomTrig {
    int dim = 2;
    int max_freq = 1;
    std::uint64_t seed = 0;
    double scale = 1.0;
};

/// c * x_1^e_1 * ... * x_n^e_n. Only meaningful on boxes (not periodic).
struct PolyTerm {
    std::array<int, kMaxDim> exponents{};
    double c = 0.0;
};

struct Polynomial {
    int dim = 1;
    std::vector<PolyTerm> terms;
};

using FieldSpec = std::variant<TrigPolynomial, SphericalHarmonicSum, RandomTrig, Polynomial>;

/// Raw chart derivatives.
struct ChartJet2 {
    double f = 0.0;
    Vector df;
    Matrix d2f;
};

/// Every quantity that appears in the volume integrands, at one point.
struct CovariantJet2 {
    int dim = 0;
    double f = 0.0;
    Vector grad;           // raised index
    double grad_norm = 0;  // metric norm of grad f
    Matrix hess;           // covariant Hessian, lower indices
    double laplacian = 0;  // g^{ij} H_ij
    double eta = 0;        // sqrt(f^2 + |grad f|^2)
    int sigma = 0;         // sign of f, 0 on the zero set
    double hess_qf = 0;    // Hess(f)(grad f, grad f)
    double hess_hs_sq = 0; // Hilbert-Schmidt norm squared
    Vector nabla_grad;     // nabla_{grad f} grad f, raised index
    double hess_grad_nabla = 0;  // Hess(f)(grad f, nabla_{grad f} grad f) = |nabla_grad|^2
    double ric_qf = 0;     // Ric(grad f, grad f)
};

/// Deterministic expansion into a trigonometric polynomial.
///
/// Frequencies: every k in [-max_freq, max_freq]^dim with k != 0 whose first
/// nonzero component is positive, in lexicographic order (first axis slowest).
///
/// Per frequency, the generator is seeded as
///     h = splitmix64(seed); for each component k_d: h = splitmix64(h ^ uint64(int64(k_d)))
///     state = h (or 0x9E3779B97F4A7C15 if h == 0)
/// and advanced with xorshift64*:
///     x ^= x >> 12; x ^= x << 25; x ^= x >> 27; return x * 0x2545F4914F6CDD1D
/// Two draws give u1 = ((r1 >> 11) + 1) * 2^-53 in (0,1] and u2 = (r2 >> 11) * 2^-53,
/// then Box-Muller: a = scale * sqrt(-2 ln u1) cos(2 pi u2), b = scale * sqrt(-2 ln u1) sin(2 pi u2).
TrigPolynomial expand_random(const RandomTrig& spec);

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// A field bound to a manifold, with the random family already expanded.
/// Immutable; all methods are safe to call concurrently.
class ScalarField {
public:
    /// Throws ConfigError on a family/manifold or dimension mismatch.
    ScalarField(FieldSpec spec, Manifold manifold);

    const Manifold& manifold() const noexcept { return manifold_; }
    const FieldSpec& spec() const noexcept { return spec_; }

    /// Plain value. On the sphere the poles are accepted (theta in [0, pi]).
    double value(const Point& p) const;

    ChartJet2 chart_jet(const Point& p) const;

    /// chart_jet plus metric, Christoffel and Ricci data at the same point.
    CovariantJet2 covariant_jet(const Point& p) const;

    /// Values on a tensor grid given per-axis coordinates. Output is row-major
    /// with the last axis fastest.
    std::vector<double> sample_grid(const std::vector<std::vector<double>>& axes) const;

private:
    struct HarmonicTable {
        int m = 0;
        double c = 0.0;
        // d^m P_l / du^m and its first two u-derivatives, ascending coefficients
        std::vector<double> q, dq, d2q;
    };

    ChartJet2 trig_jet(const TrigPolynomial& poly, const Point& p) const;
    ChartJet2 harmonic_jet(const Point& p) const;
    ChartJet2 poly_jet(const Polynomial& poly, const Point& p) const;

    FieldSpec spec_;
    Manifold manifold_;
    std::variant<TrigPolynomial, std::vector<HarmonicTable>, Polynomial> impl_;
};

ChartJet2 eval_chart_jet(const FieldSpec& spec, const Manifold& m, const Point& p);

CovariantJet2 covariant_jet(const ChartJet2& chart, const MetricAtPoint& metric, const ChristoffelAtPoint& gamma,
                            const RicciAtPoint& ric);

struct ScanResult {
    double min_eta = 0.0;
    double sup_abs = 0.0;  // max |f| over the scan grid
    Point argmin;

    /// Rejection threshold: 1e-6 times the sup-norm estimate.
    double threshold() const noexcept { return 1e-6 * sup_abs; }
    bool degenerate() const noexcept { return min_eta <= threshold(); }
};

/// Vertex grid scan of eta = sqrt(f^2 + |grad f|^2).
///   torus: i/R for i in [0, R) per axis
///   box:   i/R for i in [0, R] per axis
///   sphere: theta = j pi/R for j in [1, R), phi = k pi/R for k in [0, 2R)
/// Throws ConfigError if resolution < 8.
ScanResult scan_nondegeneracy(const ScalarField& field, int resolution);

/// Minimum of eta over the scan grid.
double nondegeneracy_scan(const FieldSpec& spec, const Manifold& m, int resolution);

/// Throws DegenerateFieldError if the scan rejects the field.
void require_nondegenerate(const ScanResult& scan, const Manifold& m);

}  // namespace nodal
