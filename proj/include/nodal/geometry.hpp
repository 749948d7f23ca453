#pragma once

#include <array>
#include <string>
#include <string_view>

#include "nodal/linalg.hpp"

namespace nodal {

enum class ManifoldKind { FlatTorus, UnitSphere2, FlatBox };

/// One of the hard-coded model manifolds.
///
/// Chart conventions:
///  - FlatTorus(n): [0,1)^n with periodic identification, identity metric.
///  - UnitSphere2:  (theta, phi) in (0,pi) x [0,2pi), metric diag(1, sin^2 theta).
///  - FlatBox(n):   [0,1]^n with identity metric; faces {x_i = 0} and {x_i = 1}.
class Manifold {
public:
    static Manifold torus(int dim);
    static Manifold sphere2();
    static Manifold box(int dim);

    /// Accepts "torus1", "torus2", "torus3", "sphere2", "box1", "box2".
    static Manifold parse(std::string_view name);

    ManifoldKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return dim_; }
    std::string name() const;

    bool is_flat() const noexcept { return kind_ != ManifoldKind::UnitSphere2; }
    bool has_boundary() const noexcept { return kind_ == ManifoldKind::FlatBox; }

    /// Total Riemannian volume: 1 for tori and boxes, 4 pi for the sphere.
    double volume() const noexcept;

    /// Throws DomainError unless p lies in the chart domain.
    void check_point(const Point& p) const;

    friend bool operator==(const Manifold&, const Manifold&) = default;

private:
    Manifold(ManifoldKind kind, int dim) : kind_(kind), dim_(dim) {}

    ManifoldKind kind_;
    int dim_;
};

struct MetricAtPoint {
    Matrix g;
    Matrix g_inv;
    double sqrt_det = 1.0;
};

/// Christoffel symbols of the second kind: gamma[k](i, j) = Gamma^k_{ij}.
struct ChristoffelAtPoint {
    std::array<Matrix, kMaxDim> gamma;
};

struct RicciAtPoint {
    Matrix ric;
};

MetricAtPoint metric_at(const Manifold& m, const Point& p);
ChristoffelAtPoint christoffel_at(const Manifold& m, const Point& p);
RicciAtPoint ricci_at(const Manifold& m, const Point& p);

/// The musical isomorphism: returns g_inv * covector.
Vector raise_index(const MetricAtPoint& metric, const Vector& covector);

}  // namespace nodal
