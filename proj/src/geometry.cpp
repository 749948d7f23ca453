#include "nodal/geometry.hpp"

#include <cmath>

#include <fmt/format.h>

#include "nodal/errors.hpp"

namespace nodal {

Manifold Manifold::torus(int dim) {
    if (dim < 1 || dim > 3) throw ConfigError(fmt::format("torus dimension must be 1..3, got {}", dim));
    return {ManifoldKind::FlatTorus, dim};
}

Manifold Manifold::sphere2() { return {ManifoldKind::UnitSphere2, 2}; }

Manifold Manifold::box(int dim) {
    if (dim < 1 || dim > 2) throw ConfigError(fmt::format("box dimension must be 1..2, got {}", dim));
    return {ManifoldKind::FlatBox, dim};
}

Manifold Manifold::parse(std::string_view name) {
    if (name == "torus1") return torus(1);
    if (name == "torus2") return torus(2);
    if (name == "torus3") return torus(3);
    if (name == "sphere2") return sphere2();
    if (name == "box1") return box(1);
    if (name == "box2") return box(2);
    throw ConfigError(fmt::format("unknown manifold '{}'", name));
}

std::string Manifold::name() const {
    switch (kind_) {
        case ManifoldKind::FlatTorus: return fmt::format("torus{}", dim_);
        case ManifoldKind::UnitSphere2: return "sphere2";
        case ManifoldKind::FlatBox: return fmt::format("box{}", dim_);
    }
    return "unknown";
}

double Manifold::volume() const noexcept {
    return kind_ == ManifoldKind::UnitSphere2 ? 2.0 * kTwoPi : 1.0;
}

void Manifold::check_point(const Point& p) const {
    if (p.size() != dim_) {
        throw DomainError(fmt::format("{}: chart point has {} coordinates, expected {}", name(), p.size(), dim_));
    }
    for (int i = 0; i < dim_; ++i) {
        if (!std::isfinite(p[i])) throw DomainError(fmt::format("{}: non-finite chart coordinate", name()));
    }
    switch (kind_) {
        case ManifoldKind::FlatTorus:
            // any real coordinate is a representative of a torus point
            return;
        case ManifoldKind::UnitSphere2:
            if (!(p[0] > 0.0 && p[0] < kPi)) {
                throw DomainError(fmt::format("sphere2: theta = {} outside (0, pi)", p[0]));
            }
            return;
        case ManifoldKind::FlatBox:
            for (int i = 0; i < dim_; ++i) {
                if (p[i] < 0.0 || p[i] > 1.0) {
                    throw DomainError(fmt::format("{}: coordinate {} = {} outside [0, 1]", name(), i, p[i]));
                }
            }
            return;
    }
}

MetricAtPoint metric_at(const Manifold& m, const Point& p) {
    m.check_point(p);
    const int n = m.dim();
    MetricAtPoint out;
    if (m.is_flat()) {
        out.g = Matrix::Identity(n, n);
        out.g_inv = Matrix::Identity(n, n);
        out.sqrt_det = 1.0;
        return out;
    }
    const double s = std::sin(p[0]);
    out.g = Matrix::Zero(2, 2);
    out.g(0, 0) = 1.0;
    out.g(1, 1) = s * s;
    out.g_inv = Matrix::Zero(2, 2);
    out.g_inv(0, 0) = 1.0;
    out.g_inv(1, 1) = 1.0 / (s * s);
    out.sqrt_det = s;
    return out;
}

ChristoffelAtPoint christoffel_at(const Manifold& m, const Point& p) {
    m.check_point(p);
    const int n = m.dim();
    ChristoffelAtPoint out;
    for (int k = 0; k < n; ++k) out.gamma[k] = Matrix::Zero(n, n);
    if (m.is_flat()) return out;

    const double s = std::sin(p[0]);
    const double c = std::cos(p[0]);
    // Gamma^theta_{phi phi} = -sin cos, Gamma^phi_{theta phi} = cot
    out.gamma[0](1, 1) = -s * c;
    out.gamma[1](0, 1) = c / s;
    out.gamma[1](1, 0) = c / s;
    return out;
}

RicciAtPoint ricci_at(const Manifold& m, const Point& p) {
    m.check_point(p);
    if (m.is_flat()) return {Matrix::Zero(m.dim(), m.dim())};
    // unit round sphere: Ric = g
    return {metric_at(m, p).g};
}

Vector raise_index(const MetricAtPoint& metric, const Vector& covector) {
    if (covector.size() != metric.g_inv.rows()) {
        throw UsageError(fmt::format("raise_index: covector has {} entries, metric is {}x{}", covector.size(),
                                     metric.g_inv.rows(), metric.g_inv.cols()));
    }
    return metric.g_inv * covector;
}

}  // namespace nodal
