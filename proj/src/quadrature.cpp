#include "nodal/quadrature.hpp"

#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "nodal/errors.hpp"
#include "nodal/parallel.hpp"
#include "nodal/summation.hpp"

namespace nodal {
namespace {

void require_min(int value, int minimum, const char* what) {
    if (value < minimum) throw ConfigError(fmt::format("{} must be >= {}, got {}", what, minimum, value));
}

QuadratureRule midpoint_tensor(int dim, int n) {
    QuadratureRule rule;
    rule.dim = dim;
    rule.resolution = {n};
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(n);
    const double w = std::pow(static_cast<double>(n), -dim);
    rule.nodes.reserve(total);
    rule.weights.assign(total, w);
    for (std::size_t flat = 0; flat < total; ++flat) {
        Point p(dim);
        std::size_t rem = flat;
        for (int d = dim - 1; d >= 0; --d) {
            p[d] = (static_cast<double>(rem % n) + 0.5) / n;
            rem /= n;
        }
        rule.nodes.push_back(p);
    }
    return rule;
}

}  // namespace

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    require_min(n, 1, "Gauss-Legendre order");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);

    // returns P_n(x) and P_n'(x) via the three-term recurrence
    auto legendre = [n](double x) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
    };

    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, dp] = legendre(x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = legendre(x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
}

QuadratureRule torus_rule(int dim, int n) {
    if (dim < 1 || dim > 3) throw ConfigError(fmt::format("torus rule dimension must be 1..3, got {}", dim));
    require_min(n, 8, "torus resolution N");
    auto rule = midpoint_tensor(dim, n);
    rule.label = fmt::format("torus{}-uniform-{}", dim, n);
    return rule;
}

QuadratureRule box_rule(int dim, int n) {
    if (dim < 1 || dim > 2) throw ConfigError(fmt::format("box rule dimension must be 1..2, got {}", dim));
    require_min(n, 8, "box resolution N");
    auto rule = midpoint_tensor(dim, n);
    rule.label = fmt::format("box{}-midpoint-{}", dim, n);
    return rule;
}

QuadratureRule sphere_rule(int n_theta, int n_phi) {
    require_min(n_theta, 8, "sphere N_theta");
    require_min(n_phi, 16, "sphere N_phi");
    std::vector<double> u, wu;
    gauss_legendre(n_theta, u, wu);

    QuadratureRule rule;
    rule.dim = 2;
    rule.resolution = {n_theta, n_phi};
    rule.label = fmt::format("sphere2-gauss-{}x{}", n_theta, n_phi);
    rule.nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
    rule.weights.reserve(static_cast<std::size_t>(n_theta) * n_phi);
    const double wphi = kTwoPi / n_phi;
    // theta ascending means u descending
    for (int i = n_theta - 1; i >= 0; --i) {
        const double theta = std::acos(u[i]);
        for (int j = 0; j < n_phi; ++j) {
            Point p(2);
            p << theta, (j + 0.5) * wphi;
            rule.nodes.push_back(p);
            rule.weights.push_back(wu[i] * wphi);
        }
    }
    return rule;
}

std::vector<FaceRule> box_face_rules(int dim, int n) {
    if (dim < 1 || dim > 2) throw ConfigError(fmt::format("box face rules dimension must be 1..2, got {}", dim));
    require_min(n, 8, "box resolution N");
    static constexpr const char* kAxisNames[] = {"x", "y"};

    std::vector<FaceRule> faces;
    for (int axis = 0; axis < dim; ++axis) {
        for (int side : {-1, 1}) {
            FaceRule face;
            face.axis = axis;
            face.side = side;
            face.id = fmt::format("{}={}", kAxisNames[axis], side < 0 ? 0 : 1);
            face.normal = Vector::Zero(dim);
            face.normal[axis] = side;
            face.rule.dim = dim;
            face.rule.resolution = {dim == 1 ? 1 : n};
            face.rule.label = fmt::format("box{}-face-{}-{}", dim, face.id, dim == 1 ? 1 : n);
            const double coord = side < 0 ? 0.0 : 1.0;
            if (dim == 1) {
                Point p(1);
                p << coord;
                face.rule.nodes.push_back(p);
                face.rule.weights.push_back(1.0);
            } else {
                const int other = 1 - axis;
                for (int i = 0; i < n; ++i) {
                    Point p(2);
                    p[axis] = coord;
                    p[other] = (i + 0.5) / n;
                    face.rule.nodes.push_back(p);
                    face.rule.weights.push_back(1.0 / n);
                }
            }
            faces.push_back(std::move(face));
        }
    }
    return faces;
}

QuadratureRule rule_for(const Manifold& m, const std::vector<int>& resolution) {
    switch (m.kind()) {
        case ManifoldKind::FlatTorus:
            if (resolution.size() != 1) throw ConfigError("torus resolution takes a single N");
            return torus_rule(m.dim(), resolution[0]);
        case ManifoldKind::FlatBox:
            if (resolution.size() != 1) throw ConfigError("box resolution takes a single N");
            return box_rule(m.dim(), resolution[0]);
        case ManifoldKind::UnitSphere2:
            if (resolution.size() != 2) throw ConfigError("sphere resolution takes N_theta x N_phi");
            return sphere_rule(resolution[0], resolution[1]);
    }
    throw ConfigError("unknown manifold kind");
}

double integrate(std::span<const double> values, const QuadratureRule& rule) {
    if (values.size() != rule.weights.size()) {
        throw UsageError(fmt::format("integrate: {} values for a rule with {} nodes", values.size(), rule.weights.size()));
    }
    const auto partials = map_chunks<CompensatedSum>(values.size(), kChunkSize, [&](std::size_t begin, std::size_t end) {
        CompensatedSum s;
        for (std::size_t i = begin; i < end; ++i) s.add(values[i] * rule.weights[i]);
        return s;
    });
    CompensatedSum total;
    for (const auto& p : partials) total.merge(p);
    return total.value();
}

}  // namespace nodal
