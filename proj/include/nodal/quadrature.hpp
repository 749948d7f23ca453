#pragma once

#include <span>
#include <string>
#include <vector>

#include "nodal/geometry.hpp"
#include "nodal/linalg.hpp"

namespace nodal {

/// Nodes and positive weights; weights already include the volume element.
/// Node order is canonical: tensor index with the last axis fastest.
struct QuadratureRule {
    int dim = 0;
    std::vector<Point> nodes;
    std::vector<double> weights;
    std::string label;
    std::vector<int> resolution;

    std::size_t size() const noexcept { return nodes.size(); }
};

/// Midpoint rule on [0,1)^dim at offsets (i + 1/2)/N, weight N^-dim.
QuadratureRule torus_rule(int dim, int n);

/// Gauss-Legendre in u = cos(theta) times uniform phi = (j + 1/2) 2pi/N_phi.
/// Theta ascends (u descends), phi fastest. No node sits at a pole.
QuadratureRule sphere_rule(int n_theta, int n_phi);

/// Interior midpoint rule on [0,1]^dim.
QuadratureRule box_rule(int dim, int n);

struct FaceRule {
    std::string id;   // "x=0", "x=1", "y=0", "y=1"
    int axis = 0;
    int side = 0;     // -1 for the face at 0, +1 for the face at 1
    Vector normal;    // outward unit normal
    QuadratureRule rule;  // nodes are full chart points on the face
};

/// One rule per face, in order x=0, x=1, y=0, y=1. In dim 1 each face is a
/// single node of weight 1; in dim 2 each face carries an N-point midpoint rule.
std::vector<FaceRule> box_face_rules(int dim, int n);

/// The rule appropriate for a manifold. Sphere resolution is {N_theta, N_phi};
/// other manifolds take {N}.
QuadratureRule rule_for(const Manifold& m, const std::vector<int>& resolution);

/// Gauss-Legendre nodes and weights on (-1, 1), nodes ascending.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Compensated dot product of values and weights in canonical order.
/// Throws UsageError on a length mismatch.
double integrate(std::span<const double> values, const QuadratureRule& rule);

}  // namespace nodal
