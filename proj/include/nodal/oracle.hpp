#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "nodal/fields.hpp"

namespace nodal {

// Zero-set volume measured directly from cell-wise linear reconstruction of
// the field samples. No derivatives are used anywhere in this module.

enum class OracleMethod { Bisection1D, MarchingSquares2D, SphereGrid2D, MarchingTetrahedra3D };

std::string to_string(OracleMethod method);

struct OracleReport {
    OracleMethod method = OracleMethod::Bisection1D;
    std::vector<int> resolution;
    double value = 0.0;
    int component_hint = 0;  // connected pieces of the extracted set, informational
};

/// Extracted primitives in embedding coordinates: points (1-d), segments
/// (2-d) or triangles (3-d), each stored as its vertex list.
using Primitive = std::vector<std::array<double, 3>>;

/// Vertices with |f| below this are moved to f + kVertexNudge.
inline constexpr double kVertexFloor = 1e-14;
inline constexpr double kVertexNudge = 1e-12;

/// Sign changes on an N-point grid of the circle (torus1) or [0,1] (box1),
/// each confirmed by bisection. N is doubled until the count agrees over
/// two consecutive doublings; throws ResolutionError after 6 doublings.
OracleReport count_zeros_1d(const ScalarField& field, int n, std::vector<Primitive>* dump = nullptr);

/// Periodic N x N vertex grid on torus2; saddle cells resolved by the cell-centre sign.
OracleReport marching_squares_torus2(const ScalarField& field, int n, std::vector<Primitive>* dump = nullptr);

/// (N+1) x (N+1) vertex grid on the unit square (box2), non-periodic.
OracleReport marching_squares_box2(const ScalarField& field, int n, std::vector<Primitive>* dump = nullptr);

/// Marching squares on the (theta, phi) grid including the pole rows; crossings
/// are embedded in R^3 and segments measured as chords.
OracleReport sphere_grid_length(const ScalarField& field, int n_theta, int n_phi, std::vector<Primitive>* dump = nullptr);

/// Each cube split into the 6 tetrahedra along the main diagonal (one per axis
/// permutation); per-tetrahedron linear interpolation gives a triangle or quad.
OracleReport marching_tetrahedra_torus3(const ScalarField& field, int n, std::vector<Primitive>* dump = nullptr);

/// Dispatches on the field's manifold. Resolution is {N} or {N_theta, N_phi}.
OracleReport run_oracle(const ScalarField& field, const std::vector<int>& resolution,
                        std::vector<Primitive>* dump = nullptr);

struct ConvergedOracle {
    OracleReport coarse;
    OracleReport fine;        // at doubled resolution
    double uncertainty = 0.0; // |fine - coarse|
    double extrapolated = 0.0;  // Richardson for O(h^2): fine + (fine - coarse) / 3
};

/// Runs the oracle at the given resolution and at twice that resolution.
ConvergedOracle self_converge(const ScalarField& field, const std::vector<int>& resolution);

/// One primitive per line, coordinates separated by spaces.
void write_primitives(std::ostream& out, const std::vector<Primitive>& primitives);

}  // namespace nodal
