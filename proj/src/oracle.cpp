#include "nodal/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <unordered_map>

#include <fmt/format.h>

#include "nodal/errors.hpp"
#include "nodal/parallel.hpp"
#include "nodal/summation.hpp"

namespace nodal {
namespace {

using Vec3 = std::array<double, 3>;
using EdgePair = std::pair<std::uint64_t, std::uint64_t>;

double nudged(double v) { return std::abs(v) < kVertexFloor ? v + kVertexNudge : v; }

double distance(const Vec3& a, const Vec3& b) {
    return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 u{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
    const Vec3 v{c[0] - a[0], c[1] - a[1], c[2] - a[2]};
    const Vec3 w{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
    return 0.5 * std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
}

class DisjointSets {
public:
    std::uint32_t id(std::uint64_t key) {
        const auto [it, inserted] = index_.try_emplace(key, static_cast<std::uint32_t>(parent_.size()));
        if (inserted) parent_.push_back(it->second);
        return it->second;
    }

    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::uint64_t a, std::uint64_t b) {
        const auto ra = find(id(a));
        const auto rb = find(id(b));
        if (ra != rb) parent_[std::max(ra, rb)] = std::min(ra, rb);
    }

    int components() {
        int count = 0;
        for (std::uint32_t i = 0; i < parent_.size(); ++i) count += find(i) == i;
        return count;
    }

private:
    std::unordered_map<std::uint64_t, std::uint32_t> index_;
    std::vector<std::uint32_t> parent_;
};

struct ChunkResult {
    CompensatedSum measure;
    std::vector<EdgePair> links;
    std::vector<Primitive> primitives;
};

// Marching squares over a 2-d vertex grid. Vertex (i, j) is values[i * ny + j].
struct SquareGrid {
    int nx = 0;
    int ny = 0;
    bool periodic_x = false;
    bool periodic_y = false;
    std::vector<double> values;
    std::function<Point(double, double)> chart;  // fractional vertex index -> chart point
    std::function<Vec3(const Point&)> embed;
};

double extract_squares(const ScalarField& field, const SquareGrid& grid, int& components, std::vector<Primitive>* dump) {
    const int cx = grid.periodic_x ? grid.nx : grid.nx - 1;
    const int cy = grid.periodic_y ? grid.ny : grid.ny - 1;
    const std::size_t cells = static_cast<std::size_t>(cx) * cy;

    auto value = [&](int i, int j) {
        if (grid.periodic_x) i %= grid.nx;
        if (grid.periodic_y) j %= grid.ny;
        return grid.values[static_cast<std::size_t>(i) * grid.ny + j];
    };
    // horizontal edge (i,j)-(i+1,j) and vertical edge (i,j)-(i,j+1)
    auto edge_id = [&](int i, int j, int vertical) {
        if (grid.periodic_x) i %= grid.nx;
        if (grid.periodic_y) j %= grid.ny;
        return (static_cast<std::uint64_t>(i) * (grid.ny + 1) + j) * 2 + vertical;
    };

    const auto partials = map_chunks<ChunkResult>(cells, kChunkSize, [&](std::size_t begin, std::size_t end) {
        ChunkResult out;
        for (std::size_t cell = begin; cell < end; ++cell) {
            const int i = static_cast<int>(cell / cy);
            const int j = static_cast<int>(cell % cy);
            const std::array<int, 4> ci{i, i + 1, i + 1, i};
            const std::array<int, 4> cj{j, j, j + 1, j + 1};
            std::array<double, 4> f{};
            int mask = 0;
            for (int k = 0; k < 4; ++k) {
                f[k] = value(ci[k], cj[k]);
                if (f[k] > 0) mask |= 1 << k;
            }
            if (mask == 0 || mask == 15) continue;

            // edges k: corner k -> corner k+1, each oriented from the lower vertex index
            struct Crossing {
                bool present = false;
                Vec3 pos{};
                std::uint64_t id = 0;
            };
            std::array<Crossing, 4> cross;
            for (int k = 0; k < 4; ++k) {
                int a = k, b = (k + 1) % 4;
                if (k >= 2) std::swap(a, b);  // edges 2 (3->2) and 3 (0->3) start at the lower index
                if ((f[a] > 0) == (f[b] > 0)) continue;
                const double t = f[a] / (f[a] - f[b]);
                const double fi = ci[a] + t * (ci[b] - ci[a]);
                const double fj = cj[a] + t * (cj[b] - cj[a]);
                cross[k].present = true;
                cross[k].pos = grid.embed(grid.chart(fi, fj));
                cross[k].id = edge_id(ci[a], cj[a], ci[a] == ci[b] ? 1 : 0);
            }

            auto emit = [&](int p, int q) {
                out.measure.add(distance(cross[p].pos, cross[q].pos));
                out.links.emplace_back(cross[p].id, cross[q].id);
                if (dump) out.primitives.push_back({cross[p].pos, cross[q].pos});
            };

            if (mask == 5 || mask == 10) {
                const double centre = nudged(field.value(grid.chart(i + 0.5, j + 0.5)));
                // corners 0 and 2 share a sign in both saddle cases
                if ((centre > 0) == (f[0] > 0)) {
                    emit(0, 1);  // isolate corner 1
                    emit(2, 3);  // isolate corner 3
                } else {
                    emit(3, 0);  // isolate corner 0
                    emit(1, 2);  // isolate corner 2
                }
                continue;
            }
            int first = -1, second = -1;
            for (int k = 0; k < 4; ++k) {
                if (!cross[k].present) continue;
                (first < 0 ? first : second) = k;
            }
            emit(first, second);
        }
        return out;
    });

    CompensatedSum total;
    DisjointSets sets;
    for (const auto& part : partials) {
        total.merge(part.measure);
        for (const auto& [a, b] : part.links) sets.unite(a, b);
        if (dump) dump->insert(dump->end(), part.primitives.begin(), part.primitives.end());
    }
    components = sets.components();
    return total.value();
}

void require_manifold(const ScalarField& field, ManifoldKind kind, int dim, const char* what) {
    const Manifold& m = field.manifold();
    if (m.kind() != kind || m.dim() != dim) {
        throw ConfigError(fmt::format("{} oracle does not apply to {}", what, m.name()));
    }
}

void require_min(int value, int minimum, const char* what) {
    if (value < minimum) throw ConfigError(fmt::format("{} must be >= {}, got {}", what, minimum, value));
}

std::vector<double> uniform_axis(int count, double step) {
    std::vector<double> axis(count);
    for (int i = 0; i < count; ++i) axis[i] = i * step;
    return axis;
}

}  // namespace

std::string to_string(OracleMethod method) {
    switch (method) {
        case OracleMethod::Bisection1D: return "bisection-1d";
        case OracleMethod::MarchingSquares2D: return "marching-squares-2d";
        case OracleMethod::SphereGrid2D: return "sphere-grid-2d";
        case OracleMethod::MarchingTetrahedra3D: return "marching-tetrahedra-3d";
    }
    return "unknown";
}

OracleReport count_zeros_1d(const ScalarField& field, int n, std::vector<Primitive>* dump) {
    const Manifold& m = field.manifold();
    if (m.dim() != 1 || m.kind() == ManifoldKind::UnitSphere2) {
        throw ConfigError(fmt::format("1-d zero counting does not apply to {}", m.name()));
    }
    require_min(n, 8, "1-d oracle resolution N");
    const bool periodic = m.kind() == ManifoldKind::FlatTorus;

    auto sign_at = [&](double x) {
        Point p(1);
        p << x;
        return nudged(field.value(p)) > 0;
    };

    auto count_at = [&](int res, std::vector<double>* roots) {
        const int vertices = periodic ? res : res + 1;
        auto values = field.sample_grid({uniform_axis(vertices, 1.0 / res)});
        for (double& v : values) v = nudged(v);
        int count = 0;
        // res intervals in both cases: the circle wraps, the segment has res + 1 vertices
        for (int i = 0; i < res; ++i) {
            const int next = periodic ? (i + 1) % res : i + 1;
            if ((values[i] > 0) == (values[next] > 0)) continue;
            // bisection on the bracket confirms and locates the crossing
            double lo = static_cast<double>(i) / res;
            double hi = static_cast<double>(i + 1) / res;
            const bool lo_sign = values[i] > 0;
            for (int it = 0; it < 64 && hi - lo > 1e-15; ++it) {
                const double mid = 0.5 * (lo + hi);
                (sign_at(mid) == lo_sign ? lo : hi) = mid;
            }
            if (sign_at(lo) == lo_sign && sign_at(hi) != lo_sign) {
                ++count;
                if (roots) roots->push_back(0.5 * (lo + hi));
            }
        }
        return count;
    };

    std::vector<int> counts;
    int res = n;
    for (int doubling = 0; doubling <= 6; ++doubling, res *= 2) {
        counts.push_back(count_at(res, nullptr));
        const std::size_t k = counts.size();
        if (k >= 3 && counts[k - 1] == counts[k - 2] && counts[k - 2] == counts[k - 3]) {
            OracleReport r;
            r.method = OracleMethod::Bisection1D;
            r.resolution = {res};
            r.value = counts.back();
            r.component_hint = counts.back();
            if (dump) {
                std::vector<double> roots;
                count_at(res, &roots);
                for (double x : roots) dump->push_back({Vec3{x, 0.0, 0.0}});
            }
            return r;
        }
    }
    throw ResolutionError(fmt::format("zero count on {} did not stabilise by N = {}", m.name(), res / 2));
}

OracleReport marching_squares_torus2(const ScalarField& field, int n, std::vector<Primitive>* dump) {
    require_manifold(field, ManifoldKind::FlatTorus, 2, "marching-squares torus2");
    require_min(n, 8, "marching-squares resolution N");
    SquareGrid grid;
    grid.nx = grid.ny = n;
    grid.periodic_x = grid.periodic_y = true;
    const auto axis = uniform_axis(n, 1.0 / n);
    grid.values = field.sample_grid({axis, axis});
    for (double& v : grid.values) v = nudged(v);
    grid.chart = [n](double fi, double fj) {
        Point p(2);
        p << fi / n, fj / n;
        return p;
    };
    grid.embed = [](const Point& p) { return Vec3{p[0], p[1], 0.0}; };

    OracleReport r;
    r.method = OracleMethod::MarchingSquares2D;
    r.resolution = {n};
    r.value = extract_squares(field, grid, r.component_hint, dump);
    return r;
}

OracleReport marching_squares_box2(const ScalarField& field, int n, std::vector<Primitive>* dump) {
    require_manifold(field, ManifoldKind::FlatBox, 2, "marching-squares box2");
    require_min(n, 8, "marching-squares resolution N");
    SquareGrid grid;
    grid.nx = grid.ny = n + 1;
    const auto axis = uniform_axis(n + 1, 1.0 / n);
    grid.values = field.sample_grid({axis, axis});
    for (double& v : grid.values) v = nudged(v);
    grid.chart = [n](double fi, double fj) {
        Point p(2);
        p << std::clamp(fi / n, 0.0, 1.0), std::clamp(fj / n, 0.0, 1.0);
        return p;
    };
    grid.embed = [](const Point& p) { return Vec3{p[0], p[1], 0.0}; };

    OracleReport r;
    r.method = OracleMethod::MarchingSquares2D;
    r.resolution = {n};
    r.value = extract_squares(field, grid, r.component_hint, dump);
    return r;
}

OracleReport sphere_grid_length(const ScalarField& field, int n_theta, int n_phi, std::vector<Primitive>* dump) {
    require_manifold(field, ManifoldKind::UnitSphere2, 2, "sphere-grid");
    require_min(n_theta, 8, "sphere oracle N_theta");
    require_min(n_phi, 16, "sphere oracle N_phi");
    SquareGrid grid;
    grid.nx = n_theta + 1;
    grid.ny = n_phi;
    grid.periodic_y = true;
    auto theta_axis = uniform_axis(n_theta + 1, kPi / n_theta);
    theta_axis.back() = kPi;
    grid.values = field.sample_grid({theta_axis, uniform_axis(n_phi, kTwoPi / n_phi)});
    for (double& v : grid.values) v = nudged(v);
    grid.chart = [n_theta, n_phi](double fi, double fj) {
        Point p(2);
        p << std::clamp(fi * kPi / n_theta, 0.0, kPi), fj * kTwoPi / n_phi;
        return p;
    };
    grid.embed = [](const Point& p) {
        const double s = std::sin(p[0]);
        return Vec3{s * std::cos(p[1]), s * std::sin(p[1]), std::cos(p[0])};
    };

    OracleReport r;
    r.method = OracleMethod::SphereGrid2D;
    r.resolution = {n_theta, n_phi};
    r.value = extract_squares(field, grid, r.component_hint, dump);
    return r;
}

OracleReport marching_tetrahedra_torus3(const ScalarField& field, int n, std::vector<Primitive>* dump) {
    require_manifold(field, ManifoldKind::FlatTorus, 3, "marching-tetrahedra torus3");
    require_min(n, 8, "marching-tetrahedra resolution N");
    const double h = 1.0 / n;
    const auto axis = uniform_axis(n, h);
    auto values = field.sample_grid({axis, axis, axis});
    for (double& v : values) v = nudged(v);

    const auto nn = static_cast<std::size_t>(n);
    auto vertex_index = [&](int i, int j, int k) {
        return (static_cast<std::size_t>(i % n) * nn + static_cast<std::size_t>(j % n)) * nn + static_cast<std::size_t>(k % n);
    };

    // Corner masks bit0 = x, bit1 = y, bit2 = z. Tetrahedron per axis permutation:
    // 0 -> e_a -> e_a + e_b -> (1,1,1).
    static constexpr std::array<std::array<int, 3>, 6> kPerms{{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    std::array<std::array<int, 4>, 6> tets{};
    for (std::size_t t = 0; t < kPerms.size(); ++t) {
        const auto& p = kPerms[t];
        tets[t] = {0, 1 << p[0], (1 << p[0]) | (1 << p[1]), 7};
    }

    const std::size_t cells = nn * nn * nn;
    const auto partials = map_chunks<ChunkResult>(cells, kChunkSize, [&](std::size_t begin, std::size_t end) {
        ChunkResult out;
        for (std::size_t cell = begin; cell < end; ++cell) {
            const int i = static_cast<int>(cell / (nn * nn));
            const int j = static_cast<int>((cell / nn) % nn);
            const int k = static_cast<int>(cell % nn);
            std::array<double, 8> f{};
            int positive = 0;
            for (int mask = 0; mask < 8; ++mask) {
                f[mask] = values[vertex_index(i + (mask & 1), j + ((mask >> 1) & 1), k + ((mask >> 2) & 1))];
                positive += f[mask] > 0;
            }
            if (positive == 0 || positive == 8) continue;

            // crossing on the edge between comparable corner masks u < w
            auto crossing = [&](int u, int w) -> std::pair<Vec3, std::uint64_t> {
                if (__builtin_popcount(u) > __builtin_popcount(w)) std::swap(u, w);
                const double t = f[u] / (f[u] - f[w]);
                Vec3 pos{};
                const std::array<int, 3> base{i, j, k};
                for (int d = 0; d < 3; ++d) {
                    const int ud = (u >> d) & 1;
                    const int wd = (w >> d) & 1;
                    pos[d] = (base[d] + ud + t * (wd - ud)) * h;
                }
                const auto lower = vertex_index(i + (u & 1), j + ((u >> 1) & 1), k + ((u >> 2) & 1));
                return {pos, static_cast<std::uint64_t>(lower) * 8 + static_cast<std::uint64_t>(u ^ w)};
            };

            for (const auto& tet : tets) {
                std::array<int, 4> pos_v{}, neg_v{};
                int np = 0, nm = 0;
                for (int v : tet) {
                    if (f[v] > 0) {
                        pos_v[np++] = v;
                    } else {
                        neg_v[nm++] = v;
                    }
                }
                if (np == 0 || nm == 0) continue;
                if (np == 1 || nm == 1) {
                    const bool lone_positive = np == 1;
                    const int lone = lone_positive ? pos_v[0] : neg_v[0];
                    const auto& others = lone_positive ? neg_v : pos_v;
                    const auto [a, ida] = crossing(lone, others[0]);
                    const auto [b, idb] = crossing(lone, others[1]);
                    const auto [c, idc] = crossing(lone, others[2]);
                    out.measure.add(triangle_area(a, b, c));
                    out.links.emplace_back(ida, idb);
                    out.links.emplace_back(ida, idc);
                    if (dump) out.primitives.push_back({a, b, c});
                } else {
                    // quad P0N0 -> P0N1 -> P1N1 -> P1N0, planar for linear data
                    const auto [a, ida] = crossing(pos_v[0], neg_v[0]);
                    const auto [b, idb] = crossing(pos_v[0], neg_v[1]);
                    const auto [c, idc] = crossing(pos_v[1], neg_v[1]);
                    const auto [d, idd] = crossing(pos_v[1], neg_v[0]);
                    out.measure.add(triangle_area(a, b, c));
                    out.measure.add(triangle_area(a, c, d));
                    out.links.emplace_back(ida, idb);
                    out.links.emplace_back(ida, idc);
                    out.links.emplace_back(ida, idd);
                    if (dump) {
                        out.primitives.push_back({a, b, c});
                        out.primitives.push_back({a, c, d});
                    }
                }
            }
        }
        return out;
    });

    CompensatedSum total;
    DisjointSets sets;
    for (const auto& part : partials) {
        total.merge(part.measure);
        for (const auto& [a, b] : part.links) sets.unite(a, b);
        if (dump) dump->insert(dump->end(), part.primitives.begin(), part.primitives.end());
    }

    OracleReport r;
    r.method = OracleMethod::MarchingTetrahedra3D;
    r.resolution = {n};
    r.value = total.value();
    r.component_hint = sets.components();
    return r;
}

OracleReport run_oracle(const ScalarField& field, const std::vector<int>& resolution, std::vector<Primitive>* dump) {
    const Manifold& m = field.manifold();
    if (m.kind() == ManifoldKind::UnitSphere2) {
        if (resolution.size() != 2) throw ConfigError("sphere oracle resolution takes N_theta x N_phi");
        return sphere_grid_length(field, resolution[0], resolution[1], dump);
    }
    if (resolution.size() != 1) throw ConfigError(fmt::format("{} oracle resolution takes a single N", m.name()));
    const int n = resolution[0];
    if (m.dim() == 1) return count_zeros_1d(field, n, dump);
    if (m.kind() == ManifoldKind::FlatBox) return marching_squares_box2(field, n, dump);
    if (m.dim() == 2) return marching_squares_torus2(field, n, dump);
    return marching_tetrahedra_torus3(field, n, dump);
}

ConvergedOracle self_converge(const ScalarField& field, const std::vector<int>& resolution) {
    ConvergedOracle out;
    out.coarse = run_oracle(field, resolution);
    std::vector<int> doubled = resolution;
    for (int& r : doubled) r *= 2;
    out.fine = run_oracle(field, doubled);
    out.uncertainty = std::abs(out.fine.value - out.coarse.value);
    out.extrapolated = out.fine.value + (out.fine.value - out.coarse.value) / 3.0;
    return out;
}

void write_primitives(std::ostream& out, const std::vector<Primitive>& primitives) {
    for (const auto& prim : primitives) {
        std::string line;
        for (std::size_t v = 0; v < prim.size(); ++v) {
            line += fmt::format("{}{:.17g} {:.17g} {:.17g}", v ? " " : "", prim[v][0], prim[v][1], prim[v][2]);
        }
        out << line << '\n';
    }
}

}  // namespace nodal
