#include "test_helpers.hpp"

#include <cmath>

namespace nodal::testing {
namespace {

double radical_inverse(int index, int base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (index > 0) {
        r += f * (index % base);
        index /= base;
        f *= inv;
    }
    return r;
}

}  // namespace

std::vector<Point> halton_points(const Manifold& m, int count, double theta_margin) {
    static constexpr int kBases[3] = {2, 3, 5};
    std::vector<Point> out;
    for (int i = 1; i <= count; ++i) {
        Point p(m.dim());
        for (int d = 0; d < m.dim(); ++d) p[d] = radical_inverse(i, kBases[d]);
        if (m.kind() == ManifoldKind::UnitSphere2) {
            p[0] = theta_margin + (kPi - 2 * theta_margin) * p[0];
            p[1] *= kTwoPi;
        }
        out.push_back(p);
    }
    return out;
}

std::vector<CovariantJet2> random_jets(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Manifold manifolds[] = {Manifold::torus(1), Manifold::torus(2), Manifold::torus(3), Manifold::sphere2()};
    std::vector<CovariantJet2> jets;
    while (static_cast<int>(jets.size()) < count) {
        const Manifold& m = manifolds[jets.size() % 4];
        const int n = m.dim();
        Point p(n);
        for (int d = 0; d < n; ++d) p[d] = 0.5 + 0.4 * u(rng);
        if (m.kind() == ManifoldKind::UnitSphere2) p[1] *= kTwoPi;

        ChartJet2 c;
        c.f = 2.0 * u(rng);
        c.df = Vector(n);
        c.d2f = Matrix(n, n);
        for (int i = 0; i < n; ++i) c.df[i] = 3.0 * u(rng);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) c.d2f(i, j) = c.d2f(j, i) = 10.0 * u(rng);
        auto jet = covariant_jet(c, metric_at(m, p), christoffel_at(m, p), ricci_at(m, p));
        if (jet.grad_norm < 1e-3 || std::abs(jet.f) < 1e-3) continue;
        jets.push_back(jet);
    }
    return jets;
}

TrigPolynomial trig(int dim, const std::vector<std::pair<std::vector<double>, std::pair<double, double>>>& terms) {
    TrigPolynomial t{dim, {}};
    for (const auto& [k, ab] : terms) {
        TrigTerm term;
        term.k = Vector(dim);
        for (int d = 0; d < dim; ++d) term.k[d] = k[d];
        term.a = ab.first;
        term.b = ab.second;
        t.terms.push_back(term);
    }
    return t;
}

std::string data_path(const std::string& name) { return std::string(NODAL_TEST_DATA) + "/" + name; }

double rel_err(double got, double want) {
    return want == 0.0 ? std::abs(got) : std::abs(got - want) / std::abs(want);
}

}  // namespace nodal::testing
