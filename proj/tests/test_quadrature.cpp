#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nodal/errors.hpp"
#include "nodal/fields.hpp"
#include "nodal/quadrature.hpp"
#include "test_helpers.hpp"

using namespace nodal;

namespace {

double weight_sum(const QuadratureRule& r) { return std::accumulate(r.weights.begin(), r.weights.end(), 0.0); }

template <class Fn>
double integrate_fn(const QuadratureRule& rule, Fn fn) {
    std::vector<double> v;
    for (const auto& p : rule.nodes) v.push_back(fn(p));
    return integrate(v, rule);
}

}  // namespace

TEST_SUITE("quadrature") {

TEST_CASE("torus rule layout") {
    const auto r1 = torus_rule(1, 8);
    REQUIRE(r1.size() == 8);
    for (int i = 0; i < 8; ++i) {
        CHECK(r1.nodes[i][0] == (2 * i + 1) / 16.0);
        CHECK(r1.weights[i] == 0.125);
    }
    CHECK(r1.label == "torus1-uniform-8");
    CHECK(torus_rule(2, 8).size() == 64);
    CHECK(weight_sum(torus_rule(2, 8)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(weight_sum(torus_rule(3, 12)) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(torus_rule(2, 512).label == "torus2-uniform-512");

    // last axis fastest
    const auto r2 = torus_rule(2, 8);
    CHECK(r2.nodes[1][0] == r2.nodes[0][0]);
    CHECK(r2.nodes[1][1] > r2.nodes[0][1]);
    CHECK_THROWS_AS(torus_rule(1, 7), ConfigError);
    CHECK_THROWS_AS(torus_rule(4, 8), ConfigError);
}

TEST_CASE("integrate examples") {
    const auto r = torus_rule(2, 16);
    CHECK(integrate(std::vector<double>(r.size(), 1.0), r) == 1.0);
    const auto s = sphere_rule(16, 32);
    CHECK(integrate(std::vector<double>(s.size(), 1.0), s) == doctest::Approx(4 * kPi).epsilon(1e-14));
    const auto r1 = torus_rule(1, 8);
    CHECK(integrate_fn(r1, [](const Point& p) { return p[0]; }) == 0.5);
    CHECK_THROWS_AS(integrate(std::vector<double>(3, 1.0), r1), UsageError);
}

TEST_CASE("sphere rule") {
    const auto s = sphere_rule(16, 32);
    CHECK(s.size() == 16u * 32u);
    CHECK(s.label == "sphere2-gauss-16x32");
    CHECK(std::abs(weight_sum(s) - 4 * kPi) <= 1e-12);
    for (const auto& p : s.nodes) {
        CHECK(p[0] > 0.0);
        CHECK(p[0] < kPi);
    }
    CHECK(s.nodes[0][0] < s.nodes[32][0]);  // theta ascends
    CHECK(std::abs(integrate_fn(s, [](const Point& p) { return std::cos(p[0]); })) <= 1e-12);
    CHECK(integrate_fn(s, [](const Point& p) { return std::pow(std::cos(p[0]), 2); }) ==
          doctest::Approx(4 * kPi / 3).epsilon(1e-10));
    CHECK_THROWS_AS(sphere_rule(7, 32), ConfigError);
    CHECK_THROWS_AS(sphere_rule(8, 15), ConfigError);
}

TEST_CASE("Gauss-Legendre nodes") {
    std::vector<double> x, w;
    gauss_legendre(3, x, w);
    REQUIRE(x.size() == 3);
    CHECK(x[0] == doctest::Approx(-std::sqrt(0.6)).epsilon(1e-15));
    CHECK(std::abs(x[1]) <= 1e-15);
    CHECK(w[1] == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
    CHECK(w[0] == doctest::Approx(5.0 / 9.0).epsilon(1e-15));

    // degree 2n-1 exactness
    gauss_legendre(20, x, w);
    for (int deg = 0; deg <= 39; ++deg) {
        double q = 0;
        for (std::size_t i = 0; i < x.size(); ++i) q += w[i] * std::pow(x[i], deg);
        const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
        CHECK(std::abs(q - exact) <= 1e-14);
    }
}

TEST_CASE("box rules and faces") {
    CHECK(std::abs(weight_sum(box_rule(2, 8)) - 1.0) <= 1e-15);
    CHECK(box_rule(1, 8).nodes.front()[0] == 1.0 / 16);

    const auto f1 = box_face_rules(1, 8);
    REQUIRE(f1.size() == 2);
    CHECK(f1[0].id == "x=0");
    CHECK(f1[0].normal[0] == -1.0);
    CHECK(f1[0].rule.size() == 1);
    CHECK(f1[0].rule.weights[0] == 1.0);
    CHECK(f1[1].rule.nodes[0][0] == 1.0);
    CHECK(f1[1].normal[0] == 1.0);

    const auto f2 = box_face_rules(2, 8);
    REQUIRE(f2.size() == 4);
    const char* ids[] = {"x=0", "x=1", "y=0", "y=1"};
    for (int i = 0; i < 4; ++i) {
        CHECK(f2[i].id == ids[i]);
        CHECK(f2[i].rule.size() == 8);
        CHECK(weight_sum(f2[i].rule) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(f2[i].normal.norm() == 1.0);
        for (const auto& p : f2[i].rule.nodes) CHECK(p[f2[i].axis] == (f2[i].side > 0 ? 1.0 : 0.0));
        CHECK(f2[i].normal[f2[i].axis] == f2[i].side);
    }
}

TEST_CASE("midpoint rule integrates trig polynomials below the Nyquist limit exactly") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const int dim = 1 + static_cast<int>(seed % 3);
        auto poly = expand_random(RandomTrig{dim, 3, seed, 1.0});
        TrigTerm constant;
        constant.k = Vector::Zero(dim);
        constant.a = 0.25 * static_cast<double>(seed);
        poly.terms.push_back(constant);
        const ScalarField f(poly, Manifold::torus(dim));
        const auto rule = torus_rule(dim, 8);
        CHECK(std::abs(integrate_fn(rule, [&](const Point& p) { return f.value(p); }) - constant.a) <= 1e-13);
    }
}

TEST_CASE("sphere rule is orthogonal to non-constant harmonics") {
    const auto rule = sphere_rule(32, 64);
    for (int l = 1; l <= 6; ++l)
        for (int m = -l; m <= l; ++m) {
            const ScalarField f(SphericalHarmonicSum{{{l, m, 1.0}}}, Manifold::sphere2());
            INFO("l=" << l << " m=" << m);
            CHECK(std::abs(integrate_fn(rule, [&](const Point& p) { return f.value(p); })) <= 1e-10);
        }
}

TEST_CASE("refinement stability for smooth integrands") {
    auto smooth_torus = [](const Point& p) { return std::exp(std::cos(kTwoPi * p[0]) + 0.5 * std::sin(kTwoPi * p[1])); };
    CHECK(std::abs(integrate_fn(torus_rule(2, 32), smooth_torus) - integrate_fn(torus_rule(2, 64), smooth_torus)) < 1e-8);
    auto smooth_sphere = [](const Point& p) { return std::exp(std::cos(p[0])) * (1 + 0.3 * std::sin(p[0]) * std::cos(p[1])); };
    CHECK(std::abs(integrate_fn(sphere_rule(16, 32), smooth_sphere) - integrate_fn(sphere_rule(32, 64), smooth_sphere)) < 1e-8);
    // exact value 2 pi (e - 1/e)
    CHECK(integrate_fn(sphere_rule(16, 32), smooth_sphere) == doctest::Approx(kTwoPi * (std::exp(1.0) - std::exp(-1.0))).epsilon(1e-12));
}

TEST_CASE("rule_for dispatch") {
    CHECK(rule_for(Manifold::torus(3), {8}).size() == 512);
    CHECK(rule_for(Manifold::sphere2(), {8, 16}).size() == 128);
    CHECK(rule_for(Manifold::box(2), {8}).size() == 64);
    CHECK_THROWS_AS(rule_for(Manifold::sphere2(), {8}), ConfigError);
    CHECK_THROWS_AS(rule_for(Manifold::torus(2), {8, 16}), ConfigError);
}

}  // TEST_SUITE
