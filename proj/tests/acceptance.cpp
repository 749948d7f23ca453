// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "nodal/cli.hpp"
#include "nodal/errors.hpp"
#include "nodal/estimators.hpp"
#include "nodal/oracle.hpp"
#include "test_helpers.hpp"

using namespace nodal;
using testing::trig;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = true;
    int failures = 0;
    std::vector<std::string> notes;

    // keeps a few passing notes and the first failing ones
    void require(bool ok, const std::string& note) {
        if (!ok) {
            pass = false;
            if (++failures <= 6) notes.push_back("[x] " + note);
        } else if (notes.size() < 4) {
            notes.push_back(note);
        }
    }
};

std::vector<Estimator> by_name(const std::vector<std::string>& names) {
    std::vector<Estimator> out;
    for (const auto& n : names) out.push_back(Estimator::parse(n));
    return out;
}

std::vector<Estimator> all_closed() { return by_name(Estimator::closed_manifold_names()); }

std::string fmt_g(double v) { return fmt::format("{:.3g}", v); }

// ---------------------------------------------------------------- criteria

Verdict circle_counting() {
    Verdict v;
    const auto t0 = Clock::now();
    const auto ests = by_name({"algebraic", "arctan", "tanh", "lipschitz"});
    for (int k = 1; k <= 3; ++k) {
        const ScalarField f(trig(1, {{{double(k)}, {0, 1}}}), Manifold::torus(1));
        for (const auto& r : run_estimators(f, ests, {2048})) {
            const double err = std::abs(r.value - 2 * k);
            v.require(err <= 1e-6, fmt::format("k={} {} err {}", k, r.estimator, fmt_g(err)));
        }
    }
    const double t = seconds_since(t0);
    v.require(t < 1.0, fmt::format("runtime {:.2f}s", t));
    return v;
}

Verdict empty_set() {
    Verdict v;
    const ScalarField circle(trig(1, {{{1}, {0, 1}}, {{0}, {2, 0}}}), Manifold::torus(1));
    double worst = 0.0;
    std::string worst_name;
    for (const auto& r : run_estimators(circle, all_closed(), {131072})) {
        v.require(std::abs(r.value) <= 1e-8, fmt::format("torus1 {} = {}", r.estimator, fmt_g(r.value)));
        if (std::abs(r.value) >= worst) worst = std::abs(r.value), worst_name = "torus1 " + r.estimator;
    }
    const ScalarField sphere(SphericalHarmonicSum{{{1, 0, 1.0}, {0, 0, 2.0}}}, Manifold::sphere2());
    for (const auto& r : run_estimators(sphere, all_closed(), {1024, 2048})) {
        v.require(std::abs(r.value) <= 1e-8, fmt::format("sphere2 {} = {}", r.estimator, fmt_g(r.value)));
        if (std::abs(r.value) >= worst) worst = std::abs(r.value), worst_name = "sphere2 " + r.estimator;
    }
    v.notes.insert(v.notes.begin(), fmt::format("worst {} |value| {}", worst_name, fmt_g(worst)));
    return v;
}

Verdict torus_lines() {
    Verdict v;
    const ScalarField f(trig(2, {{{1, 0}, {0, 1}}, {{0, 0}, {0.5, 0}}}), Manifold::torus(2));
    for (const auto& r : run_estimators(f, all_closed(), {512})) {
        const double err = std::abs(r.value - 2.0);
        v.require(err <= 1e-4, fmt::format("{} err {}", r.estimator, fmt_g(err)));
    }
    const auto o = self_converge(f, {512});
    const double err = std::abs(o.fine.value - 2.0);
    v.require(err <= std::max(o.uncertainty, 1e-12), fmt::format("oracle err {} (uncertainty {})", fmt_g(err), fmt_g(o.uncertainty)));
    return v;
}

Verdict sphere_equator() {
    Verdict v;
    const auto t0 = Clock::now();
    const ScalarField f(SphericalHarmonicSum{{{1, 0, 1.0}}}, Manifold::sphere2());
    auto ests = all_closed();
    ests.push_back(Estimator::lipschitz(false));
    for (const auto& r : run_estimators(f, ests, {256, 512})) {
        const double dev = std::abs(r.value - kTwoPi);
        if (r.estimator == "lipschitz:noricci") {
            v.require(dev > 1e-2, fmt::format("ricci dropped deviates by {}", fmt_g(dev)));
        } else {
            v.require(dev <= 1e-3, fmt::format("{} err {}", r.estimator, fmt_g(dev)));
        }
    }
    const double t = seconds_since(t0);
    v.require(t < 10.0, fmt::format("runtime {:.2f}s", t));
    return v;
}

Verdict zonal() {
    Verdict v;
    const double exact = 4 * kPi * std::sqrt(2.0 / 3.0);
    const ScalarField f(SphericalHarmonicSum{{{2, 0, 1.0}}}, Manifold::sphere2());
    for (const auto& r : run_estimators(f, all_closed(), {1024, 2048})) {
        const double rel = std::abs(r.value - exact) / exact;
        v.require(rel <= 2e-3, fmt::format("{} rel {}", r.estimator, fmt_g(rel)));
    }
    const auto o = self_converge(f, {512, 1024});
    const double rel = std::abs(o.fine.value - exact) / exact;
    v.require(rel <= 2e-3, fmt::format("oracle rel {}", fmt_g(rel)));
    return v;
}

// Seeds 1, 2, ... with draws failing the nondegeneracy scan skipped.
std::vector<std::uint64_t> accepted_seeds(int wanted, std::vector<std::uint64_t>* rejected) {
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t seed = 1; static_cast<int>(seeds.size()) < wanted; ++seed) {
        const ScalarField f(RandomTrig{2, 3, seed, 1.0}, Manifold::torus(2));
        try {
            require_nondegenerate(scan_nondegeneracy(f, 512), f.manifold());
            seeds.push_back(seed);
        } catch (const DegenerateFieldError&) {
            if (rejected) rejected->push_back(seed);
        }
    }
    return seeds;
}

double pairwise_spread(const std::vector<EstimateReport>& reports, const std::function<bool(const std::string&)>& keep) {
    double worst = 0.0;
    for (const auto& a : reports)
        for (const auto& b : reports) {
            if (!keep(a.estimator) || !keep(b.estimator)) continue;
            worst = std::max(worst, std::abs(a.value - b.value) / std::max(std::abs(a.value), std::abs(b.value)));
        }
    return worst;
}

Verdict random_fields(const std::vector<std::uint64_t>& seeds, const std::vector<std::uint64_t>& rejected) {
    Verdict v;
    const auto t0 = Clock::now();
    const auto ests = all_closed();
    double spread_all = 0.0, spread_smooth = 0.0, oracle_dev = 0.0, oracle_dev_smooth = 0.0;
    for (auto seed : seeds) {
        const ScalarField f(RandomTrig{2, 3, seed, 1.0}, Manifold::torus(2));
        const auto reports = run_estimators(f, ests, {512});
        const double s_all = pairwise_spread(reports, [](const std::string&) { return true; });
        const double s_smooth = pairwise_spread(reports, [](const std::string& n) { return n != "lipschitz"; });
        spread_all = std::max(spread_all, s_all);
        spread_smooth = std::max(spread_smooth, s_smooth);
        v.require(s_all <= 1e-3, fmt::format("seed {} pairwise {} (without lipschitz {})", seed, fmt_g(s_all), fmt_g(s_smooth)));
        const double ref = marching_squares_torus2(f, 2048).value;
        for (const auto& r : reports) {
            const double dev = std::abs(r.value - ref) / ref;
            oracle_dev = std::max(oracle_dev, dev);
            if (r.estimator != "lipschitz") oracle_dev_smooth = std::max(oracle_dev_smooth, dev);
            v.require(dev <= 5e-3, fmt::format("seed {} {} vs oracle {}", seed, r.estimator, fmt_g(dev)));
        }
    }
    const double t = seconds_since(t0);
    v.require(t < 120.0, fmt::format("runtime {:.1f}s", t));
    std::string rej;
    for (auto s : rejected) rej += fmt::format(" {}", s);
    v.notes.insert(v.notes.begin(),
                   fmt::format("max pairwise {} (without lipschitz {}), max oracle dev {} (without lipschitz {}), rejected seeds:{}",
                               fmt_g(spread_all), fmt_g(spread_smooth), fmt_g(oracle_dev), fmt_g(oracle_dev_smooth),
                               rej.empty() ? " none" : rej));
    return v;
}

Verdict torus3_area() {
    Verdict v;
    const auto t0 = Clock::now();
    const ScalarField f(trig(3, {{{0, 0, 1}, {0, 1}}, {{0, 0, 0}, {0.5, 0}}}), Manifold::torus(3));
    for (const auto& r : run_estimators(f, all_closed(), {96})) {
        const double err = std::abs(r.value - 2.0);
        v.require(err <= 1e-3, fmt::format("{} err {}", r.estimator, fmt_g(err)));
    }
    const double o = marching_tetrahedra_torus3(f, 192).value;
    v.require(std::abs(o - 2.0) <= 1e-3, fmt::format("oracle err {}", fmt_g(std::abs(o - 2.0))));
    const double t = seconds_since(t0);
    v.require(t < 120.0, fmt::format("runtime {:.1f}s", t));
    return v;
}

Verdict corner() {
    Verdict v;
    const ScalarField line(Polynomial{1, {{{1, 0, 0}, 1.0}, {{0, 0, 0}, -0.5}}}, Manifold::box(1));
    const double err1 = std::abs(estimate_corner(line, 8192).value - 1.0);
    v.require(err1 <= 1e-8, fmt::format("box1 err {}", fmt_g(err1)));
    const ScalarField f(trig(2, {{{1, 0}, {0, 1}}, {{0, 1}, {0, 0.3}}, {{0, 0}, {0.1, 0}}}), Manifold::box(2));
    const double est = estimate_corner(f, 512).value;
    const double ref = marching_squares_box2(f, 2048).value;
    const double rel = std::abs(est - ref) / ref;
    v.require(rel <= 1e-2, fmt::format("box2 rel {}", fmt_g(rel)));
    return v;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

Verdict identities() {
    Verdict v;
    const auto jets = testing::random_jets(1000, 20240917);
    const auto invsqrt = builtin_G("invsqrt");
    const auto one = builtin_g("one"), th = builtin_g("tanh"), at = builtin_g("arctan");
    int bad[4] = {0, 0, 0, 0};
    for (const auto& j : jets) {
        const double alg = integrand_algebraic(j);
        bad[0] += !close(integrand_general_G(invsqrt, j), alg);
        bad[1] += !close(integrand_g1(one, j), alg);
        bad[2] += !close(integrand_g2(at, j), 2 / kPi * integrand_arctan(j));
        bad[3] += !close(integrand_g2(th, j), integrand_tanh(j));
    }
    const char* names[4] = {"G=invsqrt vs algebraic", "g1 one vs algebraic", "g2 arctan vs arctan", "g2 tanh vs tanh"};
    for (int i = 0; i < 4; ++i) v.require(bad[i] == 0, fmt::format("{}: {} of 1000 off", names[i], bad[i]));
    return v;
}

struct JetCase {
    std::string label;
    FieldSpec spec;
    Manifold manifold;
};

Verdict jets() {
    Verdict v;
    SphericalHarmonicSum sph;
    for (int l = 0; l <= kMaxHarmonicDegree; ++l)
        for (int m = -l; m <= l; ++m) sph.terms.push_back({l, m, std::pow(0.5, l) * (1.0 + 0.1 * m)});
    const std::vector<JetCase> cases{
        {"torus1 trig", trig(1, {{{1}, {0.3, 1.0}}, {{3}, {-0.7, 0.2}}}), Manifold::torus(1)},
        {"torus2 random", RandomTrig{2, 3, 11, 1.0}, Manifold::torus(2)},
        {"torus3 random", RandomTrig{3, 2, 5, 0.5}, Manifold::torus(3)},
        {"box2 trig", trig(2, {{{1, 0}, {0.0, 1.0}}, {{0.5, 1.5}, {0.4, -0.2}}}), Manifold::box(2)},
        {"box2 poly", Polynomial{2, {{{2, 1, 0}, 1.5}, {{0, 3, 0}, -0.7}, {{1, 0, 0}, 0.2}}}, Manifold::box(2)},
        {"sphere2 harmonics", sph, Manifold::sphere2()},
    };
    const double h1 = 1e-5, h2 = 1e-3;
    double worst_fd = 0.0, worst_tf = 0.0;
    for (const auto& c : cases) {
        const ScalarField field(c.spec, c.manifold);
        const int n = c.manifold.dim();
        for (auto p : testing::halton_points(c.manifold, 100, 0.1)) {
            if (c.manifold.has_boundary()) p = p * 0.8 + Point::Constant(n, 0.1);
            const auto jet = field.chart_jet(p);
            const double s = std::max({1.0, std::abs(jet.f), jet.df.cwiseAbs().maxCoeff(), jet.d2f.cwiseAbs().maxCoeff()});
            for (int i = 0; i < n; ++i) {
                Point a = p, b = p;
                a[i] += h1;
                b[i] -= h1;
                worst_fd = std::max(worst_fd, std::abs((field.value(a) - field.value(b)) / (2 * h1) - jet.df[i]) / s);
                for (int j = 0; j < n; ++j) {
                    auto mixed = [&](double h) {
                        auto at = [&](double si, double sj) {
                            Point q = p;
                            q[i] += si * h;
                            q[j] += sj * h;
                            return field.value(q);
                        };
                        return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h * h);
                    };
                    const double fd = (4 * mixed(h2) - mixed(2 * h2)) / 3;
                    worst_fd = std::max(worst_fd, std::abs(fd - jet.d2f(i, j)) / s);
                }
            }
            const auto cj = field.covariant_jet(p);
            const auto g = metric_at(c.manifold, p);
            const Matrix tf = cj.hess - (cj.laplacian / n) * g.g;
            const double residual = cj.hess_hs_sq - cj.laplacian * cj.laplacian / n - (g.g_inv * tf * g.g_inv * tf).trace();
            worst_tf = std::max(worst_tf, std::abs(residual) / std::max(1.0, cj.hess_hs_sq));
        }
    }
    v.require(worst_fd <= 1e-6, fmt::format("finite differences worst {}", fmt_g(worst_fd)));
    v.require(worst_tf <= 1e-10, fmt::format("tracefree identity worst {}", fmt_g(worst_tf)));

    const auto s2 = Manifold::sphere2();
    const auto points = testing::halton_points(s2, 200, 0.02);
    double worst_eig = 0.0;
    for (int l = 0; l <= kMaxHarmonicDegree; ++l)
        for (int m = -l; m <= l; ++m) {
            const ScalarField raw(SphericalHarmonicSum{{{l, m, 1.0}}}, s2);
            double sup = 0.0;
            for (const auto& p : points) sup = std::max(sup, std::abs(raw.value(p)));
            const ScalarField f(SphericalHarmonicSum{{{l, m, 1.0 / sup}}}, s2);
            for (const auto& p : points) {
                const auto j = f.covariant_jet(p);
                worst_eig = std::max(worst_eig, std::abs(j.laplacian + l * (l + 1) * j.f));
            }
        }
    v.require(worst_eig <= 1e-8, fmt::format("eigenfunction residual worst {}", fmt_g(worst_eig)));
    return v;
}

Verdict transect() {
    Verdict v;
    const ScalarField field(trig(2, {{{1, 0}, {0, 1}}, {{0, 1}, {0, 0.3}}}), Manifold::torus(2));
    const double x0 = 0.5 + std::asin(0.3) / kTwoPi;
    std::vector<double> ratios, lip_jumps;
    double min_alg = 1e300;
    for (double h : {1e-2, 1e-3, 1e-4, 1e-5}) {
        double jump_alg = 0.0, jump_lip = 0.0;
        Point a(2), b(2);
        for (int i = -1; i < 1; ++i) {
            a << x0 + (i + 0.37) * h, 0.25;
            b << x0 + (i + 1.37) * h, 0.25;
            const auto ja = field.covariant_jet(a), jb = field.covariant_jet(b);
            jump_alg = std::max(jump_alg, std::abs(integrand_algebraic(ja) - integrand_algebraic(jb)));
            jump_lip = std::max(jump_lip, std::abs(integrand_lipschitz(ja) - integrand_lipschitz(jb)));
        }
        min_alg = std::min(min_alg, jump_alg);
        lip_jumps.push_back(jump_lip / h);
        ratios.push_back(jump_alg / jump_lip);
    }
    v.require(min_alg > 1.0, fmt::format("smallest algebraic jump {}", fmt_g(min_alg)));
    const double lip_const = *std::max_element(lip_jumps.begin(), lip_jumps.end());
    v.require(lip_const < 1e3, fmt::format("lipschitz jump / h at most {}", fmt_g(lip_const)));
    for (std::size_t i = 1; i < ratios.size(); ++i) {
        const double growth = ratios[i] / ratios[i - 1];
        v.require(growth >= 5.0 && growth <= 20.0, fmt::format("ratio growth per decade {}", fmt_g(growth)));
    }
    return v;
}

std::string criterion6_csv(const std::vector<std::uint64_t>& seeds, const char* threads) {
    setenv("NODAL_THREADS", threads, 1);
    std::string all;
    for (auto seed : seeds) {
        std::ostringstream out, err;
        cli::run({"compare", "--manifold", "torus2", "--field", "random:[dim=2,max_freq=3,seed=1,scale=1]", "--seed",
                  std::to_string(seed), "--resolution", "512", "--oracle-resolution", "2048", "--tol", "1", "--out", "-",
                  "--no-timing"},
                 out, err);
        all += out.str();
    }
    unsetenv("NODAL_THREADS");
    return all;
}

Verdict determinism(const std::vector<std::uint64_t>& seeds) {
    Verdict v;
    const std::string one = criterion6_csv(seeds, "1");
    const std::string four = criterion6_csv(seeds, "4");
    v.require(!one.empty(), fmt::format("{} bytes of CSV", one.size()));
    v.require(one == four, one == four ? "identical for NODAL_THREADS=1 and 4" : "CSV differs between 1 and 4 threads");
    return v;
}

}  // namespace

int main() {
    std::vector<std::uint64_t> rejected;
    const auto seeds = accepted_seeds(20, &rejected);

    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"circle counting", circle_counting},
        {"empty nodal set", empty_set},
        {"torus lines", torus_lines},
        {"sphere equator and the curvature term", sphere_equator},
        {"zonal harmonic", zonal},
        {"random-field cross-validation", [&] { return random_fields(seeds, rejected); }},
        {"torus3 area", torus3_area},
        {"corner formula", corner},
        {"specialization identities", identities},
        {"jet verification", jets},
        {"integrand smoothness contrast", transect},
        {"determinism", [&] { return determinism(seeds); }},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = Clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.require(false, std::string("exception: ") + e.what());
        }
        failed += !v.pass;
        std::string detail;
        for (const auto& n : v.notes) detail += (detail.empty() ? "" : "; ") + n;
        if (v.failures > 6) detail += fmt::format("; {} more failed checks", v.failures - 6);
        std::printf("%s %2zu %s (%.1fs): %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), seconds_since(t0),
                    detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
