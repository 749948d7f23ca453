#include "nodal/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "nodal/errors.hpp"
#include "nodal/parallel.hpp"
#include "nodal/summation.hpp"

namespace nodal {
namespace {

// Hess(f)(grad f, grad f) / |grad f|^2, or laplacian/n at near-critical points.
double direction_ratio(const CovariantJet2& j) {
    if (j.grad_norm < kGradGuard) return j.laplacian / j.dim;
    return j.hess_qf / (j.grad_norm * j.grad_norm);
}

// atan(x)/x and tanh(x)/x near 0
double atan_over_x_series(double x) { return 1.0 - x * x / 3.0; }

double sech_squared(double x) {
    if (std::abs(x) > kCoshCutoff) return 0.0;
    const double c = std::cosh(x);
    return 1.0 / (c * c);
}

std::string format_point(const Point& p) {
    std::string s;
    for (int d = 0; d < p.size(); ++d) s += fmt::format("{}{:.17g}", d ? ", " : "", p[d]);
    return s;
}

}  // namespace

double integrand_algebraic(const CovariantJet2& j) {
    if (j.sigma == 0) return 0.0;
    const double g2 = j.grad_norm * j.grad_norm;
    const double eta2 = j.eta * j.eta;
    return j.sigma / (eta2 * j.eta) * (j.f * g2 + j.hess_qf - eta2 * j.laplacian);
}

double integrand_arctan(const CovariantJet2& j) {
    const double g2 = j.grad_norm * j.grad_norm;
    const double ratio = direction_ratio(j);
    const double eta2 = j.eta * j.eta;

    // |grad f|^-1 arctan(|grad f| / f); equals (pi/2) sigma / |grad f| = 0 term at f == 0
    double first = 0.0;
    if (j.f != 0.0) {
        double atan_over_g = 0.0;
        if (j.grad_norm < kGradGuard) {
            atan_over_g = atan_over_x_series(j.grad_norm / j.f) / j.f;
        } else {
            atan_over_g = std::atan(j.grad_norm / j.f) / j.grad_norm;
        }
        first = atan_over_g * (ratio - j.laplacian);
    }
    const double second = (g2 - j.f * ratio) / eta2;
    return first + second;
}

double integrand_tanh(const CovariantJet2& j) {
    if (j.f == 0.0) return 0.0;
    const double g2 = j.grad_norm * j.grad_norm;
    const double ratio = direction_ratio(j);
    const double x = j.grad_norm / j.f;

    double tanh_over_g = 0.0;
    if (j.grad_norm < kGradGuard) {
        tanh_over_g = atan_over_x_series(x) / j.f;
    } else {
        tanh_over_g = std::tanh(x) / j.grad_norm;
    }
    const double first = tanh_over_g * (ratio - j.laplacian);

    const double sech2 = sech_squared(x);
    const double second = sech2 == 0.0 ? 0.0 : sech2 * (g2 / (j.f * j.f) - ratio / j.f);
    return first + second;
}

double integrand_general_G(const GBigSpec& spec, const CovariantJet2& j) {
    if (j.f == 0.0) return 0.0;
    const double af = std::abs(j.f);
    const double gn = j.grad_norm;
    const double x = gn / af;
    const double f2 = j.f * j.f;

    const double first = spec.G(x) * (gn * gn / f2 - j.laplacian / j.f);
    // Hess(f)(grad f, grad f) / (f^2 |grad f|) = ratio |grad f| / f^2
    const double hess_term = direction_ratio(j) * gn / f2;
    const double second = j.sigma * spec.G_prime(x) * (gn * gn * gn / (f2 * j.f) - hess_term);
    return first + second;
}

double integrand_g1(const GSpec& spec, const CovariantJet2& j) {
    if (j.f == 0.0) return 0.0;
    const double gn = j.grad_norm;
    const double g2 = gn * gn;
    const double eta2 = j.eta * j.eta;
    const double x = gn / std::abs(j.f);

    const double first =
        j.sigma / (eta2 * j.eta) * spec.g(x) * (j.f * g2 + j.hess_qf - eta2 * j.laplacian);

    double second = 0.0;
    const double gp = spec.g_prime(x);
    if (gp != 0.0) {
        second = gn / (j.f * j.f * j.eta) * gp * (g2 - j.f * direction_ratio(j));
    }
    return first + second;
}

double integrand_g2(const GSpec& spec, const CovariantJet2& j) {
    if (j.f == 0.0) return 0.0;
    const double gn = j.grad_norm;
    const double ratio = direction_ratio(j);
    const double x = gn / std::abs(j.f);

    // sigma g(x) / |grad f| = (g(x)/x) / f
    double g_over_gn = 0.0;
    if (gn < kGradGuard) {
        double g_over_x = 0.0;
        if (x < kGradGuard) {
            // g(x)/x = g'(0) + g''(0) x / 2 + ..., with g''(0) x ~ g'(x) - g'(0)
            const double gp0 = spec.g_prime(0.0);
            g_over_x = gp0 + 0.5 * (spec.g_prime(x) - gp0);
        } else {
            g_over_x = spec.g(x) / x;
        }
        g_over_gn = g_over_x / j.f;
    } else {
        g_over_gn = j.sigma * spec.g(x) / gn;
    }
    const double first = g_over_gn * (ratio - j.laplacian);

    double second = 0.0;
    const double gp = spec.g_prime(x);
    if (gp != 0.0) second = gp * (gn * gn / (j.f * j.f) - ratio / j.f);
    return first + second;
}

double integrand_lipschitz(const CovariantJet2& j, bool include_ricci) {
    const double af = std::abs(j.f);
    if (af == 0.0) return 0.0;
    const double g2 = j.grad_norm * j.grad_norm;
    const double eta2 = j.eta * j.eta;
    const double eta3 = eta2 * j.eta;
    const double lap = j.laplacian;
    const double ric = include_ricci ? j.ric_qf : 0.0;

    const double smooth = af / eta3 * (g2 - j.f * lap + lap * lap - j.hess_hs_sq - ric);
    const double gradient_of_weight =
        3.0 * af / (eta3 * eta2) * (j.f * j.hess_qf + j.hess_grad_nabla - lap * (j.f * g2 + j.hess_qf));
    return smooth + gradient_of_weight;
}

GSpec builtin_g(std::string_view name) {
    if (name == "one") return {"one", [](double) { return 1.0; }, [](double) { return 0.0; }};
    if (name == "tanh") {
        return {"tanh", [](double x) { return std::tanh(x); },
                [](double x) {
                    const double t = std::tanh(x);
                    return 1.0 - t * t;
                }};
    }
    if (name == "arctan") {
        return {"arctan", [](double x) { return 2.0 / kPi * std::atan(x); },
                [](double x) { return 2.0 / kPi / (1.0 + x * x); }};
    }
    throw ConfigError(fmt::format("unknown g profile '{}' (expected one, tanh, arctan)", name));
}

GBigSpec builtin_G(std::string_view name) {
    if (name == "invsqrt") {
        return {"invsqrt", [](double x) { return 1.0 / std::sqrt(1.0 + x * x); },
                [](double x) {
                    const double s = 1.0 + x * x;
                    return -x / (s * std::sqrt(s));
                }};
    }
    if (name == "arctan") {
        return {"arctan",
                [](double x) {
                    if (x < 1e-4) return 2.0 / kPi * (1.0 - x * x / 3.0 + x * x * x * x / 5.0);
                    return 2.0 / kPi * std::atan(x) / x;
                },
                [](double x) {
                    if (x < 1e-4) return 2.0 / kPi * (-2.0 * x / 3.0 + 4.0 * x * x * x / 5.0);
                    return 2.0 / kPi * (1.0 / (x * (1.0 + x * x)) - std::atan(x) / (x * x));
                }};
    }
    throw ConfigError(fmt::format("unknown G profile '{}' (expected invsqrt, arctan)", name));
}

Estimator Estimator::algebraic() { return {EstimatorKind::Algebraic, "algebraic"}; }
Estimator Estimator::arctan() { return {EstimatorKind::Arctan, "arctan"}; }
Estimator Estimator::tanh() { return {EstimatorKind::Tanh, "tanh"}; }
Estimator Estimator::corner() { return {EstimatorKind::Corner, "corner"}; }

Estimator Estimator::lipschitz(bool include_ricci) {
    Estimator e{EstimatorKind::Lipschitz, include_ricci ? "lipschitz" : "lipschitz:noricci"};
    e.include_ricci_ = include_ricci;
    return e;
}

Estimator Estimator::general(GBigSpec G) {
    Estimator e{EstimatorKind::GeneralG, "G:" + G.name};
    e.G_ = std::move(G);
    return e;
}

Estimator Estimator::g1(GSpec g) {
    Estimator e{EstimatorKind::G1, "g1:" + g.name};
    e.g_ = std::move(g);
    return e;
}

Estimator Estimator::g2(GSpec g) {
    Estimator e{EstimatorKind::G2, "g2:" + g.name};
    e.g_ = std::move(g);
    return e;
}

Estimator Estimator::parse(std::string_view name) {
    if (name == "algebraic") return algebraic();
    if (name == "arctan") return arctan();
    if (name == "tanh") return tanh();
    if (name == "lipschitz") return lipschitz(true);
    if (name == "lipschitz:noricci") return lipschitz(false);
    if (name == "corner") return corner();
    if (name.starts_with("g1:")) return g1(builtin_g(name.substr(3)));
    if (name.starts_with("g2:")) return g2(builtin_g(name.substr(3)));
    if (name.starts_with("G:")) return general(builtin_G(name.substr(2)));
    throw ConfigError(fmt::format("unknown estimator '{}'", name));
}

std::vector<std::string> Estimator::closed_manifold_names() {
    return {"algebraic", "arctan", "tanh", "lipschitz", "g1:tanh", "g2:tanh", "g2:arctan", "G:invsqrt"};
}

double Estimator::prefactor() const noexcept { return kind_ == EstimatorKind::Arctan ? 1.0 / kPi : 0.5; }

double Estimator::integrand(const CovariantJet2& j) const {
    switch (kind_) {
        case EstimatorKind::Algebraic: return integrand_algebraic(j);
        case EstimatorKind::Arctan: return integrand_arctan(j);
        case EstimatorKind::Tanh: return integrand_tanh(j);
        case EstimatorKind::GeneralG: return integrand_general_G(G_, j);
        case EstimatorKind::G1: return integrand_g1(g_, j);
        case EstimatorKind::G2: return integrand_g2(g_, j);
        case EstimatorKind::Lipschitz: return integrand_lipschitz(j, include_ricci_);
        // interior part of the boundary-corrected formula
        case EstimatorKind::Corner: return integrand_algebraic(j);
    }
    return 0.0;
}

std::vector<EstimateReport> estimate_many(const ScalarField& field, std::span<const Estimator> estimators,
                                          const QuadratureRule& rule) {
    const auto start = std::chrono::steady_clock::now();
    const Manifold& m = field.manifold();
    if (rule.dim != m.dim()) {
        throw ConfigError(fmt::format("rule '{}' has dim {}, manifold {} has dim {}", rule.label, rule.dim, m.name(), m.dim()));
    }
    for (const auto& est : estimators) {
        if (est.kind() == EstimatorKind::Corner && !m.has_boundary()) {
            throw ConfigError(fmt::format("estimator 'corner' needs a box manifold, got {}", m.name()));
        }
        if (est.kind() != EstimatorKind::Corner && m.has_boundary()) {
            throw ConfigError(fmt::format("estimator '{}' is for closed manifolds; use 'corner' on {}", est.name(), m.name()));
        }
    }

    const ScanResult scan = scan_nondegeneracy(field, std::max(8, rule.resolution.front()));
    require_nondegenerate(scan, m);

    const std::size_t count = rule.size();
    const std::size_t n_est = estimators.size();

    struct Partial {
        std::vector<CompensatedSum> sums;
        std::vector<double> lo, hi;
        double min_eta = std::numeric_limits<double>::infinity();
        double sup = 0.0;
        std::size_t zeros = 0;
        std::size_t argmin = 0;
    };

    const auto partials = map_chunks<Partial>(count, kChunkSize, [&](std::size_t begin, std::size_t end) {
        Partial part;
        part.sums.resize(n_est);
        part.lo.assign(n_est, std::numeric_limits<double>::infinity());
        part.hi.assign(n_est, -std::numeric_limits<double>::infinity());
        for (std::size_t i = begin; i < end; ++i) {
            const Point& p = rule.nodes[i];
            const CovariantJet2 jet = field.covariant_jet(p);
            if (jet.eta < part.min_eta) {
                part.min_eta = jet.eta;
                part.argmin = i;
            }
            part.sup = std::max(part.sup, std::abs(jet.f));
            if (jet.f == 0.0) ++part.zeros;
            for (std::size_t e = 0; e < n_est; ++e) {
                const double v = estimators[e].integrand(jet);
                if (!std::isfinite(v)) {
                    throw NumericalError(fmt::format("non-finite integrand for '{}' at node {} ({})", estimators[e].name(),
                                                     i, format_point(p)));
                }
                part.sums[e].add(rule.weights[i] * v);
                part.lo[e] = std::min(part.lo[e], v);
                part.hi[e] = std::max(part.hi[e], v);
            }
        }
        return part;
    });

    std::vector<CompensatedSum> totals(n_est);
    std::vector<double> lo(n_est, std::numeric_limits<double>::infinity());
    std::vector<double> hi(n_est, -std::numeric_limits<double>::infinity());
    double min_eta = std::numeric_limits<double>::infinity();
    double sup = 0.0;
    std::size_t zeros = 0;
    std::size_t argmin = 0;
    for (const auto& part : partials) {
        for (std::size_t e = 0; e < n_est; ++e) {
            totals[e].merge(part.sums[e]);
            lo[e] = std::min(lo[e], part.lo[e]);
            hi[e] = std::max(hi[e], part.hi[e]);
        }
        if (part.min_eta < min_eta) {
            min_eta = part.min_eta;
            argmin = part.argmin;
        }
        sup = std::max(sup, part.sup);
        zeros += part.zeros;
    }

    ScanResult combined = scan;
    if (min_eta < combined.min_eta) {
        combined.min_eta = min_eta;
        combined.argmin = rule.nodes[argmin];
    }
    combined.sup_abs = std::max(combined.sup_abs, sup);
    require_nondegenerate(combined, m);

    const double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    std::vector<EstimateReport> reports;
    reports.reserve(n_est);
    for (std::size_t e = 0; e < n_est; ++e) {
        EstimateReport r;
        r.estimator = estimators[e].name();
        r.manifold = m.name();
        r.rule = rule.label;
        r.resolution = rule.resolution;
        r.value = estimators[e].prefactor() * totals[e].value();
        r.min_eta = combined.min_eta;
        r.integrand_min = lo[e];
        r.integrand_max = hi[e];
        r.node_count = count;
        r.zero_nodes = zeros;
        r.runtime_ms = elapsed;
        if (!std::isfinite(r.value)) throw NumericalError(fmt::format("non-finite estimate for '{}'", r.estimator));
        reports.push_back(std::move(r));
    }
    return reports;
}

EstimateReport estimate(const ScalarField& field, const Estimator& est, const QuadratureRule& rule) {
    return estimate_many(field, std::span(&est, 1), rule).front();
}

EstimateReport estimate(const FieldSpec& spec, const Manifold& m, const Estimator& est, const QuadratureRule& rule) {
    if (est.kind() == EstimatorKind::Corner) return estimate_corner(ScalarField(spec, m), rule.resolution.front());
    return estimate(ScalarField(spec, m), est, rule);
}

EstimateReport estimate_corner(const ScalarField& field, int n) {
    const auto start = std::chrono::steady_clock::now();
    const Manifold& m = field.manifold();
    if (!m.has_boundary()) throw ConfigError(fmt::format("corner formula needs a box manifold, got {}", m.name()));
    const int dim = m.dim();

    const QuadratureRule interior = box_rule(dim, n);
    const auto faces = box_face_rules(dim, n);

    const ScanResult scan = scan_nondegeneracy(field, n);
    require_nondegenerate(scan, m);
    const double eps = scan.threshold();

    // corners of the box must stay off the zero set
    for (int c = 0; c < (1 << dim); ++c) {
        Point p(dim);
        for (int d = 0; d < dim; ++d) p[d] = (c >> d) & 1;
        const double f = field.value(p);
        if (std::abs(f) <= eps) {
            throw DegenerateFieldError(
                fmt::format("zero set passes through the corner ({}) of {}: |f| = {:.3g}", format_point(p), m.name(), std::abs(f)),
                std::abs(f), eps);
        }
    }

    CompensatedSum flux;
    double min_face_eta = std::numeric_limits<double>::infinity();
    for (const auto& face : faces) {
        for (std::size_t i = 0; i < face.rule.size(); ++i) {
            const Point& p = face.rule.nodes[i];
            const CovariantJet2 jet = field.covariant_jet(p);
            double tangential_sq = 0.0;
            for (int d = 0; d < dim; ++d) {
                if (d != face.axis) tangential_sq += jet.grad[d] * jet.grad[d];
            }
            const double transversal = std::max(std::abs(jet.f), std::sqrt(tangential_sq));
            min_face_eta = std::min(min_face_eta, jet.eta);
            if (jet.eta <= eps || transversal <= eps) {
                throw DegenerateFieldError(
                    fmt::format("zero set is not transverse to face {} of {} near ({}): eta = {:.3g}, max(|f|, |tangential grad|) = {:.3g}",
                                face.id, m.name(), format_point(p), jet.eta, transversal),
                    std::min(jet.eta, transversal), eps);
            }
            // <F(grad f / f), nu> with F(u) = u / sqrt(1 + |u|^2) is sigma <grad f, nu> / eta
            flux.add(face.rule.weights[i] * jet.sigma * jet.grad.dot(face.normal) / jet.eta);
        }
    }

    const Estimator interior_est = Estimator::corner();
    EstimateReport inner = estimate_many(field, std::span(&interior_est, 1), interior).front();
    const double value = 0.5 * flux.value() + inner.value;  // inner already carries the 1/2

    EstimateReport r = inner;
    r.value = value;
    r.min_face_eta = min_face_eta;
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (!std::isfinite(r.value)) throw NumericalError("non-finite corner estimate");
    return r;
}

std::vector<EstimateReport> run_estimators(const ScalarField& field, std::span<const Estimator> estimators,
                                           const std::vector<int>& resolution) {
    const Manifold& m = field.manifold();
    if (m.has_boundary()) {
        std::vector<EstimateReport> out;
        for (const auto& est : estimators) {
            if (est.kind() != EstimatorKind::Corner) {
                throw ConfigError(fmt::format("estimator '{}' is for closed manifolds; use 'corner' on {}", est.name(), m.name()));
            }
            if (resolution.size() != 1) throw ConfigError("box resolution takes a single N");
            out.push_back(estimate_corner(field, resolution.front()));
        }
        return out;
    }
    return estimate_many(field, estimators, rule_for(m, resolution));
}

}  // namespace nodal
