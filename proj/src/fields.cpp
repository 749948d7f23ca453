#include "nodal/fields.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <fmt/format.h>

#include "nodal/errors.hpp"
#include "nodal/parallel.hpp"

namespace nodal {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

using Coeffs = std::vector<double>;

Coeffs legendre(int l) {
    Coeffs prev{1.0};
    if (l == 0) return prev;
    Coeffs cur{0.0, 1.0};
    for (int n = 1; n < l; ++n) {
        // (n+1) P_{n+1} = (2n+1) u P_n - n P_{n-1}
        Coeffs next(n + 2, 0.0);
        for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += (2.0 * n + 1.0) * cur[i];
        for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= n * prev[i];
        for (double& x : next) x /= (n + 1.0);
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur;
}

Coeffs derivative(const Coeffs& p) {
    if (p.size() <= 1) return {0.0};
    Coeffs d(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = static_cast<double>(i) * p[i];
    return d;
}

double horner(const Coeffs& p, double u) {
    double acc = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * u + *it;
    return acc;
}

double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

bool is_integral(double x) { return std::isfinite(x) && x == std::nearbyint(x); }

void validate(const TrigPolynomial& poly, const Manifold& m) {
    if (m.kind() == ManifoldKind::UnitSphere2) {
        throw ConfigError("trig field is not defined on sphere2 (use sph)");
    }
    if (poly.dim != m.dim()) {
        throw ConfigError(fmt::format("trig field has dim {}, manifold {} has dim {}", poly.dim, m.name(), m.dim()));
    }
    for (const auto& t : poly.terms) {
        if (t.k.size() != poly.dim) {
            throw ConfigError(fmt::format("trig term frequency has {} entries, expected {}", t.k.size(), poly.dim));
        }
        if (!std::isfinite(t.a) || !std::isfinite(t.b)) throw ConfigError("trig term has a non-finite coefficient");
        for (int d = 0; d < poly.dim; ++d) {
            if (m.kind() == ManifoldKind::FlatTorus && !is_integral(t.k[d])) {
                throw ConfigError(fmt::format("trig frequency {} is not an integer; required on {}", t.k[d], m.name()));
            }
            if (!std::isfinite(t.k[d])) throw ConfigError("trig frequency is not finite");
        }
    }
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

class XorShift64Star {
public:
    explicit XorShift64Star(std::uint64_t state) : x_(state == 0 ? 0x9E3779B97F4A7C15ULL : state) {}

    std::uint64_t next() noexcept {
        x_ ^= x_ >> 12;
        x_ ^= x_ << 25;
        x_ ^= x_ >> 27;
        return x_ * 0x2545F4914F6CDD1DULL;
    }

private:
    std::uint64_t x_;
};

}  // namespace

TrigPolynomial expand_random(const RandomTrig& spec) {
    if (spec.dim < 1 || spec.dim > kMaxDim) throw ConfigError(fmt::format("random field dim {} not in 1..3", spec.dim));
    if (spec.max_freq < 1) throw ConfigError(fmt::format("random field max_freq must be >= 1, got {}", spec.max_freq));
    if (!std::isfinite(spec.scale)) throw ConfigError("random field scale is not finite");

    const int side = 2 * spec.max_freq + 1;
    int total = 1;
    for (int d = 0; d < spec.dim; ++d) total *= side;

    TrigPolynomial out;
    out.dim = spec.dim;
    std::array<int, kMaxDim> k{};
    for (int flat = 0; flat < total; ++flat) {
        int rem = flat;
        for (int d = spec.dim - 1; d >= 0; --d) {
            k[d] = rem % side - spec.max_freq;
            rem /= side;
        }
        int first_nonzero = 0;
        for (int d = 0; d < spec.dim; ++d) {
            if (k[d] != 0) {
                first_nonzero = k[d];
                break;
            }
        }
        if (first_nonzero <= 0) continue;

        std::uint64_t h = splitmix64(spec.seed);
        for (int d = 0; d < spec.dim; ++d) h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(k[d])));
        XorShift64Star rng(h);
        const double u1 = static_cast<double>((rng.next() >> 11) + 1) * 0x1.0p-53;
        const double u2 = static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));

        TrigTerm term;
        term.k = Vector(spec.dim);
        for (int d = 0; d < spec.dim; ++d) term.k[d] = k[d];
        term.a = spec.scale * r * std::cos(kTwoPi * u2);
        term.b = spec.scale * r * std::sin(kTwoPi * u2);
        out.terms.push_back(std::move(term));
    }
    return out;
}

ScalarField::ScalarField(FieldSpec spec, Manifold manifold) : spec_(std::move(spec)), manifold_(manifold) {
    std::visit(overloaded{
                   [&](const TrigPolynomial& poly) {
                       validate(poly, manifold_);
                       impl_ = poly;
                   },
                   [&](const RandomTrig& rnd) {
                       if (manifold_.kind() == ManifoldKind::UnitSphere2) {
                           throw ConfigError("random trig field is not defined on sphere2");
                       }
                       if (rnd.dim != manifold_.dim()) {
                           throw ConfigError(fmt::format("random field has dim {}, manifold {} has dim {}", rnd.dim,
                                                         manifold_.name(), manifold_.dim()));
                       }
                       auto poly = expand_random(rnd);
                       validate(poly, manifold_);
                       impl_ = std::move(poly);
                   },
                   [&](const SphericalHarmonicSum& sum) {
                       if (manifold_.kind() != ManifoldKind::UnitSphere2) {
                           throw ConfigError(fmt::format("sph field requires sphere2, got {}", manifold_.name()));
                       }
                       std::vector<HarmonicTable> tables;
                       for (const auto& t : sum.terms) {
                           if (t.l < 0 || t.l > kMaxHarmonicDegree) {
                               throw ConfigError(fmt::format("harmonic degree l = {} not in 0..{}", t.l, kMaxHarmonicDegree));
                           }
                           if (std::abs(t.m) > t.l) {
                               throw ConfigError(fmt::format("harmonic order |m| = {} exceeds l = {}", std::abs(t.m), t.l));
                           }
                           if (!std::isfinite(t.c)) throw ConfigError("harmonic coefficient is not finite");
                           HarmonicTable table;
                           table.m = t.m;
                           table.c = t.c;
                           table.q = legendre(t.l);
                           for (int i = 0; i < std::abs(t.m); ++i) table.q = derivative(table.q);
                           table.dq = derivative(table.q);
                           table.d2q = derivative(table.dq);
                           tables.push_back(std::move(table));
                       }
                       impl_ = std::move(tables);
                   },
                   [&](const Polynomial& poly) {
                       if (manifold_.kind() != ManifoldKind::FlatBox) {
                           throw ConfigError(fmt::format("poly field is only defined on boxes, got {}", manifold_.name()));
                       }
                       if (poly.dim != manifold_.dim()) {
                           throw ConfigError(fmt::format("poly field has dim {}, manifold {} has dim {}", poly.dim,
                                                         manifold_.name(), manifold_.dim()));
                       }
                       for (const auto& t : poly.terms) {
                           for (int d = 0; d < kMaxDim; ++d) {
                               if (t.exponents[d] < 0) throw ConfigError("poly exponent must be non-negative");
                               if (d >= poly.dim && t.exponents[d] != 0) {
                                   throw ConfigError("poly exponent given for an axis beyond the field dimension");
                               }
                           }
                           if (!std::isfinite(t.c)) throw ConfigError("poly coefficient is not finite");
                       }
                       impl_ = poly;
                   },
               },
               spec_);
}

ChartJet2 ScalarField::trig_jet(const TrigPolynomial& poly, const Point& p) const {
    const int n = poly.dim;
    ChartJet2 jet{0.0, Vector::Zero(n), Matrix::Zero(n, n)};
    for (const auto& t : poly.terms) {
        const double phase = kTwoPi * t.k.dot(p);
        const double cs = std::cos(phase);
        const double sn = std::sin(phase);
        const double v = t.a * cs + t.b * sn;
        const double dv = -t.a * sn + t.b * cs;
        jet.f += v;
        jet.df += (kTwoPi * dv) * t.k;
        jet.d2f -= (kTwoPi * kTwoPi * v) * (t.k * t.k.transpose());
    }
    return jet;
}

ChartJet2 ScalarField::harmonic_jet(const Point& p) const {
    const auto& tables = std::get<std::vector<HarmonicTable>>(impl_);
    const double theta = p[0];
    const double phi = p[1];
    const double s = std::sin(theta);
    const double c = std::cos(theta);

    ChartJet2 jet{0.0, Vector::Zero(2), Matrix::Zero(2, 2)};
    for (const auto& t : tables) {
        const int m = std::abs(t.m);
        // F(theta) = A(theta) B(theta), A = sin^m theta, B = Q(cos theta)
        const double a0 = ipow(s, m);
        const double a1 = m >= 1 ? m * ipow(s, m - 1) * c : 0.0;
        const double a2 = (m >= 2 ? m * (m - 1) * ipow(s, m - 2) * c * c : 0.0) - m * a0;
        const double q = horner(t.q, c);
        const double dq = horner(t.dq, c);
        const double d2q = horner(t.d2q, c);
        const double b0 = q;
        const double b1 = -s * dq;
        const double b2 = s * s * d2q - c * dq;
        const double f0 = a0 * b0;
        const double f1 = a1 * b0 + a0 * b1;
        const double f2 = a2 * b0 + 2.0 * a1 * b1 + a0 * b2;

        double p0 = 1.0, p1 = 0.0, p2 = 0.0;
        if (t.m > 0) {
            p0 = std::cos(m * phi);
            p1 = -m * std::sin(m * phi);
            p2 = -m * m * p0;
        } else if (t.m < 0) {
            p0 = std::sin(m * phi);
            p1 = m * std::cos(m * phi);
            p2 = -m * m * p0;
        }

        jet.f += t.c * f0 * p0;
        jet.df[0] += t.c * f1 * p0;
        jet.df[1] += t.c * f0 * p1;
        jet.d2f(0, 0) += t.c * f2 * p0;
        jet.d2f(0, 1) += t.c * f1 * p1;
        jet.d2f(1, 1) += t.c * f0 * p2;
    }
    jet.d2f(1, 0) = jet.d2f(0, 1);
    return jet;
}

ChartJet2 ScalarField::poly_jet(const Polynomial& poly, const Point& p) const {
    const int n = poly.dim;
    ChartJet2 jet{0.0, Vector::Zero(n), Matrix::Zero(n, n)};
    for (const auto& t : poly.terms) {
        // factor-wise values and first/second derivatives
        std::array<double, kMaxDim> v{}, d1{}, d2{};
        for (int d = 0; d < n; ++d) {
            const int e = t.exponents[d];
            v[d] = ipow(p[d], e);
            d1[d] = e >= 1 ? e * ipow(p[d], e - 1) : 0.0;
            d2[d] = e >= 2 ? e * (e - 1) * ipow(p[d], e - 2) : 0.0;
        }
        auto product_except = [&](int skip1, int skip2) {
            double r = 1.0;
            for (int d = 0; d < n; ++d) {
                if (d != skip1 && d != skip2) r *= v[d];
            }
            return r;
        };
        jet.f += t.c * product_except(-1, -1);
        for (int i = 0; i < n; ++i) {
            jet.df[i] += t.c * d1[i] * product_except(i, -1);
            jet.d2f(i, i) += t.c * d2[i] * product_except(i, -1);
            for (int j = i + 1; j < n; ++j) {
                const double mixed = t.c * d1[i] * d1[j] * product_except(i, j);
                jet.d2f(i, j) += mixed;
                jet.d2f(j, i) += mixed;
            }
        }
    }
    return jet;
}

double ScalarField::value(const Point& p) const {
    if (manifold_.kind() == ManifoldKind::UnitSphere2) {
        if (p.size() != 2 || !(p[0] >= 0.0 && p[0] <= kPi) || !std::isfinite(p[1])) {
            throw DomainError("sphere2: value requires theta in [0, pi]");
        }
        const auto& tables = std::get<std::vector<HarmonicTable>>(impl_);
        const double s = std::sin(p[0]);
        const double c = std::cos(p[0]);
        double f = 0.0;
        for (const auto& t : tables) {
            const int m = std::abs(t.m);
            double ang = 1.0;
            if (t.m > 0) ang = std::cos(m * p[1]);
            if (t.m < 0) ang = std::sin(m * p[1]);
            f += t.c * ipow(s, m) * horner(t.q, c) * ang;
        }
        return f;
    }
    return chart_jet(p).f;
}

ChartJet2 ScalarField::chart_jet(const Point& p) const {
    manifold_.check_point(p);
    return std::visit(overloaded{
                          [&](const TrigPolynomial& poly) { return trig_jet(poly, p); },
                          [&](const std::vector<HarmonicTable>&) { return harmonic_jet(p); },
                          [&](const Polynomial& poly) { return poly_jet(poly, p); },
                      },
                      impl_);
}

CovariantJet2 ScalarField::covariant_jet(const Point& p) const {
    const ChartJet2 chart = chart_jet(p);
    if (manifold_.is_flat()) {
        // identity metric, zero connection and curvature
        const int n = manifold_.dim();
        MetricAtPoint metric{Matrix::Identity(n, n), Matrix::Identity(n, n), 1.0};
        ChristoffelAtPoint gamma;
        for (int k = 0; k < n; ++k) gamma.gamma[k] = Matrix::Zero(n, n);
        return nodal::covariant_jet(chart, metric, gamma, RicciAtPoint{Matrix::Zero(n, n)});
    }
    return nodal::covariant_jet(chart, metric_at(manifold_, p), christoffel_at(manifold_, p), ricci_at(manifold_, p));
}

std::vector<double> ScalarField::sample_grid(const std::vector<std::vector<double>>& axes) const {
    const int n = static_cast<int>(axes.size());
    if (n != manifold_.dim()) {
        throw UsageError(fmt::format("sample_grid: {} axes for a {}-dimensional manifold", n, manifold_.dim()));
    }
    std::array<std::size_t, kMaxDim> extent{1, 1, 1};
    std::size_t total = 1;
    for (int d = 0; d < n; ++d) {
        extent[d] = axes[d].size();
        total *= extent[d];
    }
    std::vector<double> out(total);

    auto unflatten = [&](std::size_t flat) {
        std::array<std::size_t, kMaxDim> idx{};
        for (int d = n - 1; d >= 0; --d) {
            idx[d] = flat % extent[d];
            flat /= extent[d];
        }
        return idx;
    };

    if (const auto* poly = std::get_if<TrigPolynomial>(&impl_)) {
        // Per-axis phase tables: term value = Re((a - i b) prod_d exp(2 pi i k_d x_d)).
        using Complex = std::complex<double>;
        const std::size_t terms = poly->terms.size();
        std::vector<std::vector<Complex>> table(terms * n);
        for (std::size_t t = 0; t < terms; ++t) {
            for (int d = 0; d < n; ++d) {
                auto& row = table[t * n + d];
                row.resize(extent[d]);
                for (std::size_t i = 0; i < extent[d]; ++i) {
                    const double ph = kTwoPi * poly->terms[t].k[d] * axes[d][i];
                    row[i] = Complex(std::cos(ph), std::sin(ph));
                }
            }
        }
        for_each_chunk(total, kChunkSize, [&](std::size_t, std::size_t begin, std::size_t end) {
            for (std::size_t flat = begin; flat < end; ++flat) {
                const auto idx = unflatten(flat);
                double acc = 0.0;
                for (std::size_t t = 0; t < terms; ++t) {
                    Complex z = table[t * n][idx[0]];
                    for (int d = 1; d < n; ++d) z *= table[t * n + d][idx[d]];
                    acc += poly->terms[t].a * z.real() + poly->terms[t].b * z.imag();
                }
                out[flat] = acc;
            }
        });
        return out;
    }

    for_each_chunk(total, kChunkSize, [&](std::size_t, std::size_t begin, std::size_t end) {
        Point p(n);
        for (std::size_t flat = begin; flat < end; ++flat) {
            const auto idx = unflatten(flat);
            for (int d = 0; d < n; ++d) p[d] = axes[d][idx[d]];
            out[flat] = value(p);
        }
    });
    return out;
}

ChartJet2 eval_chart_jet(const FieldSpec& spec, const Manifold& m, const Point& p) {
    return ScalarField(spec, m).chart_jet(p);
}

CovariantJet2 covariant_jet(const ChartJet2& chart, const MetricAtPoint& metric, const ChristoffelAtPoint& gamma,
                            const RicciAtPoint& ric) {
    const int n = static_cast<int>(chart.df.size());
    CovariantJet2 j;
    j.dim = n;
    j.f = chart.f;

    // H_ij = d_i d_j f - Gamma^k_ij d_k f
    j.hess = chart.d2f;
    for (int k = 0; k < n; ++k) j.hess -= chart.df[k] * gamma.gamma[k];

    j.grad = metric.g_inv * chart.df;
    j.grad_norm = std::sqrt(std::max(0.0, chart.df.dot(j.grad)));
    j.eta = std::hypot(j.f, j.grad_norm);
    j.sigma = (j.f > 0.0) - (j.f < 0.0);

    j.laplacian = (metric.g_inv.cwiseProduct(j.hess)).sum();
    j.hess_qf = j.grad.dot(j.hess * j.grad);

    const Matrix mixed = metric.g_inv * j.hess;  // H^i_j
    j.hess_hs_sq = (mixed * mixed).trace();

    const Vector lowered = j.hess * j.grad;  // H_{ij} grad^j
    j.nabla_grad = metric.g_inv * lowered;
    j.hess_grad_nabla = lowered.dot(j.nabla_grad);

    j.ric_qf = j.grad.dot(ric.ric * j.grad);
    return j;
}

ScanResult scan_nondegeneracy(const ScalarField& field, int resolution) {
    if (resolution < 8) throw ConfigError(fmt::format("scan resolution must be >= 8, got {}", resolution));
    const Manifold& m = field.manifold();
    const int n = m.dim();

    std::vector<std::vector<double>> axes(n);
    switch (m.kind()) {
        case ManifoldKind::FlatTorus:
            for (auto& ax : axes) {
                for (int i = 0; i < resolution; ++i) ax.push_back(static_cast<double>(i) / resolution);
            }
            break;
        case ManifoldKind::FlatBox:
            for (auto& ax : axes) {
                for (int i = 0; i <= resolution; ++i) ax.push_back(static_cast<double>(i) / resolution);
            }
            break;
        case ManifoldKind::UnitSphere2:
            for (int j = 1; j < resolution; ++j) axes[0].push_back(j * kPi / resolution);
            for (int k = 0; k < 2 * resolution; ++k) axes[1].push_back(k * kPi / resolution);
            break;
    }

    std::array<std::size_t, kMaxDim> extent{1, 1, 1};
    std::size_t total = 1;
    for (int d = 0; d < n; ++d) {
        extent[d] = axes[d].size();
        total *= extent[d];
    }

    struct Partial {
        double min_eta = std::numeric_limits<double>::infinity();
        double sup = 0.0;
        std::size_t argmin = 0;
    };
    const auto partials = map_chunks<Partial>(total, kChunkSize, [&](std::size_t begin, std::size_t end) {
        Partial part;
        Point p(n);
        for (std::size_t flat = begin; flat < end; ++flat) {
            std::size_t rem = flat;
            for (int d = n - 1; d >= 0; --d) {
                p[d] = axes[d][rem % extent[d]];
                rem /= extent[d];
            }
            const ChartJet2 chart = field.chart_jet(p);
            double grad_sq = chart.df.squaredNorm();
            if (m.kind() == ManifoldKind::UnitSphere2) {
                const double s = std::sin(p[0]);
                grad_sq = chart.df[0] * chart.df[0] + chart.df[1] * chart.df[1] / (s * s);
            }
            const double eta = std::sqrt(chart.f * chart.f + grad_sq);
            if (eta < part.min_eta) {
                part.min_eta = eta;
                part.argmin = flat;
            }
            part.sup = std::max(part.sup, std::abs(chart.f));
        }
        return part;
    });

    Partial best;
    for (const auto& part : partials) {
        if (part.min_eta < best.min_eta) {
            best.min_eta = part.min_eta;
            best.argmin = part.argmin;
        }
        best.sup = std::max(best.sup, part.sup);
    }

    ScanResult out;
    out.min_eta = best.min_eta;
    out.sup_abs = best.sup;
    out.argmin = Point(n);
    std::size_t rem = best.argmin;
    for (int d = n - 1; d >= 0; --d) {
        out.argmin[d] = axes[d][rem % extent[d]];
        rem /= extent[d];
    }
    return out;
}

double nondegeneracy_scan(const FieldSpec& spec, const Manifold& m, int resolution) {
    return scan_nondegeneracy(ScalarField(spec, m), resolution).min_eta;
}

void require_nondegenerate(const ScanResult& scan, const Manifold& m) {
    if (!scan.degenerate()) return;
    std::string where;
    for (int d = 0; d < scan.argmin.size(); ++d) where += fmt::format("{}{}", d ? ", " : "", scan.argmin[d]);
    throw DegenerateFieldError(fmt::format("degenerate field on {}: min_eta = {:.6g} <= threshold {:.6g} near ({})",
                                           m.name(), scan.min_eta, scan.threshold(), where),
                               scan.min_eta, scan.threshold());
}

}  // namespace nodal
