#include "nodal/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nodal/errors.hpp"
#include "nodal/field_io.hpp"

namespace nodal::cli {
namespace {

std::string num(double v) {
    if (std::isnan(v)) return "NA";
    return fmt::format("{:.17g}", v);
}

struct Setup {
    Manifold manifold = Manifold::torus(1);
    FieldSpec spec;
    std::vector<Estimator> estimators;
    std::vector<std::vector<int>> resolutions;
};

Setup prepare(const RunConfig& config, bool estimators_required) {
    if (config.manifold.empty()) throw ConfigError("--manifold is required");
    Setup s;
    s.manifold = Manifold::parse(config.manifold);

    if (config.field.empty() == config.field_file.empty()) {
        throw ConfigError("exactly one of --field and --field-file is required");
    }
    s.spec = config.field.empty() ? load_field_file(config.field_file) : parse_field(config.field);
    if (config.has_seed) {
        auto* rnd = std::get_if<RandomTrig>(&s.spec);
        if (!rnd) throw ConfigError("--seed applies only to random fields");
        rnd->seed = config.seed;
    }

    if (config.estimators.empty()) {
        if (estimators_required) throw ConfigError("--estimator: at least one formula is required");
        if (s.manifold.has_boundary()) {
            s.estimators.push_back(Estimator::corner());
        } else {
            for (const auto& name : Estimator::closed_manifold_names()) s.estimators.push_back(Estimator::parse(name));
        }
    } else {
        for (const auto& name : config.estimators) s.estimators.push_back(Estimator::parse(name));
    }

    if (config.resolutions.empty()) {
        s.resolutions.push_back(default_resolution(s.manifold));
    } else {
        for (const auto& text : config.resolutions) s.resolutions.push_back(parse_resolution(text));
    }
    for (std::size_t i = 1; i < s.resolutions.size(); ++i) {
        if (!(s.resolutions[i - 1] < s.resolutions[i]) || s.resolutions[i - 1][0] >= s.resolutions[i][0]) {
            throw ConfigError("--resolution: values must be strictly increasing");
        }
    }
    return s;
}

class CsvSink {
public:
    CsvSink(const std::string& path, std::ostream& stdout_stream) {
        if (path == "-") {
            stream_ = &stdout_stream;
        } else if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw ConfigError(fmt::format("--out: cannot open '{}' for writing", path));
            stream_ = &file_;
        }
    }

    bool active() const { return stream_ != nullptr; }
    bool is_stdout() const { return stream_ != nullptr && !file_.is_open(); }

    void line(const std::string& text) {
        if (stream_) *stream_ << text << '\n';
    }

private:
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const DegenerateFieldError& e) {
        err << "error: " << e.what() << " (min_eta = " << num(e.min_eta()) << ")\n";
        return kDegenerate;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kNumerical;
    } catch (const ResolutionError& e) {
        err << "resolution error: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::domain_error& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double relative_deviation(double value, double reference) {
    const double diff = std::abs(value - reference);
    return reference == 0.0 ? diff : diff / std::abs(reference);
}

void print_table_header(std::ostream& out) {
    out << fmt::format("{:<20} {:>12} {:>22} {:>12} {:>12}\n", "estimator", "resolution", "value", "min_eta", "runtime_ms");
}

}  // namespace

std::vector<int> parse_resolution(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string piece;
    while (std::getline(ss, piece, 'x')) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(piece, &used);
            if (used != piece.size() || v <= 0) throw std::invalid_argument(piece);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError(fmt::format("--resolution: cannot parse '{}'", text));
        }
    }
    if (out.empty() || out.size() > 2) throw ConfigError(fmt::format("--resolution: cannot parse '{}'", text));
    return out;
}

std::string format_resolution(const std::vector<int>& resolution) {
    std::string s;
    for (std::size_t i = 0; i < resolution.size(); ++i) s += fmt::format("{}{}", i ? "x" : "", resolution[i]);
    return s;
}

std::vector<int> default_resolution(const Manifold& m) {
    switch (m.kind()) {
        case ManifoldKind::UnitSphere2: return {256, 512};
        case ManifoldKind::FlatBox: return {m.dim() == 1 ? 1024 : 512};
        case ManifoldKind::FlatTorus: return {m.dim() == 1 ? 2048 : m.dim() == 2 ? 512 : 96};
    }
    return {64};
}

std::vector<int> default_oracle_resolution(const Manifold& m) {
    switch (m.kind()) {
        case ManifoldKind::UnitSphere2: return {512, 1024};
        case ManifoldKind::FlatBox: return {m.dim() == 1 ? 64 : 2048};
        case ManifoldKind::FlatTorus: return {m.dim() == 1 ? 64 : m.dim() == 2 ? 2048 : 192};
    }
    return {64};
}

std::string csv_row(const EstimateReport& r, bool timing) {
    return fmt::format("{},{},{},{},{},{},{},{},{},{},{}", r.estimator, r.manifold, r.rule, format_resolution(r.resolution),
                       num(r.value), num(r.min_eta), num(r.integrand_min), num(r.integrand_max), r.node_count, r.zero_nodes,
                       timing ? num(r.runtime_ms) : "NA");
}

std::string csv_row(const OracleReport& r, const std::string& manifold) {
    return fmt::format("{},{},{},{},{}", to_string(r.method), manifold, format_resolution(r.resolution), num(r.value),
                       r.component_hint);
}

int cmd_estimate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Setup s = prepare(config, false);
        const ScalarField field(s.spec, s.manifold);
        CsvSink csv(config.out, out);
        csv.line(kEstimateHeader);
        if (!csv.is_stdout()) print_table_header(out);
        for (const auto& res : s.resolutions) {
            for (const auto& r : run_estimators(field, s.estimators, res)) {
                csv.line(csv_row(r, config.timing));
                if (!csv.is_stdout()) {
                    out << fmt::format("{:<20} {:>12} {:>22.15g} {:>12.4g} {:>12.1f}\n", r.estimator,
                                       format_resolution(r.resolution), r.value, r.min_eta, r.runtime_ms);
                }
            }
        }
        return static_cast<int>(kOk);
    });
}

int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Setup s = prepare(config, false);
        if (s.resolutions.size() != 1) throw ConfigError("compare takes a single --resolution");
        const ScalarField field(s.spec, s.manifold);

        const auto reports = run_estimators(field, s.estimators, s.resolutions.front());

        const std::vector<int> oracle_res = config.oracle_resolution.empty() ? default_oracle_resolution(s.manifold)
                                            : config.oracle_resolution == "0" ? std::vector<int>{}
                                                                               : parse_resolution(config.oracle_resolution);
        std::optional<OracleReport> oracle;
        if (!oracle_res.empty()) oracle = run_oracle(field, oracle_res);

        std::vector<double> values;
        for (const auto& r : reports) values.push_back(r.value);
        const double reference = oracle ? oracle->value : median(values);
        const std::string ref_name = oracle ? "oracle" : "median";

        CsvSink csv(config.out, out);
        csv.line(kCompareHeader);
        const bool table = !csv.is_stdout();
        if (table) {
            out << fmt::format("{} on {} (reference: {} = {:.15g})\n", s.manifold.name(), format_resolution(s.resolutions.front()),
                               ref_name, reference);
            out << fmt::format("{:<28} {:>22} {:>12}\n", "formula", "value", "rel_dev");
        }

        bool ok = true;
        for (const auto& r : reports) {
            const double dev = relative_deviation(r.value, reference);
            ok = ok && dev <= config.tol;
            csv.line(fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}", r.estimator, r.manifold, r.rule,
                                 format_resolution(r.resolution), num(r.value), num(reference), num(dev), num(r.min_eta),
                                 num(r.integrand_min), num(r.integrand_max), r.node_count, r.zero_nodes,
                                 config.timing ? num(r.runtime_ms) : "NA"));
            if (table) out << fmt::format("{:<28} {:>22.15g} {:>12.3e}\n", r.estimator, r.value, dev);
        }
        if (oracle) {
            const std::string name = "oracle:" + to_string(oracle->method);
            csv.line(fmt::format("{},{},{},{},{},{},{},NA,NA,NA,NA,NA,NA", name, s.manifold.name(),
                                 fmt::format("{}-{}", to_string(oracle->method), format_resolution(oracle->resolution)),
                                 format_resolution(oracle->resolution), num(oracle->value), num(reference), num(0.0)));
            if (table) out << fmt::format("{:<28} {:>22.15g} {:>12.3e}\n", name, oracle->value, 0.0);
        }
        if (table) out << (ok ? "PASS" : "FAIL") << fmt::format(" (tol {:g})\n", config.tol);
        return static_cast<int>(ok ? kOk : kNumerical);
    });
}

int cmd_converge(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Setup s = prepare(config, true);
        if (s.resolutions.size() < 3) throw ConfigError("converge needs at least 3 --resolution values");
        const ScalarField field(s.spec, s.manifold);

        const std::vector<int> oracle_res = config.oracle_resolution.empty() ? default_oracle_resolution(s.manifold)
                                            : config.oracle_resolution == "0" ? std::vector<int>{}
                                                                               : parse_resolution(config.oracle_resolution);
        std::optional<double> oracle;
        if (!oracle_res.empty()) oracle = run_oracle(field, oracle_res).value;

        CsvSink csv(config.out.empty() ? "-" : config.out, out);
        csv.line(kConvergeHeader);
        for (const auto& est : s.estimators) {
            for (const auto& res : s.resolutions) {
                const auto r = run_estimators(field, std::span(&est, 1), res).front();
                const double abs_err = oracle ? std::abs(r.value - *oracle) : std::nan("");
                csv.line(fmt::format("{},{},{},{},{},{},{}", r.estimator, format_resolution(r.resolution), num(r.value),
                                     num(abs_err), num(r.integrand_max), num(r.min_eta),
                                     config.timing ? num(r.runtime_ms) : "NA"));
            }
        }
        return static_cast<int>(kOk);
    });
}

int cmd_oracle(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        RunConfig relaxed = config;
        relaxed.estimators.clear();
        const Setup s = prepare(relaxed, false);
        const ScalarField field(s.spec, s.manifold);

        const std::vector<int> res = config.oracle_resolution.empty() || config.oracle_resolution == "0"
                                         ? (config.resolutions.empty() ? default_oracle_resolution(s.manifold)
                                                                       : s.resolutions.front())
                                         : parse_resolution(config.oracle_resolution);
        std::vector<Primitive> primitives;
        const auto report = run_oracle(field, res, config.dump.empty() ? nullptr : &primitives);

        CsvSink csv(config.out.empty() ? "-" : config.out, out);
        csv.line(kOracleHeader);
        csv.line(csv_row(report, s.manifold.name()));
        if (!csv.is_stdout()) out << fmt::format("{} {}: {:.15g}\n", to_string(report.method), format_resolution(report.resolution), report.value);

        if (!config.dump.empty()) {
            std::ofstream dump(config.dump, std::ios::binary | std::ios::trunc);
            if (!dump) throw ConfigError(fmt::format("--dump: cannot open '{}'", config.dump));
            write_primitives(dump, primitives);
        }
        return static_cast<int>(kOk);
    });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Nodal-set volume by integral formulas, checked against level-set extraction", "nodal"};
    app.require_subcommand(1);

    RunConfig config;
    std::string seed_text;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--manifold", config.manifold, "torus1|torus2|torus3|sphere2|box1|box2")->required();
        sub->add_option("--field", config.field, "inline field spec or JSON");
        sub->add_option("--field-file", config.field_file, "file holding a field spec");
        sub->add_option("--resolution", config.resolutions, "N, or NxM on sphere2 (repeatable)");
        sub->add_option("--out", config.out, "CSV output path, '-' for stdout");
        sub->add_option("--seed", seed_text, "seed override for random fields");
        sub->add_flag("--no-timing{false}", config.timing, "write NA in the runtime column");
    };

    auto* estimate = app.add_subcommand("estimate", "evaluate volume formulas");
    add_common(estimate);
    estimate->add_option("--estimator", config.estimators, "formula name (repeatable)");

    auto* compare = app.add_subcommand("compare", "compare formulas against the level-set oracle");
    add_common(compare);
    compare->add_option("--estimator", config.estimators, "formula name (repeatable)");
    compare->add_option("--oracle-resolution", config.oracle_resolution, "oracle resolution, 0 disables");
    compare->add_option("--tol", config.tol, "relative tolerance for the exit status");

    auto* converge = app.add_subcommand("converge", "resolution sweep as CSV");
    add_common(converge);
    converge->add_option("--estimator", config.estimators, "formula name (repeatable)");
    converge->add_option("--oracle-resolution", config.oracle_resolution, "oracle resolution, 0 disables");

    auto* oracle = app.add_subcommand("oracle", "level-set oracle only");
    add_common(oracle);
    oracle->add_option("--oracle-resolution", config.oracle_resolution, "oracle resolution");
    oracle->add_option("--dump", config.dump, "write extracted points/segments/triangles here");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }

    if (!seed_text.empty()) {
        try {
            std::size_t used = 0;
            config.seed = std::stoull(seed_text, &used);
            if (used != seed_text.size()) throw std::invalid_argument(seed_text);
            config.has_seed = true;
        } catch (const std::exception&) {
            err << "config error: --seed: cannot parse '" << seed_text << "'\n";
            return kConfigError;
        }
    }

    if (estimate->parsed()) return cmd_estimate(config, out, err);
    if (compare->parsed()) return cmd_compare(config, out, err);
    if (converge->parsed()) return cmd_converge(config, out, err);
    return cmd_oracle(config, out, err);
}

}  // namespace nodal::cli
