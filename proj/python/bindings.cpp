#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nodal/errors.hpp"
#include "nodal/estimators.hpp"
#include "nodal/field_io.hpp"
#include "nodal/fields.hpp"
#include "nodal/oracle.hpp"

namespace py = pybind11;
using namespace nodal;

namespace {

Point to_point(const std::vector<double>& x) {
    if (x.empty() || x.size() > static_cast<std::size_t>(kMaxDim)) throw UsageError("point must have 1 to 3 coordinates");
    Point p(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) p[static_cast<Eigen::Index>(i)] = x[i];
    return p;
}

std::vector<double> to_list(const Vector& v) { return {v.data(), v.data() + v.size()}; }

std::vector<std::vector<double>> to_rows(const Matrix& m) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) rows[static_cast<std::size_t>(i)].push_back(m(i, j));
    return rows;
}

ScalarField make_field(const std::string& manifold, const std::string& field) {
    return ScalarField(parse_field(field), Manifold::parse(manifold));
}

py::dict report_dict(const EstimateReport& r) {
    py::dict d;
    d["estimator"] = r.estimator;
    d["manifold"] = r.manifold;
    d["rule"] = r.rule;
    d["resolution"] = r.resolution;
    d["value"] = r.value;
    d["min_eta"] = r.min_eta;
    d["integrand_min"] = r.integrand_min;
    d["integrand_max"] = r.integrand_max;
    d["node_count"] = r.node_count;
    d["zero_nodes"] = r.zero_nodes;
    d["runtime_ms"] = r.runtime_ms;
    return d;
}

py::list estimate_py(const std::string& manifold, const std::string& field, const std::vector<std::string>& estimators,
                  const std::vector<int>& resolution) {
    const auto f = make_field(manifold, field);
    std::vector<Estimator> ests;
    if (estimators.empty()) {
        if (f.manifold().has_boundary()) {
            ests.push_back(Estimator::corner());
        } else {
            for (const auto& n : Estimator::closed_manifold_names()) ests.push_back(Estimator::parse(n));
        }
    } else {
        for (const auto& n : estimators) ests.push_back(Estimator::parse(n));
    }
    std::vector<EstimateReport> reports;
    {
        py::gil_scoped_release release;
        reports = run_estimators(f, ests, resolution);
    }
    py::list out;
    for (const auto& r : reports) out.append(report_dict(r));
    return out;
}

py::dict oracle_py(const std::string& manifold, const std::string& field, const std::vector<int>& resolution,
                bool converge) {
    const auto f = make_field(manifold, field);
    py::dict d;
    if (converge) {
        ConvergedOracle c;
        {
            py::gil_scoped_release release;
            c = self_converge(f, resolution);
        }
        d["method"] = to_string(c.fine.method);
        d["resolution"] = c.fine.resolution;
        d["value"] = c.fine.value;
        d["coarse"] = c.coarse.value;
        d["uncertainty"] = c.uncertainty;
        d["extrapolated"] = c.extrapolated;
        d["component_hint"] = c.fine.component_hint;
    } else {
        OracleReport r;
        {
            py::gil_scoped_release release;
            r = run_oracle(f, resolution);
        }
        d["method"] = to_string(r.method);
        d["resolution"] = r.resolution;
        d["value"] = r.value;
        d["component_hint"] = r.component_hint;
    }
    return d;
}

py::dict scan_py(const std::string& manifold, const std::string& field, int resolution) {
    const auto s = scan_nondegeneracy(make_field(manifold, field), resolution);
    py::dict d;
    d["min_eta"] = s.min_eta;
    d["sup_abs"] = s.sup_abs;
    d["argmin"] = to_list(s.argmin);
    d["threshold"] = s.threshold();
    d["degenerate"] = s.degenerate();
    return d;
}

py::dict metric_py(const std::string& manifold, const std::vector<double>& x) {
    const auto m = Manifold::parse(manifold);
    const auto g = metric_at(m, to_point(x));
    py::dict d;
    d["g"] = to_rows(g.g);
    d["g_inv"] = to_rows(g.g_inv);
    d["sqrt_det"] = g.sqrt_det;
    return d;
}

py::dict jet_py(const std::string& manifold, const std::string& field, const std::vector<double>& x) {
    const auto j = make_field(manifold, field).covariant_jet(to_point(x));
    py::dict d;
    d["f"] = j.f;
    d["grad"] = to_list(j.grad);
    d["grad_norm"] = j.grad_norm;
    d["hess"] = to_rows(j.hess);
    d["laplacian"] = j.laplacian;
    d["eta"] = j.eta;
    d["sigma"] = j.sigma;
    d["hess_qf"] = j.hess_qf;
    d["hess_hs_sq"] = j.hess_hs_sq;
    d["nabla_grad"] = to_list(j.nabla_grad);
    d["hess_grad_nabla"] = j.hess_grad_nabla;
    d["ric_qf"] = j.ric_qf;
    return d;
}

py::list random_terms(int dim, int max_freq, std::uint64_t seed, double scale) {
    py::list out;
    for (const auto& t : expand_random(RandomTrig{dim, max_freq, seed, scale}).terms) {
        py::dict d;
        d["k"] = to_list(t.k);
        d["a"] = t.a;
        d["b"] = t.b;
        out.append(d);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_nodalvol, m) {
    m.doc() = "Nodal-set volumes from integral formulas, with a level-set oracle";

    static py::exception<DegenerateFieldError> degenerate(m, "DegenerateFieldError", PyExc_RuntimeError);
    static py::exception<NumericalError> numerical(m, "NumericalError", PyExc_ArithmeticError);
    static py::exception<ResolutionError> resolution(m, "ResolutionError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const DegenerateFieldError& e) {
            py::set_error(degenerate, e.what());
        } catch (const NumericalError& e) {
            py::set_error(numerical, e.what());
        } catch (const ResolutionError& e) {
            py::set_error(resolution, e.what());
        }
    });

    m.def("estimate", &estimate_py, py::arg("manifold"), py::arg("field"), py::arg("estimators") = std::vector<std::string>{},
          py::arg("resolution"), "Run volume formulas; returns one dict per formula.");
    m.def("oracle", &oracle_py, py::arg("manifold"), py::arg("field"), py::arg("resolution"), py::arg("converge") = false,
          "Level-set oracle. With converge=True also runs at doubled resolution.");
    m.def("scan", &scan_py, py::arg("manifold"), py::arg("field"), py::arg("resolution") = 256,
          "Vertex-grid nondegeneracy scan.");
    m.def("metric", &metric_py, py::arg("manifold"), py::arg("x"));
    m.def("jet", &jet_py, py::arg("manifold"), py::arg("field"), py::arg("x"), "Covariant 2-jet at a chart point.");
    m.def("expand_random", &random_terms, py::arg("dim"), py::arg("max_freq"), py::arg("seed"), py::arg("scale") = 1.0);
    m.def("normalize_field", [](const std::string& field) { return to_json(parse_field(field)); }, py::arg("field"),
          "Canonical JSON form of an inline or JSON field spec.");
    m.def("estimator_names", &Estimator::closed_manifold_names);
}
