#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "steklov/asympt.hpp"
#include "steklov/error.hpp"
#include "steklov/inverse.hpp"
#include "steklov/io.hpp"
#include "steklov/marchenko.hpp"
#include "steklov/muntz.hpp"
#include "steklov/spectrum.hpp"

namespace py = pybind11;
using namespace steklov;
using io::json;

namespace {

py::object to_python(const json& j) {
    switch (j.type()) {
        case json::value_t::null: return py::none();
        case json::value_t::boolean: return py::bool_(j.get<bool>());
        case json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
        case json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
        case json::value_t::number_float: return py::float_(j.get<double>());
        case json::value_t::string: return py::str(j.get<std::string>());
        case json::value_t::array: {
            py::list out;
            for (const auto& v : j) out.append(to_python(v));
            return out;
        }
        default: {
            py::dict out;
            for (const auto& [k, v] : j.items()) out[py::str(k)] = to_python(v);
            return out;
        }
    }
}

json from_python(const py::handle& o) {
    return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_steklov, m) {
    m.doc() = "Steklov spectra of warped balls and the associated inverse problem";

    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    py::class_<TruncatedTerm>(m, "TruncatedTerm")
        .def(py::init<double, double, int>(), py::arg("amplitude"), py::arg("knot"), py::arg("power"))
        .def_readonly("amplitude", &TruncatedTerm::amplitude)
        .def_readonly("knot", &TruncatedTerm::knot)
        .def_readonly("power", &TruncatedTerm::power);

    py::class_<Warping>(m, "Warping")
        .def(py::init<int, int, int, double, bool, const std::map<int, double>&, std::vector<TruncatedTerm>>(),
             py::arg("dimension"), py::arg("p") = 3, py::arg("m") = 4, py::arg("A") = 10.0, py::arg("smooth") = false,
             py::arg("coefficients") = std::map<int, double>{}, py::arg("truncated") = std::vector<TruncatedTerm>{})
        .def_static("unit", &Warping::unit, py::arg("dimension"), py::arg("p") = 3, py::arg("m") = 4, py::arg("A") = 3.0)
        .def_static("from_dict", [](const py::dict& d) { return io::warping_from_json(from_python(d)); })
        .def("to_dict", [](const Warping& w) { return to_python(io::to_json(w)); })
        .def_property_readonly("dimension", &Warping::dimension)
        .def_property_readonly("p", &Warping::p)
        .def_property_readonly("m", &Warping::m)
        .def_property_readonly("coefficients", &Warping::coefficients)
        .def("with_coefficients", &Warping::with_coefficients)
        .def("__call__", [](const Warping& w, double r) { return w.eval(r, 0)[0]; })
        .def("eval", &Warping::eval, py::arg("r"), py::arg("order") = 0)
        .def("potential", [](const Warping& w, double x) { return HalfLinePotential(w)(x); })
        .def("potential_jet", [](const Warping& w, int order) { return potential_jet_at_zero(HalfLinePotential(w), order); })
        .def("__repr__", [](const Warping& w) { return "Warping(" + io::to_json(w).dump() + ")"; });

    py::class_<TransversalSpectrum>(m, "TransversalSpectrum")
        .def_static("round", &TransversalSpectrum::round, py::arg("dimension"))
        .def_static("custom",
                    [](int d, const std::vector<std::pair<double, std::int64_t>>& entries) {
                        std::vector<Eigenpair> e;
                        for (const auto& [mu, mult] : entries) e.push_back({mu, mult});
                        return TransversalSpectrum::custom(d, std::move(e));
                    },
                    py::arg("dimension"), py::arg("entries"))
        .def_static("from_csv", &TransversalSpectrum::from_csv)
        .def_property_readonly("dimension", &TransversalSpectrum::dimension)
        .def_property_readonly("is_round", &TransversalSpectrum::is_round);

    py::class_<WeylOptions>(m, "WeylOptions")
        .def(py::init([](double tol) { return WeylOptions{tol}; }), py::arg("tol") = 1e-10)
        .def_readwrite("tol", &WeylOptions::tol);

    py::class_<SpectrumEntry>(m, "SpectrumEntry")
        .def_readonly("sigma", &SpectrumEntry::sigma)
        .def_readonly("multiplicity", &SpectrumEntry::multiplicity)
        .def_readonly("kappa", &SpectrumEntry::kappa);

    py::class_<SteklovSpectrum>(m, "SteklovSpectrum")
        .def_readonly("dimension", &SteklovSpectrum::dimension)
        .def_readonly("f0", &SteklovSpectrum::f0)
        .def_readonly("f0p", &SteklovSpectrum::f0p)
        .def_readonly("entries", &SteklovSpectrum::entries)
        .def("__len__", &SteklovSpectrum::size)
        .def("expanded", &SteklovSpectrum::expanded, py::arg("count") = -1)
        .def("expanded_kappa", &SteklovSpectrum::expanded_kappa, py::arg("count") = -1)
        .def("to_csv", &spectrum_csv)
        .def("write_csv", &write_spectrum_csv)
        .def_static("read_csv", &read_spectrum_csv);

    m.def("forward_spectrum", &forward_spectrum, py::arg("warping"), py::arg("transversal"), py::arg("count"),
          py::arg("options") = WeylOptions{}, py::call_guard<py::gil_scoped_release>());

    m.def(
        "weyl_m",
        [](const Warping& w, double kappa, double tol) {
            const auto d = weyl_m(HalfLineOperator(HalfLinePotential(w), WeylOptions{tol}), kappa);
            return py::dict(py::arg("kappa") = d.kappa, py::arg("M") = d.M, py::arg("S_inf_at_0") = d.S_inf_at_0,
                            py::arg("residual") = d.residual);
        },
        py::arg("warping"), py::arg("kappa"), py::arg("tol") = 1e-10);

    m.def(
        "dirichlet_eigenvalues",
        [](const Warping& w) { return dirichlet_eigenvalues(HalfLineOperator(HalfLinePotential(w)), w.dimension()); },
        py::arg("warping"));

    m.def(
        "beta_coefficients", [](const std::vector<double>& jet, int N) { return beta_recursion(jet, N).beta; },
        py::arg("jet"), py::arg("N"));
    m.def(
        "expansion_sigma",
        [](const std::vector<double>& beta, double f0, double f0p, int d, double kappa, int N) {
            return expansion_sigma(BetaCoefficients{beta}, f0, f0p, d, kappa, N);
        },
        py::arg("beta"), py::arg("f0"), py::arg("f0p"), py::arg("dimension"), py::arg("kappa"), py::arg("N"));

    m.def(
        "kernel_diagonal",
        [](const Warping& w, const std::vector<double>& xs) {
            const auto K = solve_kernel(HalfLineOperator(HalfLinePotential(w)));
            std::vector<double> out;
            for (double x : xs) out.push_back(K.K(x, x));
            return out;
        },
        py::arg("warping"), py::arg("x"), py::call_guard<py::gil_scoped_release>());

    m.def(
        "transfer_identity",
        [](const Warping& w, const Warping& wt, const std::vector<double>& kappas) {
            const auto rep = transfer_identity_check(w, wt, kappas);
            py::list rows;
            for (const auto& r : rep.rows)
                rows.append(py::dict(py::arg("kappa") = r.kappa, py::arg("lhs") = r.lhs,
                                     py::arg("rhs_profile") = r.rhs_profile, py::arg("rhs_volterra") = r.rhs_volterra,
                                     py::arg("mismatch") = r.mismatch));
            return py::dict(py::arg("rows") = rows, py::arg("worst") = rep.worst);
        },
        py::arg("warping"), py::arg("warping2"), py::arg("kappas"));

    m.def(
        "blaschke_index",
        [](const std::vector<double>& exponents) {
            const auto b = blaschke_index(MuntzSequence(exponents));
            return py::dict(py::arg("value") = b.value, py::arg("argmax") = b.argmax,
                            py::arg("separated") = b.separated, py::arg("closed_form") = b.closed_form);
        },
        py::arg("exponents"));

    m.def(
        "truncation_selector",
        [](double eps, double b, int cap) {
            const auto t = truncation_selector(eps, b, cap);
            return py::dict(py::arg("n") = t.n, py::arg("uncapped") = t.uncapped, py::arg("capped") = t.capped);
        },
        py::arg("eps"), py::arg("b"), py::arg("cap") = 40);

    m.def(
        "local_uniqueness_probe",
        [](const Warping& w, const Warping& wt, double a, std::size_t count) {
            json j;
            {
                py::gil_scoped_release release;
                j = io::to_json(local_uniqueness_probe(w, wt, a, count));
            }
            return to_python(j);
        },
        py::arg("warping"), py::arg("warping2"), py::arg("a"), py::arg("count") = 40);

    m.def(
        "reconstruct_warping",
        [](const SteklovSpectrum& target, const TransversalSpectrum& ts, int degree, const Warping& init) {
            Reconstruction rec{init, {}, {}, 0, false, ""};
            {
                py::gil_scoped_release release;
                rec = reconstruct_warping(target, ts, degree, init);
            }
            return py::make_tuple(rec.warping, to_python(io::to_json(rec)));
        },
        py::arg("target"), py::arg("transversal"), py::arg("degree"), py::arg("init"));

    m.def(
        "stability_experiment",
        [](const py::dict& config, const std::string& base_dir) {
            const auto cfg = io::stability_config_from_json(from_python(config), base_dir);
            json j;
            {
                py::gil_scoped_release release;
                j = io::to_json(stability_experiment(cfg));
            }
            return to_python(j);
        },
        py::arg("config"), py::arg("base_dir") = ".");
}
