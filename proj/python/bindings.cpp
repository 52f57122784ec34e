// Python module: dict configs in, dicts of scalars and NumPy arrays out.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qdstirap/sweep.hpp"

namespace py = pybind11;
using namespace qdstirap;

namespace {

nlohmann::json to_nlohmann(const py::handle& obj) {
    const auto dumps = py::module_::import("json").attr("dumps");
    return nlohmann::json::parse(dumps(obj).cast<std::string>());
}

py::object to_python(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

RunConfig config_arg(const py::object& obj) {
    if (obj.is_none()) return RunConfig{};
    return config_from_json(to_nlohmann(obj));
}

py::array_t<double> array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::dict trajectory_dict(const Trajectory& tr, const Basis& basis) {
    const std::size_t n = tr.t.size();
    std::vector<double> x(n), y(n), xx(n), photons(n);
    for (std::size_t k = 0; k < n; ++k) {
        x[k] = tr.population(basis, QdLevel::X, k);
        y[k] = tr.population(basis, QdLevel::Y, k);
        xx[k] = tr.population(basis, QdLevel::XX, k);
        photons[k] = tr.photons(basis, k);
    }
    py::dict d;
    d["t"] = array(tr.t);
    d["rho_X"] = array(x);
    d["rho_Y"] = array(y);
    d["rho_XX"] = array(xx);
    d["n_cav"] = array(photons);
    d["P_e"] = array(tr.emitted);
    return d;
}

py::dict simulate_py(const py::object& config, bool indistinguishability, bool trajectory, bool spectrum,
                     double spectrum_half_width, int spectrum_points, bool eigenenergies) {
    const RunConfig c = config_arg(config);
    OutputSelection o;
    o.indistinguishability = indistinguishability;
    o.trajectory = trajectory;
    o.spectrum = spectrum;
    o.eigenenergies = eigenenergies;
    SpectrumSettings s;
    s.half_width = spectrum_half_width;
    s.points = spectrum_points;
    RunResult r;
    {
        py::gil_scoped_release release;
        r = simulate(c, o, nullptr, s);
    }
    py::dict out = to_python(summary_json(r));
    if (trajectory) out["trajectory"] = trajectory_dict(r.trajectory, Basis(c.model.n_max));
    if (r.spectrum) {
        py::dict sp;
        sp["omega"] = array(r.spectrum->omega);
        sp["S_c"] = array(r.spectrum->value);
        out["spectrum"] = sp;
    }
    if (r.eigenenergies) {
        const auto& e = *r.eigenenergies;
        const std::size_t cols = e.values.empty() ? 0 : e.values.front().size();
        py::array_t<double> values({e.values.size(), cols});
        auto m = values.mutable_unchecked<2>();
        for (std::size_t i = 0; i < e.values.size(); ++i)
            for (std::size_t j = 0; j < cols; ++j) m(i, j) = e.values[i][j];
        py::dict ed;
        ed["t"] = array(e.t);
        ed["values"] = values;
        out["eigenenergies"] = ed;
    }
    return out;
}

py::list run_sweep_py(const py::object& config, const std::string& axis, const std::vector<double>& values,
                      bool temperature_dephasing, bool renormalize, bool indistinguishability,
                      std::optional<std::filesystem::path> out_dir, int workers, bool resume) {
    SweepSpec spec;
    spec.base = config_arg(config);
    spec.axis = parse_sweep_axis(axis);
    spec.values = values;
    spec.phonons = spec.base.model.phonons_enabled;
    spec.renormalize = renormalize || spec.base.model.renormalize_inputs;
    spec.temperature_dephasing = temperature_dephasing;
    spec.outputs.indistinguishability = indistinguishability;
    SweepOptions opt;
    opt.out_dir = std::move(out_dir);
    opt.workers = workers;
    opt.resume = resume;
    SweepResult r;
    {
        py::gil_scoped_release release;
        r = run_sweep(spec, opt);
    }
    py::list out;
    for (const auto& p : r.points) {
        py::dict d;
        d["index"] = p.index;
        d["value"] = p.value;
        d["ok"] = p.ok;
        d["error"] = p.error;
        d["summary"] = p.ok ? to_python(p.summary) : py::none();
        out.append(d);
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "qdstirap engine bindings";
    m.attr("__version__") = QDSTIRAP_VERSION;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def("default_config", [] { return to_python(to_json(RunConfig{})); }, "Baseline configuration as a dict.");
    m.def(
        "validate_config", [](const py::object& c) { return to_python(to_json(config_arg(c))); }, py::arg("config"),
        "Resolve and check a config dict; returns the complete config.");
    m.def(
        "load_config", [](const std::filesystem::path& p) { return to_python(to_json(load_config(p))); },
        py::arg("path"), "Read a YAML configuration file.");
    m.def(
        "render_config", [](const py::object& c) { return render_config(config_arg(c)); },
        py::arg("config") = py::none(), "Resolved config as YAML text.");

    m.def("simulate", &simulate_py, py::arg("config") = py::none(), py::kw_only(),
          py::arg("indistinguishability") = true, py::arg("trajectory") = false, py::arg("spectrum") = false,
          py::arg("spectrum_half_width") = 600.0, py::arg("spectrum_points") = 2401,
          py::arg("eigenenergies") = false,
          "Run one parameter point. Returns the summary dict (emitted_photons, indistinguishability, "
          "mean_displacement, ...) plus optional 'trajectory', 'spectrum' and 'eigenenergies' arrays.");

    m.def("run_sweep", &run_sweep_py, py::arg("config"), py::arg("axis"), py::arg("values"), py::kw_only(),
          py::arg("temperature_dephasing") = false, py::arg("renormalize") = false,
          py::arg("indistinguishability") = true, py::arg("out_dir") = py::none(), py::arg("workers") = 1,
          py::arg("resume") = true,
          "One-parameter sweep; axis is temperature, gamma_prime, delta, pulse_width or alpha.");

    py::class_<PhononBath, std::shared_ptr<PhononBath>>(m, "Bath")
        .def(py::init([](double alpha, double omega_b, double temperature) {
                 return std::const_pointer_cast<PhononBath>(PhononBath::create(alpha, omega_b, temperature));
             }),
             py::arg("alpha"), py::arg("omega_b"), py::arg("temperature"),
             "Phonon bath tables; alpha in ns^2, omega_b in ns^-1, temperature in K.")
        .def_property_readonly("phi0", &PhononBath::phi0)
        .def_property_readonly("mean_displacement", &PhononBath::mean_displacement)
        .def_property_readonly("polaron_shift", &PhononBath::polaron_shift)
        .def_property_readonly("tau_max", &PhononBath::tau_max)
        .def("phase", &PhononBath::phase, py::arg("tau"))
        .def(
            "green", [](const PhononBath& b, double tau) {
                const GreenValues g = b.green(tau);
                return py::make_tuple(g.gg, g.gu);
            },
            py::arg("tau"), "(G_g, G_u) at tau.")
        .def(
            "gamma", [](const PhononBath& b, const std::string& channel, double omega) {
                if (channel != "g" && channel != "u") throw ConfigError("channel must be 'g' or 'u'");
                return b.gamma(channel == "g" ? Channel::G : Channel::U, omega);
            },
            py::arg("channel"), py::arg("omega"), "Half-Fourier transform Gamma_m(omega).");
}
