// qdstirap command-line front end.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 numerical or I/O
// failure.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "qdstirap/csv.hpp"
#include "qdstirap/sweep.hpp"

using namespace qdstirap;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

// Config file, baseline selection and one flag per schema key.
struct ConfigOptions {
    std::string config_path;
    bool seeded_defaults = false;
    bool no_phonons = false;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags; // "section.name" -> text

    void attach(CLI::App* app) {
        auto* cfg = app->add_option("--config,-c", config_path, "YAML configuration file")->check(CLI::ExistingFile);
        auto* seeded = app->add_flag("--seeded-defaults", seeded_defaults,
                                     "start from the built-in baseline parameters (no config file)");
        seeded->excludes(cfg);
        app->add_flag("--no-phonons", no_phonons, "disable the phonon bath (no dissipator, no renormalization)");
        app->add_option("--set", sets, "generic override, key=value or section.key=value")->take_all();
        for (const auto& key : config_schema()) {
            std::string flag = key.name;
            if (key.section == "phonons" && key.name == "enabled") flag = "phonons_enabled";
            for (auto& ch : flag) {
                if (ch == '_') ch = '-';
            }
            const std::string unit(units::native_unit(key.dimension));
            std::string help = key.description;
            if (!unit.empty()) help += fmt::format(" [{}]", unit);
            const std::string id = key.section + "." + key.name;
            app->add_option_function<std::string>(
                "--" + flag, [this, id](const std::string& v) { flags[id] = v; }, help)
                ->group("Parameters");
        }
    }

    RunConfig resolve() const {
        RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
        for (const auto& key : config_schema()) {
            auto it = flags.find(key.section + "." + key.name);
            if (it != flags.end()) key.set(config, it->second);
        }
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError(fmt::format("--set expects key=value, got '{}'", s));
            apply_override(config, s.substr(0, eq), s.substr(eq + 1));
        }
        if (no_phonons) config.model.phonons_enabled = false;
        validate(config);
        return config;
    }
};

std::vector<double> parse_list(const std::string& text, units::Dimension dim) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!item.empty()) out.push_back(units::parse_quantity(item, dim));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw ConfigError("empty value list");
    return out;
}

// "start:stop:count", inclusive, linear.
std::vector<double> parse_range(const std::string& text, units::Dimension dim) {
    const auto a = text.find(':');
    const auto b = a == std::string::npos ? std::string::npos : text.find(':', a + 1);
    if (b == std::string::npos) throw ConfigError(fmt::format("range must be start:stop:count, got '{}'", text));
    const double lo = units::parse_quantity(text.substr(0, a), dim);
    const double hi = units::parse_quantity(text.substr(a + 1, b - a - 1), dim);
    int count = 0;
    try {
        count = std::stoi(text.substr(b + 1));
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("range count must be an integer, got '{}'", text.substr(b + 1)));
    }
    if (count < 1) throw ConfigError("range count must be positive");
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back(count == 1 ? lo : lo + (hi - lo) * k / (count - 1));
    return out;
}

void print_summary(const RunResult& r) {
    fmt::print("mean_displacement      {:.6f}\n", r.mean_displacement);
    fmt::print("emitted_photons        {:.6f}\n", r.emitted_photons);
    if (r.indistinguishability) fmt::print("indistinguishability   {:.6f}\n", *r.indistinguishability);
    const auto& d = r.trajectory.diagnostics;
    fmt::print("max_trace_drift        {:.3e}\n", d.max_trace_drift);
    fmt::print("max_hermiticity_error  {:.3e}\n", d.max_hermiticity_error);
    fmt::print("min_eigenvalue         {:.3e}\n", d.min_eigenvalue);
    fmt::print("wall_seconds           {:.2f}\n", r.wall_seconds);
}

OutputSelection parse_outputs(const std::string& text) {
    OutputSelection o;
    o.indistinguishability = false;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (item == "ne" || item == "N_e" || item.empty()) {
            // always computed
        } else if (item == "i" || item == "I" || item == "indistinguishability") {
            o.indistinguishability = true;
        } else if (item == "spectrum") {
            o.spectrum = true;
        } else if (item == "trajectory") {
            o.trajectory = true;
        } else if (item == "eigenenergies") {
            o.eigenenergies = true;
        } else if (item == "correlations") {
            o.correlations = true;
        } else {
            throw ConfigError(fmt::format("unknown sweep output '{}'", item));
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return o;
}

int run_main(int argc, char** argv) {
    CLI::App app{"Polaron master-equation simulator for a cavity-coupled biexciton-cascade single-photon source"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(QDSTIRAP_VERSION));
    bool verbose = false;
    bool quiet = false;
    app.add_flag("--verbose,-v", verbose, "debug logging");
    app.add_flag("--quiet,-q", quiet, "warnings and errors only");

    // run
    ConfigOptions run_cfg;
    std::string run_out;
    bool run_no_i = false;
    bool run_correlations = false;
    bool run_spectrum = false;
    bool run_eigen = false;
    bool run_json = false;
    auto* run = app.add_subcommand("run", "simulate one parameter point");
    run_cfg.attach(run);
    run->add_option("--out,-o", run_out, "directory for trajectory.csv, emission.csv and optional tables");
    run->add_flag("--no-indistinguishability", run_no_i, "skip the two-time correlations");
    run->add_flag("--correlations", run_correlations, "write correlations.csv (t, tau, Re g1, Im g1, g2)");
    run->add_flag("--spectrum", run_spectrum, "write spectrum.csv");
    run->add_flag("--eigenenergies", run_eigen, "write eigenenergies.csv");
    run->add_flag("--json", run_json, "print the summary as JSON");

    // sweep
    ConfigOptions sweep_cfg;
    std::string axis;
    std::string values_text;
    std::string range_text;
    std::string sweep_out;
    std::string outputs_text = "ne,i";
    std::string replay;
    int workers = 1;
    bool no_resume = false;
    bool temperature_dephasing = false;
    bool renormalize = false;
    bool compare = false;
    auto* sweep = app.add_subcommand("sweep", "run a one-parameter sweep");
    sweep_cfg.attach(sweep);
    sweep->add_option("--axis", axis, "temperature | gamma_prime | delta | pulse_width | alpha");
    auto* vopt = sweep->add_option("--values", values_text, "comma-separated axis values, units allowed");
    auto* ropt = sweep->add_option("--range", range_text, "start:stop:count (inclusive, linear)");
    vopt->excludes(ropt);
    sweep->add_option("--out,-o", sweep_out, "sweep output directory")->required();
    sweep->add_option("--outputs", outputs_text, "ne,i,spectrum,trajectory,eigenenergies,correlations");
    sweep->add_option("--workers,-j", workers, "concurrent points")->check(CLI::PositiveNumber);
    sweep->add_flag("--no-resume", no_resume, "recompute points already stored in the output directory");
    sweep->add_flag("--temperature-dephasing", temperature_dephasing, "gamma'(T) = gamma'_0 + slope T");
    sweep->add_flag("--renormalize", renormalize, "treat the supplied couplings as bare values");
    sweep->add_flag("--compare-renormalization", compare, "run bare-fixed and effective-fixed temperature sweeps");
    sweep->add_option("--replay", replay, "rerun the sweep recorded in a manifest.json")->check(CLI::ExistingFile);

    // spectrum
    ConfigOptions spec_cfg;
    std::string spec_out;
    std::string half_width_text = "600";
    int spec_points = 2401;
    auto* spectrum = app.add_subcommand("spectrum", "cavity-emitted spectrum of one parameter point");
    spec_cfg.attach(spectrum);
    spectrum->add_option("--out,-o", spec_out, "output CSV (omega, S_c)")->required();
    spectrum->add_option("--half-width", half_width_text, "detuning half-range around omega_c [ns^-1]");
    spectrum->add_option("--points", spec_points, "detuning samples")->check(CLI::Range(2, 1000000));

    // eigenenergies
    ConfigOptions eig_cfg;
    std::string eig_out;
    int n_trunc = 1;
    std::string t_step_text = "0.001";
    std::string t_stop_text;
    auto* eigen = app.add_subcommand("eigenenergies", "instantaneous eigenvalues of the system Hamiltonian");
    eig_cfg.attach(eigen);
    eigen->add_option("--out,-o", eig_out, "output CSV (t, lambda_1..)")->required();
    eigen->add_option("--n-max-trunc", n_trunc, "photon truncation of the diagonalised Hamiltonian")
        ->check(CLI::Range(1, 8));
    eigen->add_option("--t-step", t_step_text, "time step [ns]");
    eigen->add_option("--t-stop", t_stop_text, "last time [ns] (default: pulse end + 0.05 ns)");

    // bath
    ConfigOptions bath_cfg;
    std::string bath_out;
    std::string temps_text = "0:50:51";
    int green_stride = 1;
    int kernel_points = 1201;
    auto* bath = app.add_subcommand("bath", "phonon bath tables: <B>(T), G_g(tau), Gamma(omega)");
    bath_cfg.attach(bath);
    bath->add_option("--out,-o", bath_out, "output directory")->required();
    bath->add_option("--temperatures", temps_text, "temperature list or start:stop:count [K]");
    bath->add_option("--green-stride", green_stride, "write every n-th tau sample")->check(CLI::PositiveNumber);
    bath->add_option("--kernel-points", kernel_points, "omega samples of the Gamma table")
        ->check(CLI::Range(2, 1000000));

    // validate-config
    ConfigOptions val_cfg;
    auto* validate_cmd = app.add_subcommand("validate-config", "resolve, check and print a configuration");
    val_cfg.attach(validate_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    auto sink = std::make_shared<spdlog::sinks::stderr_color_sink_mt>();
    spdlog::set_default_logger(std::make_shared<spdlog::logger>("qdstirap", sink));
    spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

    if (*run) {
        const RunConfig config = run_cfg.resolve();
        OutputSelection o;
        o.indistinguishability = !run_no_i;
        o.correlations = run_correlations;
        o.spectrum = run_spectrum;
        o.eigenenergies = run_eigen;
        const RunResult r = simulate(config, o);
        if (run_json) {
            fmt::print("{}\n", summary_json(r).dump(2));
        } else {
            print_summary(r);
        }
        if (!run_out.empty()) {
            write_run_outputs(r, config.model.n_max, run_out);
            write_file_atomic(std::filesystem::path(run_out) / "config.json", to_json(config).dump(2) + "\n");
        }
        return 0;
    }

    if (*sweep) {
        SweepSpec spec;
        if (!replay.empty()) {
            spec = spec_from_manifest(replay);
        } else {
            if (axis.empty()) throw ConfigError("--axis is required (or --replay)");
            if (values_text.empty() && range_text.empty()) throw ConfigError("--values or --range is required");
            spec.base = sweep_cfg.resolve();
            spec.axis = parse_sweep_axis(axis);
            const auto dim = axis_dimension(spec.axis);
            spec.values = values_text.empty() ? parse_range(range_text, dim) : parse_list(values_text, dim);
            spec.phonons = spec.base.model.phonons_enabled;
            spec.renormalize = renormalize || spec.base.model.renormalize_inputs;
            spec.temperature_dephasing = temperature_dephasing || spec.base.model.dephasing_slope > 0.0;
            spec.outputs = parse_outputs(outputs_text);
        }
        SweepOptions opt;
        opt.workers = workers;
        opt.out_dir = sweep_out;
        opt.resume = !no_resume;
        std::size_t failed = 0;
        if (compare) {
            const auto cmp = compare_renormalization(spec, opt);
            for (const auto* res : {&cmp.effective_fixed, &cmp.bare_fixed}) {
                for (const auto& p : res->points) failed += p.ok ? 0 : 1;
            }
            fmt::print("wrote {}/comparison.csv\n", sweep_out);
        } else {
            const auto res = run_sweep(spec, opt);
            fmt::print("{:>6} {:>14} {:>10} {:>10} {:>10}\n", "index", to_string(spec.axis), "B", "N_e", "I");
            for (const auto& p : res.points) {
                failed += p.ok ? 0 : 1;
                fmt::print("{:>6} {:>14.6g} {:>10.6f} {:>10.6f} {:>10.6f}{}\n", p.index, p.value,
                           res.field(p.index, "mean_displacement"), res.field(p.index, "emitted_photons"),
                           res.field(p.index, "indistinguishability"), p.ok ? "" : "  (failed: " + p.error + ")");
            }
        }
        if (failed) spdlog::warn("{} sweep point(s) failed; see manifest.json", failed);
        return 0;
    }

    if (*spectrum) {
        const RunConfig config = spec_cfg.resolve();
        OutputSelection o;
        o.indistinguishability = false;
        o.spectrum = true;
        SpectrumSettings s;
        s.half_width = units::parse_quantity(half_width_text, units::Dimension::Rate);
        s.points = spec_points;
        const RunResult r = simulate(config, o, nullptr, s);
        write_file_atomic(spec_out, spectrum_table(*r.spectrum).text());
        fmt::print("emitted_photons {:.6f}\nwrote {}\n", r.emitted_photons, spec_out);
        return 0;
    }

    if (*eigen) {
        const RunConfig config = eig_cfg.resolve();
        const auto bath_ptr = PhononBath::create(config);
        const SystemModel model(config, bath_ptr);
        const double step = units::parse_quantity(t_step_text, units::Dimension::Time);
        if (!(step > 0.0)) throw ConfigError("--t-step must be positive");
        const double stop = t_stop_text.empty() ? model.pulse().end() + 0.05
                                                : units::parse_quantity(t_stop_text, units::Dimension::Time);
        std::vector<double> t;
        for (int k = 0; k * step <= stop + 1e-12; ++k) t.push_back(k * step);
        const auto rows = quasi_eigenenergies(t, config, bath_ptr, n_trunc);
        write_file_atomic(eig_out, eigenenergy_table(t, rows).text());
        fmt::print("wrote {} ({} times, {} curves)\n", eig_out, t.size(), rows.empty() ? 0 : rows.front().size());
        return 0;
    }

    if (*bath) {
        RunConfig config = bath_cfg.resolve();
        config.model.phonons_enabled = true;
        const auto temps = temps_text.find(':') != std::string::npos
                               ? parse_range(temps_text, units::Dimension::Temperature)
                               : parse_list(temps_text, units::Dimension::Temperature);
        const std::filesystem::path dir(bath_out);
        write_file_atomic(dir / "bath_temperature.csv",
                          bath_temperature_table(config.model.alpha, config.model.omega_b, temps).text());
        const auto b = PhononBath::create(config);
        write_file_atomic(dir / "green_function.csv", green_function_table(*b, green_stride).text());
        const double span = config.bath.omega_span * config.model.omega_b * 0.5;
        write_file_atomic(dir / "spectral_kernels.csv",
                          spectral_kernel_table(*b, detuning_axis(span, kernel_points)).text());
        fmt::print("<B>({} K) = {:.6f}\ndelta_P = {:.6f} ns^-1 ({:.4f} ueV)\nwrote {}\n", config.model.temperature,
                   b->mean_displacement(), b->polaron_shift(), units::rate_to_microev(b->polaron_shift()), bath_out);
        return 0;
    }

    if (*validate_cmd) {
        const RunConfig config = val_cfg.resolve();
        fmt::print("{}", render_config(config));
        return 0;
    }
    return kExitConfig;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_main(argc, argv);
    } catch (const ConfigError& e) {
        spdlog::error("configuration error: {}", e.what());
        return kExitConfig;
    } catch (const NumericalError& e) {
        spdlog::error("numerical failure: {}", e.what());
        return kExitNumerical;
    } catch (const IoError& e) {
        spdlog::error("output error: {}", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitNumerical;
    }
}
