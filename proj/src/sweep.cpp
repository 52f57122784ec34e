#include "qdstirap/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "qdstirap/csv.hpp"

namespace qdstirap {

namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

} // namespace

RunResult simulate(const RunConfig& config, const OutputSelection& outputs, std::shared_ptr<const PhononBath> bath,
                   const SpectrumSettings& spectrum) {
    const auto start = std::chrono::steady_clock::now();
    validate(config);
    if (outputs.indistinguishability && config.model.n_max < 2) {
        throw ConfigError("indistinguishability needs n_max >= 2 (g2 vanishes identically at n_max = 1)");
    }
    if (!bath) bath = PhononBath::create(config);
    auto model = std::make_shared<const SystemModel>(config, bath);
    const Evolution evolution(model, config.grid);

    RunResult out;
    out.mean_displacement = model->mean_displacement();
    out.polaron_shift = model->phonon_dissipation() ? bath->polaron_shift() : 0.0;
    out.substep = evolution.substep();
    out.trajectory = propagate(evolution);
    out.emitted_photons = emitted_photon_number(out.trajectory, model->basis());

    const bool need_g1 = outputs.indistinguishability || outputs.spectrum || outputs.correlations;
    if (need_g1) {
        CorrelationGrid grid = regression(evolution, out.trajectory, outputs.indistinguishability || outputs.correlations);
        if (outputs.indistinguishability) out.indistinguishability = indistinguishability(grid);
        if (outputs.spectrum) {
            out.spectrum = emission_spectrum(grid, detuning_axis(spectrum.half_width, spectrum.points),
                                             config.model.omega_c);
        }
        if (outputs.correlations) out.correlations = std::move(grid);
    }
    if (outputs.eigenenergies) {
        EigenenergyCurves curves;
        curves.t = out.trajectory.t;
        curves.values = quasi_eigenenergies(curves.t, config, bath, 1);
        out.eigenenergies = std::move(curves);
    }
    out.wall_seconds = seconds_since(start);
    return out;
}

void write_run_outputs(const RunResult& result, int n_max, const fs::path& dir) {
    const Basis basis(n_max);
    write_file_atomic(dir / "trajectory.csv", trajectory_table(result.trajectory, basis).text());
    write_file_atomic(dir / "emission.csv", emission_table(result.trajectory).text());
    if (result.correlations) write_file_atomic(dir / "correlations.csv", correlation_table(*result.correlations).text());
    if (result.spectrum) write_file_atomic(dir / "spectrum.csv", spectrum_table(*result.spectrum).text());
    if (result.eigenenergies) {
        write_file_atomic(dir / "eigenenergies.csv",
                          eigenenergy_table(result.eigenenergies->t, result.eigenenergies->values).text());
    }
}

nlohmann::json summary_json(const RunResult& result) {
    const TrajectoryDiagnostics& d = result.trajectory.diagnostics;
    nlohmann::json j;
    j["mean_displacement"] = result.mean_displacement;
    j["polaron_shift"] = result.polaron_shift;
    j["emitted_photons"] = result.emitted_photons;
    j["indistinguishability"] = result.indistinguishability ? nlohmann::json(*result.indistinguishability)
                                                            : nlohmann::json(nullptr);
    j["rk4_substep"] = result.substep;
    j["diagnostics"] = {{"max_trace_drift", d.max_trace_drift},
                        {"max_hermiticity_error", d.max_hermiticity_error},
                        {"min_eigenvalue", d.min_eigenvalue},
                        {"negative_eigenvalue_points", d.negative_eigenvalue_points}};
    return j;
}

std::string_view to_string(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::Temperature: return "temperature";
    case SweepAxis::GammaPrime: return "gamma_prime";
    case SweepAxis::Delta: return "delta";
    case SweepAxis::PulseWidth: return "pulse_width";
    case SweepAxis::Alpha: return "alpha";
    }
    return "?";
}

SweepAxis parse_sweep_axis(std::string_view text) {
    for (SweepAxis a : {SweepAxis::Temperature, SweepAxis::GammaPrime, SweepAxis::Delta, SweepAxis::PulseWidth,
                        SweepAxis::Alpha}) {
        if (text == to_string(a)) return a;
    }
    throw ConfigError(fmt::format("unknown sweep axis '{}' (temperature, gamma_prime, delta, pulse_width, alpha)", text));
}

units::Dimension axis_dimension(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::Temperature: return units::Dimension::Temperature;
    case SweepAxis::GammaPrime: return units::Dimension::Rate;
    case SweepAxis::Delta: return units::Dimension::Rate;
    case SweepAxis::PulseWidth: return units::Dimension::Time;
    case SweepAxis::Alpha: return units::Dimension::TimeSquared;
    }
    return units::Dimension::Dimensionless;
}

RunConfig point_config(const SweepSpec& spec, std::size_t index) {
    if (index >= spec.values.size()) throw std::out_of_range("point_config: index out of range");
    RunConfig c = spec.base;
    c.model.phonons_enabled = spec.phonons;
    c.model.renormalize_inputs = spec.renormalize;
    if (!spec.temperature_dephasing) {
        c.model.dephasing_slope = 0.0;
    } else if (c.model.dephasing_slope == 0.0) {
        c.model.dephasing_slope = kDephasingSlope;
    }
    const double v = spec.values[index];
    switch (spec.axis) {
    case SweepAxis::Temperature: c.model.temperature = v; break;
    case SweepAxis::GammaPrime: c.model.gamma_prime_0 = v; break;
    case SweepAxis::Delta: c.model.delta = v; break;
    case SweepAxis::PulseWidth: c.model.pulse_width = v; break;
    case SweepAxis::Alpha: c.model.alpha = v; break;
    }
    return c;
}

void validate(const SweepSpec& spec) {
    if (spec.values.empty()) throw ConfigError("sweep has no axis values");
    if (spec.values.size() > 1) {
        const bool up = spec.values[1] > spec.values[0];
        for (std::size_t k = 1; k < spec.values.size(); ++k) {
            const bool ok = up ? spec.values[k] > spec.values[k - 1] : spec.values[k] < spec.values[k - 1];
            if (!ok) throw ConfigError("sweep axis values must be strictly monotone");
        }
    }
    for (std::size_t k = 0; k < spec.values.size(); ++k) {
        if (!std::isfinite(spec.values[k])) throw ConfigError("sweep axis values must be finite");
        validate(point_config(spec, k));
    }
    if (spec.outputs.indistinguishability && spec.base.model.n_max < 2) {
        throw ConfigError("indistinguishability needs n_max >= 2");
    }
    if (spec.spectrum.points < 2 || !(spec.spectrum.half_width > 0.0)) {
        throw ConfigError("spectrum axis needs >= 2 points and a positive half width");
    }
}

nlohmann::json to_json(const SweepSpec& spec) {
    nlohmann::json j;
    j["axis"] = std::string(to_string(spec.axis));
    j["values"] = spec.values;
    j["modes"] = {{"phonons", spec.phonons},
                  {"renormalize", spec.renormalize},
                  {"temperature_dephasing", spec.temperature_dephasing}};
    j["outputs"] = {{"indistinguishability", spec.outputs.indistinguishability},
                    {"spectrum", spec.outputs.spectrum},
                    {"trajectory", spec.outputs.trajectory},
                    {"eigenenergies", spec.outputs.eigenenergies},
                    {"correlations", spec.outputs.correlations}};
    j["spectrum"] = {{"half_width", spec.spectrum.half_width}, {"points", spec.spectrum.points}};
    j["base_config"] = to_json(spec.base);
    return j;
}

SweepSpec sweep_spec_from_json(const nlohmann::json& j) {
    try {
        SweepSpec spec;
        spec.base = config_from_json(j.at("base_config"));
        spec.axis = parse_sweep_axis(j.at("axis").get<std::string>());
        spec.values = j.at("values").get<std::vector<double>>();
        const auto& m = j.at("modes");
        spec.phonons = m.at("phonons").get<bool>();
        spec.renormalize = m.at("renormalize").get<bool>();
        spec.temperature_dephasing = m.at("temperature_dephasing").get<bool>();
        const auto& o = j.at("outputs");
        spec.outputs.indistinguishability = o.at("indistinguishability").get<bool>();
        spec.outputs.spectrum = o.at("spectrum").get<bool>();
        spec.outputs.trajectory = o.at("trajectory").get<bool>();
        spec.outputs.eigenenergies = o.at("eigenenergies").get<bool>();
        spec.outputs.correlations = o.value("correlations", false);
        spec.spectrum.half_width = j.at("spectrum").at("half_width").get<double>();
        spec.spectrum.points = j.at("spectrum").at("points").get<int>();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("malformed sweep definition: {}", e.what()));
    }
}

double SweepResult::field(std::size_t k, const std::string& name) const {
    const SweepPoint& p = points.at(k);
    if (!p.ok || !p.summary.contains(name) || !p.summary[name].is_number()) return nan();
    return p.summary[name].get<double>();
}

namespace {

// Baths keyed by the parameters that determine them, shared across points.
class BathCache {
public:
    std::shared_ptr<const PhononBath> get(const RunConfig& c) {
        if (!c.model.phonons_enabled || c.model.alpha == 0.0) return PhononBath::create(c);
        const auto& b = c.bath;
        const Key key{c.model.alpha,  c.model.omega_b,  c.model.temperature, b.tau_max,
                      b.tau_max_limit, b.tau_points,    b.omega_span,        b.omega_points,
                      b.decay_tolerance};
        std::shared_ptr<std::once_flag> flag;
        {
            std::lock_guard lock(mutex_);
            auto& slot = slots_[key];
            if (!slot.flag) slot.flag = std::make_shared<std::once_flag>();
            flag = slot.flag;
        }
        std::call_once(*flag, [&] {
            auto bath = PhononBath::create(c);
            std::lock_guard lock(mutex_);
            slots_[key].bath = std::move(bath);
        });
        std::lock_guard lock(mutex_);
        auto bath = slots_[key].bath;
        if (!bath) throw NumericalError("phonon bath construction failed for this point");
        return bath;
    }

private:
    using Key = std::tuple<double, double, double, double, double, int, double, int, double>;
    struct Slot {
        std::shared_ptr<std::once_flag> flag;
        std::shared_ptr<const PhononBath> bath;
    };
    std::mutex mutex_;
    std::map<Key, Slot> slots_;
};

std::string point_name(std::size_t index) { return fmt::format("{:04d}", index); }

std::optional<nlohmann::json> read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

void write_points_csv(const SweepSpec& spec, const std::vector<SweepPoint>& points, const fs::path& path) {
    std::string text = fmt::format("index,{},B,N_e,I,status\n", to_string(spec.axis));
    for (const auto& p : points) {
        auto num = [&](const char* name) {
            if (!p.ok || !p.summary.contains(name) || !p.summary[name].is_number()) return std::string("nan");
            return format_number(p.summary[name].get<double>());
        };
        text += fmt::format("{},{},{},{},{},{}\n", p.index, format_number(p.value), num("mean_displacement"),
                            num("emitted_photons"), num("indistinguishability"), p.ok ? "ok" : "error");
    }
    write_file_atomic(path, text);
}

} // namespace

SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& options) {
    validate(spec);
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = spec.values.size();
    std::vector<SweepPoint> points(n);
    BathCache baths;
    std::atomic<std::size_t> next{0};

    auto run_one = [&](std::size_t k) {
        SweepPoint& p = points[k];
        p.index = k;
        p.value = spec.values[k];
        const RunConfig config = point_config(spec, k);
        const nlohmann::json config_json = to_json(config);
        std::optional<fs::path> record;
        if (options.out_dir) record = *options.out_dir / "points" / (point_name(k) + ".json");

        if (record && options.resume) {
            if (auto old = read_json(*record); old && old->value("config", nlohmann::json()) == config_json &&
                                               old->value("outputs", nlohmann::json()) == to_json(spec)["outputs"]) {
                p.ok = old->value("ok", false);
                p.error = old->value("error", "");
                p.summary = old->value("summary", nlohmann::json());
                p.wall_seconds = old->value("wall_seconds", 0.0);
                p.reused = true;
                return;
            }
        }

        const auto t0 = std::chrono::steady_clock::now();
        try {
            const RunResult r = simulate(config, spec.outputs, baths.get(config), spec.spectrum);
            p.summary = summary_json(r);
            p.ok = true;
            if (options.out_dir && (spec.outputs.trajectory || spec.outputs.spectrum || spec.outputs.eigenenergies ||
                                    spec.outputs.correlations)) {
                RunResult trimmed;
                if (spec.outputs.trajectory) trimmed.trajectory = r.trajectory;
                trimmed.spectrum = r.spectrum;
                trimmed.eigenenergies = r.eigenenergies;
                trimmed.correlations = r.correlations;
                const fs::path dir = *options.out_dir / ("point_" + point_name(k));
                if (spec.outputs.trajectory) {
                    write_run_outputs(trimmed, config.model.n_max, dir);
                } else {
                    if (trimmed.spectrum) write_file_atomic(dir / "spectrum.csv", spectrum_table(*trimmed.spectrum).text());
                    if (trimmed.eigenenergies) {
                        write_file_atomic(dir / "eigenenergies.csv",
                                          eigenenergy_table(trimmed.eigenenergies->t, trimmed.eigenenergies->values).text());
                    }
                    if (trimmed.correlations) {
                        write_file_atomic(dir / "correlations.csv", correlation_table(*trimmed.correlations).text());
                    }
                }
            }
        } catch (const ConfigError& e) {
            p.ok = false;
            p.error = fmt::format("config error: {}", e.what());
        } catch (const NumericalError& e) {
            p.ok = false;
            p.error = fmt::format("numerical failure: {}", e.what());
        } catch (const IoError&) {
            throw;
        } catch (const std::exception& e) {
            p.ok = false;
            p.error = e.what();
        }
        p.wall_seconds = seconds_since(t0);
        if (!p.ok) spdlog::warn("sweep point {} ({} = {}) failed: {}", k, to_string(spec.axis), p.value, p.error);

        if (record) {
            nlohmann::json j;
            j["index"] = k;
            j["axis_value"] = p.value;
            j["config"] = config_json;
            j["outputs"] = to_json(spec)["outputs"];
            j["ok"] = p.ok;
            j["error"] = p.error;
            j["summary"] = p.summary;
            j["wall_seconds"] = p.wall_seconds;
            write_file_atomic(*record, j.dump(2) + "\n");
        }
    };

    const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(n)));
    std::exception_ptr fatal;
    std::mutex fatal_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= n) return;
            try {
                run_one(k);
            } catch (...) {
                std::lock_guard lock(fatal_mutex);
                if (!fatal) fatal = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (fatal) std::rethrow_exception(fatal);

    SweepResult result;
    result.points = std::move(points);
    nlohmann::json manifest;
    manifest["engine"] = "qdstirap";
    manifest["version"] = QDSTIRAP_VERSION;
    manifest["sweep"] = to_json(spec);
    manifest["grid"] = {{"dt", spec.base.grid.dt},
                        {"output_step", spec.base.grid.output_step},
                        {"tail_lifetimes", spec.base.grid.tail_lifetimes},
                        {"t_end", spec.base.grid.t_end}};
    nlohmann::json pts = nlohmann::json::array();
    std::size_t failed = 0;
    double worst_drift = 0.0;
    double worst_herm = 0.0;
    for (const auto& p : result.points) {
        nlohmann::json e;
        e["index"] = p.index;
        e["axis_value"] = p.value;
        e["config"] = to_json(point_config(spec, p.index));
        e["status"] = p.ok ? "ok" : "error";
        if (!p.ok) e["error"] = p.error;
        e["summary"] = p.summary;
        e["wall_seconds"] = p.wall_seconds;
        pts.push_back(std::move(e));
        if (!p.ok) {
            ++failed;
        } else if (p.summary.contains("diagnostics")) {
            worst_drift = std::max(worst_drift, p.summary["diagnostics"].value("max_trace_drift", 0.0));
            worst_herm = std::max(worst_herm, p.summary["diagnostics"].value("max_hermiticity_error", 0.0));
        }
    }
    manifest["points"] = std::move(pts);
    manifest["diagnostics_summary"] = {{"failed_points", failed},
                                       {"max_trace_drift", worst_drift},
                                       {"max_hermiticity_error", worst_herm}};
    manifest["wall_seconds"] = seconds_since(start);
    manifest["workers"] = workers;
    result.manifest = manifest;

    if (options.out_dir) {
        write_points_csv(spec, result.points, *options.out_dir / "points.csv");
        write_file_atomic(*options.out_dir / "manifest.json", manifest.dump(2) + "\n");
    }
    return result;
}

SweepSpec spec_from_manifest(const fs::path& manifest_path) {
    auto j = read_json(manifest_path);
    if (!j) throw ConfigError(fmt::format("cannot read manifest '{}'", manifest_path.string()));
    if (!j->contains("sweep")) throw ConfigError("manifest has no sweep definition");
    return sweep_spec_from_json((*j)["sweep"]);
}

RenormalizationComparison compare_renormalization(const SweepSpec& spec, const SweepOptions& options) {
    if (spec.axis != SweepAxis::Temperature) throw ConfigError("renormalization comparison needs a temperature axis");
    RenormalizationComparison out;
    SweepSpec effective = spec;
    effective.renormalize = false;
    SweepSpec bare = spec;
    bare.renormalize = true;
    SweepOptions eo = options;
    SweepOptions bo = options;
    if (options.out_dir) {
        eo.out_dir = *options.out_dir / "effective";
        bo.out_dir = *options.out_dir / "bare";
    }
    out.effective_fixed = run_sweep(effective, eo);
    out.bare_fixed = run_sweep(bare, bo);
    if (options.out_dir) {
        CsvTable table({"T", "B", "N_e_effective", "N_e_bare", "I_effective", "I_bare"});
        for (std::size_t k = 0; k < spec.values.size(); ++k) {
            table.add_row({spec.values[k], out.effective_fixed.field(k, "mean_displacement"),
                           out.effective_fixed.field(k, "emitted_photons"), out.bare_fixed.field(k, "emitted_photons"),
                           out.effective_fixed.field(k, "indistinguishability"),
                           out.bare_fixed.field(k, "indistinguishability")});
        }
        write_file_atomic(*options.out_dir / "comparison.csv", table.text());
    }
    return out;
}

} // namespace qdstirap
