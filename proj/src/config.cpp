#include "qdstirap/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace qdstirap {

using units::Dimension;

std::string_view to_string(PulseShape shape) {
    switch (shape) {
    case PulseShape::SawtoothRising: return "sawtooth-rising";
    case PulseShape::SawtoothFalling: return "sawtooth-falling";
    case PulseShape::Gaussian: return "gaussian";
    }
    return "sawtooth-rising";
}

PulseShape parse_pulse_shape(std::string_view text) {
    if (text == "sawtooth-rising" || text == "rising") return PulseShape::SawtoothRising;
    if (text == "sawtooth-falling" || text == "falling") return PulseShape::SawtoothFalling;
    if (text == "gaussian") return PulseShape::Gaussian;
    throw ConfigError("unknown pulse_shape '" + std::string(text) +
                      "' (expected sawtooth-rising, sawtooth-falling or gaussian)");
}

double dephasing_rate(const ModelParams& params, double temperature) {
    return params.gamma_prime_0 + params.dephasing_slope * temperature;
}

namespace {

bool parse_bool(std::string_view text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError("expected a boolean, got '" + std::string(text) + "'");
}

int parse_int(std::string_view text) {
    try {
        std::size_t used = 0;
        const std::string s(text);
        const long v = std::stol(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return static_cast<int>(v);
    } catch (const std::exception&) {
        throw ConfigError("expected an integer, got '" + std::string(text) + "'");
    }
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

template <typename Field>
ConfigKey quantity(std::string section, std::string name, Dimension dim, std::string doc, Field field) {
    return ConfigKey{
        std::move(section), std::move(name), dim, "quantity", std::move(doc),
        [field, dim](RunConfig& c, std::string_view v) { field(c) = units::parse_quantity(v, dim); },
        [field](const RunConfig& c) { return fmt_double(field(const_cast<RunConfig&>(c))); }};
}

template <typename Field>
ConfigKey boolean(std::string section, std::string name, std::string doc, Field field) {
    return ConfigKey{
        std::move(section), std::move(name), Dimension::Dimensionless, "bool", std::move(doc),
        [field](RunConfig& c, std::string_view v) { field(c) = parse_bool(v); },
        [field](const RunConfig& c) { return std::string(field(const_cast<RunConfig&>(c)) ? "true" : "false"); }};
}

template <typename Field>
ConfigKey integer(std::string section, std::string name, std::string doc, Field field) {
    return ConfigKey{
        std::move(section), std::move(name), Dimension::Dimensionless, "int", std::move(doc),
        [field](RunConfig& c, std::string_view v) { field(c) = parse_int(v); },
        [field](const RunConfig& c) { return std::to_string(field(const_cast<RunConfig&>(c))); }};
}

std::vector<ConfigKey> build_schema() {
    std::vector<ConfigKey> keys;
    // clang-format off
    keys.push_back(quantity("emitter", "gamma_x", Dimension::Rate, "exciton radiative decay rate",
        [](RunConfig& c) -> double& { return c.model.gamma_x; }));
    keys.push_back(quantity("emitter", "gamma_xx", Dimension::Rate, "biexciton radiative decay rate (per channel)",
        [](RunConfig& c) -> double& { return c.model.gamma_xx; }));
    keys.push_back(quantity("emitter", "gamma_prime_0", Dimension::Rate, "background pure dephasing at T = 0",
        [](RunConfig& c) -> double& { return c.model.gamma_prime_0; }));
    keys.push_back(quantity("emitter", "dephasing_slope", Dimension::RatePerKelvin,
        "linear temperature coefficient of the pure dephasing (2.127 for the temperature-dependent mode)",
        [](RunConfig& c) -> double& { return c.model.dephasing_slope; }));
    keys.push_back(quantity("cavity", "kappa", Dimension::Rate, "cavity photon leakage rate",
        [](RunConfig& c) -> double& { return c.model.kappa; }));
    keys.push_back(quantity("cavity", "g_prime", Dimension::Rate, "cavity coupling XX <-> Y",
        [](RunConfig& c) -> double& { return c.model.g_prime; }));
    keys.push_back(quantity("cavity", "omega_c", Dimension::Rate, "cavity frequency offset of the spectrum axis",
        [](RunConfig& c) -> double& { return c.model.omega_c; }));
    keys.push_back(quantity("drive", "omega_l_prime", Dimension::Rate, "CW Rabi frequency X <-> XX",
        [](RunConfig& c) -> double& { return c.model.omega_l_prime; }));
    keys.push_back(quantity("drive", "omega_p_max_prime", Dimension::Rate, "peak pump Rabi frequency g <-> X",
        [](RunConfig& c) -> double& { return c.model.omega_p_max_prime; }));
    keys.push_back(quantity("drive", "delta", Dimension::Rate, "common pump and cavity detuning",
        [](RunConfig& c) -> double& { return c.model.delta; }));
    keys.push_back(quantity("drive", "delta_l", Dimension::Rate, "CW laser detuning (needs allow_cw_detuning)",
        [](RunConfig& c) -> double& { return c.model.delta_l; }));
    keys.push_back(boolean("drive", "allow_cw_detuning", "permit a nonzero CW detuning",
        [](RunConfig& c) -> bool& { return c.model.allow_cw_detuning; }));
    keys.push_back(quantity("drive", "pulse_width", Dimension::Time, "pump pulse width tau_p",
        [](RunConfig& c) -> double& { return c.model.pulse_width; }));
    keys.push_back(quantity("drive", "pulse_start", Dimension::Time, "pump pulse start time",
        [](RunConfig& c) -> double& { return c.model.pulse_start; }));
    keys.push_back(ConfigKey{"drive", "pulse_shape", Dimension::Dimensionless, "enum",
        "sawtooth-rising | sawtooth-falling | gaussian",
        [](RunConfig& c, std::string_view v) { c.model.pulse_shape = parse_pulse_shape(v); },
        [](const RunConfig& c) { return std::string(to_string(c.model.pulse_shape)); }});
    keys.push_back(boolean("phonons", "enabled", "include the LA-phonon bath",
        [](RunConfig& c) -> bool& { return c.model.phonons_enabled; }));
    keys.push_back(quantity("phonons", "alpha", Dimension::TimeSquared, "exciton-phonon coupling strength",
        [](RunConfig& c) -> double& { return c.model.alpha; }));
    keys.push_back(quantity("phonons", "omega_b", Dimension::Rate, "phonon cutoff frequency",
        [](RunConfig& c) -> double& { return c.model.omega_b; }));
    keys.push_back(quantity("phonons", "temperature", Dimension::Temperature, "bath temperature",
        [](RunConfig& c) -> double& { return c.model.temperature; }));
    keys.push_back(boolean("phonons", "renormalize_inputs",
        "treat the coupling keys as bare values and scale them by <B>",
        [](RunConfig& c) -> bool& { return c.model.renormalize_inputs; }));
    keys.push_back(boolean("phonons", "explicit_polaron_shift",
        "keep the polaron shift terms in the system Hamiltonian (sensitivity studies)",
        [](RunConfig& c) -> bool& { return c.model.explicit_polaron_shift; }));
    keys.push_back(integer("numerics", "n_max", "Fock space truncation (photons)",
        [](RunConfig& c) -> int& { return c.model.n_max; }));
    keys.push_back(quantity("numerics", "dt", Dimension::Time, "RK4 step upper bound",
        [](RunConfig& c) -> double& { return c.grid.dt; }));
    keys.push_back(quantity("numerics", "output_step", Dimension::Time, "outer time grid spacing",
        [](RunConfig& c) -> double& { return c.grid.output_step; }));
    keys.push_back(quantity("numerics", "tail_lifetimes", Dimension::Dimensionless,
        "simulated time after the pulse in units of 1/gamma_x",
        [](RunConfig& c) -> double& { return c.grid.tail_lifetimes; }));
    keys.push_back(quantity("numerics", "t_end", Dimension::Time, "explicit end time (0 = tail rule)",
        [](RunConfig& c) -> double& { return c.grid.t_end; }));
    keys.push_back(quantity("bath", "tau_max", Dimension::Time, "initial tau truncation of the bath tables",
        [](RunConfig& c) -> double& { return c.bath.tau_max; }));
    keys.push_back(quantity("bath", "tau_max_limit", Dimension::Time, "largest allowed tau truncation",
        [](RunConfig& c) -> double& { return c.bath.tau_max_limit; }));
    keys.push_back(integer("bath", "tau_points", "tau samples on [0, tau_max]",
        [](RunConfig& c) -> int& { return c.bath.tau_points; }));
    keys.push_back(quantity("bath", "omega_span", Dimension::Dimensionless,
        "half-width of the Gamma tables in units of omega_b",
        [](RunConfig& c) -> double& { return c.bath.omega_span; }));
    keys.push_back(integer("bath", "omega_points", "samples of the Gamma tables",
        [](RunConfig& c) -> int& { return c.bath.omega_points; }));
    keys.push_back(quantity("bath", "decay_tolerance", Dimension::Dimensionless,
        "required |G(tau_max)| / |G(0)| before truncation",
        [](RunConfig& c) -> double& { return c.bath.decay_tolerance; }));
    // clang-format on
    return keys;
}

const ConfigKey& find_key(std::string_view section, std::string_view name) {
    for (const auto& k : config_schema()) {
        if (k.name == name && (section.empty() || k.section == section)) return k;
    }
    if (section.empty()) throw ConfigError("unknown configuration key '" + std::string(name) + "'");
    throw ConfigError("unknown configuration key '" + std::string(section) + "." + std::string(name) + "'");
}

} // namespace

const std::vector<ConfigKey>& config_schema() {
    static const std::vector<ConfigKey> keys = build_schema();
    return keys;
}

void validate(const RunConfig& config) {
    const ModelParams& p = config.model;
    auto nonneg = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ConfigError(fmt::format("{} must be a finite non-negative rate, got {}", name, v));
        }
    };
    nonneg(p.gamma_x, "gamma_x");
    nonneg(p.gamma_xx, "gamma_xx");
    nonneg(p.gamma_prime_0, "gamma_prime_0");
    nonneg(p.dephasing_slope, "dephasing_slope");
    nonneg(p.kappa, "kappa");
    nonneg(p.g_prime, "g_prime");
    nonneg(p.omega_l_prime, "omega_l_prime");
    nonneg(p.omega_p_max_prime, "omega_p_max_prime");
    nonneg(p.alpha, "alpha");
    nonneg(p.temperature, "temperature");
    if (!std::isfinite(p.delta) || !std::isfinite(p.delta_l) || !std::isfinite(p.omega_c) ||
        !std::isfinite(p.pulse_start)) {
        throw ConfigError("detunings and pulse_start must be finite");
    }
    if (!(p.omega_b > 0.0)) throw ConfigError("omega_b must be positive");
    if (!(p.pulse_width > 0.0)) throw ConfigError("pulse_width must be positive");
    if (p.n_max < 1) throw ConfigError(fmt::format("n_max must be at least 1, got {}", p.n_max));
    if (p.n_max > 8) throw ConfigError("n_max above 8 is not supported by the dense engine");
    if (p.delta_l != 0.0 && !p.allow_cw_detuning) {
        throw ConfigError("delta_l != 0 breaks the multi-photon resonance; set allow_cw_detuning to override");
    }
    const GridSettings& g = config.grid;
    if (!(g.dt > 0.0) || !(g.output_step > 0.0)) throw ConfigError("dt and output_step must be positive");
    if (g.dt > g.output_step) throw ConfigError("dt must not exceed output_step");
    if (!(g.tail_lifetimes > 0.0)) throw ConfigError("tail_lifetimes must be positive");
    if (g.t_end < 0.0) throw ConfigError("t_end must be non-negative");
    const BathSettings& b = config.bath;
    if (!(b.tau_max > 0.0) || b.tau_max_limit < b.tau_max) throw ConfigError("invalid bath tau range");
    if (b.tau_points < 101 || b.tau_points % 2 == 0) throw ConfigError("bath tau_points must be odd and >= 101");
    if (!(b.omega_span >= 5.0)) throw ConfigError("bath omega_span must be at least 5 (units of omega_b)");
    if (b.omega_points < 101) throw ConfigError("bath omega_points must be >= 101");
    if (!(b.decay_tolerance > 0.0)) throw ConfigError("bath decay_tolerance must be positive");
}

void apply_override(RunConfig& config, std::string_view key, std::string_view value) {
    std::string_view section;
    if (auto dot = key.find('.'); dot != std::string_view::npos) {
        section = key.substr(0, dot);
        key = key.substr(dot + 1);
    }
    find_key(section, key).set(config, value);
}

RunConfig parse_config(std::string_view text) {
    RunConfig config;
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("configuration parse error: ") + e.what());
    }
    if (!root || root.IsNull()) {
        validate(config);
        return config;
    }
    if (!root.IsMap()) throw ConfigError("configuration root must be a mapping of sections");
    for (const auto& section : root) {
        const auto sname = section.first.as<std::string>();
        bool known = false;
        for (const auto& k : config_schema()) known = known || k.section == sname;
        if (!known) throw ConfigError("unknown configuration section '" + sname + "'");
        if (section.second.IsNull()) continue;
        if (!section.second.IsMap()) throw ConfigError("section '" + sname + "' must be a mapping");
        for (const auto& entry : section.second) {
            const auto kname = entry.first.as<std::string>();
            if (!entry.second.IsScalar()) {
                throw ConfigError("value of '" + sname + "." + kname + "' must be a scalar");
            }
            find_key(sname, kname).set(config, entry.second.Scalar());
        }
    }
    validate(config);
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

nlohmann::json to_json(const RunConfig& config) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& k : config_schema()) {
        const std::string v = k.get(config);
        if (k.kind == "quantity") {
            j[k.section][k.name] = std::stod(v);
        } else if (k.kind == "int") {
            j[k.section][k.name] = std::stoi(v);
        } else if (k.kind == "bool") {
            j[k.section][k.name] = (v == "true");
        } else {
            j[k.section][k.name] = v;
        }
    }
    return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig config;
    if (!j.is_object()) throw ConfigError("configuration JSON must be an object");
    for (const auto& [sname, section] : j.items()) {
        if (!section.is_object()) throw ConfigError("section '" + sname + "' must be an object");
        for (const auto& [kname, value] : section.items()) {
            const ConfigKey& key = find_key(sname, kname);
            if (value.is_number()) {
                // Full precision; fmt prints the shortest round-tripping form.
                key.set(config, fmt::format("{}", value.get<double>()));
            } else if (value.is_boolean()) {
                key.set(config, value.get<bool>() ? "true" : "false");
            } else if (value.is_string()) {
                key.set(config, value.get<std::string>());
            } else {
                throw ConfigError("unsupported JSON value for '" + sname + "." + kname + "'");
            }
        }
    }
    validate(config);
    return config;
}

std::string render_config(const RunConfig& config) {
    std::string out;
    std::string current;
    for (const auto& k : config_schema()) {
        if (k.section != current) {
            current = k.section;
            out += current + ":\n";
        }
        std::string unit(units::native_unit(k.dimension));
        out += fmt::format("  {}: {}", k.name, k.get(config));
        out += fmt::format("    # {}{}\n", unit.empty() ? "" : "[" + unit + "] ", k.description);
    }
    return out;
}

} // namespace qdstirap
