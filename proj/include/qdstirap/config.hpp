// config.hpp: validated run parameters and the configuration file schema

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qdstirap/units.hpp"

namespace qdstirap {

enum class PulseShape { SawtoothRising, SawtoothFalling, Gaussian };

std::string_view to_string(PulseShape shape);
PulseShape parse_pulse_shape(std::string_view text);

/// Physical model parameters, all in engine units (ns^-1, ns, ns^2, K).
///
/// The coupling fields `g_prime`, `omega_l_prime` and `omega_p_max_prime` are
/// the effective (polaron-renormalized) couplings when `renormalize_inputs` is
/// false. When it is true they are read as bare couplings and the engine
/// multiplies them by <B>(T).
struct ModelParams {
    double gamma_x = 0.5;
    double gamma_xx = 0.5;
    double gamma_prime_0 = 1.0;
    double dephasing_slope = 0.0;
    double kappa = 25.0;
    double g_prime = 50.0;
    double omega_l_prime = 250.0;
    double omega_p_max_prime = 125.0;
    double delta = 0.0;
    double delta_l = 0.0;
    bool allow_cw_detuning = false;
    double pulse_width = 3.0 * units::kPi / 50.0;
    double pulse_start = 0.0;
    PulseShape pulse_shape = PulseShape::SawtoothRising;
    double alpha = units::ps2_to_ns2(0.03);
    double omega_b = units::millievolt_to_rate(0.9);
    double temperature = 5.0;
    int n_max = 2;
    bool phonons_enabled = true;
    bool renormalize_inputs = false;
    bool explicit_polaron_shift = false;
    double omega_c = 0.0;
};

/// Time grids of the propagation and the correlation tables.
struct GridSettings {
    double dt = 2e-4;          // RK4 step upper bound (ns)
    double output_step = 5e-3; // outer grid for trajectories and t/tau tables (ns)
    double tail_lifetimes = 5.0; // simulated time after the pulse, in units of 1/gamma_x
    double t_end = 0.0;        // explicit end time (ns); 0 selects the tail rule
};

/// Discretisation of the phonon bath tables.
struct BathSettings {
    double tau_max = 1e-2;        // initial tau truncation (ns)
    double tau_max_limit = 0.5;   // give up extending beyond this (ns)
    int tau_points = 2001;        // samples on [0, tau_max]
    double omega_span = 6.0;      // Gamma tables cover [-span, span] * omega_b
    int omega_points = 2401;
    double decay_tolerance = 1e-12;
};

struct RunConfig {
    ModelParams model;
    GridSettings grid;
    BathSettings bath;
};

/// gamma'(T) = gamma'_0 + slope * T.
double dephasing_rate(const ModelParams& params, double temperature);

/// Throws ConfigError on any violated constraint.
void validate(const RunConfig& config);

/// Parses the YAML-style configuration text. Unknown sections or keys are
/// rejected. Missing keys keep their baseline values.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Sets one key (flat key name, e.g. "g_prime") from its textual value.
void apply_override(RunConfig& config, std::string_view key, std::string_view value);

/// One entry of the configuration schema.
struct ConfigKey {
    std::string section;
    std::string name;
    units::Dimension dimension;
    std::string kind; // "quantity", "bool", "int", "enum"
    std::string description;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::vector<ConfigKey>& config_schema();

/// Full resolved config, keyed by section and name, in engine units.
nlohmann::json to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

/// Documented YAML rendering of a config (used by validate-config).
std::string render_config(const RunConfig& config);

} // namespace qdstirap
