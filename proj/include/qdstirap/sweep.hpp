// sweep.hpp: single-point pipeline, parameter sweeps, run manifests.
//
// Sweep directory layout:
//   points.csv               one row per point
//   manifest.json            resolved config per point, engine version, timing
//   points/NNNN.json         per-point result, written as soon as it finishes
//   point_NNNN/*.csv         optional per-point trajectories / spectra
//
// A rerun in the same directory reuses every per-point file whose recorded
// config matches, so an interrupted sweep resumes where it stopped.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdstirap/correlators.hpp"

namespace qdstirap {

struct OutputSelection {
    bool indistinguishability = true;
    bool spectrum = false;
    bool trajectory = false;
    bool eigenenergies = false;
    bool correlations = false;
};

struct SpectrumSettings {
    double half_width = 600.0; // ns^-1 around omega_c
    int points = 2401;
};

struct EigenenergyCurves {
    std::vector<double> t;
    std::vector<std::vector<double>> values;
};

struct RunResult {
    double mean_displacement = 1.0;
    double polaron_shift = 0.0;
    double emitted_photons = 0.0;
    std::optional<double> indistinguishability;
    double substep = 0.0;
    Trajectory trajectory;
    std::optional<CorrelationGrid> correlations;
    std::optional<Spectrum> spectrum;
    std::optional<EigenenergyCurves> eigenenergies;
    double wall_seconds = 0.0;
};

/// Full pipeline for one parameter point. `bath` may be passed to share the
/// tables between points with the same phonon parameters.
RunResult simulate(const RunConfig& config, const OutputSelection& outputs = {},
                   std::shared_ptr<const PhononBath> bath = nullptr, const SpectrumSettings& spectrum = {});

/// trajectory.csv, emission.csv, correlations.csv, spectrum.csv,
/// eigenenergies.csv for whatever the result holds.
void write_run_outputs(const RunResult& result, int n_max, const std::filesystem::path& dir);

/// Scalar summary of a run (what points.csv and the manifest record).
nlohmann::json summary_json(const RunResult& result);

enum class SweepAxis { Temperature, GammaPrime, Delta, PulseWidth, Alpha };

std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view text);
units::Dimension axis_dimension(SweepAxis axis);

struct SweepSpec {
    RunConfig base;
    SweepAxis axis = SweepAxis::Temperature;
    std::vector<double> values; // engine units
    bool phonons = true;
    bool renormalize = false;
    bool temperature_dephasing = false;
    OutputSelection outputs;
    SpectrumSettings spectrum;
};

/// Slope used when temperature-dependent dephasing is switched on and the
/// base config does not set one (ns^-1/K).
inline constexpr double kDephasingSlope = 2.127;

/// Throws ConfigError unless values are non-empty and strictly monotone and
/// every point config validates.
void validate(const SweepSpec& spec);

/// The base config with the mode flags and the axis value of point `index`.
RunConfig point_config(const SweepSpec& spec, std::size_t index);

nlohmann::json to_json(const SweepSpec& spec);
SweepSpec sweep_spec_from_json(const nlohmann::json& j);

struct SweepPoint {
    std::size_t index = 0;
    double value = 0.0;
    bool ok = false;
    bool reused = false;
    std::string error;
    nlohmann::json summary; // empty on failure
    double wall_seconds = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    nlohmann::json manifest;

    /// Scalar field of point k, NaN when missing or failed.
    double field(std::size_t k, const std::string& name) const;
};

struct SweepOptions {
    int workers = 1;
    std::optional<std::filesystem::path> out_dir;
    bool resume = true;
};

/// Runs every point on a bounded worker pool. Point failures are recorded;
/// only I/O errors abort the sweep.
SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& options = {});

/// Reads the sweep definition recorded in a manifest.
SweepSpec spec_from_manifest(const std::filesystem::path& manifest_path);

struct RenormalizationComparison {
    SweepResult effective_fixed; // supplied couplings are g', Omega' (renormalize off)
    SweepResult bare_fixed;      // supplied couplings are g, Omega (renormalize on)
};

/// Temperature sweep run twice, once per coupling convention. With an output
/// directory the two sweeps go to effective/ and bare/ and a paired
/// comparison.csv is written next to them.
RenormalizationComparison compare_renormalization(const SweepSpec& spec, const SweepOptions& options = {});

} // namespace qdstirap
