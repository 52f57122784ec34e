// units.hpp: unit system and quantity parsing
//
// Every rate and angular frequency inside the engine is in ns^-1 with hbar = 1,
// times are in ns, the phonon coupling alpha in ns^2 and temperatures in K.
// Energies supplied in ueV or meV are converted on ingestion via w = E / hbar.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qdstirap {

/// Raised for malformed or out-of-range configuration input (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a numerical procedure fails (CLI exit code 2).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an output file cannot be written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace units {

inline constexpr double kHbarMicroeVNs = 0.65821195;     // ueV * ns
inline constexpr double kBoltzmannMicroeVPerK = 86.17333; // ueV / K
inline constexpr double kPi = 3.14159265358979323846;

constexpr double microev_to_rate(double e_microev) { return e_microev / kHbarMicroeVNs; }
constexpr double rate_to_microev(double w) { return w * kHbarMicroeVNs; }
constexpr double millievolt_to_rate(double e_mev) { return microev_to_rate(1e3 * e_mev); }
constexpr double ps2_to_ns2(double a) { return a * 1e-6; }
constexpr double ns2_to_ps2(double a) { return a * 1e6; }

/// k_B T / hbar in ns^-1.
constexpr double thermal_rate(double temperature_k) {
    return kBoltzmannMicroeVPerK * temperature_k / kHbarMicroeVNs;
}

/// Physical dimension of a configuration value; decides which unit suffixes
/// are accepted and what the bare-number default unit is.
enum class Dimension {
    Rate,          // ns^-1 (also accepts ueV, meV, 1/ns, ps^-1)
    Time,          // ns (also ps)
    TimeSquared,   // ns^2 (also ps^2)
    Temperature,   // K
    RatePerKelvin, // ns^-1/K
    Dimensionless,
};

std::string_view native_unit(Dimension dim);

/// Parses "32.9 ueV", "0.9 meV", "0.03 ps^2", "25", "25 ns^-1", "5 K" into
/// the engine's native unit for `dim`. A bare number is taken as native.
double parse_quantity(std::string_view text, Dimension dim);

} // namespace units
} // namespace qdstirap
