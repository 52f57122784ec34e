// model.hpp: polaron-frame system Hamiltonian, pump envelope, phonon drive
// operators and the Lindblad collapse set.
//
// Rotating frame: pump at w_p, CW laser at w_l, cavity at w_c. With
// Delta = Delta_p = Delta_c the diagonal is Delta |X><X| + Delta_l |Y><Y| +
// (Delta + Delta_l) |XX><XX|; Delta_l is zero unless explicitly allowed. The
// polaron shift is taken as absorbed into the detunings.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qdstirap/config.hpp"
#include "qdstirap/hilbert.hpp"
#include "qdstirap/phonon.hpp"

namespace qdstirap {

/// Which one-sided limit to take when t sits on a pulse discontinuity.
enum class Side { Left, Right };

struct PulseEnvelope {
    PulseShape shape = PulseShape::SawtoothRising;
    double omega_p_max = 0.0;
    double tau_p = 0.0;
    double t0 = 0.0;

    double start() const { return t0; }
    double end() const { return t0 + tau_p; }
    double value(double t, Side side = Side::Right) const;
};

double pulse_value(double t, const PulseEnvelope& envelope);

struct Couplings {
    double g = 0.0;
    double omega_l = 0.0;
    double omega_p_max = 0.0;
};

struct DriveOperators {
    Operator xg;
    Operator xu;
};

struct CollapseOperator {
    std::string label;
    Operator op; // unscaled
    double rate = 0.0;
};

class SystemModel {
public:
    SystemModel(const RunConfig& config, std::shared_ptr<const PhononBath> bath);

    const RunConfig& config() const { return config_; }
    const ModelParams& params() const { return config_.model; }
    const Basis& basis() const { return basis_; }
    const PhononBath& bath() const { return *bath_; }
    std::shared_ptr<const PhononBath> bath_ptr() const { return bath_; }

    /// <B> entering the couplings; 1 when phonons are disabled.
    double mean_displacement() const { return mean_displacement_; }
    const Couplings& effective() const { return effective_; }
    const Couplings& bare() const { return bare_; }
    const PulseEnvelope& pulse() const { return pulse_; }
    double dephasing() const { return dephasing_; }

    /// True when the phonon dissipator can be nonzero.
    bool phonon_dissipation() const { return params().phonons_enabled && !bath_->is_trivial(); }

    /// H'_S(t) (hbar = 1).
    Operator hamiltonian(double t, Side side = Side::Right) const;

    /// X_g and X_u built from the bare couplings.
    DriveOperators drive_operators(double t, Side side = Side::Right) const;

    const std::vector<CollapseOperator>& collapse_set() const { return collapse_; }

    /// (Omega / omega_b)^2 (1 - <B>)^4 at the largest bare Rabi frequency.
    double polaron_validity() const;

private:
    Operator coupling_part(double omega_p, const Couplings& c) const;

    RunConfig config_;
    std::shared_ptr<const PhononBath> bath_;
    Basis basis_;
    double mean_displacement_ = 1.0;
    Couplings effective_;
    Couplings bare_;
    PulseEnvelope pulse_;
    double dephasing_ = 0.0;
    Operator diagonal_;
    std::vector<CollapseOperator> collapse_;
};

/// Instantaneous eigenvalues of H'_S(t) on the n_max_trunc Fock space, one
/// row per time, columns continuity-ordered across t.
std::vector<std::vector<double>> quasi_eigenenergies(const std::vector<double>& t_grid, const RunConfig& config,
                                                     std::shared_ptr<const PhononBath> bath, int n_max_trunc = 1);

} // namespace qdstirap
