// solver.hpp: time-local polaron master equation
//
//   d rho/dt = -i [H'_S(t), rho]
//              - sum_m ( [X_m, Xi_m(t) rho] + [rho Xi_m(t)^dag, X_m] )
//              + sum_mu D[O_mu] rho
//
// with Xi_m(t) = int_0^inf dtau G_m(tau) e^{-i H'_S(t) tau} X_m(t) e^{i H'_S(t) tau}.
// In the eigenbasis H'_S = V E V^dag the tau integral is exact:
//   (V^dag Xi_m V)_jk = (V^dag X_m V)_jk Gamma_m(E_k - E_j).
//
// The second commutator is the Hermitian conjugate of the first for a
// Hermitian rho; it is written as a linear map so the same generator
// propagates the non-Hermitian seeds of the regression theorem.

#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qdstirap/config.hpp"
#include "qdstirap/hilbert.hpp"
#include "qdstirap/model.hpp"

namespace qdstirap {

/// Everything the generator needs at one instant.
struct GeneratorTerms {
    double t = 0.0;
    Operator h;
    bool phonons = false;
    Operator x[2];  // X_g, X_u
    Operator xi[2]; // tau-integrated, Green-function-weighted X_g, X_u
};

/// Xi_m for a given Hamiltonian: eigenbasis assembly with Gamma_m(E_k - E_j).
Operator weighted_drive(const Operator& h, const Operator& x, Channel m, const PhononBath& bath);

class Liouvillian {
public:
    explicit Liouvillian(std::shared_ptr<const SystemModel> model);

    const SystemModel& model() const { return *model_; }
    std::shared_ptr<const SystemModel> model_ptr() const { return model_; }
    int dim() const { return model_->basis().dim(); }

    GeneratorTerms terms(double t, Side side = Side::Right) const;

    /// Full right-hand side.
    Operator apply(const GeneratorTerms& terms, const Operator& rho) const;
    Operator apply(double t, const Operator& rho) const { return apply(terms(t), rho); }

    /// Phonon part only.
    Operator phonon_dissipator(const GeneratorTerms& terms, const Operator& rho) const;

    /// Lindblad part only.
    Operator lindblad(const Operator& rho) const;

    /// Column-stacked superoperator, (d^2 + 1) x (d^2 + 1) when `augmented`:
    /// the extra row accumulates kappa <a^dag a> so that the last component
    /// integrates the emitted photon number.
    Eigen::MatrixXcd superoperator(const GeneratorTerms& terms, bool augmented = false) const;

    /// 0.1 / max(spectral radius of H'_S over the run, kappa, Omega_l').
    double max_step() const;

private:
    std::shared_ptr<const SystemModel> model_;
    std::vector<Operator> jumps_;  // sqrt(rate) O
    Operator jump_sum_;            // sum O^dag O
    Eigen::MatrixXcd lindblad_super_;
};

/// Phonon dissipator contribution at time t.
Operator phonon_dissipator(double t, const Operator& rho, const Liouvillian& liouvillian);

/// One RK4 step of the matrix-form master equation. Throws NumericalError if
/// dt exceeds Liouvillian::max_step().
Operator step(const Operator& rho, double t, double dt, const Liouvillian& liouvillian);

/// Uniform outer grid t_i = i * step, i = 0..intervals.
struct TimeGrid {
    double step = 0.0;
    int intervals = 0;
    double time(int i) const { return i * step; }
    double end() const { return intervals * step; }
    int points() const { return intervals + 1; }
};

/// Propagator over the outer grid. Intervals overlapping the pulse are
/// integrated with RK4 substeps (split at the pulse edges); all other
/// intervals share one precomputed map, the RK4 step matrix raised to the
/// number of substeps. Immutable after construction and shareable.
class Evolution {
public:
    Evolution(std::shared_ptr<const SystemModel> model, const GridSettings& grid);

    const Liouvillian& liouvillian() const { return liouvillian_; }
    const SystemModel& model() const { return liouvillian_.model(); }
    const TimeGrid& grid() const { return grid_; }
    double substep() const { return substep_; }
    int superdim() const { return dim_ * dim_; }

    bool interval_is_constant(int i) const;
    /// Smallest i such that every interval >= i is constant.
    int first_constant_index() const { return first_constant_; }

    /// Advances the augmented column block (d^2 + 1 rows) across interval i.
    void advance(int i, Eigen::MatrixXcd& block) const;

    /// Augmented map of one constant interval.
    const Eigen::MatrixXcd& constant_map() const { return constant_map_; }

private:
    struct Substep {
        double a;
        double b;
    };
    std::vector<Substep> substeps(int i) const;
    void rk4_matrix_form(const Substep& s, Eigen::MatrixXcd& block) const;
    void rk4_superop(const Substep& s, Eigen::MatrixXcd& block) const;

    Liouvillian liouvillian_;
    TimeGrid grid_;
    int dim_ = 0;
    double substep_ = 0.0;
    int first_constant_ = 0;
    Eigen::MatrixXcd constant_map_;
};

/// End of the simulated window: explicit t_end, or pulse end + tail.
double simulation_end(const SystemModel& model, const GridSettings& grid);

struct TrajectoryDiagnostics {
    double max_trace_drift = 0.0;
    double max_hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
    int negative_eigenvalue_points = 0; // below -1e-6
};

struct Trajectory {
    std::vector<double> t;
    std::vector<Operator> rho;
    std::vector<double> emitted; // P_e(t)
    TrajectoryDiagnostics diagnostics;

    double population(const Basis& basis, QdLevel s, std::size_t k) const;
    double photons(const Basis& basis, std::size_t k) const;
};

/// rho(0) = |g,0><g,0| unless an initial state is given.
Trajectory propagate(const Evolution& evolution, std::optional<Operator> initial = std::nullopt);

} // namespace qdstirap
