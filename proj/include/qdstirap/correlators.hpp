// correlators.hpp: two-time cavity correlations via the quantum regression
// theorem, and the figures of merit built from them.
//
// Tables are stored in the ordering <a^dag(t+tau) a(t)> (seed a rho(t),
// read out with a^dag). The other ordering <a^dag(t) a(t+tau)> is its complex
// conjugate; the indistinguishability only needs |g1|^2.

#pragma once

#include <vector>

#include "qdstirap/solver.hpp"

namespace qdstirap {

/// Triangular t/tau tables on a uniform grid t_i = i * step, tau_j = j * step,
/// i + j <= n_intervals.
class CorrelationGrid {
public:
    CorrelationGrid() = default;
    CorrelationGrid(double step, int n_intervals);

    double step() const { return step_; }
    int intervals() const { return n_; }
    int points() const { return n_ + 1; }
    int row_length(int i) const { return n_ - i + 1; }

    /// <a^dag(t_i + tau_j) a(t_i)>
    cd& g1(int i, int j) { return g1_[offset(i) + static_cast<std::size_t>(j)]; }
    cd g1(int i, int j) const { return g1_[offset(i) + static_cast<std::size_t>(j)]; }
    /// <a^dag(t_i) a(t_i + tau_j)>
    cd g1_forward(int i, int j) const { return std::conj(g1(i, j)); }
    double& g2(int i, int j) { return g2_[offset(i) + static_cast<std::size_t>(j)]; }
    double g2(int i, int j) const { return g2_[offset(i) + static_cast<std::size_t>(j)]; }
    /// <a^dag a>(t_i)
    double& n(int i) { return n_t_[static_cast<std::size_t>(i)]; }
    double n(int i) const { return n_t_[static_cast<std::size_t>(i)]; }

    bool has_g2() const { return has_g2_; }
    void set_has_g2(bool v) { has_g2_ = v; }

private:
    std::size_t offset(int i) const {
        const auto ii = static_cast<std::size_t>(i);
        const auto nn = static_cast<std::size_t>(n_);
        return ii * (nn + 1) - ii * (ii - 1) / 2;
    }
    double step_ = 0.0;
    int n_ = 0;
    bool has_g2_ = true;
    std::vector<cd> g1_;
    std::vector<double> g2_;
    std::vector<double> n_t_;
};

/// Fills g1 (and g2 when `with_g2`) by propagating the seeds a rho(t) and
/// a rho(t) a^dag under the same time-dependent generator as the trajectory.
/// with_g2 needs n_max >= 2.
CorrelationGrid regression(const Evolution& evolution, const Trajectory& trajectory, bool with_g2 = true);

inline CorrelationGrid regression_g1(const Evolution& evolution, const Trajectory& trajectory) {
    return regression(evolution, trajectory, false);
}
inline CorrelationGrid regression_g2(const Evolution& evolution, const Trajectory& trajectory) {
    return regression(evolution, trajectory, true);
}

struct IndistinguishabilityTerms {
    double value = 0.0;
    double numerator = 0.0;   // iint (g2 - |g1|^2)
    double denominator = 0.0; // iint n(t) n(t+tau)
};

/// I = 1/2 [1 - iint (g2 - |g1|^2) / iint n(t) n(t+tau)], 2-D trapezoid over
/// 0 <= tau <= T - t. Throws NumericalError if nothing was emitted.
IndistinguishabilityTerms indistinguishability_terms(const CorrelationGrid& grid);
inline double indistinguishability(const CorrelationGrid& grid) { return indistinguishability_terms(grid).value; }

struct Spectrum {
    std::vector<double> omega; // lab-frame axis: omega_c + detuning
    std::vector<double> value;
};

/// S_c(w) = Re int_0^inf dtau e^{-i(w - w_c) tau} int_0^inf dt <a^dag(t+tau) a(t)>.
/// `detunings` are w - w_c values. Throws NumericalError when the t-integrated
/// correlation has not decayed below 1e-4 of its peak by the end of the grid.
Spectrum emission_spectrum(const CorrelationGrid& grid, const std::vector<double>& detunings, double omega_c);

/// Uniform detuning axis [-half_width, half_width].
std::vector<double> detuning_axis(double half_width, int points);

/// N_e = P_e(T) from the trajectory's integrated kappa <a^dag a>. Throws
/// NumericalError when <a^dag a> at the end still exceeds 1e-5.
double emitted_photon_number(const Trajectory& trajectory, const Basis& basis);

/// Trapezoid of kappa <a^dag a> on the output grid (cross-check).
double emitted_photon_number_trapezoid(const Trajectory& trajectory, const Basis& basis, double kappa);

} // namespace qdstirap
