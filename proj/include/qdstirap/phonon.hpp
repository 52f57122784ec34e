// phonon.hpp: LA-phonon bath: spectral density, IBM phase function, <B>,
// polaron shift, polaron Green functions and their half-Fourier transforms.
//
// J(w) = alpha w^3 exp(-w^2 / (2 w_b^2)). The exponent is negative; the
// positive sign sometimes printed for this deformation-potential form makes
// every bath integral diverge.

#pragma once

#include <complex>
#include <memory>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "qdstirap/config.hpp"

namespace qdstirap {

using cd = std::complex<double>;

double spectral_density(double omega, double alpha, double omega_b);

/// The two polaron bath channels: g (cosh-like) and u (sinh-like).
enum class Channel { G = 0, U = 1 };

struct GreenValues {
    cd gg;
    cd gu;
};

class PhononBath {
public:
    /// Precomputes <B>, delta_P and the tau / omega tables. Throws
    /// NumericalError when a quadrature fails or the Green functions have not
    /// decayed within settings.tau_max_limit.
    static std::shared_ptr<const PhononBath> create(double alpha, double omega_b, double temperature,
                                                    const BathSettings& settings = {});
    static std::shared_ptr<const PhononBath> create(const RunConfig& config);

    /// A bath with alpha = 0: <B> = 1 and vanishing correlations.
    static std::shared_ptr<const PhononBath> trivial(double omega_b = 1.0, double temperature = 0.0);

    double alpha() const { return alpha_; }
    double omega_b() const { return omega_b_; }
    double temperature() const { return temperature_; }
    bool is_trivial() const { return alpha_ == 0.0; }

    double phi0() const { return phi0_; }
    double mean_displacement() const { return mean_displacement_; }
    double polaron_shift() const { return polaron_shift_; }

    /// phi(tau) by adaptive Gauss-Kronrod quadrature (relative tolerance 1e-10).
    cd phase(double tau) const;

    /// G_g, G_u at tau from a fresh phase() evaluation.
    GreenValues green(double tau) const;

    const std::vector<double>& tau_grid() const { return tau_; }
    const std::vector<cd>& gg_table() const { return gg_; }
    const std::vector<cd>& gu_table() const { return gu_; }
    double tau_max() const { return tau_.empty() ? 0.0 : tau_.back(); }

    /// Gamma_m(w) = int_0^inf G_m(tau) e^{i w tau} dtau, spline-interpolated
    /// from the tabulated grid; outside the grid the Simpson sum is evaluated
    /// directly.
    cd gamma(Channel m, double omega) const;

    /// Gamma_m(w) from the Simpson sum over the tau table, no interpolation.
    cd gamma_direct(Channel m, double omega) const;

    double omega_min() const { return omega_min_; }
    double omega_step() const { return omega_step_; }
    int omega_points() const { return omega_points_; }

private:
    PhononBath() = default;
    void build_tables(const BathSettings& settings);

    double alpha_ = 0.0;
    double omega_b_ = 1.0;
    double temperature_ = 0.0;
    double phi0_ = 0.0;
    double mean_displacement_ = 1.0;
    double polaron_shift_ = 0.0;

    std::vector<double> tau_;
    std::vector<cd> gg_;
    std::vector<cd> gu_;

    double omega_min_ = 0.0;
    double omega_step_ = 1.0;
    int omega_points_ = 0;
    // re/im splines for the g and u channels
    boost::math::interpolators::cardinal_cubic_b_spline<double> spline_[2][2];
};

/// phi(tau) for a bath (free-function form of PhononBath::phase).
inline cd phase_function(double tau, const PhononBath& bath) { return bath.phase(tau); }

/// int_0^inf J(w)/w dw by quadrature.
double polaron_shift_quadrature(double alpha, double omega_b);

/// alpha sqrt(pi/2) omega_b^3.
double polaron_shift_closed_form(double alpha, double omega_b);

/// phi(0) by quadrature (equals alpha omega_b^2 at T = 0).
double phi0_quadrature(double alpha, double omega_b, double temperature);

} // namespace qdstirap
