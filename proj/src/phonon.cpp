#include "qdstirap/phonon.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

namespace qdstirap {

namespace {

constexpr double kQuadratureTolerance = 1e-10;
constexpr double kCutoffMultiple = 12.0; // exp(-72) beyond this

// w coth(w / 2kT); its w -> 0 limit 2kT is used below 1e-6 omega_b.
double omega_coth(double omega, double kt, double omega_b) {
    if (kt == 0.0) return omega;
    if (omega < 1e-6 * omega_b) return 2.0 * kt;
    return omega / std::tanh(omega / (2.0 * kt));
}

template <class F>
double integrate_panels(F f, double a, double b, int panels, const char* what) {
    using boost::math::quadrature::gauss_kronrod;
    double total = 0.0;
    double err_total = 0.0;
    double l1_total = 0.0;
    const double width = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double hi = (p + 1 == panels) ? b : lo + width;
        double err = 0.0;
        double l1 = 0.0;
        total += gauss_kronrod<double, 31>::integrate(f, lo, hi, 12, 1e-13, &err, &l1);
        err_total += err;
        l1_total += l1;
    }
    if (!(err_total <= kQuadratureTolerance * l1_total + 1e-300)) {
        throw NumericalError(fmt::format("{}: quadrature did not converge (error {:.3e}, L1 {:.3e})", what,
                                         err_total, l1_total));
    }
    return total;
}

// exp(-w^2/2wb^2) / w^2 * J: the common factor alpha w exp(...)
double reduced_density(double omega, double alpha, double omega_b) {
    const double x = omega / omega_b;
    return alpha * std::exp(-0.5 * x * x);
}

// cosh(phi) - 1 without cancellation for small phi
cd cosh_minus_one(cd phi) {
    const cd s = std::sinh(0.5 * phi);
    return 2.0 * s * s;
}

} // namespace

double spectral_density(double omega, double alpha, double omega_b) {
    const double x = omega / omega_b;
    return alpha * omega * omega * omega * std::exp(-0.5 * x * x);
}

double polaron_shift_quadrature(double alpha, double omega_b) {
    if (alpha == 0.0) return 0.0;
    auto f = [&](double w) { return w * w * reduced_density(w, alpha, omega_b); };
    return integrate_panels(f, 0.0, kCutoffMultiple * omega_b, 8, "polaron shift");
}

double polaron_shift_closed_form(double alpha, double omega_b) {
    return alpha * std::sqrt(units::kPi / 2.0) * omega_b * omega_b * omega_b;
}

double phi0_quadrature(double alpha, double omega_b, double temperature) {
    if (alpha == 0.0) return 0.0;
    const double kt = units::thermal_rate(temperature);
    auto f = [&](double w) { return reduced_density(w, alpha, omega_b) * omega_coth(w, kt, omega_b); };
    return integrate_panels(f, 0.0, kCutoffMultiple * omega_b, 8, "phi(0)");
}

std::shared_ptr<const PhononBath> PhononBath::create(double alpha, double omega_b, double temperature,
                                                     const BathSettings& settings) {
    if (!(alpha >= 0.0) || !(omega_b > 0.0) || !(temperature >= 0.0)) {
        throw ConfigError("PhononBath: need alpha >= 0, omega_b > 0, temperature >= 0");
    }
    std::shared_ptr<PhononBath> bath(new PhononBath());
    bath->alpha_ = alpha;
    bath->omega_b_ = omega_b;
    bath->temperature_ = temperature;
    if (alpha == 0.0) return bath;

    bath->phi0_ = phi0_quadrature(alpha, omega_b, temperature);
    bath->mean_displacement_ = std::exp(-0.5 * bath->phi0_);
    bath->polaron_shift_ = polaron_shift_quadrature(alpha, omega_b);
    const double closed = polaron_shift_closed_form(alpha, omega_b);
    if (std::abs(bath->polaron_shift_ - closed) > 1e-8 * closed) {
        throw NumericalError(fmt::format("polaron shift quadrature {} disagrees with closed form {}",
                                         bath->polaron_shift_, closed));
    }
    bath->build_tables(settings);
    return bath;
}

std::shared_ptr<const PhononBath> PhononBath::create(const RunConfig& config) {
    if (!config.model.phonons_enabled) return trivial(config.model.omega_b, config.model.temperature);
    return create(config.model.alpha, config.model.omega_b, config.model.temperature, config.bath);
}

std::shared_ptr<const PhononBath> PhononBath::trivial(double omega_b, double temperature) {
    std::shared_ptr<PhononBath> bath(new PhononBath());
    bath->omega_b_ = omega_b;
    bath->temperature_ = temperature;
    return bath;
}

cd PhononBath::phase(double tau) const {
    if (alpha_ == 0.0) return 0.0;
    if (tau < 0.0) throw std::invalid_argument("phase: tau must be >= 0");
    const double kt = units::thermal_rate(temperature_);
    const double wmax = kCutoffMultiple * omega_b_;
    const int panels = std::max(8, static_cast<int>(std::ceil(wmax * tau / units::kPi)));
    auto re = [&](double w) {
        return reduced_density(w, alpha_, omega_b_) * omega_coth(w, kt, omega_b_) * std::cos(w * tau);
    };
    const double real = integrate_panels(re, 0.0, wmax, panels, "phi(tau) real part");
    double imag = 0.0;
    if (tau > 0.0) {
        auto im = [&](double w) { return -reduced_density(w, alpha_, omega_b_) * w * std::sin(w * tau); };
        imag = integrate_panels(im, 0.0, wmax, panels, "phi(tau) imaginary part");
    }
    return {real, imag};
}

GreenValues PhononBath::green(double tau) const {
    const cd phi = phase(tau);
    const double b2 = mean_displacement_ * mean_displacement_;
    return {b2 * cosh_minus_one(phi), b2 * std::sinh(phi)};
}

void PhononBath::build_tables(const BathSettings& settings) {
    const double b2 = mean_displacement_ * mean_displacement_;
    int n = settings.tau_points;
    double tau_max = settings.tau_max;
    const double h = tau_max / (n - 1);
    std::vector<cd> phi;
    while (true) {
        tau_.resize(static_cast<std::size_t>(n));
        for (int k = static_cast<int>(phi.size()); k < n; ++k) {
            tau_[static_cast<std::size_t>(k)] = k * h;
            phi.push_back(phase(k * h));
        }
        const double gg_end = std::abs(b2 * cosh_minus_one(phi.back()));
        const double gu_end = std::abs(b2 * std::sinh(phi.back()));
        const double gg_0 = std::abs(b2 * cosh_minus_one(phi.front()));
        const double gu_0 = std::abs(b2 * std::sinh(phi.front()));
        const double tol = settings.decay_tolerance;
        if (gg_end <= tol * gg_0 && gu_end <= tol * gu_0) break;
        if (2.0 * tau_max > settings.tau_max_limit * (1.0 + 1e-12)) {
            throw NumericalError(fmt::format(
                "phonon Green functions have not decayed by tau = {} ns (|G_u| ratio {:.2e}); "
                "raise bath.tau_max_limit or bath.decay_tolerance",
                tau_max, gu_end / gu_0));
        }
        tau_max *= 2.0;
        n = 2 * n - 1;
    }
    gg_.resize(phi.size());
    gu_.resize(phi.size());
    for (std::size_t k = 0; k < phi.size(); ++k) {
        gg_[k] = b2 * cosh_minus_one(phi[k]);
        gu_[k] = b2 * std::sinh(phi[k]);
    }

    omega_points_ = settings.omega_points;
    omega_min_ = -settings.omega_span * omega_b_;
    omega_step_ = 2.0 * settings.omega_span * omega_b_ / (omega_points_ - 1);
    std::vector<double> values[2][2];
    for (auto& ch : values)
        for (auto& part : ch) part.resize(static_cast<std::size_t>(omega_points_));
    for (int i = 0; i < omega_points_; ++i) {
        const double w = omega_min_ + i * omega_step_;
        const cd g = gamma_direct(Channel::G, w);
        const cd u = gamma_direct(Channel::U, w);
        values[0][0][static_cast<std::size_t>(i)] = g.real();
        values[0][1][static_cast<std::size_t>(i)] = g.imag();
        values[1][0][static_cast<std::size_t>(i)] = u.real();
        values[1][1][static_cast<std::size_t>(i)] = u.imag();
    }
    for (int c = 0; c < 2; ++c) {
        for (int part = 0; part < 2; ++part) {
            spline_[c][part] = boost::math::interpolators::cardinal_cubic_b_spline<double>(
                values[c][part].data(), values[c][part].size(), omega_min_, omega_step_);
        }
    }
}

cd PhononBath::gamma_direct(Channel m, double omega) const {
    if (alpha_ == 0.0) return 0.0;
    const auto& g = (m == Channel::G) ? gg_ : gu_;
    const std::size_t n = g.size();
    const double h = tau_[1] - tau_[0];
    cd sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = (k == 0 || k + 1 == n) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        sum += w * g[k] * std::polar(1.0, omega * tau_[k]);
    }
    return sum * (h / 3.0);
}

cd PhononBath::gamma(Channel m, double omega) const {
    if (alpha_ == 0.0) return 0.0;
    const double omega_max = omega_min_ + (omega_points_ - 1) * omega_step_;
    if (omega < omega_min_ || omega > omega_max) return gamma_direct(m, omega);
    const int c = static_cast<int>(m);
    return {spline_[c][0](omega), spline_[c][1](omega)};
}

} // namespace qdstirap
