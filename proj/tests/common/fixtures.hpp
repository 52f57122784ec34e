// Shared fixtures and independent oracles for the unit and acceptance tests.

#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "qdstirap/correlators.hpp"
#include "qdstirap/sweep.hpp"

namespace fixtures {

using namespace qdstirap;

inline RunConfig baseline(bool phonons) {
    RunConfig c;
    c.model.phonons_enabled = phonons;
    return c;
}

/// Bare cavity: every coupling, decay and dephasing of the dot switched off,
/// so only kappa acts.
inline RunConfig cavity_only(double kappa, double t_end, int n_max = 2) {
    RunConfig c;
    c.model.phonons_enabled = false;
    c.model.g_prime = 0.0;
    c.model.omega_l_prime = 0.0;
    c.model.omega_p_max_prime = 0.0;
    c.model.gamma_x = 0.0;
    c.model.gamma_xx = 0.0;
    c.model.gamma_prime_0 = 0.0;
    c.model.kappa = kappa;
    c.model.n_max = n_max;
    c.grid.t_end = t_end;
    return c;
}

inline std::shared_ptr<const SystemModel> make_model(const RunConfig& c) {
    return std::make_shared<const SystemModel>(c, PhononBath::create(c));
}

/// Thermal cavity state with mean photon number nbar, dot in |g>.
inline Operator thermal_cavity(const Basis& basis, double nbar) {
    Operator rho = Operator::Zero(basis.dim(), basis.dim());
    const double q = nbar / (1.0 + nbar);
    double norm = 0.0;
    for (int n = 0; n <= basis.n_max(); ++n) norm += std::pow(q, n);
    for (int n = 0; n <= basis.n_max(); ++n) {
        const int k = basis.index(QdLevel::G, n);
        rho(k, k) = std::pow(q, n) / norm;
    }
    return rho;
}

/// Brute-force Xi_m(t): Simpson quadrature of G_m(tau) e^{-iH tau} X e^{iH tau}
/// on [0, tau_c], with G_m from a fresh phase evaluation at every node and the
/// propagator from the matrix exponential.
inline Operator brute_force_xi(const SystemModel& model, double t, Channel m, double tau_c, int intervals) {
    const Operator h = model.hamiltonian(t);
    const DriveOperators drives = model.drive_operators(t);
    const Operator& x = (m == Channel::G) ? drives.xg : drives.xu;
    const double step = tau_c / intervals;
    const cd i(0.0, 1.0);
    const Operator u_step = (-i * step * h).exp();
    Operator u = Operator::Identity(h.rows(), h.cols());
    Operator sum = Operator::Zero(h.rows(), h.cols());
    for (int k = 0; k <= intervals; ++k) {
        const GreenValues g = model.bath().green(k * step);
        const cd gm = (m == Channel::G) ? g.gg : g.gu;
        const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        sum += (w * gm) * (u * x * u.adjoint());
        u = u_step * u;
    }
    return sum * (step / 3.0);
}

/// Phonon dissipator assembled from given Xi operators.
inline Operator dissipator_from(const Operator& xg, const Operator& xig, const Operator& xu, const Operator& xiu,
                                const Operator& rho) {
    Operator out = Operator::Zero(rho.rows(), rho.cols());
    const Operator* xs[2] = {&xg, &xu};
    const Operator* xis[2] = {&xig, &xiu};
    for (int k = 0; k < 2; ++k) {
        const Operator& x = *xs[k];
        const Operator& xi = *xis[k];
        out -= x * xi * rho - xi * rho * x;
        out -= rho * xi.adjoint() * x - x * rho * xi.adjoint();
    }
    return out;
}

/// A mixed, fully populated test density matrix.
inline Operator test_state(int d) {
    Operator a(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) a(r, c) = cd(std::sin(1.0 + r + 2.0 * c), std::cos(3.0 * r - c));
    Operator rho = a * a.adjoint();
    return rho / rho.trace().real();
}

/// Local maximum near index k of a sampled curve, refined by a parabola.
inline double parabolic_peak(const std::vector<double>& x, const std::vector<double>& y, std::size_t k) {
    if (k == 0 || k + 1 >= x.size()) return x[k];
    const double ym = y[k - 1], y0 = y[k], yp = y[k + 1];
    const double denom = ym - 2.0 * y0 + yp;
    if (denom == 0.0) return x[k];
    return x[k] + 0.5 * (ym - yp) / denom * (x[k + 1] - x[k]);
}

/// Index of the largest sample with x in [lo, hi].
inline std::size_t argmax_in(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi) {
    std::size_t best = x.size();
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] < lo || x[k] > hi) continue;
        if (best == x.size() || y[k] > y[best]) best = k;
    }
    return best;
}

/// Half width at half maximum around the peak at index k, linear
/// interpolation on each flank.
inline double half_width(const std::vector<double>& x, const std::vector<double>& y, std::size_t k) {
    const double half = 0.5 * y[k];
    std::size_t r = k;
    while (r + 1 < x.size() && y[r + 1] > half) ++r;
    std::size_t l = k;
    while (l > 0 && y[l - 1] > half) --l;
    const double xr = x[r] + (y[r] - half) / (y[r] - y[r + 1]) * (x[r + 1] - x[r]);
    const double xl = x[l] - (y[l] - half) / (y[l] - y[l - 1]) * (x[l] - x[l - 1]);
    return 0.5 * (xr - xl);
}

} // namespace fixtures
