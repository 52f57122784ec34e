#include "qdstirap/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

namespace qdstirap {

double PulseEnvelope::value(double t, Side side) const {
    const double a = start();
    const double b = end();
    const bool inside = (side == Side::Right) ? (t >= a && t < b) : (t > a && t <= b);
    if (!inside) return 0.0;
    switch (shape) {
    case PulseShape::SawtoothRising: return omega_p_max * (t - a) / tau_p;
    case PulseShape::SawtoothFalling: return omega_p_max * (b - t) / tau_p;
    case PulseShape::Gaussian: {
        // centred, sigma = tau_p / 6, truncated at +-3 sigma
        const double x = (t - 0.5 * (a + b)) / (tau_p / 6.0);
        return omega_p_max * std::exp(-0.5 * x * x);
    }
    }
    return 0.0;
}

double pulse_value(double t, const PulseEnvelope& envelope) {
    // The falling edge of a rising sawtooth reaches its peak at the ramp end.
    if (envelope.shape == PulseShape::SawtoothRising && t == envelope.end()) {
        return envelope.value(t, Side::Left);
    }
    return envelope.value(t, Side::Right);
}

SystemModel::SystemModel(const RunConfig& config, std::shared_ptr<const PhononBath> bath)
    : config_(config), bath_(std::move(bath)), basis_(config.model.n_max) {
    validate(config_);
    if (!bath_) throw std::invalid_argument("SystemModel: bath must not be null");
    const ModelParams& p = config_.model;
    mean_displacement_ = p.phonons_enabled ? bath_->mean_displacement() : 1.0;
    const double b = mean_displacement_;
    const Couplings given{p.g_prime, p.omega_l_prime, p.omega_p_max_prime};
    if (p.renormalize_inputs) {
        bare_ = given;
        effective_ = {b * given.g, b * given.omega_l, b * given.omega_p_max};
    } else {
        effective_ = given;
        bare_ = {given.g / b, given.omega_l / b, given.omega_p_max / b};
    }
    pulse_ = {p.pulse_shape, effective_.omega_p_max, p.pulse_width, p.pulse_start};
    dephasing_ = dephasing_rate(p, p.temperature);

    using L = QdLevel;
    diagonal_ = p.delta * basis_.projector(L::X) + p.delta_l * basis_.projector(L::Y) +
                (p.delta + p.delta_l) * basis_.projector(L::XX);
    if (p.explicit_polaron_shift && p.phonons_enabled) {
        const double dp = bath_->polaron_shift();
        diagonal_ -= dp * basis_.projector(L::X) + 2.0 * dp * basis_.projector(L::XX) + dp * basis_.projector(L::Y);
    }

    collapse_ = {
        {"XX->X", basis_.dyad(L::X, L::XX), p.gamma_xx},
        {"XX->Y", basis_.dyad(L::Y, L::XX), p.gamma_xx},
        {"X->g", basis_.dyad(L::G, L::X), p.gamma_x},
        {"Y->g", basis_.dyad(L::G, L::Y), p.gamma_x},
        {"dephasing XX", basis_.projector(L::XX), 2.0 * dephasing_},
        {"dephasing X", basis_.projector(L::X), dephasing_},
        {"dephasing Y", basis_.projector(L::Y), dephasing_},
        {"cavity", basis_.a(), p.kappa},
    };

    if (phonon_dissipation()) {
        const double validity = polaron_validity();
        if (validity > 0.1) {
            spdlog::warn("polaron validity parameter (Omega/omega_b)^2 (1-<B>)^4 = {:.3g} exceeds 0.1", validity);
        }
    }
}

Operator SystemModel::coupling_part(double omega_p, const Couplings& c) const {
    using L = QdLevel;
    return omega_p * basis_.dyad(L::X, L::G) + c.omega_l * basis_.dyad(L::XX, L::X) +
           c.g * basis_.dyad(L::XX, L::Y) * basis_.a();
}

Operator SystemModel::hamiltonian(double t, Side side) const {
    const Operator raise = coupling_part(pulse_.value(t, side), effective_);
    return diagonal_ + raise + raise.adjoint();
}

DriveOperators SystemModel::drive_operators(double t, Side side) const {
    const double omega_p_bare = pulse_.value(t, side) / mean_displacement_;
    const Operator raise = coupling_part(omega_p_bare, bare_);
    const cd i(0.0, 1.0);
    return {raise + raise.adjoint(), i * raise - i * raise.adjoint()};
}

double SystemModel::polaron_validity() const {
    const double omega = std::max({bare_.g, bare_.omega_l, bare_.omega_p_max});
    const double ratio = omega / params().omega_b;
    const double one_minus_b = 1.0 - bath_->mean_displacement();
    return ratio * ratio * std::pow(one_minus_b, 4);
}

std::vector<std::vector<double>> quasi_eigenenergies(const std::vector<double>& t_grid, const RunConfig& config,
                                                     std::shared_ptr<const PhononBath> bath, int n_max_trunc) {
    RunConfig trunc = config;
    trunc.model.n_max = n_max_trunc;
    const SystemModel model(trunc, std::move(bath));
    const int d = model.basis().dim();
    std::vector<std::vector<double>> rows;
    rows.reserve(t_grid.size());
    Eigen::SelfAdjointEigenSolver<Operator> solver;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        solver.compute(model.hamiltonian(t_grid[k]), Eigen::EigenvaluesOnly);
        std::vector<double> sorted(solver.eigenvalues().data(), solver.eigenvalues().data() + d);
        if (k < 2) {
            rows.push_back(std::move(sorted));
            continue;
        }
        // Greedy matching against a linear extrapolation of each curve.
        const auto& p1 = rows[k - 1];
        const auto& p2 = rows[k - 2];
        const double s = (t_grid[k] - t_grid[k - 1]) / std::max(t_grid[k - 1] - t_grid[k - 2], 1e-300);
        std::vector<double> predicted(static_cast<std::size_t>(d));
        for (int c = 0; c < d; ++c) predicted[c] = p1[c] + s * (p1[c] - p2[c]);
        struct Pair {
            double cost;
            int curve;
            int eig;
        };
        std::vector<Pair> pairs;
        for (int c = 0; c < d; ++c)
            for (int e = 0; e < d; ++e) pairs.push_back({std::abs(predicted[c] - sorted[e]), c, e});
        std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.cost < y.cost; });
        std::vector<double> row(static_cast<std::size_t>(d), std::numeric_limits<double>::quiet_NaN());
        std::vector<bool> used(static_cast<std::size_t>(d), false);
        for (const auto& pr : pairs) {
            if (!std::isnan(row[pr.curve]) || used[pr.eig]) continue;
            row[pr.curve] = sorted[pr.eig];
            used[pr.eig] = true;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace qdstirap
