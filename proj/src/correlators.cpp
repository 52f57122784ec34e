#include "qdstirap/correlators.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace qdstirap {

CorrelationGrid::CorrelationGrid(double step, int n_intervals) : step_(step), n_(n_intervals) {
    const auto rows = static_cast<std::size_t>(n_ + 1);
    const std::size_t total = rows * (rows + 1) / 2;
    g1_.assign(total, cd(0.0));
    g2_.assign(total, 0.0);
    n_t_.assign(rows, 0.0);
}

namespace {

// Rows processed per GEMM against the adjoint read-out vectors.
constexpr int kRowChunk = 128;

} // namespace

CorrelationGrid regression(const Evolution& evolution, const Trajectory& trajectory, bool with_g2) {
    const TimeGrid& tg = evolution.grid();
    const int n_int = tg.intervals;
    if (static_cast<int>(trajectory.rho.size()) != tg.points()) {
        throw std::invalid_argument("regression: trajectory does not match the evolution grid");
    }
    const Basis& basis = evolution.model().basis();
    const int d = basis.dim();
    const Eigen::Index dd = static_cast<Eigen::Index>(d) * d;
    const int seeds = with_g2 ? 2 : 1;

    CorrelationGrid grid(tg.step, n_int);
    grid.set_has_g2(with_g2);
    for (int i = 0; i <= n_int; ++i) grid.n(i) = trajectory.photons(basis, static_cast<std::size_t>(i));

    const Operator& a = basis.a();
    const Operator& adag = basis.adag();
    const Eigen::VectorXcd read1 = vec(a);              // Tr(a^dag X) = vec(a)^dag vec(X)
    const Eigen::VectorXcd read2 = vec(basis.number()); // Tr(n X)

    auto seed = [&](int i, int which) -> Eigen::VectorXcd {
        const Operator& rho = trajectory.rho[static_cast<std::size_t>(i)];
        return which == 0 ? vec(a * rho) : vec(a * rho * adag);
    };

    // Read-out vectors carried backwards through the constant tail:
    // column j holds (P^dag)^j r, so Tr(r^dag P^j v) = column_j^dag v.
    const int ic = evolution.first_constant_index();
    const int tail = n_int - ic;
    const Eigen::MatrixXcd p_adj = evolution.constant_map().topLeftCorner(dd, dd).adjoint();
    Eigen::MatrixXcd back[2];
    for (int s = 0; s < seeds; ++s) {
        back[s].resize(dd, tail + 1);
        back[s].col(0) = (s == 0) ? read1 : read2;
        for (int j = 1; j <= tail; ++j) back[s].col(j).noalias() = p_adj * back[s].col(j - 1);
    }

    auto store = [&](int s, int i, int j, cd value) {
        if (s == 0) {
            grid.g1(i, j) = value;
        } else {
            grid.g2(i, j) = value.real();
        }
    };

    // Rows in the constant region: one GEMM per chunk of rows.
    for (int r0 = ic; r0 <= n_int; r0 += kRowChunk) {
        const int r1 = std::min(n_int + 1, r0 + kRowChunk);
        for (int s = 0; s < seeds; ++s) {
            Eigen::MatrixXcd v(dd, r1 - r0);
            for (int i = r0; i < r1; ++i) v.col(i - r0) = seed(i, s);
            const Eigen::MatrixXcd values = back[s].adjoint() * v;
            for (int i = r0; i < r1; ++i) {
                for (int j = 0; j <= n_int - i; ++j) store(s, i, j, values(j, i - r0));
            }
        }
    }

    // Rows that start before the constant region: advance all of them as one
    // growing block through the time-dependent intervals.
    if (ic > 0) {
        Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(dd + 1, static_cast<Eigen::Index>(ic) * seeds);
        for (int k = 0; k <= ic; ++k) {
            if (k < ic) {
                for (int s = 0; s < seeds; ++s) block.col(k * seeds + s).head(dd) = seed(k, s);
            }
            const int active = std::min(k + 1, ic);
            for (int r = 0; r < active; ++r) {
                for (int s = 0; s < seeds; ++s) {
                    const Eigen::VectorXcd& readout = (s == 0) ? read1 : read2;
                    store(s, r, k - r, readout.dot(block.col(r * seeds + s).head(dd)));
                }
            }
            if (k < ic) {
                Eigen::MatrixXcd sub = block.leftCols(static_cast<Eigen::Index>(active) * seeds);
                evolution.advance(k, sub);
                block.leftCols(static_cast<Eigen::Index>(active) * seeds) = sub;
            }
        }
        if (tail > 0) {
            for (int s = 0; s < seeds; ++s) {
                Eigen::MatrixXcd v(dd, ic);
                for (int r = 0; r < ic; ++r) v.col(r) = block.col(r * seeds + s).head(dd);
                const Eigen::MatrixXcd values = back[s].adjoint() * v;
                for (int r = 0; r < ic; ++r) {
                    for (int jp = 1; jp <= tail; ++jp) store(s, r, ic - r + jp, values(jp, r));
                }
            }
        }
    }
    return grid;
}

namespace {

template <class F>
double triangle_trapezoid(int n_int, double h, F f) {
    double outer = 0.0;
    for (int i = 0; i <= n_int; ++i) {
        const int len = n_int - i;
        double inner = 0.0;
        if (len > 0) {
            inner = 0.5 * (f(i, 0) + f(i, len));
            for (int j = 1; j < len; ++j) inner += f(i, j);
            inner *= h;
        }
        const double w = (i == 0 || i == n_int) ? 0.5 : 1.0;
        outer += w * inner;
    }
    return outer * h;
}

} // namespace

IndistinguishabilityTerms indistinguishability_terms(const CorrelationGrid& grid) {
    if (!grid.has_g2()) throw std::invalid_argument("indistinguishability needs g2 tables");
    const int n_int = grid.intervals();
    const double h = grid.step();
    IndistinguishabilityTerms out;
    out.numerator = triangle_trapezoid(n_int, h, [&](int i, int j) { return grid.g2(i, j) - std::norm(grid.g1(i, j)); });
    out.denominator = triangle_trapezoid(n_int, h, [&](int i, int j) { return grid.n(i) * grid.n(i + j); });
    if (!(out.denominator > 1e-14)) {
        throw NumericalError("indistinguishability undefined: no photons were emitted (vanishing denominator)");
    }
    out.value = 0.5 * (1.0 - out.numerator / out.denominator);
    return out;
}

std::vector<double> detuning_axis(double half_width, int points) {
    if (points < 2) throw std::invalid_argument("detuning_axis needs at least 2 points");
    std::vector<double> axis(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) axis[static_cast<std::size_t>(k)] = -half_width + 2.0 * half_width * k / (points - 1);
    return axis;
}

Spectrum emission_spectrum(const CorrelationGrid& grid, const std::vector<double>& detunings, double omega_c) {
    const int n_int = grid.intervals();
    const double h = grid.step();
    std::vector<cd> integrated(static_cast<std::size_t>(n_int + 1), cd(0.0));
    double peak = 0.0;
    for (int j = 0; j <= n_int; ++j) {
        const int len = n_int - j;
        cd sum = 0.0;
        if (len > 0) {
            sum = 0.5 * (grid.g1(0, j) + grid.g1(len, j));
            for (int i = 1; i < len; ++i) sum += grid.g1(i, j);
            sum *= h;
        }
        integrated[static_cast<std::size_t>(j)] = sum;
        peak = std::max(peak, std::abs(sum));
    }
    if (!(peak > 0.0)) throw NumericalError("emission spectrum undefined: correlation table is zero");
    double late = 0.0;
    for (int j = n_int / 2; j <= n_int; ++j) late = std::max(late, std::abs(integrated[static_cast<std::size_t>(j)]));
    if (late > 1e-4 * peak) {
        throw NumericalError(fmt::format(
            "insufficient tau coverage for the spectrum: |int g1 dt| is {:.2e} of its peak at tau >= T/2", late / peak));
    }
    Spectrum out;
    out.omega.reserve(detunings.size());
    out.value.reserve(detunings.size());
    for (double delta : detunings) {
        cd acc = 0.0;
        for (int j = 0; j <= n_int; ++j) {
            const double w = (j == 0 || j == n_int) ? 0.5 : 1.0;
            acc += w * std::polar(1.0, -delta * j * h) * integrated[static_cast<std::size_t>(j)];
        }
        out.omega.push_back(omega_c + delta);
        out.value.push_back((acc * h).real());
    }
    return out;
}

double emitted_photon_number(const Trajectory& trajectory, const Basis& basis) {
    if (trajectory.rho.empty()) throw std::invalid_argument("emitted_photon_number: empty trajectory");
    const double last = trajectory.photons(basis, trajectory.rho.size() - 1);
    if (last >= 1e-5) {
        throw NumericalError(fmt::format("cavity has not emptied by t = {} ns (<a^dag a> = {:.2e})",
                                         trajectory.t.back(), last));
    }
    return trajectory.emitted.back();
}

double emitted_photon_number_trapezoid(const Trajectory& trajectory, const Basis& basis, double kappa) {
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < trajectory.t.size(); ++k) {
        const double dt = trajectory.t[k + 1] - trajectory.t[k];
        sum += 0.5 * dt * (trajectory.photons(basis, k) + trajectory.photons(basis, k + 1));
    }
    return kappa * sum;
}

} // namespace qdstirap
