#include "qdstirap/solver.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <unsupported/Eigen/KroneckerProduct>

namespace qdstirap {

namespace {

// Blocks narrower than this are advanced in matrix form; wider blocks pay for
// assembling the superoperator once per RK4 node.
constexpr Eigen::Index kSuperopColumns = 12;

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

} // namespace

Operator weighted_drive(const Operator& h, const Operator& x, Channel m, const PhononBath& bath) {
    Eigen::SelfAdjointEigenSolver<Operator> es(h);
    if (es.info() != Eigen::Success) {
        Operator jittered = h;
        for (Eigen::Index k = 0; k < h.rows(); ++k) jittered(k, k) += 1e-12 * static_cast<double>(k + 1);
        es.compute(jittered);
        if (es.info() != Eigen::Success) {
            throw NumericalError("eigen-decomposition of H'_S failed after jitter retry");
        }
    }
    const Operator& v = es.eigenvectors();
    const Eigen::VectorXd& e = es.eigenvalues();
    Operator xe = v.adjoint() * x * v;
    for (Eigen::Index k = 0; k < xe.cols(); ++k) {
        for (Eigen::Index j = 0; j < xe.rows(); ++j) {
            if (xe(j, k) == cd(0.0)) continue;
            xe(j, k) *= bath.gamma(m, e(k) - e(j));
        }
    }
    return v * xe * v.adjoint();
}

Liouvillian::Liouvillian(std::shared_ptr<const SystemModel> model) : model_(std::move(model)) {
    const int d = dim();
    jump_sum_ = Operator::Zero(d, d);
    const Operator id = Operator::Identity(d, d);
    lindblad_super_ = Eigen::MatrixXcd::Zero(d * d, d * d);
    for (const auto& c : model_->collapse_set()) {
        if (c.rate == 0.0) continue;
        Operator j = std::sqrt(c.rate) * c.op;
        const Operator jdj = j.adjoint() * j;
        jump_sum_ += jdj;
        lindblad_super_ += kron(j.conjugate(), j) - 0.5 * kron(id, jdj) - 0.5 * kron(jdj.transpose(), id);
        jumps_.push_back(std::move(j));
    }
}

GeneratorTerms Liouvillian::terms(double t, Side side) const {
    GeneratorTerms out;
    out.t = t;
    out.h = model_->hamiltonian(t, side);
    out.phonons = model_->phonon_dissipation();
    if (out.phonons) {
        const DriveOperators drives = model_->drive_operators(t, side);
        out.x[0] = drives.xg;
        out.x[1] = drives.xu;
        out.xi[0] = weighted_drive(out.h, drives.xg, Channel::G, model_->bath());
        out.xi[1] = weighted_drive(out.h, drives.xu, Channel::U, model_->bath());
    }
    return out;
}

Operator Liouvillian::lindblad(const Operator& rho) const {
    Operator out = -0.5 * (jump_sum_ * rho + rho * jump_sum_);
    for (const auto& j : jumps_) out.noalias() += j * rho * j.adjoint();
    return out;
}

Operator Liouvillian::phonon_dissipator(const GeneratorTerms& terms, const Operator& rho) const {
    Operator out = Operator::Zero(rho.rows(), rho.cols());
    if (!terms.phonons) return out;
    for (int m = 0; m < 2; ++m) {
        const Operator& x = terms.x[m];
        const Operator a = terms.xi[m] * rho;
        const Operator b = rho * terms.xi[m].adjoint();
        out.noalias() -= x * a - a * x;
        out.noalias() -= b * x - x * b;
    }
    return out;
}

Operator Liouvillian::apply(const GeneratorTerms& terms, const Operator& rho) const {
    const cd i(0.0, 1.0);
    Operator out = -i * (terms.h * rho - rho * terms.h);
    out += lindblad(rho);
    if (terms.phonons) out += phonon_dissipator(terms, rho);
    return out;
}

Eigen::MatrixXcd Liouvillian::superoperator(const GeneratorTerms& terms, bool augmented) const {
    const int d = dim();
    const int n = d * d;
    const Operator id = Operator::Identity(d, d);
    const cd i(0.0, 1.0);
    Eigen::MatrixXcd s = lindblad_super_ - i * (kron(id, terms.h) - kron(terms.h.transpose(), id));
    if (terms.phonons) {
        for (int m = 0; m < 2; ++m) {
            const Operator& x = terms.x[m];
            const Operator& xi = terms.xi[m];
            s -= kron(id, x * xi);
            s += kron(x.transpose(), xi);
            s -= kron((xi.adjoint() * x).transpose(), id);
            s += kron(xi.conjugate(), x);
        }
    }
    if (!augmented) return s;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    out.topLeftCorner(n, n) = s;
    out.block(n, 0, 1, n) = model_->params().kappa * vec(model_->basis().number()).adjoint();
    return out;
}

double Liouvillian::max_step() const {
    const SystemModel& m = *model_;
    const PulseEnvelope& p = m.pulse();
    double radius = 0.0;
    Eigen::SelfAdjointEigenSolver<Operator> es;
    auto probe = [&](double t, Side side) {
        es.compute(m.hamiltonian(t, side), Eigen::EigenvaluesOnly);
        radius = std::max(radius, es.eigenvalues().cwiseAbs().maxCoeff());
    };
    probe(p.end(), Side::Right);
    constexpr int kSamples = 64;
    for (int k = 0; k <= kSamples; ++k) {
        const double t = p.start() + p.tau_p * k / kSamples;
        probe(t, Side::Left);
        probe(t, Side::Right);
    }
    const double scale = std::max({radius, m.params().kappa, m.effective().omega_l, 1e-12});
    return 0.1 / scale;
}

Operator phonon_dissipator(double t, const Operator& rho, const Liouvillian& liouvillian) {
    return liouvillian.phonon_dissipator(liouvillian.terms(t), rho);
}

Operator step(const Operator& rho, double t, double dt, const Liouvillian& liouvillian) {
    const double limit = liouvillian.max_step();
    if (dt > limit * (1.0 + 1e-12)) {
        throw NumericalError(fmt::format("step size {} ns exceeds the stability bound {} ns", dt, limit));
    }
    const GeneratorTerms ta = liouvillian.terms(t, Side::Right);
    const GeneratorTerms tm = liouvillian.terms(t + 0.5 * dt, Side::Right);
    const GeneratorTerms tb = liouvillian.terms(t + dt, Side::Left);
    const Operator k1 = liouvillian.apply(ta, rho);
    const Operator k2 = liouvillian.apply(tm, rho + 0.5 * dt * k1);
    const Operator k3 = liouvillian.apply(tm, rho + 0.5 * dt * k2);
    const Operator k4 = liouvillian.apply(tb, rho + dt * k3);
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double simulation_end(const SystemModel& model, const GridSettings& grid) {
    if (grid.t_end > 0.0) return grid.t_end;
    const ModelParams& p = model.params();
    const double slowest = p.gamma_x > 0.0 ? p.gamma_x : std::max(p.kappa, 1e-3);
    return model.pulse().end() + grid.tail_lifetimes / slowest;
}

Evolution::Evolution(std::shared_ptr<const SystemModel> model, const GridSettings& grid)
    : liouvillian_(std::move(model)), dim_(liouvillian_.dim()) {
    const SystemModel& m = liouvillian_.model();
    grid_.step = grid.output_step;
    const double t_end = simulation_end(m, grid);
    grid_.intervals = std::max(1, static_cast<int>(std::ceil(t_end / grid_.step - 1e-9)));

    const double limit = liouvillian_.max_step();
    substep_ = grid.dt;
    if (substep_ > limit) {
        spdlog::info("RK4 step reduced from {} ns to the stability bound {} ns", substep_, limit);
        substep_ = limit;
    }

    first_constant_ = grid_.intervals;
    while (first_constant_ > 0 && interval_is_constant(first_constant_ - 1)) --first_constant_;

    // Map of a constant interval: RK4 step matrix to the power n_sub.
    const int n_sub = std::max(1, static_cast<int>(std::ceil(grid_.step / substep_ - 1e-9)));
    const double h = grid_.step / n_sub;
    const double t_quiet = m.pulse().end();
    const Eigen::MatrixXcd l = h * liouvillian_.superoperator(liouvillian_.terms(t_quiet, Side::Right), true);
    const Eigen::Index n = l.rows();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd step_matrix = id + l / 4.0;
    step_matrix = id + (l * step_matrix) / 3.0;
    step_matrix = id + (l * step_matrix) / 2.0;
    step_matrix = id + l * step_matrix;
    constant_map_ = step_matrix;
    for (int k = 1; k < n_sub; ++k) constant_map_ = (step_matrix * constant_map_).eval();
}

bool Evolution::interval_is_constant(int i) const {
    const PulseEnvelope& p = model().pulse();
    if (p.omega_p_max == 0.0) return true;
    const double a = grid_.time(i);
    const double b = grid_.time(i + 1);
    return !(a < p.end() && b > p.start());
}

std::vector<Evolution::Substep> Evolution::substeps(int i) const {
    const PulseEnvelope& p = model().pulse();
    const double a = grid_.time(i);
    const double b = grid_.time(i + 1);
    std::vector<double> cuts{a};
    for (double edge : {p.start(), p.end()}) {
        if (edge > a && edge < b) cuts.push_back(edge);
    }
    cuts.push_back(b);
    std::vector<Substep> out;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double len = cuts[k + 1] - cuts[k];
        const int n = std::max(1, static_cast<int>(std::ceil(len / substep_ - 1e-9)));
        for (int s = 0; s < n; ++s) {
            const double lo = cuts[k] + len * s / n;
            const double hi = (s + 1 == n) ? cuts[k + 1] : cuts[k] + len * (s + 1) / n;
            out.push_back({lo, hi});
        }
    }
    return out;
}

void Evolution::rk4_matrix_form(const Substep& s, Eigen::MatrixXcd& block) const {
    const int d = dim_;
    const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
    const double h = s.b - s.a;
    const double kappa = model().params().kappa;
    const Operator& number = model().basis().number();
    const GeneratorTerms ta = liouvillian_.terms(s.a, Side::Right);
    const GeneratorTerms tm = liouvillian_.terms(0.5 * (s.a + s.b), Side::Right);
    const GeneratorTerms tb = liouvillian_.terms(s.b, Side::Left);
    auto f = [&](const GeneratorTerms& terms, const Eigen::VectorXcd& y) {
        Eigen::VectorXcd out(n + 1);
        const Operator rho = unvec(y.head(n), d);
        out.head(n) = vec(liouvillian_.apply(terms, rho));
        out(n) = kappa * expectation(rho, number);
        return out;
    };
    for (Eigen::Index c = 0; c < block.cols(); ++c) {
        const Eigen::VectorXcd y = block.col(c);
        const Eigen::VectorXcd k1 = f(ta, y);
        const Eigen::VectorXcd k2 = f(tm, y + 0.5 * h * k1);
        const Eigen::VectorXcd k3 = f(tm, y + 0.5 * h * k2);
        const Eigen::VectorXcd k4 = f(tb, y + h * k3);
        block.col(c) = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
}

void Evolution::rk4_superop(const Substep& s, Eigen::MatrixXcd& block) const {
    const double h = s.b - s.a;
    const Eigen::MatrixXcd la = liouvillian_.superoperator(liouvillian_.terms(s.a, Side::Right), true);
    const Eigen::MatrixXcd lm = liouvillian_.superoperator(liouvillian_.terms(0.5 * (s.a + s.b), Side::Right), true);
    const Eigen::MatrixXcd lb = liouvillian_.superoperator(liouvillian_.terms(s.b, Side::Left), true);
    const Eigen::MatrixXcd k1 = la * block;
    const Eigen::MatrixXcd k2 = lm * (block + 0.5 * h * k1);
    const Eigen::MatrixXcd k3 = lm * (block + 0.5 * h * k2);
    const Eigen::MatrixXcd k4 = lb * (block + h * k3);
    block += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void Evolution::advance(int i, Eigen::MatrixXcd& block) const {
    if (interval_is_constant(i)) {
        block = (constant_map_ * block).eval();
        return;
    }
    const bool superop = block.cols() >= kSuperopColumns;
    for (const Substep& s : substeps(i)) {
        if (superop) {
            rk4_superop(s, block);
        } else {
            rk4_matrix_form(s, block);
        }
    }
}

double Trajectory::population(const Basis& basis, QdLevel s, std::size_t k) const {
    return expectation(rho[k], basis.projector(s)).real();
}

double Trajectory::photons(const Basis& basis, std::size_t k) const {
    return expectation(rho[k], basis.number()).real();
}

Trajectory propagate(const Evolution& evolution, std::optional<Operator> initial) {
    const SystemModel& model = evolution.model();
    const Basis& basis = model.basis();
    const int d = basis.dim();
    const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
    const Operator rho0 = initial ? *initial : basis.pure_state(QdLevel::G, 0);
    if (rho0.rows() != d || rho0.cols() != d) throw std::invalid_argument("propagate: initial state dimension");
    const cd trace0 = rho0.trace();

    Eigen::MatrixXcd state = Eigen::MatrixXcd::Zero(n + 1, 1);
    state.col(0).head(n) = vec(rho0);

    Trajectory traj;
    const TimeGrid& grid = evolution.grid();
    traj.t.reserve(static_cast<std::size_t>(grid.points()));
    traj.rho.reserve(static_cast<std::size_t>(grid.points()));
    traj.emitted.reserve(static_cast<std::size_t>(grid.points()));
    TrajectoryDiagnostics& diag = traj.diagnostics;
    Eigen::SelfAdjointEigenSolver<Operator> es;
    for (int i = 0; i <= grid.intervals; ++i) {
        Operator rho = unvec(state.col(0).head(n), d);
        diag.max_trace_drift = std::max(diag.max_trace_drift, std::abs(rho.trace() - trace0));
        diag.max_hermiticity_error = std::max(diag.max_hermiticity_error, hermiticity_error(rho));
        es.compute(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
        const double lowest = es.eigenvalues()(0);
        diag.min_eigenvalue = (i == 0) ? lowest : std::min(diag.min_eigenvalue, lowest);
        if (lowest < -1e-6) ++diag.negative_eigenvalue_points;
        traj.t.push_back(grid.time(i));
        traj.emitted.push_back(state(n, 0).real());
        traj.rho.push_back(std::move(rho));
        if (i < grid.intervals) evolution.advance(i, state);
    }
    if (diag.negative_eigenvalue_points > 0) {
        spdlog::warn("density matrix has eigenvalues below -1e-6 at {} output times (min {:.3e}); "
                     "the time-local master equation does not guarantee positivity",
                     diag.negative_eigenvalue_points, diag.min_eigenvalue);
    }
    return traj;
}

} // namespace qdstirap
