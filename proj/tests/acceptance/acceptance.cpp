// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed here.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "fixtures.hpp"

using namespace qdstirap;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
    fmt::print("{}  {:<44} {}\n", ok ? "PASS" : "FAIL", name, detail);
    std::fflush(stdout);
    if (!ok) ++failures;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

// Runs `body`; an exception counts as a failure of criterion `name`.
void guarded(const std::string& name, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(false, name, fmt::format("exception: {}", e.what()));
    }
}

// ---------------------------------------------------------------------------

void baseline_values() {
    constexpr double kTol = 0.02;
    struct Case {
        bool phonons;
        double ne;
        double indist;
    };
    for (const Case& c : {Case{false, 1.00, 0.96}, Case{true, 0.93, 0.90}}) {
        const std::string name = c.phonons ? "baseline values, with phonons" : "baseline values, without phonons";
        guarded(name, [&] {
            const RunConfig config = fixtures::baseline(c.phonons);
            auto t0 = std::chrono::steady_clock::now();
            OutputSelection ne_only;
            ne_only.indistinguishability = false;
            const RunResult a = simulate(config, ne_only);
            const double t_ne = elapsed(t0);
            t0 = std::chrono::steady_clock::now();
            const RunResult b = simulate(config);
            const double t_i = elapsed(t0);
            const bool ok = within(a.emitted_photons, c.ne, kTol) && within(*b.indistinguishability, c.indist, kTol) &&
                            t_ne < 300.0 && t_i < 3600.0;
            report(ok, name,
                   fmt::format("N_e = {:.4f} (target {:.2f} +- {}), I = {:.4f} (target {:.2f} +- {}); "
                               "runtime N_e {:.1f} s, I {:.1f} s",
                               a.emitted_photons, c.ne, kTol, *b.indistinguishability, c.indist, kTol, t_ne, t_i));
        });
    }
}

void bath_oracles() {
    constexpr double kRel = 1e-8;
    const double alpha = units::ps2_to_ns2(0.03);
    const double wb = units::millievolt_to_rate(0.9);
    guarded("bath: phi(0) at T = 0", [&] {
        const double closed = alpha * wb * wb;
        const double quad = phi0_quadrature(alpha, wb, 0.0);
        const double rel = std::abs(quad / closed - 1.0);
        report(rel <= kRel, "bath: phi(0) at T = 0",
               fmt::format("quadrature {:.12g} vs alpha w_b^2 {:.12g}, rel. diff {:.1e} (tol {:.0e})", quad, closed, rel,
                           kRel));
    });
    guarded("bath: polaron shift", [&] {
        const double closed = polaron_shift_closed_form(alpha, wb);
        const double quad = polaron_shift_quadrature(alpha, wb);
        const double rel = std::abs(quad / closed - 1.0);
        report(rel <= kRel, "bath: polaron shift",
               fmt::format("quadrature {:.12g} vs closed form {:.12g} ns^-1, rel. diff {:.1e} (tol {:.0e})", quad,
                           closed, rel, kRel));
    });
    guarded("bath: <B>(5 K)", [&] {
        const double b = PhononBath::create(alpha, wb, 5.0)->mean_displacement();
        report(within(b, 0.96, 0.01), "bath: <B>(5 K)", fmt::format("<B> = {:.5f} (target 0.96 +- 0.01)", b));
    });
}

void detuning_structure() {
    constexpr double kPositionTol = 10.0; // ueV
    constexpr double kMinEfficiency = 0.97;
    const double omega_l_ueV = 164.5; // Omega_l' = 250 ns^-1 as quoted in energy units
    for (double sign : {+1.0, -1.0}) {
        const std::string name = fmt::format("detuning: efficiency maximum near {}Omega_l", sign > 0 ? "+" : "-");
        guarded(name, [&] {
            // 1 ueV scan over +-30 ueV around the CW Rabi splitting, parabolic refinement.
            RunConfig c = fixtures::baseline(false);
            OutputSelection ne_only;
            ne_only.indistinguishability = false;
            std::vector<double> x;
            std::vector<double> y;
            const auto bath = PhononBath::trivial();
            for (int k = -30; k <= 30; ++k) {
                const double d = sign * omega_l_ueV + k;
                c.model.delta = units::microev_to_rate(d);
                x.push_back(d);
                y.push_back(simulate(c, ne_only, bath).emitted_photons);
            }
            const std::size_t k = fixtures::argmax_in(x, y, x.front(), x.back());
            const bool interior = k > 0 && k + 1 < x.size();
            const double peak = fixtures::parabolic_peak(x, y, k);
            const bool ok = interior && std::abs(peak - sign * omega_l_ueV) <= kPositionTol && y[k] >= kMinEfficiency;
            report(ok, name,
                   fmt::format("maximum at {:.2f} ueV (target {:.1f} +- {}), N_e = {:.4f} (>= {}), no phonons", peak,
                               sign * omega_l_ueV, kPositionTol, y[k], kMinEfficiency));
        });
    }
    guarded("detuning: I(+158 ueV) > I(-158 ueV)", [&] {
        RunConfig c = fixtures::baseline(true);
        const auto bath = PhononBath::create(c);
        c.model.delta = units::microev_to_rate(158.0);
        const double ip = *simulate(c, {}, bath).indistinguishability;
        c.model.delta = units::microev_to_rate(-158.0);
        const double im = *simulate(c, {}, bath).indistinguishability;
        report(ip > im, "detuning: I(+158 ueV) > I(-158 ueV)",
               fmt::format("I(+158) = {:.4f}, I(-158) = {:.4f}, with phonons", ip, im));
    });
}

void spectrum_structure() {
    constexpr double kRelPosition = 0.05;
    const double omega_l = 250.0;
    struct Peaks {
        double left_pos, right_pos, left_ratio, right_ratio;
        bool interior;
    };
    const auto analyse = [&](bool phonons) {
        const RunConfig c = fixtures::baseline(phonons);
        OutputSelection o;
        o.indistinguishability = false;
        o.spectrum = true;
        SpectrumSettings s;
        s.half_width = 600.0;
        s.points = 2401;
        const RunResult r = simulate(c, o, nullptr, s);
        const auto& x = r.spectrum->omega;
        const auto& y = r.spectrum->value;
        const std::size_t kc = fixtures::argmax_in(x, y, -0.5 * omega_l, 0.5 * omega_l);
        const std::size_t kr = fixtures::argmax_in(x, y, 0.5 * omega_l, 1.5 * omega_l);
        const std::size_t kl = fixtures::argmax_in(x, y, -1.5 * omega_l, -0.5 * omega_l);
        const auto local = [&](std::size_t k) { return k > 0 && k + 1 < x.size() && y[k] >= y[k - 1] && y[k] >= y[k + 1]; };
        const double xc = fixtures::parabolic_peak(x, y, kc);
        const double xl = fixtures::parabolic_peak(x, y, kl) - xc;
        const double xr = fixtures::parabolic_peak(x, y, kr) - xc;
        // sidepeaks must be separate maxima, not the flank of the central line
        const bool interior = local(kc) && local(kl) && local(kr) && std::abs(x[kl] - x.front()) > 1.0 &&
                              x[kl] > -1.5 * omega_l && x[kr] < 1.5 * omega_l;
        return Peaks{xl, xr, y[kl] / y[kc], y[kr] / y[kc], interior};
    };
    guarded("spectrum: sidepeaks at +-Omega_l", [&] {
        const Peaks off = analyse(false);
        const Peaks on = analyse(true);
        bool ok = off.interior && on.interior;
        for (const Peaks* p : {&off, &on}) {
            ok = ok && std::abs(p->right_pos - omega_l) <= kRelPosition * omega_l &&
                 std::abs(p->left_pos + omega_l) <= kRelPosition * omega_l;
        }
        report(ok, "spectrum: sidepeaks at +-Omega_l",
               fmt::format("offsets without phonons {:+.1f}/{:+.1f}, with {:+.1f}/{:+.1f} ns^-1 (target +-{} within {}%)",
                           off.left_pos, off.right_pos, on.left_pos, on.right_pos, omega_l, 100 * kRelPosition));
        const bool larger = on.left_ratio > off.left_ratio && on.right_ratio > off.right_ratio;
        report(larger, "spectrum: sidepeak ratio grows with phonons",
               fmt::format("side/central left {:.4f} -> {:.4f}, right {:.4f} -> {:.4f}", off.left_ratio, on.left_ratio,
                           off.right_ratio, on.right_ratio));
    });
}

void property_suite() {
    const auto t0 = std::chrono::steady_clock::now();

    guarded("property: trace and Hermiticity", [&] {
        const auto model = fixtures::make_model(fixtures::baseline(true));
        const Trajectory tr = propagate(Evolution(model, model->config().grid));
        const auto& d = tr.diagnostics;
        report(d.max_trace_drift < 1e-8 && d.max_hermiticity_error < 1e-10, "property: trace and Hermiticity",
               fmt::format("trace drift {:.1e} (< 1e-8), Hermiticity {:.1e} (< 1e-10)", d.max_trace_drift,
                           d.max_hermiticity_error));
    });

    guarded("property: phonon dissipator zero limits", [&] {
        RunConfig c = fixtures::baseline(true);
        c.model.alpha = 0.0;
        const auto no_alpha = fixtures::make_model(c);
        const Operator rho = fixtures::test_state(no_alpha->basis().dim());
        const double a = phonon_dissipator(0.1, rho, Liouvillian(no_alpha)).norm();
        RunConfig d = fixtures::baseline(true);
        d.model.g_prime = 0.0;
        d.model.omega_l_prime = 0.0;
        const double b = phonon_dissipator(1.0, rho, Liouvillian(fixtures::make_model(d))).norm();
        report(a == 0.0 && b == 0.0, "property: phonon dissipator zero limits",
               fmt::format("||D|| = {} with alpha = 0, {} with all drives zero", a, b));
    });

    guarded("property: g1(t, 0) = n(t)", [&] {
        const auto model = fixtures::make_model(fixtures::baseline(true));
        const Evolution ev(model, model->config().grid);
        const Trajectory tr = propagate(ev);
        const CorrelationGrid g = regression(ev, tr);
        double worst = 0.0;
        for (int i = 0; i < g.points(); ++i) worst = std::max(worst, std::abs(g.g1(i, 0) - cd(g.n(i), 0.0)));
        report(worst < 1e-8, "property: g1(t, 0) = n(t)", fmt::format("max deviation {:.1e} (< 1e-8)", worst));
    });

    guarded("property: indistinguishability endpoints", [&] {
        const RunConfig c = fixtures::cavity_only(25.0, 2.0, 1);
        const auto model = fixtures::make_model(c);
        const Evolution ev(model, c.grid);
        const Trajectory tr = propagate(ev, model->basis().pure_state(QdLevel::G, 1));
        const double one = indistinguishability(regression(ev, tr));
        CorrelationGrid g(0.01, 300);
        for (int i = 0; i < g.points(); ++i) g.n(i) = std::exp(-0.1 * i) * (1.0 - std::exp(-0.3 * i));
        for (int i = 0; i < g.points(); ++i)
            for (int j = 0; j < g.row_length(i); ++j) g.g2(i, j) = g.n(i) * g.n(i + j);
        const double zero = indistinguishability(g);
        report(std::abs(one - 1.0) < 1e-9 && zero == 0.0, "property: indistinguishability endpoints",
               fmt::format("single photon I = {:.12f}, dephased I = {}", one, zero));
    });

    guarded("property: damped cavity decay and Lorentzian", [&] {
        const double kappa = 25.0;
        const RunConfig c = fixtures::cavity_only(kappa, 2.0, 1);
        const auto model = fixtures::make_model(c);
        const Evolution ev(model, c.grid);
        const Trajectory tr = propagate(ev, model->basis().pure_state(QdLevel::G, 1));
        double worst = 0.0;
        for (std::size_t k = 0; k < tr.t.size(); ++k)
            worst = std::max(worst, std::abs(tr.photons(model->basis(), k) - std::exp(-kappa * tr.t[k])));
        const Spectrum s = emission_spectrum(regression_g1(ev, tr), detuning_axis(200.0, 4001), 0.0);
        const std::size_t k = fixtures::argmax_in(s.omega, s.value, -1e9, 1e9);
        const double hw = fixtures::half_width(s.omega, s.value, k);
        const double bin = s.omega[1] - s.omega[0];
        const double pos = fixtures::parabolic_peak(s.omega, s.value, k);
        const double hw_err = std::abs(hw / (kappa / 2) - 1.0);
        report(worst < 1e-8 && hw_err < 0.02 && std::abs(pos) < bin, "property: damped cavity decay and Lorentzian",
               fmt::format("max |n - e^-kt| {:.1e}; half-width {:.3f} vs {:.1f} ({:.2f}%, < 2%); peak at {:.3f}", worst,
                           hw, kappa / 2, 100 * hw_err, pos));
    });

    guarded("property: RK4 step halving", [&] {
        RunConfig c = fixtures::baseline(true);
        const auto ne = [&](double dt) {
            c.grid.dt = dt;
            const auto model = fixtures::make_model(c);
            return emitted_photon_number(propagate(Evolution(model, c.grid)), model->basis());
        };
        const double diff = std::abs(ne(1e-4) - ne(2e-4));
        report(diff < 1e-4, "property: RK4 step halving", fmt::format("|dN_e| = {:.2e} (< 1e-4)", diff));
    });

    guarded("property: dissipator vs tau-quadrature oracle", [&] {
        const auto model = fixtures::make_model(fixtures::baseline(true));
        const Liouvillian liouvillian(model);
        const Operator rho = fixtures::test_state(liouvillian.dim());
        double worst = 0.0;
        for (double t : {0.05, 0.12, 0.18}) {
            const GeneratorTerms terms = liouvillian.terms(t);
            const double tau_c = model->bath().tau_max();
            const Operator xig = fixtures::brute_force_xi(*model, t, Channel::G, tau_c, 2000);
            const Operator xiu = fixtures::brute_force_xi(*model, t, Channel::U, tau_c, 2000);
            const Operator oracle = fixtures::dissipator_from(terms.x[0], xig, terms.x[1], xiu, rho);
            worst = std::max(worst, (oracle - liouvillian.phonon_dissipator(terms, rho)).cwiseAbs().maxCoeff());
        }
        report(worst < 1e-5, "property: dissipator vs tau-quadrature oracle",
               fmt::format("max elementwise difference {:.1e} at t = 0.05, 0.12, 0.18 ns (< 1e-5)", worst));
    });

    const double total = elapsed(t0);
    report(total < 120.0, "property: suite runtime", fmt::format("{:.1f} s (< 120 s)", total));
}

bool non_increasing(const std::vector<double>& v, double slack) {
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (!(v[k] <= v[k - 1] + slack)) return false;
    }
    return true;
}

std::string list(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += fmt::format("{}{:.3f}", s.empty() ? "" : " ", x);
    return s;
}

void monotonicity() {
    constexpr double kSlack = 1e-9;
    guarded("monotonic: temperature 4-40 K", [&] {
        SweepSpec spec;
        spec.axis = SweepAxis::Temperature;
        for (int t = 4; t <= 40; t += 4) spec.values.push_back(t);
        spec.phonons = true;
        spec.temperature_dephasing = true;
        const SweepResult r = run_sweep(spec);
        std::vector<double> ne, in;
        for (std::size_t k = 0; k < spec.values.size(); ++k) {
            ne.push_back(r.field(k, "emitted_photons"));
            in.push_back(r.field(k, "indistinguishability"));
        }
        report(non_increasing(ne, kSlack) && non_increasing(in, kSlack), "monotonic: temperature 4-40 K",
               fmt::format("N_e [{}], I [{}]", list(ne), list(in)));
    });
    guarded("monotonic: gamma' 0-5 ns^-1", [&] {
        SweepSpec spec;
        spec.axis = SweepAxis::GammaPrime;
        for (int k = 0; k <= 10; ++k) spec.values.push_back(0.5 * k);
        spec.phonons = true;
        const SweepResult r = run_sweep(spec);
        std::vector<double> ne, in;
        for (std::size_t k = 0; k < spec.values.size(); ++k) {
            ne.push_back(r.field(k, "emitted_photons"));
            in.push_back(r.field(k, "indistinguishability"));
        }
        report(non_increasing(ne, kSlack) && non_increasing(in, kSlack), "monotonic: gamma' 0-5 ns^-1",
               fmt::format("N_e [{}], I [{}]", list(ne), list(in)));
    });
}

} // namespace

int main() {
    spdlog::set_level(spdlog::level::warn);
    const auto t0 = std::chrono::steady_clock::now();
    baseline_values();
    bath_oracles();
    detuning_structure();
    spectrum_structure();
    property_suite();
    monotonicity();
    fmt::print("{} criteria failed; total {:.1f} s\n", failures, elapsed(t0));
    return failures == 0 ? 0 : 1;
}
