#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "qdstirap/csv.hpp"

using namespace qdstirap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("qdstirap_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

SweepSpec quick_spec() {
    SweepSpec spec;
    spec.axis = SweepAxis::GammaPrime;
    spec.values = {0.0, 2.0, 4.0};
    spec.outputs.indistinguishability = false;
    return spec;
}

} // namespace

TEST_CASE("CSV formatting round-trips") {
    CsvTable t({"a", "b"});
    t.add_row({0.1, 1.0 / 3.0});
    t.add_row({-2.5e-300, 1e21});
    CHECK(t.text() == "a,b\n0.1,0.3333333333333333\n-2.5e-300,1e+21\n");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK_THROWS_AS(t.add_row({1.0}), std::invalid_argument);
}

TEST_CASE("atomic writes leave no temporaries") {
    const fs::path dir = scratch("atomic");
    write_file_atomic(dir / "sub" / "x.csv", "hello\n");
    write_file_atomic(dir / "sub" / "x.csv", "again\n");
    CHECK(slurp(dir / "sub" / "x.csv") == "again\n");
    int files = 0;
    for (const auto& e : fs::directory_iterator(dir / "sub")) files += e.is_regular_file();
    CHECK(files == 1);
    CHECK_THROWS_AS(write_file_atomic("/proc/qdstirap_forbidden/x.csv", "x"), IoError);
}

TEST_CASE("CSV schemas") {
    RunConfig c = fixtures::baseline(false);
    OutputSelection o;
    o.correlations = true;
    o.spectrum = true;
    o.eigenenergies = true;
    const RunResult r = simulate(c, o);
    const fs::path dir = scratch("schemas");
    write_run_outputs(r, c.model.n_max, dir);
    const auto header = [&](const char* f) {
        const std::string s = slurp(dir / f);
        return s.substr(0, s.find('\n'));
    };
    CHECK(header("trajectory.csv") == "t,rho_X,rho_Y,rho_XX,n_cav,P_e");
    CHECK(header("emission.csv") == "t,P_e");
    CHECK(header("correlations.csv") == "t,tau,Re_g1,Im_g1,g2");
    CHECK(header("spectrum.csv") == "omega,S_c");
    CHECK(header("eigenenergies.csv") == "t,lambda_1,lambda_2,lambda_3,lambda_4,lambda_5,lambda_6,lambda_7,lambda_8");
    CHECK(trajectory_table(r.trajectory, Basis(2)).rows() == r.trajectory.t.size());

    const auto bath = PhononBath::create(fixtures::baseline(true));
    CHECK(bath_temperature_table(bath->alpha(), bath->omega_b(), {0.0, 5.0}).text().rfind("T,B,delta_P\n", 0) == 0);
    CHECK(green_function_table(*bath, 10).text().rfind("tau,Re_G_g,Im_G_g\n", 0) == 0);
    CHECK(spectral_kernel_table(*bath, {-1.0, 1.0}).text().rfind("omega,Re_Gamma_g,Re_Gamma_u\n", 0) == 0);
}

TEST_CASE("indistinguishability needs two photons in the truncation") {
    RunConfig c = fixtures::baseline(false);
    c.model.n_max = 1;
    CHECK_THROWS_AS(simulate(c), ConfigError);
    OutputSelection o;
    o.indistinguishability = false;
    CHECK_NOTHROW(simulate(c, o));
}

TEST_CASE("sweep definition checks") {
    SweepSpec spec = quick_spec();
    CHECK_NOTHROW(validate(spec));
    spec.values = {0.0, 2.0, 2.0};
    CHECK_THROWS_AS(validate(spec), ConfigError);
    spec.values = {3.0, 1.0, 2.0};
    CHECK_THROWS_AS(validate(spec), ConfigError);
    spec.values = {5.0, 3.0, 1.0};
    CHECK_NOTHROW(validate(spec));
    spec.values = {};
    CHECK_THROWS_AS(validate(spec), ConfigError);
    spec.values = {-1.0};
    CHECK_THROWS_AS(validate(spec), ConfigError);
    CHECK(parse_sweep_axis("pulse_width") == SweepAxis::PulseWidth);
    CHECK_THROWS_AS(parse_sweep_axis("kappa"), ConfigError);
}

TEST_CASE("point configs differ only in the axis value") {
    SweepSpec spec;
    spec.axis = SweepAxis::Temperature;
    spec.values = {4.0, 40.0};
    spec.temperature_dephasing = true;
    const RunConfig a = point_config(spec, 0);
    const RunConfig b = point_config(spec, 1);
    CHECK(a.model.temperature == 4.0);
    CHECK(b.model.temperature == 40.0);
    CHECK(a.model.dephasing_slope == kDephasingSlope);
    RunConfig b2 = b;
    b2.model.temperature = 4.0;
    CHECK(to_json(b2) == to_json(a));
}

TEST_CASE("sweep persistence, resume and replay") {
    const fs::path dir = scratch("sweep");
    const SweepSpec spec = quick_spec();
    SweepOptions opt;
    opt.out_dir = dir;
    const SweepResult first = run_sweep(spec, opt);
    REQUIRE(first.points.size() == 3);
    for (const auto& p : first.points) CHECK(p.ok);
    CHECK(fs::exists(dir / "points.csv"));
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "points" / "0002.json"));
    // dephasing lowers the efficiency
    CHECK(first.field(0, "emitted_photons") > first.field(2, "emitted_photons"));

    const SweepResult again = run_sweep(spec, opt);
    for (const auto& p : again.points) CHECK(p.reused);

    const fs::path replay_dir = scratch("sweep_replay");
    SweepOptions ropt;
    ropt.out_dir = replay_dir;
    run_sweep(spec_from_manifest(dir / "manifest.json"), ropt);
    CHECK(slurp(dir / "points.csv") == slurp(replay_dir / "points.csv"));
}

TEST_CASE("worker count does not change results") {
    const SweepSpec spec = quick_spec();
    SweepOptions one;
    one.workers = 1;
    SweepOptions three;
    three.workers = 3;
    const SweepResult a = run_sweep(spec, one);
    const SweepResult b = run_sweep(spec, three);
    for (std::size_t k = 0; k < spec.values.size(); ++k) {
        CHECK(a.field(k, "emitted_photons") == b.field(k, "emitted_photons"));
    }
}

TEST_CASE("failed points are recorded without aborting") {
    SweepSpec spec;
    spec.axis = SweepAxis::Temperature;
    spec.values = {0.0, 5.0}; // T = 0 bath tables do not decay under the default tolerance
    spec.base.bath.tau_max_limit = 0.04; // fail fast; 5 K converges at 0.01 ns
    spec.outputs.indistinguishability = false;
    const fs::path dir = scratch("failing");
    SweepOptions opt;
    opt.out_dir = dir;
    const SweepResult r = run_sweep(spec, opt);
    CHECK_FALSE(r.points[0].ok);
    CHECK(r.points[0].error.find("numerical") != std::string::npos);
    CHECK(r.points[1].ok);
    CHECK(std::isnan(r.field(0, "emitted_photons")));
    CHECK(slurp(dir / "points.csv").find("nan,nan,nan,error") != std::string::npos);
    CHECK(r.manifest["diagnostics_summary"]["failed_points"] == 1);
}

TEST_CASE("renormalization comparison") {
    SweepSpec spec;
    spec.axis = SweepAxis::Temperature;
    spec.values = {5.0};
    spec.outputs.indistinguishability = false;
    const RenormalizationComparison cmp = compare_renormalization(spec);
    const double diff = cmp.effective_fixed.field(0, "emitted_photons") - cmp.bare_fixed.field(0, "emitted_photons");
    CHECK(std::abs(diff) < 0.005);
    CHECK(diff != 0.0);

    spec.base.model.alpha = 0.0;
    const RenormalizationComparison flat = compare_renormalization(spec);
    CHECK(flat.effective_fixed.field(0, "emitted_photons") == flat.bare_fixed.field(0, "emitted_photons"));

    spec.axis = SweepAxis::Delta;
    spec.values = {0.0};
    CHECK_THROWS_AS(compare_renormalization(spec), ConfigError);
}

TEST_CASE("bare-fixed and effective-fixed curves separate with temperature") {
    SweepSpec spec;
    spec.axis = SweepAxis::Temperature;
    spec.values = {5.0, 10.0, 20.0, 30.0, 40.0};
    const RenormalizationComparison cmp = compare_renormalization(spec);
    double previous = 0.0;
    for (std::size_t k = 0; k < spec.values.size(); ++k) {
        const double diff = cmp.bare_fixed.field(k, "indistinguishability") -
                            cmp.effective_fixed.field(k, "indistinguishability");
        CHECK(diff > previous);
        previous = diff;
    }
    // N_e is far less sensitive: the two curves cross near 24 K, so only the
    // endpoints are ordered.
    const double ne_5 = std::abs(cmp.bare_fixed.field(0, "emitted_photons") -
                                 cmp.effective_fixed.field(0, "emitted_photons"));
    const double ne_40 = std::abs(cmp.bare_fixed.field(4, "emitted_photons") -
                                  cmp.effective_fixed.field(4, "emitted_photons"));
    CHECK(ne_40 > 100.0 * ne_5);
}

TEST_CASE("weak dephasing keeps both figures of merit above 0.9 at 5 K") {
    SweepSpec spec;
    spec.axis = SweepAxis::GammaPrime;
    spec.values = {0.0, 0.5, 1.0};
    const SweepResult r = run_sweep(spec);
    for (std::size_t k = 0; k < spec.values.size(); ++k) {
        CHECK(r.field(k, "emitted_photons") > 0.9);
        CHECK(r.field(k, "indistinguishability") > 0.9);
    }
}
