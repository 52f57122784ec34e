#include <doctest.h>

#include <cmath>

#include "qdstirap/config.hpp"

using namespace qdstirap;

TEST_CASE("baseline parameters") {
    const RunConfig c;
    CHECK(c.model.g_prime == 50.0);
    CHECK(c.model.omega_l_prime == 5.0 * c.model.g_prime);
    CHECK(c.model.omega_p_max_prime == 2.5 * c.model.g_prime);
    CHECK(c.model.g_prime * c.model.pulse_width == doctest::Approx(3.0 * M_PI));
    CHECK(c.model.kappa == 25.0);
    CHECK(c.model.gamma_x == 0.5);
    CHECK(c.model.gamma_xx == 0.5);
    CHECK(c.model.gamma_prime_0 == 1.0);
    CHECK(c.model.temperature == 5.0);
    CHECK(c.model.n_max == 2);
    CHECK(c.model.pulse_shape == PulseShape::SawtoothRising);
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("dephasing rate grows linearly with temperature") {
    ModelParams p;
    p.dephasing_slope = 2.127;
    CHECK(dephasing_rate(p, 0.0) == 1.0);
    CHECK(dephasing_rate(p, 10.0) == doctest::Approx(22.27));
}

TEST_CASE("YAML sections with units") {
    const RunConfig c = parse_config(R"(
emitter:
  gamma_prime_0: 0.66 ueV
cavity:
  kappa: 16.5 ueV
  g_prime: 50
drive:
  pulse_shape: sawtooth-falling
  delta: 158 ueV
phonons:
  alpha: 0.06 ps^2
  temperature: 20 K
numerics:
  n_max: 3
)");
    CHECK(c.model.kappa == doctest::Approx(25.07).epsilon(1e-3));
    CHECK(c.model.gamma_prime_0 == doctest::Approx(1.0).epsilon(5e-3));
    CHECK(c.model.pulse_shape == PulseShape::SawtoothFalling);
    CHECK(c.model.delta == doctest::Approx(240.04).epsilon(1e-4));
    CHECK(c.model.alpha == doctest::Approx(6e-8));
    CHECK(c.model.temperature == 20.0);
    CHECK(c.model.n_max == 3);
    CHECK(c.model.omega_l_prime == 250.0);
}

TEST_CASE("empty file keeps the baseline") {
    const RunConfig c = parse_config("");
    CHECK(c.model.g_prime == 50.0);
}

TEST_CASE("invalid configurations are rejected") {
    CHECK_THROWS_AS(parse_config("emitter:\n  gamma_x: -1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("numerics:\n  n_max: 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("cavity:\n  kapa: 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("plasma:\n  x: 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("drive:\n  delta_l: 10\n"), ConfigError);
    CHECK_NOTHROW(parse_config("drive:\n  delta_l: 10\n  allow_cw_detuning: true\n"));
    CHECK_THROWS_AS(parse_config("drive:\n  pulse_shape: square\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("drive: [1, 2"), ConfigError);
    CHECK_THROWS_AS(parse_config("numerics:\n  dt: 0.01\n  output_step: 0.005\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/qdstirap.yaml"), ConfigError);
}

TEST_CASE("overrides by flat or dotted key") {
    RunConfig c;
    apply_override(c, "g_prime", "40");
    apply_override(c, "phonons.temperature", "12 K");
    apply_override(c, "enabled", "false");
    CHECK(c.model.g_prime == 40.0);
    CHECK(c.model.temperature == 12.0);
    CHECK_FALSE(c.model.phonons_enabled);
    CHECK_THROWS_AS(apply_override(c, "cavity.temperature", "1"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "n_max", "two"), ConfigError);
}

TEST_CASE("JSON round trip is exact") {
    RunConfig c;
    c.model.g_prime = 1.0 / 3.0;
    c.model.alpha = 0.1 + 0.2;
    c.model.pulse_shape = PulseShape::Gaussian;
    c.grid.output_step = 0.0025;
    const RunConfig back = config_from_json(to_json(c));
    CHECK(back.model.g_prime == c.model.g_prime);
    CHECK(back.model.alpha == c.model.alpha);
    CHECK(back.model.pulse_shape == PulseShape::Gaussian);
    CHECK(back.grid.output_step == c.grid.output_step);
    CHECK(to_json(back) == to_json(c));
}

TEST_CASE("every schema key is rendered with its unit") {
    const std::string text = render_config(RunConfig{});
    for (const auto& k : config_schema()) CHECK(text.find("  " + k.name + ":") != std::string::npos);
    CHECK(text.find("[ns^-1]") != std::string::npos);
    CHECK(text.find("[ns^2]") != std::string::npos);
}
