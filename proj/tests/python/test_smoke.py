import math

import numpy as np
import pytest

import qdstirap


def no_phonons(**extra):
    cfg = {"phonons": {"enabled": False}}
    for section, values in extra.items():
        cfg.setdefault(section, {}).update(values)
    return cfg


def test_default_config_round_trips():
    cfg = qdstirap.default_config()
    assert cfg["cavity"]["kappa"] == 25.0
    assert qdstirap.validate_config(cfg) == cfg
    assert "kappa" in qdstirap.render_config(cfg)


def test_unit_suffixes_and_bad_values():
    cfg = qdstirap.validate_config({"drive": {"delta": "164.5 ueV"}})
    assert cfg["drive"]["delta"] == pytest.approx(164.5 / 0.65821195)
    with pytest.raises(qdstirap.ConfigError):
        qdstirap.validate_config({"cavity": {"kappa": -1.0}})
    with pytest.raises(ValueError):
        qdstirap.validate_config({"cavity": {"no_such_key": 1.0}})


def test_bath_values():
    bath = qdstirap.Bath(3e-8, 900 / 0.65821195, 5.0)
    assert bath.mean_displacement == pytest.approx(0.9569082872255489, rel=1e-8)
    assert bath.phase(0.0).real == pytest.approx(bath.phi0)
    gg, gu = bath.green(0.0)
    assert abs(gu) > abs(gg) > 0.0
    assert bath.gamma("u", 100.0).real > bath.gamma("u", -100.0).real


def test_simulate_without_phonons():
    r = qdstirap.simulate(no_phonons(), trajectory=True)
    assert r["emitted_photons"] == pytest.approx(1.00, abs=0.02)
    assert r["indistinguishability"] == pytest.approx(0.96, abs=0.02)
    assert r["mean_displacement"] == 1.0
    tr = r["trajectory"]
    assert set(tr) == {"t", "rho_X", "rho_Y", "rho_XX", "n_cav", "P_e"}
    assert tr["t"][0] == 0.0 and np.all(np.diff(tr["t"]) > 0)
    assert tr["P_e"][-1] == pytest.approx(r["emitted_photons"])
    assert np.all(np.diff(tr["P_e"]) >= -1e-12)


def test_spectrum_arrays():
    r = qdstirap.simulate(no_phonons(), indistinguishability=False, spectrum=True, spectrum_points=601)
    assert r["indistinguishability"] is None
    s = r["spectrum"]
    assert s["omega"].shape == s["S_c"].shape == (601,)
    assert abs(s["omega"][np.argmax(s["S_c"])]) < 50.0


def test_sweep_reports_failures(tmp_path):
    pts = qdstirap.run_sweep(
        no_phonons(), "delta", [0.0, 100.0], indistinguishability=False, out_dir=tmp_path, workers=2
    )
    assert [p["ok"] for p in pts] == [True, True]
    assert pts[0]["summary"]["emitted_photons"] > pts[1]["summary"]["emitted_photons"]
    assert (tmp_path / "points.csv").read_text().startswith("index,delta,B,N_e,I,status")

    cfg = {"bath": {"tau_max_limit": 0.04}}
    pts = qdstirap.run_sweep(cfg, "temperature", [0.0, 5.0], indistinguishability=False)
    assert not pts[0]["ok"] and pts[0]["summary"] is None
    assert pts[0]["error"].startswith("numerical failure")
    assert pts[1]["ok"] and math.isfinite(pts[1]["summary"]["emitted_photons"])
