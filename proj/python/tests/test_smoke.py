import math

import numpy as np
import pytest

import linfmin


def test_interval_fixture_matches_oracle():
    d = linfmin.Domain.interval(0.0, 1.0, 201)
    u0 = d.sample("x^3 - x^2")
    tr = linfmin.continuation(d, linfmin.Model.linear(), u0, p_max=256, stop_rel_e=0.0)
    orc = linfmin.oracle(0.0, 0.0, 0.0, 1.0)
    assert orc["e"] == pytest.approx(1.0 + math.sqrt(2.0), rel=1e-12)
    assert orc["m"] == pytest.approx(1.0 - math.sqrt(2.0) / 2.0, rel=1e-12)
    assert tr["monotone"]
    assert tr["e_inf"] == pytest.approx(orc["e"], rel=0.02)
    assert tr["last"]["u"].shape == (201,)


def test_harmonic_data_has_zero_energy():
    d = linfmin.Domain.rectangle(0.0, 1.0, 0.0, 1.0, 25)
    u0 = d.sample("x*y")
    e, _ = linfmin.energy(d, linfmin.Model.linear(), u0, 4.0)
    assert e <= 1e-9
    tr = linfmin.continuation(d, linfmin.Model.linear(), u0)
    assert tr["early_stop"] == "zero_energy"
    assert np.all(tr["last"]["f"] == 0.0)


def test_laplacian_of_quadratic_is_exact():
    d = linfmin.Domain.rectangle(0.0, 1.0, 0.0, 1.0, 25)
    lap = linfmin.laplacian(d, d.sample("(x^2 + y^2)/2"))
    stencil = d.eval_mask()
    assert lap.shape == d.shape
    assert np.allclose(lap[stencil], 2.0, atol=1e-9)


def test_power_mean_is_monotone_in_p():
    rng = np.random.default_rng(3)
    v = rng.normal(size=500)
    means = [linfmin.power_mean(v, p) for p in (1.0, 2.0, 8.0, 64.0, 1024.0)]
    assert all(a <= b * (1 + 1e-12) for a, b in zip(means, means[1:]))
    assert means[-1] <= np.max(np.abs(v))


def test_models_satisfy_their_bounds():
    for model in (linfmin.Model.linear(), linfmin.Model.arctan_tilt(0.5), linfmin.Model.weighted("1 + x^2/2", 2.0 / 3.0)):
        report = model.check(1)
        assert report["assumptions"] == 0 and report["consequences"] == 0
    tilt = linfmin.Model.arctan_tilt(0.5)
    assert tilt(tilt.invert(0.7)) == pytest.approx(0.7, abs=1e-10)


def test_smoother_preserves_clamped_data():
    d = linfmin.Domain.interval(0.0, 1.0, 401)
    u0 = d.sample("x^2/2")
    res = linfmin.build_w(d, u0, 0.1)
    assert res["success"] and res["measured_sup"] <= 0.1
    clamped = ~d.free_mask()
    assert np.max(np.abs(res["w"][clamped] - u0[clamped])) <= 1e-12


def test_errors_are_typed():
    with pytest.raises(linfmin.ConfigError):
        linfmin.Domain.interval(0.0, 1.0, 3)
    d = linfmin.Domain.interval(0.0, 1.0, 50)
    with pytest.raises(linfmin.ConfigError):
        d.sample("x +")
    with pytest.raises(linfmin.ConfigError):
        linfmin.laplacian(d, np.zeros(10))


def test_run_command_in_process(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "domain.kind = interval\n"
        "domain.n = 101\n"
        "model.name = linear\n"
        "boundary.u0 = x - x^2\n"
        "continuation.p_max = 64\n"
        f"output.dir = {tmp_path / 'out'}\n"
    )
    code, report = linfmin.run("solve", cfg)
    assert code == 0, report
    assert report["oracle"]["e"] == pytest.approx(2.0, rel=1e-10)
    assert (tmp_path / "out" / "report.json").exists()

    bad = tmp_path / "bad.cfg"
    bad.write_text("domain.kind = interval\ndomain.n = 101\nmodel.nmae = linear\n")
    code, report = linfmin.run("solve", bad)
    assert code == 4 and "unknown key" in report["error"]
