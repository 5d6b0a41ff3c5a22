import json
import math

import pytest

rampsim = pytest.importorskip("rampsim")


def test_power_curve():
    assert rampsim.wind_to_power(3.0) == 0.0
    assert rampsim.wind_to_power(13.0) == 2.0
    assert rampsim.wind_to_power(26.0) == 0.0
    assert rampsim.wind_to_power(8.0) == pytest.approx(2 * (8**3 - 4**3) / (13**3 - 4**3))
    with pytest.raises(rampsim.InputError):
        rampsim.wind_to_power(-1.0)


def test_ramp_limit_example():
    out = rampsim.apply_ramp_limit([1.00, 1.50, 1.01, 0.90, 1.03], 0.02, 1.00)
    assert out == pytest.approx([1.00, 1.02, 1.01, 0.99, 1.01], abs=1e-14)


def test_renewal_and_kernel():
    generated = [1.1, 1.1, 1.0, 1.0, 0.9]
    corrected = [1.0] * 5
    points = rampsim.extract_renewal(generated, corrected)
    assert [p["jump_time"] for p in points] == [0, 2, 4]
    assert [p["state"] for p in points] == [1, 0, -1]
    kernel = json.loads(rampsim.estimate_kernel(generated * 3, corrected * 3))
    assert "q" in kernel


def test_bridge_helpers():
    assert rampsim.triangle(3, 2, 1.0, 4) == pytest.approx(2 / 3)
    assert rampsim.compute_initial_power(-1, 1.5, 4, 0.02) == pytest.approx(1.48)
    assert rampsim.compute_initial_power(1, 1.5, 4, 0.02) == pytest.approx(1.9)
    mean, var = rampsim.bb_transition(0.0, 0, 3, 6, 1.0)
    assert mean == 0.0 and var == pytest.approx(1.5)
    y = rampsim.sample_two_piece_bridge(3, 6, 1.0, seed=4)
    assert len(y) == 6 and y[2] == 0.0
    assert rampsim.mle_sigma([0.3, 0.0, 0.0], [False, True, True], 2, 3, min_terms=1) ** 2 == pytest.approx(0.18)


def test_penalty_and_errors():
    assert rampsim.discounted_penalty([0, 1, 1], math.log(2))[2] == pytest.approx(0.75)
    assert rampsim.rel_l2_error([1, 0], [1, 1]) == pytest.approx(100.0)
    assert rampsim.mape([1, 2, 4], [1.1, 1.8, 4.4]) == pytest.approx(10.0)


def test_pipeline_is_deterministic(tmp_path):
    cfg = rampsim.RunConfig.parse("[synthetic]\nhours = 4000\n[simulation]\npaths = 100\n")
    cfg.limits = [0.05]
    cfg.output_dir = str(tmp_path / "a")
    rampsim.run_pipeline(cfg)
    cfg.output_dir = str(tmp_path / "b")
    rampsim.run_pipeline(cfg)
    a = (tmp_path / "a" / "moments_limit_0.05.csv").read_bytes()
    b = (tmp_path / "b" / "moments_limit_0.05.csv").read_bytes()
    assert a == b
    assert a.startswith(b"# config_hash=" + cfg.hash().encode())


def test_missing_model_names_path(tmp_path):
    cfg = rampsim.RunConfig()
    cfg.output_dir = str(tmp_path)
    with pytest.raises(rampsim.StageError, match="model.json"):
        rampsim.run_stage("simulate", cfg)
