import numpy as np
import pytest

import stct


def test_mixture_is_seeded():
    x1, y1 = stct.gaussian_mixture(classes=4, n=300, dim=8, sep=6.0, seed=5)
    x2, y2 = stct.gaussian_mixture(classes=4, n=300, dim=8, sep=6.0, seed=5)
    assert x1.shape == (300, 8)
    assert np.array_equal(x1, x2)
    assert y1 == y2
    assert set(y1) == {0, 1, 2, 3}


def test_nmc_corrects_heavy_noise():
    x, y = stct.gaussian_mixture()
    noisy, mask = stct.symmetric_noise(y, 10, 0.8, seed=1)
    assert np.mean(np.array(noisy) == np.array(y)) < 0.35
    assert sum(mask) > 0
    res = stct.run_nmc(x, noisy, 10, seed=1, clean=y)
    assert res["corrected"].shape == (5000, 10)
    assert np.mean(np.array(res["labels"]) == np.array(y)) >= 0.95
    assert res["rounds"] == len(res["trace"])


def test_sampling_bound():
    assert stct.required_sampling_times(50000, 0.5, 0.9999) == 29


def test_matrix_round_trip(tmp_path):
    m = np.random.default_rng(0).normal(size=(6, 3))
    for name in ("m.bin", "m.csv"):
        stct.save_matrix(tmp_path / name, m)
        assert np.array_equal(stct.load_matrix(tmp_path / name), m)


def test_errors_map_to_python(tmp_path):
    (tmp_path / "bad.bin").write_bytes(b"nonsense bytes here, nothing valid")
    with pytest.raises(stct.FormatError):
        stct.load_matrix(tmp_path / "bad.bin")
    with pytest.raises(stct.InputDomainError):
        stct.gaussian_mixture(classes=1)
    assert issubclass(stct.UsageError, stct.StctError)


def test_gradient_oracles_pass():
    reports = stct.verify("gradients")
    assert reports and all(r["pass"] for r in reports)


def test_pipeline_from_config(tmp_path):
    cfg = tmp_path / "run.conf"
    cfg.write_text("synthetic.classes = 4\nsynthetic.n = 400\nsynthetic.dim = 8\ntest.n = 100\n"
                   "max_epoch = 1\nsrl.hidden = 16, 8\nsrl.proj_dim = 4\n")
    out = stct.run_stct(cfg)
    lines = out["report"].strip().splitlines()
    assert len(lines) == 2
    assert len(out["labels"]) == 400
