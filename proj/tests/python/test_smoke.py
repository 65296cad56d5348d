import os
import pathlib

import numpy as np
import pytest

import medsr

DATA = pathlib.Path(os.environ.get("MEDSR_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "data"))


def pattern(h=48, w=40, seed=0):
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:h, 0:w]
    img = 0.5 + 0.25 * np.sin(x / 3.0) * np.cos(y / 5.0) + 0.02 * rng.standard_normal((h, w))
    return np.clip(img, 0.0, 1.0).astype(np.float32)


def test_metric_identity():
    x = pattern()
    scores = medsr.evaluate(x, x)
    assert list(scores) == medsr.metric_names()
    assert scores["psnr"] == 100.0
    assert scores["ssim"] == pytest.approx(1.0, abs=1e-6)
    assert scores["fsim"] == pytest.approx(1.0, abs=1e-6)
    assert abs(scores["lpips_proxy"]) <= 1e-7
    assert scores["odi"] == 0.0
    assert medsr.tenengrad(np.full((16, 16), 0.4, np.float32)) == 0.0


def test_subset_and_noise():
    x = pattern()
    noisy = np.clip(x + 0.05 * np.random.default_rng(1).standard_normal(x.shape), 0, 1).astype(np.float32)
    scores = medsr.evaluate(x, noisy, ["psnr", "brenner"])
    assert list(scores) == ["psnr", "brenner"]
    assert scores["psnr"] < 40.0
    assert medsr.psnr(x, noisy) == scores["psnr"]


def test_degrade_and_upscale_shapes():
    hr = pattern(48, 40)
    lr = medsr.degrade(hr, scale=4, profile="high-order", seed=3)
    assert lr.shape == (12, 10)
    assert lr.dtype == np.float32
    np.testing.assert_array_equal(lr, medsr.degrade(hr, scale=4, profile="high-order", seed=3))
    sr = medsr.upscale(lr, "bicubic", 4)
    assert sr.shape == (48, 40)
    w = medsr.init_weights("rrdblite", scale=3, seed=1)
    assert medsr.upscale(lr, "rrdblite", 3, w).shape == (36, 30)


def test_resample_identity():
    x = pattern(20, 20)
    np.testing.assert_allclose(medsr.resample(x, 20, 20, "bicubic", False), x, atol=1e-6)


def test_weights_round_trip(tmp_path):
    w = medsr.init_weights("srcnn", scale=2, seed=0)
    assert w["conv1.weight"].shape == (64, 1, 9, 9)
    medsr.save_weights(w, tmp_path / "w.msrw")
    back = medsr.load_weights(tmp_path / "w.msrw")
    assert list(back) == list(w)
    for name in w:
        np.testing.assert_array_equal(back[name], w[name])


def test_bundled_weights_load():
    w = medsr.load_weights(DATA / "weights" / "srcnn_x2.msrw")
    assert set(w) == {"conv1.weight", "conv1.bias", "conv2.weight", "conv2.bias", "conv3.weight", "conv3.bias"}


def test_image_io(tmp_path):
    x = pattern(9, 7)
    medsr.save_image(x, tmp_path / "a.pgm")
    back = medsr.load_image(tmp_path / "a.pgm")
    assert np.max(np.abs(back - x)) <= 0.5 / 255 + 1e-7


def test_errors_carry_kind(tmp_path):
    with pytest.raises(medsr.MedsrError) as info:
        medsr.load_image(tmp_path / "missing.pgm")
    assert info.value.kind == "io"
    with pytest.raises(medsr.MedsrError) as info:
        medsr.psnr(pattern(8, 8), pattern(8, 9))
    assert info.value.kind == "shape"
    with pytest.raises(medsr.MedsrError) as info:
        medsr.upscale(pattern(8, 8), "srcnn", 2)
    assert info.value.kind == "model"
    with pytest.raises(ValueError):
        medsr.psnr(np.zeros((2, 2, 2), np.float32), np.zeros((2, 2, 2), np.float32))
