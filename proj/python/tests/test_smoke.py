from pathlib import Path

import numpy as np
import pytest

import lineart

ROOT = Path(__file__).resolve().parents[2]
SAMPLE = ROOT / "data" / "sample"
BUNDLED = ROOT / "data" / "checkpoints" / "desk_generator.safetensors"


def test_load_image_range_and_shape():
    img = lineart.load_image(SAMPLE / "color" / "sample_000.png", 3, 64)
    assert img.shape == (3, 64, 64)
    assert img.dtype == np.float32
    assert img.min() >= -1.0 and img.max() <= 1.0


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        lineart.load_image(tmp_path / "absent.png")


def test_identity_metrics():
    img = lineart.load_image(SAMPLE / "color" / "sample_001.png", 3, 256)
    assert lineart.psnr(img, img) == 99.0
    assert lineart.ms_ssim(img, img) == pytest.approx(1.0, abs=1e-6)


def test_tps_warp_is_seeded():
    img = lineart.load_image(SAMPLE / "color" / "sample_002.png", 3, 64)
    a = lineart.tps_warp(img, seed=7)
    assert np.array_equal(a, lineart.tps_warp(img, seed=7))
    assert not np.array_equal(a, lineart.tps_warp(img, seed=8))
    assert np.array_equal(lineart.tps_warp(img, seed=7, magnitude=0.0), img)


def test_gram_matrix_matches_numpy():
    rng = np.random.default_rng(0)
    f = rng.standard_normal((4, 5, 6)).astype(np.float32)
    flat = f.reshape(4, -1).astype(np.float64)
    expected = flat @ flat.T / f.size
    np.testing.assert_allclose(lineart.gram_matrix(f), expected, rtol=1e-5, atol=1e-6)


def test_total_loss_with_default_weights():
    assert lineart.total_generator_loss(1, 1, 1, 1) == pytest.approx(81.01, abs=1e-12)


def test_bad_shapes_raise_valueerror():
    with pytest.raises(ValueError):
        lineart.psnr(np.zeros((3, 8, 8), np.float32), np.zeros((3, 4, 4), np.float32))


def test_bundled_generator_colorizes():
    gen = lineart.Generator.load(BUNDLED)
    size = gen.image_size
    line = lineart.load_image(SAMPLE / "sketch" / "sample_000.png", 1, size)
    ref = lineart.load_image(SAMPLE / "color" / "sample_003.png", 3, size)
    out = gen.colorize(line, ref)
    assert out.shape == (3, size, size)
    assert np.all(np.abs(out) <= 1.0)
    assert np.array_equal(out, gen.colorize(line, ref))


def test_cli_rejects_unknown_command():
    assert lineart.run_cli(["no-such-command"]) == 2
