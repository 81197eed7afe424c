import numpy as np
import pytest

from segstyle import (
    lab_to_rgb,
    lab_to_srgb,
    read_rgb_png,
    rgb_to_labxy,
    srgb_to_lab,
    write_rgb_png,
)

# Reference values computed independently with mpmath (50 digits) from the
# IEC 61966-2-1 transfer function and the CIE L*a*b* formulas at D65.
GRAY119_LAB = (50.0344387925, 0.0, 0.0)
RED_LAB = (53.2371158127, 80.0901124197, 67.2032627188)
AZURE_LAB = (54.7171598189, 18.7883495963, -70.9159217424)  # rgb (0, 128, 255)


def lab_of(r, g, b):
    return srgb_to_lab(np.array([r, g, b]) / 255.0)


def test_black_is_origin():
    lab = lab_of(0, 0, 0)
    assert lab == pytest.approx((0.0, 0.0, 0.0), abs=1e-12)


def test_white_is_reference_white():
    l, a, b = lab_of(255, 255, 255)
    assert abs(l - 100.0) < 1e-3
    assert abs(a) < 1e-6
    assert abs(b) < 1e-6


@pytest.mark.parametrize(
    "rgb,expected",
    [
        ((119, 119, 119), GRAY119_LAB),
        ((255, 0, 0), RED_LAB),
        ((0, 128, 255), AZURE_LAB),
    ],
)
def test_against_high_precision_reference(rgb, expected):
    lab = lab_of(*rgb)
    assert lab == pytest.approx(expected, abs=1e-3)


def test_neutral_axis_is_exactly_neutral():
    """Gray inputs must land on a=b=0; lightness must grow with gray level."""
    grays = np.arange(256)
    lab = srgb_to_lab(np.stack([grays, grays, grays], axis=1) / 255.0)
    assert np.abs(lab[:, 1]).max() < 1e-6
    assert np.abs(lab[:, 2]).max() < 1e-6
    assert (np.diff(lab[:, 0]) > 0).all()


def test_lightness_range():
    rng = np.random.default_rng(42)
    rgb = rng.uniform(0.0, 1.0, (2000, 3))
    lab = srgb_to_lab(rgb)
    assert lab[:, 0].min() >= -1e-9
    assert lab[:, 0].max() <= 100.0 + 1e-9


def test_round_trip_within_one_8bit_step():
    rng = np.random.default_rng(1234)
    rgb = rng.integers(0, 256, (10000, 3)).astype(np.uint8)
    lab = srgb_to_lab(rgb / 255.0)
    back = np.clip(np.rint(lab_to_srgb(lab) * 255.0), 0, 255).astype(np.uint8)
    err = np.abs(back.astype(int) - rgb.astype(int)).max()
    assert err <= 1


def test_lab_to_rgb_endpoints():
    assert tuple(lab_to_rgb(np.array([0.0, 0.0, 0.0]))) == (0, 0, 0)
    assert tuple(lab_to_rgb(np.array([100.0, 0.0, 0.0]))) == (255, 255, 255)


def test_lab_to_rgb_clamps_out_of_gamut():
    wild = np.array(
        [[150.0, 0.0, 0.0], [-20.0, 0.0, 0.0], [50.0, 300.0, -300.0], [50.0, -300.0, 300.0]]
    )
    out = lab_to_rgb(wild)
    assert out.dtype == np.uint8
    assert tuple(out[0]) == (255, 255, 255)
    assert tuple(out[1]) == (0, 0, 0)


class TestRgbToLabxy:
    def test_shape_and_spatial_channels(self):
        img = np.zeros((3, 5, 3), dtype=np.uint8)
        out = rgb_to_labxy(img, spatial_weight=2.0)
        assert out.shape == (3, 5, 5)
        cols, rows = np.meshgrid(np.arange(5), np.arange(3))
        assert np.array_equal(out[:, :, 3], cols * 2.0)
        assert np.array_equal(out[:, :, 4], rows * 2.0)

    def test_color_channels_match_scalar_conversion(self):
        rng = np.random.default_rng(9)
        img = rng.integers(0, 256, (4, 4, 3)).astype(np.uint8)
        out = rgb_to_labxy(img)
        expect = srgb_to_lab(img[2, 3] / 255.0)
        assert out[2, 3, :3] == pytest.approx(tuple(expect), abs=1e-12)

    def test_zero_weight_zeroes_spatial(self):
        img = np.zeros((2, 2, 3), dtype=np.uint8)
        out = rgb_to_labxy(img, spatial_weight=0.0)
        assert np.array_equal(out[:, :, 3:], np.zeros((2, 2, 2)))

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            rgb_to_labxy(np.zeros((4, 4), dtype=np.uint8))
        with pytest.raises(ValueError):
            rgb_to_labxy(np.zeros((4, 4, 4), dtype=np.uint8))
        with pytest.raises(ValueError):
            rgb_to_labxy(np.zeros((2, 2, 3), dtype=np.uint8), spatial_weight=-1.0)


def test_png_round_trip(tmp_path):
    rng = np.random.default_rng(77)
    img = rng.integers(0, 256, (17, 23, 3)).astype(np.uint8)
    path = tmp_path / "img.png"
    write_rgb_png(path, img)
    assert np.array_equal(read_rgb_png(path), img)


def test_write_png_rejects_non_uint8(tmp_path):
    with pytest.raises(ValueError):
        write_rgb_png(tmp_path / "bad.png", np.zeros((4, 4, 3), dtype=np.float64))
