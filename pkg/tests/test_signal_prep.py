import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from reshade_forge.signal_prep import (
    AugmentConfig,
    ENCODED_CHANNELS,
    augment_pair,
    depth_to_disparity,
    frequency_encode,
    masked_l1,
    psnr,
)


def test_disparity_quarter_meter_saturates():
    assert depth_to_disparity(np.array([[0.25]]))[0, 0] == 1.0


def test_disparity_infinity_is_zero():
    assert depth_to_disparity(np.array([[np.inf]]))[0, 0] == 0.0


def test_disparity_one_meter():
    assert depth_to_disparity(np.array([[1.0]]))[0, 0] == pytest.approx(0.25, abs=1e-12)


def test_disparity_rejects_nonpositive():
    with pytest.raises(ValueError):
        depth_to_disparity(np.array([[0.0]]))
    with pytest.raises(ValueError):
        depth_to_disparity(np.array([[-1.0]]))


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (3, 3), elements=st.floats(0.01, 1e6)))
def test_disparity_monotone_and_bounded(depth):
    d = depth_to_disparity(depth)
    assert (d >= 0).all() and (d <= 1).all()
    d2 = depth_to_disparity(depth * 2.0)
    assert (d2 <= d + 1e-15).all()


def test_frequency_encode_channel_count_and_zero():
    enc = frequency_encode(np.zeros((2, 2)))
    assert enc.shape == (2, 2, ENCODED_CHANNELS)
    assert ENCODED_CHANNELS == 11
    expected = [0, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1]
    assert np.allclose(enc[0, 0], expected, atol=1e-15)


def test_frequency_encode_half():
    enc = frequency_encode(np.array([[0.5]]))[0, 0]
    # [d, sin/cos pi/2, sin/cos pi, sin/cos 2pi, sin/cos 4pi, sin/cos 8pi]
    expected = [0.5, 1, 0, 0, -1, 0, 1, 0, 1, 0, 1]
    assert np.allclose(enc, expected, atol=1e-12)


def test_frequency_encode_rejects_out_of_range():
    with pytest.raises(ValueError):
        frequency_encode(np.array([[1.5]]))


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(0.0, 1.0)))
def test_frequency_encode_properties(d):
    enc = frequency_encode(d)
    assert np.array_equal(enc[:, :, 0], d)  # channel 0 is the input
    assert (np.abs(enc) <= 1.0 + 1e-12).all()


def test_masked_l1_identity_and_empty_mask():
    a = np.random.default_rng(0).uniform(size=(4, 4, 3))
    assert masked_l1(a, a, np.ones((4, 4), bool)) == 0.0
    b = a + 0.25
    assert masked_l1(a, b, np.zeros((4, 4), bool)) == 0.0


def test_masked_l1_constant_offset():
    pred = np.full((5, 5, 3), 0.5)
    gt = np.full((5, 5, 3), 0.25)
    assert masked_l1(pred, gt, np.ones((5, 5), bool)) == pytest.approx(0.25, abs=1e-12)


def test_masked_l1_partial_mask_normalizes_over_all_pixels():
    pred = np.ones((2, 2, 1))
    gt = np.zeros((2, 2, 1))
    mask = np.array([[True, False], [False, False]])
    assert masked_l1(pred, gt, mask) == pytest.approx(0.25, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(
    arrays(np.float64, (3, 3, 3), elements=st.floats(0, 1)),
    arrays(np.float64, (3, 3, 3), elements=st.floats(0, 1)),
)
def test_masked_l1_symmetric(a, b):
    mask = np.ones((3, 3), bool)
    assert masked_l1(a, b, mask) == pytest.approx(masked_l1(b, a, mask), rel=1e-12)


def test_psnr_values():
    a = np.full((8, 8, 3), 0.4)
    assert psnr(a, a) == 99.0
    assert psnr(a, a + 0.1) == pytest.approx(20.0, abs=1e-9)
    assert psnr(a, a + 0.01) == pytest.approx(40.0, abs=1e-9)


def test_psnr_shape_mismatch():
    with pytest.raises(ValueError):
        psnr(np.zeros((2, 2, 3)), np.zeros((3, 3, 3)))


def _example(h=32, w=32, offset=(0.1, 0.2, -0.2)):
    rng = np.random.default_rng(5)
    input_hdr = rng.uniform(0, 2, (h, w, 3)).astype(np.float32)
    depth = rng.uniform(0.5, 5.0, (h, w))
    validity = rng.uniform(size=(h, w)) > 0.2
    return input_hdr, input_hdr.copy(), depth, validity, np.array(offset)


def _predict_crop(seed, shape, crop):
    clone = np.random.default_rng(seed)
    y0 = int(clone.integers(0, shape[0] - crop + 1))
    x0 = int(clone.integers(0, shape[1] - crop + 1))
    return np.s_[y0 : y0 + crop, x0 : x0 + crop]


def test_augment_identity_override():
    inp, resh, depth, validity, offset = _example()
    cfg = AugmentConfig(exposure_range=(1, 1), gamma_range=(1, 1), scale_range=(1, 1), crop=16)
    s = augment_pair(inp, resh, depth, validity, offset, np.random.default_rng(0), cfg)
    window = _predict_crop(0, depth.shape, 16)
    assert s.input_ldr.shape == (16, 16, 3)
    assert np.allclose(s.camera_vec, offset)
    # exposure 1 / gamma 1 tonemap is a bare clamp to [0, 1]
    assert np.allclose(s.input_ldr, np.clip(inp[window], 0, 1), atol=1e-7)
    assert np.array_equal(s.input_ldr, s.target_ldr)
    assert np.array_equal(s.mask, validity[window])
    expected_d = np.minimum(1.0 / (4.0 * depth[window]), 1.0)
    assert np.allclose(s.encoded_disparity[:, :, 0], expected_d, atol=1e-12)


def test_augment_scale_trade():
    inp, resh, depth, validity, offset = _example()
    cfg = AugmentConfig(exposure_range=(1, 1), gamma_range=(1, 1), scale_range=(2, 2), crop=16)
    s = augment_pair(inp, resh, depth, validity, offset, np.random.default_rng(0), cfg)
    window = _predict_crop(0, depth.shape, 16)
    assert np.allclose(s.camera_vec, offset / 2.0)
    expected_d = np.minimum(np.minimum(1.0 / (4.0 * depth[window]), 1.0) * 2.0, 1.0)
    assert np.allclose(s.encoded_disparity[:, :, 0], expected_d, atol=1e-12)


def test_augment_deterministic():
    inp, resh, depth, validity, offset = _example()
    cfg = AugmentConfig(crop=16)
    a = augment_pair(inp, resh, depth, validity, offset, np.random.default_rng(77), cfg)
    b = augment_pair(inp, resh, depth, validity, offset, np.random.default_rng(77), cfg)
    assert np.array_equal(a.input_ldr, b.input_ldr)
    assert np.array_equal(a.encoded_disparity, b.encoded_disparity)
    assert np.array_equal(a.camera_vec, b.camera_vec)
    assert np.array_equal(a.mask, b.mask)


def test_augment_shared_photometry_on_equal_pair():
    # when input == reshaded, outputs must match exactly under any draw
    inp, resh, depth, validity, offset = _example()
    for seed in range(5):
        s = augment_pair(inp, resh, depth, validity, offset, np.random.default_rng(seed), AugmentConfig(crop=20))
        assert np.array_equal(s.input_ldr, s.target_ldr)


def test_augment_rejects_small_images():
    inp, resh, depth, validity, offset = _example(h=8, w=8)
    with pytest.raises(ValueError, match="smaller than crop"):
        augment_pair(inp, resh, depth, validity, offset, np.random.default_rng(0), AugmentConfig(crop=16))
