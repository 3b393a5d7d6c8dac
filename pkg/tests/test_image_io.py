import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from reshade_forge.image_io import (
    HdrImage,
    ImageFormatError,
    LdrImage,
    read_mask_png,
    read_pfm,
    tonemap,
    write_mask_png,
    write_pfm,
)

finite_f32 = st.floats(allow_nan=False, allow_infinity=False, width=32)


def test_pfm_header_and_payload_size(tmp_path):
    img = HdrImage(np.full((2, 2, 3), 0.5, np.float32))
    path = tmp_path / "c.pfm"
    write_pfm(img, path)
    raw = path.read_bytes()
    assert raw[:12] == b"PF\n2 2\n-1.0\n"
    assert len(raw) == 12 + 48  # 2*2*3 float32


def test_pfm_known_payload_decodes(tmp_path):
    path = tmp_path / "one.pfm"
    payload = np.array([1.0, 1.0, 1.0], "<f4").tobytes()
    path.write_bytes(b"PF\n1 1\n-1.0\n" + payload)
    img = read_pfm(path)
    assert img.channels == 3 and img.width == 1 and img.height == 1
    assert np.array_equal(img.data, np.ones((1, 1, 3), np.float32))


def test_pfm_roundtrip_rows_and_channels(tmp_path):
    data = np.arange(24, dtype=np.float32).reshape(2, 4, 3)
    path = tmp_path / "r.pfm"
    write_pfm(HdrImage(data), path)
    back = read_pfm(path)
    assert np.array_equal(back.data, data)


def test_pfm_single_channel(tmp_path):
    data = np.linspace(0, 9, 12, dtype=np.float32).reshape(3, 4)
    path = tmp_path / "g.pfm"
    write_pfm(HdrImage(data), path)
    assert path.read_bytes()[:2] == b"Pf"
    back = read_pfm(path)
    assert back.channels == 1
    assert np.array_equal(back.data[:, :, 0], data)


def test_pfm_truncated_payload_rejected(tmp_path):
    path = tmp_path / "t.pfm"
    write_pfm(HdrImage(np.ones((2, 2, 3), np.float32)), path)
    path.write_bytes(path.read_bytes()[:-4])
    with pytest.raises(ImageFormatError, match="payload"):
        read_pfm(path)


def test_pfm_bad_magic_rejected(tmp_path):
    path = tmp_path / "bad.pfm"
    path.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
    with pytest.raises(ImageFormatError):
        read_pfm(path)


def test_pfm_nan_write_rejected(tmp_path):
    img = HdrImage(np.ones((1, 1, 3), np.float32))
    img.data[0, 0, 0] = np.nan  # bypass constructor validation
    with pytest.raises(ImageFormatError, match="NaN"):
        write_pfm(img, tmp_path / "nan.pfm")


def test_pfm_big_endian_read(tmp_path):
    path = tmp_path / "be.pfm"
    path.write_bytes(b"Pf\n1 1\n1.0\n" + np.array([2.5], ">f4").tobytes())
    assert read_pfm(path).data[0, 0, 0] == 2.5


@settings(max_examples=40, deadline=None)
@given(arrays(np.float32, (3, 5, 3), elements=finite_f32))
def test_pfm_roundtrip_bit_exact_fuzz(tmp_path_factory, data):
    path = tmp_path_factory.mktemp("pfm") / "f.pfm"
    write_pfm(HdrImage(data), path)
    back = read_pfm(path)
    assert back.data.tobytes() == data.tobytes()


def test_pfm_roundtrip_preserves_inf_and_negzero(tmp_path):
    data = np.array([[[np.inf, -0.0, 1e-40]]], np.float32)  # denormal too
    path = tmp_path / "special.pfm"
    write_pfm(HdrImage(data), path)
    assert read_pfm(path).data.tobytes() == data.tobytes()


def test_mask_png_roundtrip(tmp_path):
    mask = np.zeros((4, 4), bool)
    mask[1:3, 2:] = True
    path = tmp_path / "m.png"
    write_mask_png(mask, path)
    assert np.array_equal(read_mask_png(path), mask)


@pytest.mark.parametrize("value", [True, False])
def test_mask_png_constant_levels(tmp_path, value):
    path = tmp_path / "c.png"
    write_mask_png(np.full((4, 4), value), path)
    from PIL import Image

    raw = np.asarray(Image.open(path))
    assert (raw == (255 if value else 0)).all()


def test_tonemap_values():
    img = HdrImage(np.array([[[0.25, 0.04, 0.0]]], np.float32))
    out = tonemap(img, exposure=4.0, gamma=2.0)
    assert out.data[0, 0, 0] == pytest.approx(1.0, abs=1e-6)
    assert out.data[0, 0, 1] == pytest.approx(0.4, abs=1e-6)
    assert out.data[0, 0, 2] == 0.0


def test_tonemap_rejects_nonfinite():
    img = HdrImage(np.array([[[np.inf, 0, 0]]], np.float32))
    with pytest.raises(ValueError, match="finite"):
        tonemap(img, 1.0, 2.2)


@settings(max_examples=40, deadline=None)
@given(
    arrays(np.float32, (2, 2, 3), elements=st.floats(0, 100, width=32)),
    st.floats(0.1, 20),
    st.floats(1.0, 6.0),
)
def test_tonemap_range_and_monotonicity(data, exposure, gamma):
    out = tonemap(HdrImage(data), exposure, gamma).data
    assert (out >= 0).all() and (out <= 1).all()
    brighter = tonemap(HdrImage(data + 0.5), exposure, gamma).data
    assert (brighter >= out - 1e-7).all()


def test_ldr_image_rejects_out_of_range():
    with pytest.raises(ValueError):
        LdrImage(np.array([[[1.5, 0, 0]]], np.float32))
    with pytest.raises(ValueError):
        LdrImage(np.array([[[-0.1, 0, 0]]], np.float32))
