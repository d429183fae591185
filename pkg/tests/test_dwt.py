import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wavinpaint.dwt import (
    WaveletPyramid,
    forward_dwt,
    forward_dwt_adjoint,
    inverse_dwt,
    iter_subbands,
    subband_slices,
)
from wavinpaint.image_core import ImageError

# Published orthonormal-scaled CDF 9/7 analysis taps (centre first).
LOW_TAPS = [0.852698679009, 0.377402855613, -0.110624404418, -0.023849465020, 0.037828455507]
HIGH_TAPS = [0.788485616406, -0.418092273222, -0.040689417609, 0.064538882629]


def _symmetric(taps):
    return np.array(taps[:0:-1] + taps)


def _mirror(i, n):
    i = abs(i)
    return 2 * (n - 1) - i if i >= n else i


def conv_analysis_1d(x):
    """Filter bank by explicit convolution with whole-sample symmetric extension."""
    n = x.size
    h, g = _symmetric(LOW_TAPS), _symmetric(HIGH_TAPS)
    s = [sum(h[k + 4] * x[_mirror(2 * m + k, n)] for k in range(-4, 5)) for m in range(n // 2)]
    d = [sum(g[k + 3] * x[_mirror(2 * m + 1 + k, n)] for k in range(-3, 4)) for m in range(n // 2)]
    return np.array(s), np.array(d)


def conv_dwt(img, levels):
    c = img.copy()
    h, w = c.shape
    for _ in range(levels):
        block = c[:h, :w].copy()
        for r in range(h):
            s, d = conv_analysis_1d(block[r])
            block[r] = np.concatenate((s, d))
        for col in range(w):
            s, d = conv_analysis_1d(block[:, col])
            block[:, col] = np.concatenate((s, d))
        c[:h, :w] = block
        h //= 2
        w //= 2
    return c


@pytest.mark.parametrize("levels", [1, 2])
def test_matches_convolution_oracle(rng, levels):
    img = rng.random((16, 32))
    # taps are published to 12 digits
    np.testing.assert_allclose(forward_dwt(img, levels).coeffs, conv_dwt(img, levels), atol=1e-10)


def test_constant_image_goes_to_ll():
    pyr = forward_dwt(np.full((64, 64), 0.3), 3)
    # DC gain sqrt(2) per dimension and level
    np.testing.assert_allclose(pyr.ll, 0.3 * 2 ** 3, atol=1e-12)
    detail = pyr.coeffs.copy()
    detail[:8, :8] = 0
    assert np.abs(detail).max() < 1e-12


def test_linear_ramp_has_no_fine_detail_inside():
    # 9/7 analysis high-pass has 4 vanishing moments
    x = np.tile(np.arange(64.0) / 64, (64, 1))
    hl = forward_dwt(x, 1).subband("HL", 1)
    assert np.abs(hl[:, 1:-2]).max() < 1e-12  # mirrors make kinks at both ends


@given(
    arrays(np.float64, st.sampled_from([(16, 16), (32, 16), (32, 64)]),
           elements=st.floats(-10, 10, allow_nan=False)),
    st.integers(1, 2),
)
def test_perfect_reconstruction_property(img, levels):
    back = inverse_dwt(forward_dwt(img, levels))
    assert np.abs(back - img).max() < 1e-9


def test_near_orthonormal(rng):
    img = rng.standard_normal((128, 128))
    ratio = np.linalg.norm(forward_dwt(img, 4).coeffs) / np.linalg.norm(img)
    assert 0.9 < ratio < 1.1


def dense_matrix(func, shape):
    n = shape[0] * shape[1]
    cols = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        cols.append(func(e.reshape(shape)).ravel())
    return np.array(cols).T


def test_adjoint_matches_dense_transpose():
    shape, levels = (16, 16), 2
    A = dense_matrix(lambda x: forward_dwt(x, levels).coeffs, shape)
    At = dense_matrix(lambda c: forward_dwt_adjoint(WaveletPyramid(c, levels)), shape)
    np.testing.assert_allclose(At, A.T, atol=1e-12)
    S = dense_matrix(lambda c: inverse_dwt(WaveletPyramid(c, levels)), shape)
    np.testing.assert_allclose(S @ A, np.eye(256), atol=1e-12)
    # biorthogonal, so the inverse is not the transpose
    assert np.abs(S - A.T).max() > 1e-3


def test_adjoint_inner_product(rng):
    x = rng.standard_normal((64, 32))
    c = rng.standard_normal((64, 32))
    lhs = np.vdot(forward_dwt(x, 3).coeffs, c)
    rhs = np.vdot(x, forward_dwt_adjoint(WaveletPyramid(c, 3)))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_subband_layout():
    assert subband_slices((256, 256), 4, "HL", 3) == (slice(0, 32), slice(32, 64))
    assert subband_slices((256, 256), 4, "LH", 1) == (slice(128, 256), slice(0, 128))
    assert subband_slices((256, 256), 4, "HH", 2) == (slice(64, 128), slice(64, 128))
    assert subband_slices((256, 256), 4, "LL", 4) == (slice(0, 16), slice(0, 16))
    bands = list(iter_subbands((64, 32), 2))
    assert [(n, lv) for n, lv, _ in bands] == [
        ("LL", 2), ("LH", 2), ("HL", 2), ("HH", 2), ("LH", 1), ("HL", 1), ("HH", 1)
    ]
    covered = np.zeros((64, 32), int)
    for _, _, sl in bands:
        covered[sl] += 1
    assert (covered == 1).all()


def test_horizontal_detail_lands_in_hl():
    img = np.zeros((32, 32))
    img[:, 1::2] = 1.0  # vertical stripes: horizontal high frequency
    pyr = forward_dwt(img, 1)
    assert np.abs(pyr.subband("HL", 1)).max() > 0.5
    assert np.abs(pyr.subband("LH", 1)).max() < 1e-12


def test_flat_round_trip(rng):
    pyr = forward_dwt(rng.random((64, 32)), 3)
    flat = pyr.to_flat()
    assert flat.shape == (64 * 32,)
    # scan order starts with LL
    np.testing.assert_array_equal(flat[:8 * 4], pyr.ll.ravel())
    back = WaveletPyramid.from_flat(flat, (64, 32), 3)
    np.testing.assert_array_equal(back.coeffs, pyr.coeffs)


def test_errors():
    with pytest.raises(ImageError):
        forward_dwt(np.zeros((48, 48)), 5)
    with pytest.raises(ImageError):
        forward_dwt(np.zeros((16, 16)), 0)
    with pytest.raises((ImageError, ValueError)):
        WaveletPyramid(np.zeros((24, 16)), 4)
