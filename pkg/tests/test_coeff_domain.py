import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wavinpaint.coeff_domain import (
    CoeffMask,
    MaskError,
    ObservedData,
    _rle_decode,
    _rle_encode,
    choose_f0,
    degrade,
    interpolate_ll,
    level_for_size,
    load_observed,
    make_random_loss_mask,
    make_subband_loss_mask,
    project_known,
    project_missing,
    save_observed,
)
from wavinpaint.dwt import WaveletPyramid, forward_dwt, inverse_dwt, subband_slices


def test_subband_mask_counts():
    m = make_subband_loss_mask(4, (256, 256), ("HL", level_for_size((256, 256), 32)))
    assert m.n_missing == 1024
    assert not m.subband("HL", 3).any()
    assert m.subband("LH", 3).all()


def test_level_for_size():
    assert level_for_size((256, 256), 32) == 3
    assert level_for_size((256, 256), 128) == 1
    with pytest.raises((MaskError, ValueError)):
        level_for_size((256, 256), 48)


def test_random_mask_fraction_and_determinism():
    a = make_random_loss_mask(4, (64, 64), 0.5, keep_ll=False, seed=7)
    b = make_random_loss_mask(4, (64, 64), 0.5, keep_ll=False, seed=7)
    c = make_random_loss_mask(4, (64, 64), 0.5, keep_ll=False, seed=8)
    np.testing.assert_array_equal(a.known, b.known)
    assert (a.known != c.known).any()
    assert a.n_known == 2048


def test_random_mask_keep_ll():
    m = make_random_loss_mask(4, (128, 128), 0.5, keep_ll=True, seed=3)
    assert m.ll_known.all()
    n_ll = 8 * 8
    rest = 128 * 128 - n_ll
    assert m.n_known == n_ll + int(np.floor(0.5 * rest + 0.5))


def test_random_mask_rejects_bad_fraction():
    with pytest.raises((MaskError, ValueError)):
        make_random_loss_mask(4, (64, 64), 1.5, False, 0)


def test_mask_validation():
    with pytest.raises(MaskError):
        CoeffMask(np.zeros((64, 64), bool), 2)
    with pytest.raises(MaskError):
        CoeffMask(np.ones((48, 64), bool), 5)


def test_projections_split(rng):
    pyr = forward_dwt(rng.random((64, 64)), 3)
    m = make_random_loss_mask(3, (64, 64), 0.4, False, 1)
    known, missing = project_known(pyr, m), project_missing(pyr, m)
    np.testing.assert_array_equal(known.coeffs + missing.coeffs, pyr.coeffs)
    assert not known.coeffs[~m.known].any()
    assert not missing.coeffs[m.known].any()
    # idempotent
    np.testing.assert_array_equal(project_known(known, m).coeffs, known.coeffs)


def test_projection_layout_mismatch(rng):
    pyr = forward_dwt(rng.random((64, 64)), 2)
    with pytest.raises(MaskError):
        project_known(pyr, CoeffMask.full((64, 64), 3))


def brute_force_fill(ll, known):
    out = ll.copy()
    src = [(r, c) for r in range(ll.shape[0]) for c in range(ll.shape[1]) if known[r, c]]
    for r in range(ll.shape[0]):
        for c in range(ll.shape[1]):
            if known[r, c]:
                continue
            best = None
            for sr, sc in src:  # row-major, strict < keeps the first tie
                d = (sr - r) ** 2 + (sc - c) ** 2
                if best is None or d < best[0]:
                    best = (d, sr, sc)
            out[r, c] = ll[best[1], best[2]]
    return out


@pytest.mark.parametrize("seed", range(5))
def test_interpolate_ll_matches_brute_force(small_image, seed):
    m = make_random_loss_mask(3, small_image.shape, 0.5, False, seed)
    obs = degrade(small_image, m)
    f0 = interpolate_ll(obs)
    sl = subband_slices(m.shape, 3, "LL", 3)
    expected = obs.beta.coeffs.copy()
    expected[sl] = brute_force_fill(obs.beta.coeffs[sl], m.known[sl])
    np.testing.assert_allclose(forward_dwt(f0, 3).coeffs, expected, atol=1e-10)


def test_interpolate_ll_tie_rule():
    known = np.ones((32, 32), bool)
    sl = subband_slices((32, 32), 2, "LL", 2)
    ll_known = np.zeros((8, 8), bool)
    ll_known[2, 3] = True  # (2,4) is equidistant from (2,3) and (2,5)
    ll_known[2, 5] = True
    known[sl] = ll_known
    m = CoeffMask(known, 2)
    coeffs = np.zeros((32, 32))
    coeffs[2, 3], coeffs[2, 5] = 1.0, 2.0
    obs = ObservedData(WaveletPyramid(coeffs, 2), m, np.zeros((32, 32)))
    ll = forward_dwt(interpolate_ll(obs), 2).coeffs[sl]
    assert ll[2, 4] == pytest.approx(1.0)


def test_choose_f0():
    img = np.random.default_rng(0).random((64, 64))
    m = make_subband_loss_mask(3, (64, 64), ("HH", 2))
    obs = degrade(img, m)
    np.testing.assert_allclose(obs.f0, inverse_dwt(obs.beta))
    lossy = make_random_loss_mask(3, (64, 64), 0.3, False, 0)
    obs2 = degrade(img, lossy)
    assert not np.allclose(obs2.f0, obs2.received)
    np.testing.assert_allclose(choose_f0(obs2.beta, lossy, "received"), obs2.received)
    with pytest.raises(ValueError):
        choose_f0(obs2.beta, lossy, "nope")


def test_interpolated_f0_keeps_known_coefficients(small_image):
    m = make_random_loss_mask(3, small_image.shape, 0.4, False, 2)
    obs = degrade(small_image, m)
    af0 = project_known(forward_dwt(obs.f0, 3), m).coeffs
    np.testing.assert_allclose(af0, obs.beta.coeffs, atol=1e-12)


def test_degrade_noise_is_seeded(small_image):
    m = make_random_loss_mask(3, small_image.shape, 0.6, True, 0)
    a = degrade(small_image, m, 0.02, seed=5)
    b = degrade(small_image, m, 0.02, seed=5)
    c = degrade(small_image, m, 0.02, seed=6)
    np.testing.assert_array_equal(a.beta.coeffs, b.beta.coeffs)
    assert (a.beta.coeffs != c.beta.coeffs).any()
    assert not a.beta.coeffs[~m.known].any()
    noise = (a.beta.coeffs - forward_dwt(small_image, 3).coeffs)[m.known]
    assert 0.015 < noise.std() < 0.025


def test_degrade_full_mask_is_identity(small_image):
    obs = degrade(small_image, CoeffMask.full(small_image.shape, 3))
    np.testing.assert_allclose(obs.received, small_image, atol=1e-12)


@given(arrays(bool, st.tuples(st.integers(1, 12), st.integers(1, 12))))
def test_rle_round_trip(bits):
    np.testing.assert_array_equal(_rle_decode(_rle_encode(bits), bits.shape), bits)


def test_rle_hand_example():
    bits = np.array([[False, False, True], [True, True, False]])
    assert _rle_encode(bits) == "0.2.3.1"
    with pytest.raises(MaskError):
        _rle_decode("0.2.3", bits.shape)
    with pytest.raises(MaskError):
        _rle_decode("zz", bits.shape)


def test_observed_file_round_trip(tmp_path, small_image):
    m = make_random_loss_mask(3, small_image.shape, 0.5, False, 4)
    obs = degrade(small_image, m, 0.01, seed=2)
    path = tmp_path / "obs.wim"
    save_observed(path, obs)
    back = load_observed(path)
    np.testing.assert_array_equal(back.mask.known, m.known)
    np.testing.assert_array_equal(back.beta.coeffs, obs.beta.coeffs)
    np.testing.assert_allclose(back.f0, obs.f0)
    assert back.noise_sigma == 0.01


def test_observed_file_errors(tmp_path, small_image):
    obs = degrade(small_image, make_subband_loss_mask(3, small_image.shape, ("HL", 1)))
    path = tmp_path / "o.wim"
    save_observed(path, obs)
    text = path.read_text().splitlines()
    (tmp_path / "bad.wim").write_text("\n".join(["XXXX 64 64 3 0.0"] + text[1:]) + "\n")
    with pytest.raises(MaskError):
        load_observed(tmp_path / "bad.wim")
    (tmp_path / "short.wim").write_text("\n".join(text[:-1]) + "\n")
    with pytest.raises(MaskError):
        load_observed(tmp_path / "short.wim")
    (tmp_path / "o.wim.beta").write_bytes(b"\0" * 16)
    with pytest.raises(MaskError):
        load_observed(path)
    with pytest.raises(MaskError):
        load_observed(tmp_path / "missing.wim")
