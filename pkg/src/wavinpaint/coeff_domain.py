"""Known-coefficient masks, projections and degradation scenarios."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .dwt import (
    ORIENTATIONS,
    WaveletPyramid,
    forward_dwt,
    inverse_dwt,
    iter_subbands,
    subband_slices,
)
from .image_core import ImageError, check_image

MAGIC = "WIM1"


class MaskError(ValueError):
    pass


@dataclass
class CoeffMask:
    """Boolean map over a pyramid layout; ``True`` marks a known coefficient."""

    known: np.ndarray
    levels: int

    def __post_init__(self):
        self.known = np.ascontiguousarray(self.known, dtype=bool)
        try:  # reuse the pyramid layout checks
            WaveletPyramid(np.zeros(self.known.shape), self.levels)
        except ImageError as exc:
            raise MaskError(str(exc)) from None
        if not self.known.any():
            raise MaskError("mask has no known coefficient")

    @property
    def shape(self) -> tuple[int, int]:
        return self.known.shape

    @property
    def n_known(self) -> int:
        return int(np.count_nonzero(self.known))

    @property
    def n_missing(self) -> int:
        return self.known.size - self.n_known

    def subband(self, name: str, level: int | None = None) -> np.ndarray:
        if level is None:
            level = self.levels
        return self.known[subband_slices(self.shape, self.levels, name, level)]

    @property
    def ll_known(self) -> np.ndarray:
        return self.subband("LL", self.levels)

    @classmethod
    def full(cls, shape, levels: int) -> "CoeffMask":
        return cls(np.ones(shape, dtype=bool), levels)


def _check_layout(pyr: WaveletPyramid, mask: CoeffMask):
    if pyr.shape != mask.shape or pyr.levels != mask.levels:
        raise MaskError(
            f"layout mismatch: pyramid {pyr.shape}/{pyr.levels} levels, "
            f"mask {mask.shape}/{mask.levels} levels"
        )


def project_known(pyr: WaveletPyramid, mask: CoeffMask) -> WaveletPyramid:
    """Keep coefficients on the known set, zero the rest."""
    _check_layout(pyr, mask)
    return pyr.with_coeffs(np.where(mask.known, pyr.coeffs, 0.0))


def project_missing(pyr: WaveletPyramid, mask: CoeffMask) -> WaveletPyramid:
    """Zero coefficients on the known set, keep the rest."""
    _check_layout(pyr, mask)
    return pyr.with_coeffs(np.where(mask.known, 0.0, pyr.coeffs))


def level_for_size(base_dims, size: int) -> int:
    """Decomposition level whose detail subbands have ``size`` rows."""
    h = base_dims[0]
    level = 0
    while h > size:
        h //= 2
        level += 1
    if h != size or level == 0:
        raise MaskError(f"no subband level of size {size} for a {base_dims[0]}-row image")
    return level


def make_subband_loss_mask(levels: int, base_dims, target: tuple[str, int]) -> CoeffMask:
    """Mask with the single detail subband ``target = (orientation, level)`` lost."""
    name, level = target
    if name not in ORIENTATIONS:
        raise MaskError(f"target must be one of {ORIENTATIONS}, got {name!r}")
    if not 1 <= level <= levels:
        raise MaskError(f"level {level} not in 1..{levels}")
    known = np.ones(tuple(base_dims), dtype=bool)
    known[subband_slices(known.shape, levels, name, level)] = False
    return CoeffMask(known, levels)


def _sample_known(count: int, fraction: float, rng: np.random.Generator) -> np.ndarray:
    keep = np.zeros(count, dtype=bool)
    k = int(np.floor(fraction * count + 0.5))
    keep[rng.choice(count, size=k, replace=False)] = True
    return keep


def make_random_loss_mask(
    levels: int, base_dims, keep_fraction: float, keep_ll: bool, seed: int
) -> CoeffMask:
    """Random mask keeping exactly ``round(keep_fraction * count)`` coefficients.

    With ``keep_ll`` the LL band is fully known and the fraction applies to
    the detail coefficients only.
    """
    if not 0.0 < keep_fraction <= 1.0:
        raise MaskError(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    shape = tuple(base_dims)
    rng = np.random.default_rng(seed)
    known = np.zeros(shape, dtype=bool)
    if keep_ll:
        ll = subband_slices(shape, levels, "LL", levels)
        detail = np.ones(shape, dtype=bool)
        detail[ll] = False
        known[ll] = True
        known[detail] = _sample_known(int(detail.sum()), keep_fraction, rng)
    else:
        known[...] = _sample_known(known.size, keep_fraction, rng).reshape(shape)
    return CoeffMask(known, levels)


@dataclass
class ObservedData:
    """Received coefficients ``beta`` (zero off the known set) and the
    pixel-domain known component ``f0``."""

    beta: WaveletPyramid
    mask: CoeffMask
    f0: np.ndarray
    noise_sigma: float = 0.0

    @property
    def received(self) -> np.ndarray:
        """Image synthesized from the known coefficients alone."""
        return inverse_dwt(self.beta)

    @property
    def levels(self) -> int:
        return self.mask.levels

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask.shape


def interpolate_ll(observed: ObservedData) -> np.ndarray:
    """Fill unknown LL coefficients from the nearest known one and synthesize.

    Distance is Euclidean on the LL grid; ties go to the known coefficient
    that comes first in row-major order.  Unknown detail coefficients stay 0.
    """
    mask = observed.mask
    ll_known = mask.ll_known
    if not ll_known.any():
        raise MaskError("no known LL coefficient to interpolate from")
    coeffs = observed.beta.coeffs.copy()
    ll_sl = subband_slices(mask.shape, mask.levels, "LL", mask.levels)
    ll = coeffs[ll_sl]
    if ll_known.all():
        return inverse_dwt(observed.beta)
    src_r, src_c = np.nonzero(ll_known)  # row-major order
    dst_r, dst_c = np.nonzero(~ll_known)
    d2 = (dst_r[:, None] - src_r[None, :]) ** 2 + (dst_c[:, None] - src_c[None, :]) ** 2
    nearest = np.argmin(d2, axis=1)  # first minimum = row-major tie break
    ll[dst_r, dst_c] = ll[src_r[nearest], src_c[nearest]]
    return inverse_dwt(WaveletPyramid(coeffs, mask.levels))


def choose_f0(beta: WaveletPyramid, mask: CoeffMask, policy: str = "auto") -> np.ndarray:
    """Known component: LL-interpolated when LL coefficients are missing.

    ``policy="received"`` always returns the plain synthesis of ``beta``.
    """
    obs = ObservedData(beta, mask, inverse_dwt(beta))
    if policy == "received" or mask.ll_known.all():
        return obs.f0
    if policy != "auto":
        raise ValueError(f"unknown f0 policy {policy!r}")
    return interpolate_ll(obs)


def degrade(
    original: np.ndarray,
    mask: CoeffMask,
    noise_sigma: float = 0.0,
    seed: int = 0,
    f0_policy: str = "auto",
) -> ObservedData:
    """Lose the coefficients off ``mask`` and add Gaussian noise to the rest."""
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    original = check_image(original, mask.levels)
    if original.shape != mask.shape:
        raise MaskError(f"image {original.shape} does not match mask {mask.shape}")
    alpha = forward_dwt(original, mask.levels).coeffs
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        alpha = alpha + noise_sigma * rng.standard_normal(alpha.shape)
    beta = WaveletPyramid(np.where(mask.known, alpha, 0.0), mask.levels)
    return ObservedData(beta, mask, choose_f0(beta, mask, f0_policy), float(noise_sigma))


# -- mask + coefficient files ---------------------------------------------


def _rle_encode(bits: np.ndarray) -> str:
    """Alternating run lengths in hex, starting with a run of known (1) bits."""
    flat = bits.ravel()
    runs = []
    current = True
    i = 0
    n = flat.size
    while i < n:
        j = i
        while j < n and flat[j] == current:
            j += 1
        runs.append(j - i)
        current = not current
        i = j
    if not runs:
        runs = [0]
    return ".".join(format(r, "x") for r in runs)


def _rle_decode(text: str, shape) -> np.ndarray:
    try:
        runs = [int(tok, 16) for tok in text.split(".")]
    except ValueError:
        raise MaskError(f"bad run-length field {text!r}") from None
    out = np.empty(int(np.prod(shape)), dtype=bool)
    pos = 0
    value = True
    for r in runs:
        if r < 0 or pos + r > out.size:
            raise MaskError("run lengths overflow the subband")
        out[pos : pos + r] = value
        pos += r
        value = not value
    if pos != out.size:
        raise MaskError("run lengths do not cover the subband")
    return out.reshape(shape)


def beta_path(path) -> str:
    return os.fspath(path) + ".beta"


def save_observed(path, observed: ObservedData) -> None:
    """Write the mask text file at ``path`` and the coefficients at ``path.beta``.

    The coefficient file is the flat little-endian float64 vector in scan
    order (LL, then coarse to fine LH, HL, HH).
    """
    mask = observed.mask
    h, w = mask.shape
    lines = [f"{MAGIC} {w} {h} {mask.levels} {float(observed.noise_sigma)!r}"]
    for name, level, sl in iter_subbands(mask.shape, mask.levels):
        lines.append(f"{name} {level} {_rle_encode(mask.known[sl])}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    observed.beta.to_flat().astype("<f8").tofile(beta_path(path))


def load_observed(path, f0_policy: str = "auto") -> ObservedData:
    """Read files written by :func:`save_observed`; ``f0`` is recomputed."""
    try:
        with open(path) as fh:
            lines = [ln.split() for ln in fh if ln.strip()]
    except OSError as exc:
        raise MaskError(f"cannot read {path}: {exc}") from exc
    if not lines or lines[0][0] != MAGIC or len(lines[0]) != 5:
        raise MaskError(f"{path}: not a {MAGIC} mask file")
    try:
        w, h, levels = (int(v) for v in lines[0][1:4])
        sigma = float(lines[0][4])
    except ValueError:
        raise MaskError(f"{path}: bad header") from None
    shape = (h, w)
    known = np.zeros(shape, dtype=bool)
    expected = list(iter_subbands(shape, levels))
    if len(lines) - 1 != len(expected):
        raise MaskError(f"{path}: expected {len(expected)} subband lines")
    for (name, level, sl), fields in zip(expected, lines[1:]):
        if len(fields) != 3 or fields[0] != name or fields[1] != str(level):
            raise MaskError(f"{path}: expected subband {name} {level}, got {' '.join(fields)}")
        known[sl] = _rle_decode(fields[2], known[sl].shape)
    mask = CoeffMask(known, levels)
    try:
        flat = np.fromfile(beta_path(path), dtype="<f8")
    except OSError as exc:
        raise MaskError(f"cannot read {beta_path(path)}: {exc}") from exc
    if flat.size != h * w:
        raise MaskError(f"{beta_path(path)}: {flat.size} coefficients, expected {h * w}")
    beta = WaveletPyramid.from_flat(flat, shape, levels)
    if np.any(beta.coeffs[~known] != 0.0):
        raise MaskError("coefficient file is nonzero on unknown positions")
    return ObservedData(beta, mask, choose_f0(beta, mask, f0_policy), sigma)
