"""Multi-level CDF 9/7 wavelet transform by lifting.

Coefficients are kept in the usual in-place (Mallat) layout: after ``levels``
decompositions of an ``H x W`` image the top-left ``H/2**levels`` block holds
LL, and for every level ``j`` (1 = finest) the three detail bands of size
``H/2**j x W/2**j`` sit to the right (HL), below (LH) and diagonally (HH) of
the level-``j`` low-pass block.

Boundaries use whole-sample symmetric extension (mirror without repeating the
edge sample), as in JPEG2000.  The scaling constants are chosen so that the
low-pass filter has DC gain sqrt(2) and the high-pass filter the matching
reciprocal gain, which makes the transform close to orthonormal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .image_core import ImageError, check_image

# Daubechies-Sweldens lifting factorization of the CDF 9/7 pair.
ALPHA = -1.586134342059924
BETA = -0.052980118572961
GAMMA = 0.882911075530934
DELTA = 0.443506852043971
KAPPA = 1.230174104914001

LOW_SCALE = np.sqrt(2.0) / KAPPA
HIGH_SCALE = KAPPA / np.sqrt(2.0)

ORIENTATIONS = ("LH", "HL", "HH")


@dataclass
class WaveletPyramid:
    """Wavelet coefficients of an image in Mallat layout."""

    coeffs: np.ndarray
    levels: int

    def __post_init__(self):
        self.coeffs = np.ascontiguousarray(self.coeffs, dtype=np.float64)
        if self.coeffs.ndim != 2 or self.levels < 1:
            raise ImageError("malformed pyramid")
        step = 1 << self.levels
        h, w = self.coeffs.shape
        if h % step or w % step or h < step or w < step:
            raise ImageError(
                f"pyramid {w}x{h} inconsistent with {self.levels} levels"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs.shape

    @property
    def base_height(self) -> int:
        return self.coeffs.shape[0]

    @property
    def base_width(self) -> int:
        return self.coeffs.shape[1]

    def subband_slices(self, name: str, level: int) -> tuple[slice, slice]:
        return subband_slices(self.shape, self.levels, name, level)

    def subband(self, name: str, level: int | None = None) -> np.ndarray:
        """View of one subband; ``level`` defaults to ``levels`` for LL."""
        if level is None:
            level = self.levels
        return self.coeffs[self.subband_slices(name, level)]

    @property
    def ll(self) -> np.ndarray:
        return self.subband("LL", self.levels)

    def copy(self) -> "WaveletPyramid":
        return WaveletPyramid(self.coeffs.copy(), self.levels)

    def with_coeffs(self, coeffs: np.ndarray) -> "WaveletPyramid":
        return WaveletPyramid(coeffs, self.levels)

    def to_flat(self) -> np.ndarray:
        """Coefficients in scan order: LL, then coarse to fine LH, HL, HH."""
        return np.concatenate(
            [self.coeffs[sl].ravel() for _, _, sl in iter_subbands(self.shape, self.levels)]
        )

    @classmethod
    def from_flat(cls, flat, shape: tuple[int, int], levels: int) -> "WaveletPyramid":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != shape[0] * shape[1]:
            raise ImageError(
                f"flat coefficient vector has {flat.size} entries, expected "
                f"{shape[0] * shape[1]}"
            )
        coeffs = np.empty(shape)
        pos = 0
        for _, _, sl in iter_subbands(shape, levels):
            block = coeffs[sl]
            n = block.size
            block[...] = flat[pos : pos + n].reshape(block.shape)
            pos += n
        return cls(coeffs, levels)

    @classmethod
    def zeros(cls, shape: tuple[int, int], levels: int) -> "WaveletPyramid":
        return cls(np.zeros(shape), levels)


def subband_slices(shape, levels: int, name: str, level: int) -> tuple[slice, slice]:
    if not 1 <= level <= levels:
        raise ImageError(f"level {level} outside 1..{levels}")
    h = shape[0] >> level
    w = shape[1] >> level
    if name == "LL":
        if level != levels:
            raise ImageError(f"LL only exists at the coarsest level {levels}")
        return slice(0, h), slice(0, w)
    if name == "HL":
        return slice(0, h), slice(w, 2 * w)
    if name == "LH":
        return slice(h, 2 * h), slice(0, w)
    if name == "HH":
        return slice(h, 2 * h), slice(w, 2 * w)
    raise ImageError(f"unknown subband {name!r}")


def iter_subbands(shape, levels: int) -> Iterator[tuple[str, int, tuple[slice, slice]]]:
    """Yield ``(name, level, slices)`` in file scan order."""
    yield "LL", levels, subband_slices(shape, levels, "LL", levels)
    for level in range(levels, 0, -1):
        for name in ORIENTATIONS:
            yield name, level, subband_slices(shape, levels, name, level)


def _next(s):
    # s[i+1] with the mirror x[N] = x[N-2] expressed on the even samples
    return np.concatenate((s[:, 1:], s[:, -1:]), axis=1)


def _prev(d):
    # d[i-1] with the mirror x[-1] = x[1] expressed on the odd samples
    return np.concatenate((d[:, :1], d[:, :-1]), axis=1)


def _analyze_rows(x: np.ndarray) -> np.ndarray:
    s = x[:, 0::2].copy()
    d = x[:, 1::2].copy()
    d += ALPHA * (s + _next(s))
    s += BETA * (_prev(d) + d)
    d += GAMMA * (s + _next(s))
    s += DELTA * (_prev(d) + d)
    return np.concatenate((s * LOW_SCALE, d * HIGH_SCALE), axis=1)


def _synthesize_rows(c: np.ndarray) -> np.ndarray:
    half = c.shape[1] // 2
    s = c[:, :half] / LOW_SCALE
    d = c[:, half:] / HIGH_SCALE
    s -= DELTA * (_prev(d) + d)
    d -= GAMMA * (s + _next(s))
    s -= BETA * (_prev(d) + d)
    d -= ALPHA * (s + _next(s))
    out = np.empty_like(c)
    out[:, 0::2] = s
    out[:, 1::2] = d
    return out


def _next_t(d):
    # transpose of s -> s + s[next]
    out = d.copy()
    out[:, 1:] += d[:, :-1]
    out[:, -1] += d[:, -1]
    return out


def _prev_t(s):
    # transpose of d -> d[prev] + d
    out = s.copy()
    out[:, :-1] += s[:, 1:]
    out[:, 0] += s[:, 0]
    return out


def _analyze_rows_adjoint(c: np.ndarray) -> np.ndarray:
    half = c.shape[1] // 2
    s = c[:, :half] * LOW_SCALE
    d = c[:, half:] * HIGH_SCALE
    d += DELTA * _prev_t(s)
    s += GAMMA * _next_t(d)
    d += BETA * _prev_t(s)
    s += ALPHA * _next_t(d)
    out = np.empty_like(c)
    out[:, 0::2] = s
    out[:, 1::2] = d
    return out


def forward_dwt(img: np.ndarray, levels: int = 4) -> WaveletPyramid:
    """Separable 2-D CDF 9/7 analysis, applied ``levels`` times to LL."""
    if levels < 1:
        raise ImageError("levels must be >= 1")
    c = check_image(img, levels).copy()
    h, w = c.shape
    for _ in range(levels):
        block = _analyze_rows(c[:h, :w])
        c[:h, :w] = _analyze_rows(block.T).T
        h //= 2
        w //= 2
    return WaveletPyramid(c, levels)


def inverse_dwt(pyr: WaveletPyramid) -> np.ndarray:
    """Exact inverse of :func:`forward_dwt`."""
    if not isinstance(pyr, WaveletPyramid):
        raise ImageError("inverse_dwt expects a WaveletPyramid")
    c = pyr.coeffs.copy()
    for level in range(pyr.levels, 0, -1):
        h = c.shape[0] >> (level - 1)
        w = c.shape[1] >> (level - 1)
        block = _synthesize_rows(c[:h, :w].T).T
        c[:h, :w] = _synthesize_rows(block)
    return c


def forward_dwt_adjoint(pyr: WaveletPyramid) -> np.ndarray:
    """Transpose of the analysis operator (differs from the inverse for 9/7)."""
    c = pyr.coeffs.copy()
    for level in range(pyr.levels, 0, -1):
        h = c.shape[0] >> (level - 1)
        w = c.shape[1] >> (level - 1)
        block = _analyze_rows_adjoint(c[:h, :w].T).T
        c[:h, :w] = _analyze_rows_adjoint(block)
    return c
