"""Grayscale image I/O and quality metrics.

Images are plain 2-D ``float64`` numpy arrays with nominal intensity range
[0, 1].  Files are read from binary PGM (P5, 8 or 16 bit) or grayscale PNG
and always written as 8-bit P5.
"""

from __future__ import annotations

import math
import os
from importlib import resources

import numpy as np

MIN_SIDE = 16
PEAK = 1.0


class ImageError(ValueError):
    """Raised for malformed, unsupported or inconsistent images."""


def check_image(img, levels: int | None = None) -> np.ndarray:
    """Validate ``img`` and return it as a C-contiguous float64 array.

    If ``levels`` is given, both sides must be divisible by ``2**levels``.
    """
    arr = np.ascontiguousarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ImageError(f"expected a 2-D grayscale image, got shape {arr.shape}")
    h, w = arr.shape
    if h < MIN_SIDE or w < MIN_SIDE:
        raise ImageError(f"image must be at least {MIN_SIDE}x{MIN_SIDE}, got {w}x{h}")
    if levels is not None:
        step = 1 << levels
        if h % step or w % step:
            raise ImageError(
                f"image {w}x{h} is not divisible by 2**{levels} = {step}"
            )
    if not np.all(np.isfinite(arr)):
        raise ImageError("image contains NaN or Inf")
    return arr


def _read_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    n = len(buf)
    while pos < n:
        c = buf[pos : pos + 1]
        if c == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace() and buf[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ImageError("truncated PGM header")
    return buf[start:pos], pos


def _parse_pgm(buf: bytes) -> np.ndarray:
    magic, pos = _read_token(buf, 0)
    if magic == b"P6":
        raise ImageError("color (P6) images are not supported")
    if magic != b"P5":
        raise ImageError(f"unsupported Netpbm variant {magic!r}; only binary P5")
    fields = []
    for _ in range(3):
        tok, pos = _read_token(buf, pos)
        try:
            fields.append(int(tok))
        except ValueError:
            raise ImageError(f"bad PGM header field {tok!r}") from None
    width, height, maxval = fields
    if not 0 < maxval < 65536:
        raise ImageError(f"bad PGM maxval {maxval}")
    pos += 1  # single whitespace byte after maxval
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    count = width * height
    raw = buf[pos : pos + count * dtype.itemsize]
    if len(raw) != count * dtype.itemsize:
        raise ImageError("truncated PGM pixel data")
    data = np.frombuffer(raw, dtype=dtype).reshape(height, width)
    return data.astype(np.float64) / maxval


def _read_png(path) -> np.ndarray:
    from PIL import Image as PILImage

    with PILImage.open(path) as im:
        if im.mode in ("L", "1"):
            data = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
        elif im.mode in ("I;16", "I;16B", "I;16L", "I"):
            data = np.asarray(im, dtype=np.float64) / 65535.0
        else:
            raise ImageError(f"color or unsupported PNG mode {im.mode!r}")
    return data


def load_image(path) -> np.ndarray:
    """Read a grayscale PGM (P5) or PNG file into a float image in [0, 1]."""
    path = os.fspath(path)
    try:
        with open(path, "rb") as fh:
            head = fh.read(8)
            fh.seek(0)
            buf = fh.read()
    except OSError as exc:
        raise ImageError(f"cannot read {path}: {exc}") from exc
    if head.startswith(b"\x89PNG"):
        data = _read_png(path)
    elif head[:1] == b"P":
        data = _parse_pgm(buf)
    else:
        raise ImageError(f"{path}: unsupported image format")
    return check_image(data)


def to_uint8(img: np.ndarray) -> np.ndarray:
    """Quantize to 8 bit with clamping and round-half-away-from-zero."""
    v = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0) * 255.0
    # values are nonnegative here, so half-away-from-zero is floor(v + 0.5)
    return np.floor(v + 0.5).astype(np.uint8)


def save_image(img: np.ndarray, path) -> None:
    """Write ``img`` as an 8-bit binary PGM."""
    arr = check_image(img)
    pix = to_uint8(arr)
    h, w = pix.shape
    try:
        with open(path, "wb") as fh:
            fh.write(b"P5\n%d %d\n255\n" % (w, h))
            fh.write(pix.tobytes())
    except OSError as exc:
        raise ImageError(f"cannot write {path}: {exc}") from exc


def psnr(reference: np.ndarray, candidate: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB with peak 1.0.

    Returns ``math.inf`` when the images are identical.
    """
    ref = np.asarray(reference, dtype=np.float64)
    cand = np.asarray(candidate, dtype=np.float64)
    if ref.shape != cand.shape:
        raise ImageError(f"shape mismatch {ref.shape} vs {cand.shape}")
    mse = float(np.mean((ref - cand) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / mse)


BUILTIN_IMAGES = ("barbara", "barbara128", "lena", "cameraman")


def builtin_image(name: str) -> np.ndarray:
    """Load one of the bundled 8-bit test images by name."""
    if name not in BUILTIN_IMAGES:
        raise ImageError(f"unknown builtin image {name!r}; have {BUILTIN_IMAGES}")
    ref = resources.files("wavinpaint") / "data" / f"{name}.pgm"
    with resources.as_file(ref) as p:
        return load_image(p)
