"""Kernel backend selection.

The compiled ``_ckernels`` module is used when it was built; otherwise the
numpy implementations in ``_pykernels`` are used.  ``WAVINPAINT_BACKEND``
(``cython`` or ``python``) forces a choice.
"""

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels


def _select():
    want = os.environ.get("WAVINPAINT_BACKEND", "").strip().lower()
    if want:
        if want not in BACKENDS:
            raise ImportError(
                f"WAVINPAINT_BACKEND={want!r} is not available; have {sorted(BACKENDS)}"
            )
        return BACKENDS[want]
    return BACKENDS.get("cython", _pykernels)


kernels = _select()


def get_kernels(name=None):
    """Return the kernel module ``name`` or the active one."""
    if name is None:
        return kernels
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unbuilt backend {name!r}") from None
