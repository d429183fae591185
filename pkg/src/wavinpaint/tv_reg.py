"""Isotropic total variation and its proximity operator.

Vector fields are ``(2, H, W)`` arrays: index 0 is the horizontal (column)
component, index 1 the vertical (row) component.  The gradient uses forward
differences with Neumann boundaries; the divergence is its negative adjoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels

CHAMBOLLE_STEP = 0.248


@dataclass(frozen=True)
class ProxConfig:
    """Termination controls for an inner proximity solve.

    With ``schedule="decay"`` the tolerance at outer iteration ``k`` is
    ``tol / k**2`` so the inexactness errors are summable.
    """

    tol: float = 1e-5
    max_iters: int = 50
    schedule: str = "fixed"

    def __post_init__(self):
        if self.tol <= 0 or self.max_iters < 1:
            raise ValueError("ProxConfig needs tol > 0 and max_iters >= 1")
        if self.schedule not in ("fixed", "decay"):
            raise ValueError(f"unknown tolerance schedule {self.schedule!r}")

    def tol_at(self, k: int) -> float:
        if self.schedule == "decay":
            return self.tol / float(max(k, 1)) ** 2
        return self.tol


def grad(img: np.ndarray) -> np.ndarray:
    return kernels.grad(np.ascontiguousarray(img, dtype=np.float64))


def div(field: np.ndarray) -> np.ndarray:
    return kernels.div(np.ascontiguousarray(field, dtype=np.float64))


def tv_norm(img: np.ndarray) -> float:
    g = grad(img)
    return float(np.sum(np.sqrt(g[0] ** 2 + g[1] ** 2)))


def rof_objective(f: np.ndarray, g: np.ndarray, weight: float) -> float:
    """``0.5*||f - g||^2 + weight*TV(f)``."""
    return 0.5 * float(np.sum((f - g) ** 2)) + weight * tv_norm(f)


@dataclass
class ProxResult:
    image: np.ndarray
    dual: np.ndarray
    iterations: int
    residual: float


def tv_prox_full(
    g: np.ndarray,
    weight: float,
    inner: ProxConfig = ProxConfig(),
    dual: np.ndarray | None = None,
    tol: float | None = None,
) -> ProxResult:
    """Like :func:`tv_prox` but also returns the dual field and diagnostics.

    ``dual`` warm-starts the fixed-point iteration and is not modified.
    """
    if not weight > 0:
        raise ValueError(f"prox weight must be positive, got {weight}")
    g = np.ascontiguousarray(g, dtype=np.float64)
    if dual is None:
        p = np.zeros((2,) + g.shape)
    else:
        p = np.array(dual, dtype=np.float64, order="C", copy=True)
    f, iters, res = kernels.tv_dual_prox(
        g, float(weight), CHAMBOLLE_STEP, inner.tol if tol is None else tol,
        inner.max_iters, p,
    )
    return ProxResult(f, p, int(iters), float(res))


def tv_prox(g: np.ndarray, weight: float, inner: ProxConfig = ProxConfig()) -> np.ndarray:
    """Approximate ``argmin_f 0.5*||f - g||^2 + weight*TV(f)``.

    Solved on the dual with Chambolle's projected fixed point; stops once the
    sup-norm change of the dual field drops below ``inner.tol``.
    """
    return tv_prox_full(g, weight, inner).image
