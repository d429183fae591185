"""Non-local total variation on a semi-local patch-similarity graph.

The graph is stored in compressed-row form and the nonlocal gradient is one
value per directed edge.  After construction the graph is symmetric: ``y`` is
a neighbour of ``x`` with weight ``w`` exactly when ``x`` is a neighbour of
``y`` with weight ``w``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix, diags, identity
from scipy.sparse.linalg import LinearOperator, cg

from ._backend import kernels
from .image_core import check_image
from .tv_reg import ProxConfig

CG_RTOL = 1e-6
_ARGSORT_CHUNK = 8192


@dataclass(frozen=True)
class NlParams:
    patch_size: int = 5
    window_size: int = 15
    m_best: int = 10
    n_nearest: int = 4
    filtering_h: float | None = None
    kernel_sigma: float = 1.25
    h_factor: float = 0.4

    def __post_init__(self):
        if self.patch_size % 2 == 0 or self.window_size % 2 == 0:
            raise ValueError("patch and window sizes must be odd")
        if self.n_nearest not in (0, 4):
            raise ValueError("n_nearest must be 0 or 4 (axis-adjacent pixels)")


@dataclass
class NlWeightGraph:
    """Symmetric weighted graph in compressed-row form.

    Edges of pixel ``x`` occupy ``indptr[x]:indptr[x+1]`` of ``indices``
    (neighbour pixel) and ``weight``; ``rev[e]`` is the position of the
    reverse edge of ``e``.  Edge-valued fields (gradients) use the same order.
    """

    shape: tuple[int, int]
    indptr: np.ndarray
    indices: np.ndarray
    weight: np.ndarray
    rev: np.ndarray
    params: NlParams | None = None
    h: float | None = None
    sqrt_w: np.ndarray = field(init=False, repr=False)
    src: np.ndarray = field(init=False, repr=False)
    _laplacian: object = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.sqrt_w = np.sqrt(self.weight)
        self.src = np.repeat(np.arange(self.n_pixels, dtype=np.int64), np.diff(self.indptr))

    @property
    def n_pixels(self) -> int:
        return self.shape[0] * self.shape[1]

    @property
    def n_edges(self) -> int:
        return self.indices.size

    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Directed edges ``(src, dst, w)`` in row-major order."""
        return self.src, self.indices, self.weight

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def laplacian(self):
        """Sparse ``-div(grad(.))``: ``(L u)(x) = 2 * sum_y w(x,y) (u(x) - u(y))``."""
        if self._laplacian is None:
            n = self.n_pixels
            adj = csr_matrix((2.0 * self.weight, self.indices, self.indptr), shape=(n, n))
            self._laplacian = (diags(np.asarray(adj.sum(axis=1)).ravel()) - adj).tocsr()
        return self._laplacian

    def dump(self, path) -> None:
        """Write one ``x_index y_index weight`` line per directed edge."""
        with open(path, "w") as fh:
            for s, d, v in zip(self.src, self.indices, self.weight):
                fh.write(f"{s} {d} {float(v)!r}\n")

    @classmethod
    def from_edges(cls, shape, src, dst, w, params=None, h=None) -> "NlWeightGraph":
        """Build a symmetric graph from directed edges.

        Both directions of every edge are inserted; duplicates keep the
        larger weight and self loops are dropped.
        """
        n = int(shape[0] * shape[1])
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        w = np.asarray(w, dtype=np.float64)
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be nonnegative and finite")
        if src.size and (src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= n):
            raise ValueError("edge index out of range")
        s = np.concatenate((src, dst))
        d = np.concatenate((dst, src))
        ww = np.concatenate((w, w))
        keep = s != d
        s, d, ww = s[keep], d[keep], ww[keep]
        key = s * n + d
        order = np.lexsort((-ww, key))
        key = key[order]
        first = np.ones(key.size, dtype=bool)
        first[1:] = key[1:] != key[:-1]
        order = order[first]
        key = key[first]
        d, ww = d[order], ww[order]
        s = s[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(s, minlength=n), out=indptr[1:])
        rev = np.searchsorted(key, d * n + s).astype(np.int64)
        return cls((int(shape[0]), int(shape[1])), indptr, d, ww, rev, params, h)


def _patch_kernel(size: int, sigma: float) -> np.ndarray:
    r = np.arange(size) - size // 2
    g = np.exp(-(r[:, None] ** 2 + r[None, :] ** 2) / (2.0 * sigma * sigma))
    return g / g.sum()


def _smallest_columns(d2: np.ndarray, m: int) -> np.ndarray:
    out = np.empty((d2.shape[0], m), dtype=np.int64)
    for start in range(0, d2.shape[0], _ARGSORT_CHUNK):
        block = d2[start : start + _ARGSORT_CHUNK]
        out[start : start + block.shape[0]] = np.argsort(block, axis=1, kind="stable")[:, :m]
    return out


def build_weights(guide: np.ndarray, params: NlParams = NlParams()) -> NlWeightGraph:
    """Semi-local patch-similarity graph of ``guide``.

    For every pixel the ``m_best`` most similar pixels in the search window
    (ties resolved in row-major window order) and the axis-adjacent pixels are
    connected with weight ``exp(-d2 / h**2)``, where ``d2`` is the
    Gaussian-weighted squared distance of the symmetric-extended patches.
    """
    guide = check_image(guide)
    height, width = guide.shape
    if height < params.window_size or width < params.window_size:
        raise ValueError(
            f"guide {width}x{height} is smaller than the {params.window_size} search window"
        )
    hp = params.patch_size // 2
    hw = params.window_size // 2
    side = params.window_size
    kernel = _patch_kernel(params.patch_size, params.kernel_sigma)
    padded = np.pad(guide, hp, mode="reflect")
    d2 = kernels.window_patch_distances(padded, height, width, hp, hw, kernel)

    if params.filtering_h is not None:
        h = float(params.filtering_h)
    else:
        finite = d2[np.isfinite(d2)]
        h = params.h_factor * float(np.std(np.sqrt(finite)))
        if h == 0.0:
            h = 1.0

    n = height * width
    pix = np.arange(n, dtype=np.int64)
    row, col = np.divmod(pix, width)
    srcs, dsts, dist = [], [], []

    m = min(params.m_best, d2.shape[1] - 1)
    if m > 0:
        best = _smallest_columns(d2, m)
        bd = np.take_along_axis(d2, best, axis=1)
        ok = np.isfinite(bd)
        dy = best // side - hw
        dx = best % side - hw
        srcs.append(np.broadcast_to(pix[:, None], best.shape)[ok])
        dsts.append(((row[:, None] + dy) * width + col[:, None] + dx)[ok])
        dist.append(bd[ok])
    if params.n_nearest:
        for dy, dx in ((-1, 0), (0, -1), (0, 1), (1, 0)):
            c = (dy + hw) * side + (dx + hw)
            ok = np.isfinite(d2[:, c])
            srcs.append(pix[ok])
            dsts.append(pix[ok] + dy * width + dx)
            dist.append(d2[ok, c])

    src = np.concatenate(srcs)
    dst = np.concatenate(dsts)
    w = np.exp(-np.concatenate(dist) / (h * h))
    return NlWeightGraph.from_edges((height, width), src, dst, w, params=params, h=h)


def _check_dims(img, graph):
    if img.shape != graph.shape:
        raise ValueError(f"image shape {img.shape} does not match graph {graph.shape}")


def nl_grad(img: np.ndarray, graph: NlWeightGraph) -> np.ndarray:
    """``(f(y) - f(x)) * sqrt(w(x, y))`` for every stored neighbour ``y`` of ``x``."""
    img = np.asarray(img, dtype=np.float64)
    _check_dims(img, graph)
    return kernels.nl_grad(np.ascontiguousarray(img).ravel(), graph.indptr, graph.indices, graph.sqrt_w)


def nl_div(q: np.ndarray, graph: NlWeightGraph) -> np.ndarray:
    """Negative adjoint of :func:`nl_grad`."""
    q = np.ascontiguousarray(q, dtype=np.float64)
    if q.shape != (graph.n_edges,):
        raise ValueError(f"field shape {q.shape} does not match {graph.n_edges} graph edges")
    return kernels.nl_div(q, graph.indptr, graph.sqrt_w, graph.rev).reshape(graph.shape)


def nltv_norm(img: np.ndarray, graph: NlWeightGraph) -> float:
    gq = nl_grad(img, graph)
    return float(np.sum(np.sqrt(_group_sq(gq, graph))))


def _group_sq(q, graph):
    return np.bincount(graph.src, weights=q * q, minlength=graph.n_pixels)


def nltv_objective(f, g, weight, graph) -> float:
    return 0.5 * float(np.sum((f - g) ** 2)) + weight * nltv_norm(f, graph)


@dataclass
class NlProxResult:
    image: np.ndarray
    iterations: int
    residual: float


def default_rho(weight: float) -> float:
    """Split-Bregman penalty used when none is given."""
    return 10.0 * weight


def nltv_prox_full(
    g: np.ndarray,
    weight: float,
    graph: NlWeightGraph,
    inner: ProxConfig = ProxConfig(),
    rho: float | None = None,
    init: np.ndarray | None = None,
    tol: float | None = None,
) -> NlProxResult:
    """Split-Bregman solve of ``0.5*||f - g||^2 + weight*NLTV(f)``.

    ``init`` warm-starts the primal iterate and the linear solves.
    """
    if not weight > 0:
        raise ValueError(f"prox weight must be positive, got {weight}")
    g = np.asarray(g, dtype=np.float64)
    _check_dims(g, graph)
    tol = inner.tol if tol is None else tol
    rho = default_rho(weight) if rho is None else float(rho)
    n = graph.n_pixels
    indptr, indices, sw, rev = graph.indptr, graph.indices, graph.sqrt_w, graph.rev
    shrink = weight / rho
    system = identity(n, format="csr") + rho * graph.laplacian()
    jacobi = 1.0 / system.diagonal()
    precond = LinearOperator((n, n), matvec=lambda v: jacobi * v, dtype=np.float64)

    gflat = np.ascontiguousarray(g).ravel()
    f = gflat.copy() if init is None else np.asarray(init, dtype=np.float64).ravel().copy()
    d = np.zeros(graph.n_edges)
    b = np.zeros_like(d)
    res = np.inf
    it = 0
    while it < inner.max_iters:
        it += 1
        rhs = gflat - rho * kernels.nl_div(d - b, indptr, sw, rev)
        f_new, _ = cg(system, rhs, x0=f, rtol=CG_RTOL, atol=0.0, maxiter=500, M=precond)
        v = kernels.nl_grad(f_new, indptr, indices, sw) + b
        mag = np.sqrt(_group_sq(v, graph))
        scale = np.zeros_like(mag)
        live = mag > shrink
        scale[live] = (mag[live] - shrink) / mag[live]
        d = v * scale[graph.src]
        b = v - d
        step = float(np.linalg.norm(f_new - f))
        fn = float(np.linalg.norm(f))
        res = step / fn if fn > 0 else step
        f = f_new
        if res < tol:
            break
    return NlProxResult(f.reshape(graph.shape), it, res)


def nltv_prox(g, weight, graph, inner: ProxConfig = ProxConfig()) -> np.ndarray:
    """Approximate proximity operator of ``weight * NLTV``."""
    return nltv_prox_full(g, weight, graph, inner).image
