"""Pure numpy versions of the hot loops.

Every function here has a twin with the same signature in ``_ckernels.pyx``.
"""

import numpy as np

NAME = "python"


def grad(u):
    out = np.zeros((2,) + u.shape)
    out[0, :, :-1] = u[:, 1:] - u[:, :-1]
    out[1, :-1, :] = u[1:, :] - u[:-1, :]
    return out


def div(p):
    px, py = p[0], p[1]
    out = np.zeros(px.shape)
    out[:, :-1] += px[:, :-1]
    out[:, 1:] -= px[:, :-1]
    out[:-1, :] += py[:-1, :]
    out[1:, :] -= py[:-1, :]
    return out


def tv_dual_prox(g, weight, tau, tol, max_iters, p):
    """Projected fixed-point iterations on the ROF dual; updates ``p`` in place.

    Returns ``(f, iterations, last_residual)`` with ``f = g - weight*div(p)``.
    """
    scaled = g / weight
    res = np.inf
    it = 0
    while it < max_iters:
        it += 1
        gv = grad(div(p) - scaled)
        norm = np.sqrt(gv[0] ** 2 + gv[1] ** 2)
        new = (p + tau * gv) / (1.0 + tau * norm)
        res = float(np.max(np.abs(new - p)))
        p[...] = new
        if res < tol:
            break
    return g - weight * div(p), it, res


def nl_grad(u, indptr, indices, sw):
    src = np.repeat(np.arange(indptr.size - 1), np.diff(indptr))
    return (u[indices] - u[src]) * sw


def nl_div(q, indptr, sw, rev):
    src = np.repeat(np.arange(indptr.size - 1), np.diff(indptr))
    return np.bincount(src, weights=sw * (q - q[rev]), minlength=indptr.size - 1)


def window_patch_distances(padded, height, width, half_patch, half_window, kernel):
    """Weighted squared patch distances to every candidate in the search window.

    ``padded`` is the guide extended by ``half_patch`` on every side.  Column
    ``c`` of the result corresponds to the offset ``(c // s - hw, c % s - hw)``
    with ``s = 2*hw + 1``; candidates outside the image and the pixel itself
    get ``inf``.
    """
    hp, hw = half_patch, half_window
    side = 2 * hw + 1
    n = height * width
    out = np.full((n, side * side), np.inf)
    ii, jj = np.mgrid[0:height, 0:width]
    for c in range(side * side):
        dy, dx = c // side - hw, c % side - hw
        if dy == 0 and dx == 0:
            continue
        # rows/cols of x for which y = x + (dy, dx) stays inside the image
        r0, r1 = max(0, -dy), min(height, height - dy)
        c0, c1 = max(0, -dx), min(width, width - dx)
        if r0 >= r1 or c0 >= c1:
            continue
        acc = np.zeros((r1 - r0, c1 - c0))
        for a in range(2 * hp + 1):
            for b in range(2 * hp + 1):
                k = kernel[a, b]
                xa = padded[r0 + a : r1 + a, c0 + b : c1 + b]
                ya = padded[r0 + dy + a : r1 + dy + a, c0 + dx + b : c1 + dx + b]
                acc += k * (xa - ya) ** 2
        idx = (ii[r0:r1, c0:c1] * width + jj[r0:r1, c0:c1]).ravel()
        out[idx, c] = acc.ravel()
    return out
