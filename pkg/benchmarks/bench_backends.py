"""Time the compiled and numpy kernel backends on the same inputs.

Usage::

    python benchmarks/bench_backends.py [--size 256] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from wavinpaint._backend import BACKENDS
from wavinpaint.image_core import builtin_image
from wavinpaint.nltv_reg import NlParams, _patch_kernel, build_weights
from wavinpaint.tv_reg import CHAMBOLLE_STEP


def cases(img, graph):
    params = NlParams()
    hp, hw = params.patch_size // 2, params.window_size // 2
    padded = np.pad(img, hp, mode="reflect")
    kernel = _patch_kernel(params.patch_size, params.kernel_sigma)
    u = img.ravel()
    q = np.random.default_rng(0).standard_normal(graph.n_edges)
    p0 = np.zeros((2,) + img.shape)
    return {
        "grad+div": lambda k: k.div(k.grad(img)),
        "tv_dual_prox(50)": lambda k: k.tv_dual_prox(img, 0.1, CHAMBOLLE_STEP, 0.0, 50, p0.copy()),
        "nl_grad": lambda k: k.nl_grad(u, graph.indptr, graph.indices, graph.sqrt_w),
        "nl_div": lambda k: k.nl_div(q, graph.indptr, graph.sqrt_w, graph.rev),
        "patch_distances": lambda k: k.window_patch_distances(
            padded, img.shape[0], img.shape[1], hp, hw, kernel
        ),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=256, choices=(128, 256))
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    img = builtin_image("barbara" if args.size == 256 else "barbara128")
    graph = build_weights(img)
    names = sorted(BACKENDS)
    print(f"{args.size}x{args.size} image, {graph.n_edges} graph edges, best of {args.repeat}")
    print(f"{'kernel':<20}" + "".join(f"{n + ' (ms)':>16}" for n in names) + f"{'speed-up':>10}")
    for label, fn in cases(img, graph).items():
        times = {}
        for n in names:
            k = BACKENDS[n]
            number = 1 if label == "patch_distances" else 5
            t = min(timeit.repeat(lambda: fn(k), number=number, repeat=args.repeat)) / number
            times[n] = t * 1e3
        row = f"{label:<20}" + "".join(f"{times[n]:>16.2f}" for n in names)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
