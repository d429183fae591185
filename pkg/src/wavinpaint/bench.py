"""Run benchmark presets and emit CSV traces, a summary table and SVG plots."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coeff_domain import ObservedData
from .image_core import load_image, psnr, save_image, to_uint8
from .nltv_reg import NlWeightGraph
from .presets import BenchmarkPreset
from .solvers import SOLVERS, SolverTrace, build_graph, write_trace_rows


def quantize(img: np.ndarray) -> np.ndarray:
    """The image exactly as it reads back after :func:`save_image`."""
    return to_uint8(img) / 255.0


def scored_psnr(reference: np.ndarray, restored: np.ndarray) -> float:
    return psnr(reference, quantize(restored))


@dataclass
class MethodResult:
    method: str
    image: np.ndarray
    trace: SolverTrace
    psnr_db: float
    seconds: float

    @property
    def iterations(self) -> int:
        return len(self.trace)


@dataclass
class BenchResult:
    preset: BenchmarkPreset
    reference: np.ndarray
    observed: ObservedData
    results: dict[str, MethodResult] = field(default_factory=dict)
    graph_seconds: float = 0.0

    @property
    def received_psnr(self) -> float:
        return scored_psnr(self.reference, self.observed.received)

    @property
    def interpolated_psnr(self) -> float:
        return scored_psnr(self.reference, self.observed.f0)


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("WIM_THREADS", "1")))
    except ValueError:
        return 1


def run_method(name, spec, observed, reference, graph) -> MethodResult:
    solver = SOLVERS[spec.solver]
    cfg = spec.solver_config(observed.noise_sigma)
    t0 = time.perf_counter()
    out, trace = solver(observed, cfg, graph=graph, reference=reference)
    seconds = time.perf_counter() - t0
    return MethodResult(name, out, trace, scored_psnr(reference, out), seconds)


def run_preset(
    preset: BenchmarkPreset,
    image: np.ndarray | None = None,
    methods: list[str] | None = None,
    workers: int | None = None,
    out_dir: str | None = None,
) -> BenchResult:
    """Degrade the preset image and run the selected methods on it.

    The NL-TV weight graph is built once (see :func:`~wavinpaint.solvers.nl_guide`)
    and shared by the NL-TV methods.  When
    ``out_dir`` is given the restored images are written there and the
    reported PSNR is recomputed from the files.
    """
    reference = preset.load_image() if image is None else image
    observed = preset.scenario.observe(reference, preset.levels)
    names = list(preset.methods) if methods is None else list(methods)
    for n in names:
        if n not in preset.methods:
            raise KeyError(f"preset {preset.name} has no method {n!r}")

    graph: NlWeightGraph | None = None
    t0 = time.perf_counter()
    if any(preset.methods[n].regularizer == "nltv" for n in names):
        graph = build_graph(observed, preset.nl(), preset.nl_guide)
    bench = BenchResult(preset, reference, observed, graph_seconds=time.perf_counter() - t0)

    jobs = [(n, preset.methods[n]) for n in names]
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_method, n, s, observed, reference, graph) for n, s in jobs]
            done = [f.result() for f in futures]
    else:
        done = [run_method(n, s, observed, reference, graph) for n, s in jobs]
    for res in done:
        bench.results[res.method] = res

    if out_dir is not None:
        write_outputs(bench, out_dir)
    return bench


def write_outputs(bench: BenchResult, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    name = bench.preset.name
    save_image(bench.observed.received, os.path.join(out_dir, f"{name}_received.pgm"))
    if not bench.observed.mask.ll_known.all():
        save_image(bench.observed.f0, os.path.join(out_dir, f"{name}_interpolated.pgm"))
    for method, res in bench.results.items():
        path = os.path.join(out_dir, f"{name}_{method}.pgm")
        save_image(res.image, path)
        res.psnr_db = psnr(bench.reference, load_image(path))
    write_combined_csv(bench, os.path.join(out_dir, f"{name}_trace.csv"))
    with open(os.path.join(out_dir, f"{name}_summary.txt"), "w") as fh:
        fh.write(summary_table(bench) + "\n")


def write_combined_csv(bench: BenchResult, path: str) -> None:
    with open(path, "w", newline="") as fh:
        write_trace_rows(fh, [({"method": m}, r.trace) for m, r in bench.results.items()])


def _fmt_db(v) -> str:
    if v is None:
        return "-"
    if math.isinf(v):
        return "inf"
    return f"{v:.2f}"


def summary_table(bench: BenchResult) -> str:
    """Plain-text table: method, PSNR, iterations, time, reported PSNR."""
    rep = bench.preset.reported_psnr_db
    lines = [
        f"preset {bench.preset.name}: {bench.preset.note}".rstrip(": "),
        f"{'method':<14}{'PSNR(dB)':>10}{'iter':>6}{'time(s)':>10}{'reported':>10}",
    ]
    lines.append(
        f"{'received':<14}{_fmt_db(bench.received_psnr):>10}{'':>6}{'':>10}"
        f"{_fmt_db(rep.get('received')):>10}"
    )
    if not bench.observed.mask.ll_known.all():
        lines.append(
            f"{'interpolated':<14}{_fmt_db(bench.interpolated_psnr):>10}{'':>6}{'':>10}"
            f"{_fmt_db(rep.get('interpolated')):>10}"
        )
    for method, res in bench.results.items():
        lines.append(
            f"{method:<14}{_fmt_db(res.psnr_db):>10}{res.iterations:>6}"
            f"{res.seconds:>10.2f}{_fmt_db(rep.get(method)):>10}"
        )
    return "\n".join(lines)


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def svg_plot(series: dict[str, tuple[np.ndarray, np.ndarray]], title: str = "",
             xlabel: str = "time (s)", ylabel: str = "PSNR (dB)") -> str:
    """Minimal SVG line chart; ``series`` maps a label to ``(x, y)`` arrays."""
    width, height, pad = 640, 420, 60
    xs = [v for x, _ in series.values() for v in np.asarray(x, float) if np.isfinite(v)]
    ys = [v for _, y in series.values() for v in np.asarray(y, float) if np.isfinite(v)]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y0, y1 = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    x0 = min(x0, 0.0)

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def py(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2}" y="{pad / 2}" text-anchor="middle">{title}</text>',
        f'<text x="{width / 2}" y="{height - 15}" text-anchor="middle">{xlabel}</text>',
        f'<text x="15" y="{height / 2}" transform="rotate(-90 15 {height / 2})" '
        f'text-anchor="middle">{ylabel}</text>',
    ]
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{px(xv):.1f}" y="{height - pad + 16}" text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<text x="{pad - 6}" y="{py(yv) + 4:.1f}" text-anchor="end">{yv:.2f}</text>')
    for i, (label, (x, y)) in enumerate(series.items()):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(
            f"{px(a):.1f},{py(b):.1f}"
            for a, b in zip(np.asarray(x, float), np.asarray(y, float))
            if np.isfinite(a) and np.isfinite(b)
        )
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        ly = pad + 16 * i + 10
        out.append(f'<line x1="{width - pad - 110}" y1="{ly}" x2="{width - pad - 90}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{width - pad - 85}" y="{ly + 4}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out)


def write_plot(bench: BenchResult, path: str) -> None:
    series = {
        m: (r.trace.column("elapsed_s"), r.trace.column("psnr_db"))
        for m, r in bench.results.items()
    }
    with open(path, "w") as fh:
        fh.write(svg_plot(series, title=f"PSNR vs time: {bench.preset.name}"))
