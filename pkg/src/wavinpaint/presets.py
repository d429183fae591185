"""Benchmark scenarios shipped with the package.

A preset fixes the test image, the degradation (mask type, kept fraction,
noise level, seeds) and one solver configuration per method.  Presets are
stored as JSON under ``wavinpaint/presets``; ``reported_psnr_db`` holds
previously published values for comparison, keyed like ``methods`` plus
``received``/``interpolated``.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np

from .coeff_domain import (
    CoeffMask,
    ObservedData,
    degrade,
    level_for_size,
    make_random_loss_mask,
    make_subband_loss_mask,
)
from .image_core import BUILTIN_IMAGES, builtin_image, load_image
from .nltv_reg import NlParams
from .solvers import SolverConfig
from .tv_reg import ProxConfig


IMAGE_DIR_ENV = "WAVINPAINT_IMAGES"


class PresetError(ValueError):
    pass


@dataclass
class Scenario:
    mask: str = "subband"  # "subband" or "random"
    subband: str = "HL"
    level_size: int = 32
    keep_fraction: float = 1.0
    keep_ll: bool = False
    sigma: float = 0.0
    seed: int = 0
    noise_seed: int = 1

    def build_mask(self, levels: int, shape) -> CoeffMask:
        if self.mask == "subband":
            level = level_for_size(shape, self.level_size)
            return make_subband_loss_mask(levels, shape, (self.subband, level))
        if self.mask == "random":
            return make_random_loss_mask(levels, shape, self.keep_fraction, self.keep_ll, self.seed)
        raise PresetError(f"unknown mask type {self.mask!r}")

    def observe(self, image: np.ndarray, levels: int) -> ObservedData:
        mask = self.build_mask(levels, image.shape)
        return degrade(image, mask, self.sigma, self.noise_seed)


@dataclass
class MethodSpec:
    solver: str
    config: dict = field(default_factory=dict)

    def solver_config(self, sigma: float = 0.0) -> SolverConfig:
        cfg = dict(self.config)
        prox = cfg.pop("prox", None)
        if prox is not None:
            cfg["prox"] = ProxConfig(**prox)
        cfg.setdefault("noise_sigma", sigma)
        return SolverConfig(**cfg)

    @property
    def regularizer(self) -> str:
        return self.config.get("regularizer", "tv")


@dataclass
class BenchmarkPreset:
    name: str
    image: str
    scenario: Scenario
    methods: dict[str, MethodSpec]
    levels: int = 4
    nl_params: dict = field(default_factory=dict)
    nl_guide: str = "tv"
    reported_psnr_db: dict[str, float] = field(default_factory=dict)
    tolerance_db: float = 0.7
    note: str = ""

    def load_image(self, image_dir: str | None = None) -> np.ndarray:
        """Resolve ``image`` against ``image_dir`` (or ``$WAVINPAINT_IMAGES``),
        then the bundled images, then as a plain path."""
        image_dir = image_dir or os.environ.get(IMAGE_DIR_ENV)
        if image_dir:
            for ext in (".pgm", ".png"):
                cand = os.path.join(image_dir, self.image + ext)
                if os.path.isfile(cand):
                    return load_image(cand)
        if self.image in BUILTIN_IMAGES:
            return builtin_image(self.image)
        if not os.path.isfile(self.image):
            raise PresetError(
                f"preset {self.name}: image {self.image!r} is not bundled; "
                f"pass it explicitly or put {self.image}.pgm in ${IMAGE_DIR_ENV}"
            )
        return load_image(self.image)

    def nl(self) -> NlParams:
        return NlParams(**self.nl_params)

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "BenchmarkPreset":
        d = dict(d)
        try:
            d["scenario"] = Scenario(**d["scenario"])
            d["methods"] = {k: MethodSpec(**v) for k, v in d["methods"].items()}
            return cls(**d)
        except (KeyError, TypeError) as exc:
            raise PresetError(f"malformed preset: {exc}") from exc


def preset_names() -> list[str]:
    root = resources.files("wavinpaint") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_preset(name_or_path: str) -> BenchmarkPreset:
    """Load a bundled preset by name or a preset JSON file by path."""
    if os.path.isfile(name_or_path):
        with open(name_or_path) as fh:
            return BenchmarkPreset.from_dict(json.load(fh))
    ref = resources.files("wavinpaint") / "presets" / f"{name_or_path}.json"
    if not ref.is_file():
        raise PresetError(
            f"unknown preset {name_or_path!r}; available: {', '.join(preset_names())}"
        )
    return BenchmarkPreset.from_dict(json.loads(ref.read_text()))
