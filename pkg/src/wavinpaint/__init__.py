"""Wavelet-domain inpainting: recover lost CDF 9/7 coefficients of an image
with TV or nonlocal TV regularization."""

from ._backend import kernels
from .coeff_domain import (
    CoeffMask,
    MaskError,
    ObservedData,
    choose_f0,
    degrade,
    interpolate_ll,
    load_observed,
    make_random_loss_mask,
    make_subband_loss_mask,
    project_known,
    project_missing,
    save_observed,
)
from .dwt import WaveletPyramid, forward_dwt, inverse_dwt
from .image_core import ImageError, builtin_image, load_image, psnr, save_image
from .nltv_reg import NlParams, NlWeightGraph, build_weights, nl_div, nl_grad, nltv_prox
from .presets import BenchmarkPreset, load_preset, preset_names
from .solvers import SolverConfig, SolverError, SolverTrace, residuals, solve_algorithm1, solve_bos
from .tv_reg import ProxConfig, div, grad, tv_prox

__version__ = "0.1.0"

__all__ = [
    "BenchmarkPreset",
    "CoeffMask",
    "ImageError",
    "MaskError",
    "NlParams",
    "NlWeightGraph",
    "ObservedData",
    "ProxConfig",
    "SolverConfig",
    "SolverError",
    "SolverTrace",
    "WaveletPyramid",
    "build_weights",
    "builtin_image",
    "choose_f0",
    "degrade",
    "div",
    "forward_dwt",
    "grad",
    "interpolate_ll",
    "inverse_dwt",
    "kernels",
    "load_image",
    "load_observed",
    "load_preset",
    "make_random_loss_mask",
    "make_subband_loss_mask",
    "nl_div",
    "nl_grad",
    "nltv_prox",
    "preset_names",
    "project_known",
    "project_missing",
    "psnr",
    "residuals",
    "save_image",
    "save_observed",
    "solve_algorithm1",
    "solve_bos",
    "tv_prox",
]
