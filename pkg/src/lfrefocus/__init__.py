"""Light field refocusing toolkit.

Refocus 4-D light fields into focal stacks by shift-and-sum or by Fourier
slicing, score stack pairs with PSNR/SSIM aggregates, and benchmark the two
methods' complexity trade-off. Estimators follow the scikit-learn protocol
(``get_params``/``fit``/``transform``); everything else is plain functions
over numpy arrays and the small immutable types in :mod:`lfrefocus.types`.
"""
from .container import (
    BadMagicError,
    ContainerError,
    DimensionOverflowError,
    TruncatedPayloadError,
    load_focal_stack,
    load_light_field,
    save_focal_stack,
    save_light_field,
)
from .fourier import FourierRefocuser, LFSpectrum, fft4, fourier_slice, refocus_fourier
from .ingest import center_crop, crop_window, import_view_grid, random_patch
from .metrics import (
    LossParams,
    QualityReport,
    SsimParams,
    mae,
    mse,
    psi1,
    psi2,
    psnr,
    ssim,
    stack_loss_components,
    stack_report,
    total_loss,
)
from .shift_sum import ShiftSumRefocuser, focal_stack_shift_sum, shift_and_sum
from .types import DEFAULT_ALPHAS, FocalStack, LightField, PatchRecord, default_alphas
from .validation import check_alphas, check_light_field

__version__ = "0.1.0"

__all__ = [
    "BadMagicError",
    "ContainerError",
    "DEFAULT_ALPHAS",
    "DimensionOverflowError",
    "FocalStack",
    "FourierRefocuser",
    "LFSpectrum",
    "LightField",
    "LossParams",
    "PatchRecord",
    "QualityReport",
    "ShiftSumRefocuser",
    "SsimParams",
    "TruncatedPayloadError",
    "center_crop",
    "check_alphas",
    "check_light_field",
    "crop_window",
    "default_alphas",
    "fft4",
    "focal_stack_shift_sum",
    "fourier_slice",
    "import_view_grid",
    "load_focal_stack",
    "load_light_field",
    "mae",
    "mse",
    "psi1",
    "psi2",
    "psnr",
    "random_patch",
    "refocus_fourier",
    "save_focal_stack",
    "save_light_field",
    "shift_and_sum",
    "ssim",
    "stack_loss_components",
    "stack_report",
    "total_loss",
]
