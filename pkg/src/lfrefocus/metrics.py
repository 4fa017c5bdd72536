"""Image and focal-stack quality metrics plus the composite training loss.

PSNR and SSIM operate on float images in [0, 1] (peak value 1.0). The stack
aggregates MSSIM/MPSNR are plain arithmetic means of the per-alpha columns.
The training loss combines an appearance term (SSIM blended with mean
absolute error), an inverse-PSNR term, and MSE:

    psi1 = beta * (1 - SSIM) / 2 + (1 - beta) * MAE
    psi2 = 1 / PSNR
    L    = MSE + psi1 + gamma * psi2

PSNR is capped (default 100 dB) so psi2 and L stay total functions; identical
images therefore cost gamma / cap (5.0 at the defaults), a documented floor.
All operations are pure and symmetric in their two images.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate1d

from .types import FocalStack
from .validation import check_image_pair, check_stack_pair

__all__ = [
    "LossParams",
    "QualityReport",
    "SsimParams",
    "mae",
    "mse",
    "psi1",
    "psi2",
    "psnr",
    "ssim",
    "stack_loss_components",
    "stack_report",
    "total_loss",
]

PSNR_CAP_DB = 100.0

# Keeps psi2 finite on the (degenerate) zero-PSNR pair; see module docstring.
_PSNR_FLOOR_DB = 1e-6


@dataclass(frozen=True)
class SsimParams:
    """SSIM configuration: 11x11 Gaussian window, sigma 1.5, k1/k2 stabilizers."""

    side: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    peak: float = 1.0

    def __post_init__(self) -> None:
        if self.side < 1 or self.side % 2 == 0:
            raise ValueError(f"window side must be odd and >= 1, got {self.side}")
        if self.sigma <= 0 or self.peak <= 0:
            raise ValueError("sigma and peak must be > 0")

    def window(self) -> np.ndarray:
        """1-D Gaussian whose separable 2-D product sums to exactly 1."""
        x = np.arange(self.side, dtype=np.float64) - (self.side - 1) / 2.0
        w = np.exp(-(x**2) / (2.0 * self.sigma**2))
        return w / w.sum()

    @property
    def c1(self) -> float:
        return (self.k1 * self.peak) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.peak) ** 2


@dataclass(frozen=True)
class LossParams:
    """Loss weights: SSIM/L1 blend ``beta``, inverse-PSNR weight ``gamma``."""

    beta: float = 0.65
    gamma: float = 500.0
    psnr_cap: float = PSNR_CAP_DB

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.psnr_cap <= 0:
            raise ValueError(f"psnr cap must be > 0, got {self.psnr_cap}")


def mse(a, b) -> float:
    """Mean squared error over all pixels and channels."""
    a, b = check_image_pair(a, b)
    return float(np.mean((a - b) ** 2))


def mae(a, b) -> float:
    """Mean absolute error over all pixels and channels."""
    a, b = check_image_pair(a, b)
    return float(np.mean(np.abs(a - b)))


def psnr(a, b, peak: float = 1.0, cap: float = PSNR_CAP_DB) -> float:
    """Peak signal-to-noise ratio in dB, capped at ``cap`` when MSE underflows."""
    err = mse(a, b)
    floor = peak**2 * 10.0 ** (-cap / 10.0)
    if err <= floor:
        return float(cap)
    return float(10.0 * np.log10(peak**2 / err))


def _filter_valid(img: np.ndarray, window: np.ndarray) -> np.ndarray:
    """Separable windowed filtering, cropped to fully-covered positions."""
    r = (window.size - 1) // 2
    out = correlate1d(img, window, axis=0, mode="constant")
    out = correlate1d(out, window, axis=1, mode="constant")
    return out[r : img.shape[0] - r, r : img.shape[1] - r]


def ssim(a, b, params: SsimParams | None = None) -> float:
    """Mean local structural similarity over valid window positions.

    The local index is computed per channel with Gaussian-weighted moments
    (no padding: only positions where the window fits contribute) and the
    per-channel maps are averaged. Result lies in [-1, 1]; 1.0 iff a == b.
    """
    params = params or SsimParams()
    a, b = check_image_pair(a, b)
    if a.shape[0] < params.side or a.shape[1] < params.side:
        raise ValueError(
            f"images of dims {a.shape[:2]} are smaller than the "
            f"{params.side}x{params.side} window"
        )
    w = params.window()
    c1, c2 = params.c1, params.c2
    values = []
    for ch in range(a.shape[2]):
        x, y = a[:, :, ch], b[:, :, ch]
        mu_x = _filter_valid(x, w)
        mu_y = _filter_valid(y, w)
        var_x = _filter_valid(x * x, w) - mu_x**2
        var_y = _filter_valid(y * y, w) - mu_y**2
        cov = _filter_valid(x * y, w) - mu_x * mu_y
        num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
        den = (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
        values.append(np.mean(num / den))
    return float(np.mean(values))


def psi1(a, b, params: LossParams | None = None,
         ssim_params: SsimParams | None = None) -> float:
    """Appearance term: beta-weighted SSIM distance blended with the L1 mean."""
    params = params or LossParams()
    return float(
        params.beta * (1.0 - ssim(a, b, ssim_params)) / 2.0
        + (1.0 - params.beta) * mae(a, b)
    )


def psi2(a, b, params: LossParams | None = None) -> float:
    """Inverse capped PSNR; positive and finite for all inputs."""
    params = params or LossParams()
    db = max(psnr(a, b, cap=params.psnr_cap), _PSNR_FLOOR_DB)
    return float(1.0 / db)


def total_loss(a, b, params: LossParams | None = None,
               ssim_params: SsimParams | None = None) -> float:
    """Composite loss MSE + psi1 + gamma * psi2; floor is gamma / psnr_cap."""
    params = params or LossParams()
    return float(
        mse(a, b) + psi1(a, b, params, ssim_params) + params.gamma * psi2(a, b, params)
    )


@dataclass(frozen=True)
class QualityReport:
    """Per-alpha PSNR/SSIM for a stack pair plus their arithmetic means."""

    alphas: tuple[float, ...]
    psnr_db: tuple[float, ...]
    ssim: tuple[float, ...]
    mpsnr: float = field(init=False)
    mssim: float = field(init=False)

    def __post_init__(self) -> None:
        if not (len(self.alphas) == len(self.psnr_db) == len(self.ssim)):
            raise ValueError("report columns must have equal length")
        if not self.alphas:
            raise ValueError("report needs at least one entry")
        object.__setattr__(self, "mpsnr", float(np.mean(self.psnr_db)))
        object.__setattr__(self, "mssim", float(np.mean(self.ssim)))

    def to_csv(self) -> str:
        """Stable CSV rendering: 9 significant digits, trailing aggregate row."""
        buf = io.StringIO()
        buf.write("# lfref-quality-v1\n")
        buf.write("alpha,psnr_db,ssim\n")
        for a, p, s in zip(self.alphas, self.psnr_db, self.ssim):
            buf.write(f"{a:.9g},{p:.9g},{s:.9g}\n")
        buf.write(f"mean,{self.mpsnr:.9g},{self.mssim:.9g}\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())


def stack_report(pred: FocalStack, truth: FocalStack,
                 ssim_params: SsimParams | None = None,
                 peak: float = 1.0, cap: float = PSNR_CAP_DB) -> QualityReport:
    """Compare two aligned focal stacks image by image."""
    check_stack_pair(pred, truth)
    psnrs = []
    ssims = []
    for i in range(len(pred)):
        psnrs.append(psnr(pred.images[i], truth.images[i], peak=peak, cap=cap))
        ssims.append(ssim(pred.images[i], truth.images[i], ssim_params))
    return QualityReport(
        alphas=tuple(float(a) for a in pred.alphas),
        psnr_db=tuple(psnrs),
        ssim=tuple(ssims),
    )


def stack_loss_components(pred: FocalStack, truth: FocalStack,
                          params: LossParams | None = None,
                          ssim_params: SsimParams | None = None) -> dict[str, float]:
    """Loss terms averaged over the aligned image pairs of two stacks.

    Returns mse, psi1, gamma_psi2 and their sum; the same decomposition a
    trainer reports per batch, so cross-component consistency can be checked
    on exported files.
    """
    params = params or LossParams()
    check_stack_pair(pred, truth)
    n = len(pred)
    parts = {"mse": 0.0, "psi1": 0.0, "gamma_psi2": 0.0}
    for i in range(n):
        a, b = pred.images[i], truth.images[i]
        parts["mse"] += mse(a, b) / n
        parts["psi1"] += psi1(a, b, params, ssim_params) / n
        parts["gamma_psi2"] += params.gamma * psi2(a, b, params) / n
    parts["total"] = parts["mse"] + parts["psi1"] + parts["gamma_psi2"]
    return parts
