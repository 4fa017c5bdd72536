"""Shift-and-sum synthetic-aperture refocusing.

Each sub-aperture view is translated proportionally to its angular offset from
the grid center and the views are averaged:

    E(s, t, c) = mean over (u, v) of  V[u, v](s - d*(u - uc), t - d*(v - vc), c)

with ``d = kappa * (1 - 1/alpha)`` pixels per angular step and the center at
``(uc, vc) = ((U-1)/2, (V-1)/2)``, so a 7x7 grid centers on view (3, 3) and
``alpha = 1`` is the exact zero-shift plane. A scene point whose position
moves by ``delta`` pixels per view step comes into focus at
``alpha = 1 / (1 + delta / kappa)``.

Fractional translations are sampled with bilinear interpolation. Cost per
image is Theta(U*V*S*T*C).
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .types import FocalStack, LightField
from .validation import check_alpha, check_alphas, check_light_field

__all__ = ["ShiftSumRefocuser", "focal_stack_shift_sum", "shift_and_sum"]

BOUNDARY_MODES = ("clamp-edge", "zero-renorm")


def _axis_taps(n: int, offset: float):
    """Index/weight pairs for sampling ``x + offset`` on a length-``n`` axis.

    Returns ``[(indices, weight, valid), ...]`` with one entry per bilinear
    tap; integer offsets collapse to a single tap so on-grid shifts stay
    exact. ``valid`` is the in-range mask used by the zero-renorm boundary
    (indices are always clamped so they are safe to gather either way).
    """
    base = np.arange(n, dtype=np.int64)
    lo = int(np.floor(offset))
    frac = offset - lo
    taps = []
    for step, weight in ((lo, 1.0 - frac), (lo + 1, frac)):
        if weight == 0.0:
            continue
        idx = base + step
        valid = (idx >= 0) & (idx < n)
        taps.append((np.clip(idx, 0, n - 1), weight, valid))
    return taps


def _sample_view(view: np.ndarray, dy: float, dx: float, clamp: bool):
    """Bilinearly sample ``view`` at (s + dy, t + dx) over the full grid.

    Returns (values, weight_map); under clamp-edge the weight map is None
    (total weight is 1 everywhere). Under zero-renorm, out-of-range taps
    contribute zero value and zero weight.
    """
    s, t, _ = view.shape
    row_taps = _axis_taps(s, dy)
    col_taps = _axis_taps(t, dx)

    out = None
    weights = None
    for ridx, rw, rvalid in row_taps:
        rows = view[ridx]
        rw_col = rw if clamp else rw * rvalid
        for cidx, cw, cvalid in col_taps:
            vals = rows[:, cidx]
            if clamp:
                w = rw * cw
                contrib = vals if w == 1.0 else vals * w
            else:
                w_map = np.multiply.outer(rw_col, cw * cvalid)
                contrib = vals * w_map[:, :, None]
                weights = w_map if weights is None else weights + w_map
            out = contrib if out is None else out + contrib
    return out, weights


def shift_and_sum(lf, alpha: float, kappa: float = 1.0,
                  boundary: str = "clamp-edge", kernel: str = "bilinear") -> np.ndarray:
    """Refocus a light field at one alpha; returns a float32 (S, T, C) image.

    ``boundary`` controls sampling outside the view: ``clamp-edge`` repeats
    the border pixel (output stays a convex combination of samples, so the
    [0, 1] range is preserved); ``zero-renorm`` drops out-of-range taps and
    renormalizes each pixel by the surviving weight. ``kernel`` is a hook for
    alternative interpolators; only ``bilinear`` is implemented.
    """
    lf = check_light_field(lf)
    alpha = check_alpha(alpha)
    if not np.isfinite(kappa):
        raise ValueError(f"pixels-per-view scale must be finite, got {kappa}")
    if boundary not in BOUNDARY_MODES:
        raise ValueError(f"boundary must be one of {BOUNDARY_MODES}, got {boundary!r}")
    if kernel != "bilinear":
        raise ValueError(f"unsupported interpolation kernel {kernel!r}")

    n_u, n_v, s, t, c = lf.dims
    step = kappa * (1.0 - 1.0 / alpha)
    if step == 0.0:
        # Zero shift for every view: the plain view mean, no interpolation.
        return lf.view_mean()

    uc = (n_u - 1) / 2.0
    vc = (n_v - 1) / 2.0
    clamp = boundary == "clamp-edge"
    acc = np.zeros((s, t, c), dtype=np.float64)
    wacc = np.zeros((s, t), dtype=np.float64) if not clamp else None
    for u in range(n_u):
        dy = -step * (u - uc)
        for v in range(n_v):
            dx = -step * (v - vc)
            vals, w = _sample_view(lf.samples[u, v], dy, dx, clamp)
            acc += vals
            if wacc is not None:
                wacc += w
    if clamp:
        acc /= n_u * n_v
    else:
        np.divide(acc, wacc[:, :, None], out=acc, where=wacc[:, :, None] > 0)
        acc[wacc == 0] = 0.0
    return acc.astype(np.float32)


def focal_stack_shift_sum(lf, alphas=None, kappa: float = 1.0,
                          boundary: str = "clamp-edge") -> FocalStack:
    """Refocus at every alpha in the set; images match standalone calls exactly."""
    lf = check_light_field(lf)
    alphas = check_alphas(alphas)
    images = np.stack([shift_and_sum(lf, a, kappa, boundary) for a in alphas])
    return FocalStack(alphas=alphas, images=images)


class ShiftSumRefocuser(BaseEstimator, TransformerMixin):
    """Stateless transformer turning a light field into a focal stack.

    Parameters
    ----------
    alphas : sequence of float or None
        Refocusing parameters; None selects the default 16-value grid.
    kappa : float
        Pixels of view shift per angular index step at ``1 - 1/alpha = 1``.
    boundary : str
        ``clamp-edge`` or ``zero-renorm``.
    """

    def __init__(self, alphas=None, kappa: float = 1.0, boundary: str = "clamp-edge"):
        self.alphas = alphas
        self.kappa = kappa
        self.boundary = boundary

    def fit(self, X, y=None):
        check_light_field(X)
        check_alphas(self.alphas)
        return self

    def transform(self, X) -> FocalStack:
        return focal_stack_shift_sum(X, self.alphas, self.kappa, self.boundary)
