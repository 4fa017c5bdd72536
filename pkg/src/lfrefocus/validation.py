"""Input validation helpers shared by the functional API and the estimators."""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .types import FocalStack, LightField, default_alphas

__all__ = [
    "check_alpha",
    "check_alphas",
    "check_image",
    "check_image_pair",
    "check_light_field",
    "check_stack_pair",
]


def check_light_field(X) -> LightField:
    """Coerce ``X`` to a LightField.

    Accepts a LightField or any 5-D array-like laid out (u, v, s, t, c).
    """
    if isinstance(X, LightField):
        return X
    return LightField(np.asarray(X))


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not np.isfinite(alpha) or alpha <= 0:
        raise ValueError(f"refocusing parameter must be finite and > 0, got {alpha}")
    return alpha


def check_alphas(alphas: Iterable[float] | None) -> np.ndarray:
    """Validate a refocusing parameter set: 1-D, positive, strictly increasing.

    ``None`` selects the default 16-value grid 0.125 .. 2.0.
    """
    if alphas is None:
        return default_alphas()
    arr = np.asarray(list(alphas) if np.ndim(alphas) == 0 else alphas, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("alphas must be a non-empty 1-D sequence")
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError("all alphas must be finite and > 0")
    if np.any(np.diff(arr) <= 0):
        raise ValueError("alphas must be strictly increasing")
    return arr


def check_image(a, name: str = "image") -> np.ndarray:
    """Coerce to a float64 (S, T, C) image; a 2-D array gains a channel axis."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ValueError(f"{name} needs (rows, cols) or (rows, cols, channels) axes")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite samples")
    return arr


def check_image_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = check_image(a, "first image")
    b = check_image(b, "second image")
    if a.shape != b.shape:
        raise ValueError(f"image dims differ: {a.shape} vs {b.shape}")
    return a, b


def check_stack_pair(pred: FocalStack, truth: FocalStack) -> None:
    """Require two focal stacks to be comparable: same alphas, same image dims."""
    if not isinstance(pred, FocalStack) or not isinstance(truth, FocalStack):
        raise TypeError("stack comparison needs two FocalStack inputs")
    if len(pred) != len(truth) or not np.array_equal(pred.alphas, truth.alphas):
        raise ValueError(
            f"stacks are not alpha-aligned: {pred.alphas} vs {truth.alphas}"
        )
    if pred.images.shape != truth.images.shape:
        raise ValueError(
            f"stack image dims differ: {pred.images.shape} vs {truth.images.shape}"
        )


def parse_dims(spec: str | Sequence[int], n: int) -> tuple[int, ...]:
    """Parse an ``UxVxSxT[xC]``-style dimension spec into a tuple of ints."""
    if isinstance(spec, str):
        parts = [p for p in spec.lower().replace("×", "x").split("x") if p]
        dims = tuple(int(p) for p in parts)
    else:
        dims = tuple(int(p) for p in spec)
    if len(dims) != n:
        raise ValueError(f"expected {n} dimensions, got {dims}")
    if any(d < 1 for d in dims):
        raise ValueError(f"dimensions must be >= 1, got {dims}")
    return dims
