"""Core in-memory data model: light fields, focal stacks, alpha sets, patches.

A light field is a 5-D array of radiance samples indexed ``(u, v, s, t, c)``:
two angular axes (view row/column), two spatial axes (pixel row/column) and a
color axis. Samples are float32 in [0, 1]; the range is established at the
ingestion boundary (imports clamp) and preserved by every operation here.

All types are immutable after construction and safe to share across workers.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DEFAULT_ALPHAS",
    "LightField",
    "FocalStack",
    "PatchRecord",
    "default_alphas",
]

# 16 refocusing parameters 0.125 * k, k = 1..16. All are exact binary floats.
DEFAULT_ALPHAS: tuple[float, ...] = tuple(0.125 * k for k in range(1, 17))


def default_alphas() -> np.ndarray:
    """Return the default 16-value refocusing parameter grid as float64."""
    return np.asarray(DEFAULT_ALPHAS, dtype=np.float64)


@dataclass(frozen=True)
class LightField:
    """Immutable 5-D radiance sample grid laid out ``(u, v, s, t, c)`` row-major.

    The layout keeps each sub-aperture view ``samples[u, v]`` a contiguous
    (S, T, C) slab, which favors the memory locality of shift-and-sum.
    """

    samples: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.samples, dtype=np.float32)
        if arr.ndim != 5:
            raise ValueError(f"light field needs 5 axes (u, v, s, t, c), got {arr.ndim}")
        if any(n < 1 for n in arr.shape):
            raise ValueError(f"all light field dims must be >= 1, got {arr.shape}")
        if arr.shape[4] not in (1, 3):
            raise ValueError(f"color axis must have 1 or 3 channels, got {arr.shape[4]}")
        object.__setattr__(self, "samples", arr)
        self.samples.setflags(write=False)

    @property
    def dims(self) -> tuple[int, int, int, int, int]:
        return self.samples.shape  # type: ignore[return-value]

    @property
    def n_views(self) -> int:
        return self.dims[0] * self.dims[1]

    def view(self, u: int, v: int) -> np.ndarray:
        """Return the (S, T, C) sub-aperture view at angular index (u, v)."""
        return self.samples[u, v]

    def view_mean(self) -> np.ndarray:
        """Average of all sub-aperture views, float32 (S, T, C).

        This is the zero-shift refocus plane (alpha = 1).
        """
        return np.mean(self.samples, axis=(0, 1), dtype=np.float64).astype(np.float32)


@dataclass(frozen=True)
class FocalStack:
    """Ordered set of refocused images, index-aligned with their alpha values."""

    alphas: np.ndarray
    images: np.ndarray  # (M, S, T, C) float32

    def __post_init__(self) -> None:
        alphas = np.asarray(self.alphas, dtype=np.float64)
        images = np.ascontiguousarray(self.images, dtype=np.float32)
        if alphas.ndim != 1 or alphas.size == 0:
            raise ValueError("alphas must be a non-empty 1-D sequence")
        if np.any(~np.isfinite(alphas)) or np.any(alphas <= 0):
            raise ValueError("alphas must be finite and > 0")
        if np.any(np.diff(alphas) <= 0):
            raise ValueError("alphas must be strictly increasing")
        if images.ndim != 4:
            raise ValueError(f"images need 4 axes (m, s, t, c), got {images.ndim}")
        if images.shape[0] != alphas.size:
            raise ValueError(
                f"stack has {images.shape[0]} images but {alphas.size} alpha values"
            )
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "images", images)
        self.alphas.setflags(write=False)
        self.images.setflags(write=False)

    def __len__(self) -> int:
        return int(self.alphas.size)

    @property
    def image_dims(self) -> tuple[int, int, int]:
        return self.images.shape[1:]  # type: ignore[return-value]

    def image(self, i: int) -> np.ndarray:
        return self.images[i]


@dataclass(frozen=True)
class PatchRecord:
    """A spatial crop of a light field, optionally with its aligned label stack.

    ``crop_origin`` is the (row, col) of the crop window in the source field;
    the label stack, when present, is cropped at the same window so pixel
    coordinates line up exactly.
    """

    lf_patch: LightField
    source_id: str
    crop_origin: tuple[int, int]
    label_stack: FocalStack | None = field(default=None)

    def __post_init__(self) -> None:
        row, col = self.crop_origin
        if row < 0 or col < 0:
            raise ValueError(f"crop origin must be non-negative, got {self.crop_origin}")
        if self.label_stack is not None:
            _, _, s, t, c = self.lf_patch.dims
            if self.label_stack.image_dims != (s, t, c):
                raise ValueError(
                    "label stack images must match the patch spatial dims: "
                    f"{self.label_stack.image_dims} vs {(s, t, c)}"
                )
