"""Dataset ingestion: view-grid import, center cropping and random patches."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .types import LightField, PatchRecord
from .validation import check_light_field

__all__ = [
    "ViewGridError",
    "center_crop",
    "crop_window",
    "draw_patch_origin",
    "import_view_grid",
    "random_patch",
]

# Peak integer value per PIL mode; pixel values are divided by this on import.
_MODE_PEAK = {"L": 255.0, "RGB": 255.0, "RGBA": 255.0, "I;16": 65535.0}


class ViewGridError(ValueError):
    """Raised when a sub-aperture view grid cannot be assembled."""


def _load_view(path: Path) -> np.ndarray:
    img = Image.open(path)
    if img.mode not in _MODE_PEAK:
        img = img.convert("RGB")
    peak = _MODE_PEAK[img.mode]
    if img.mode == "RGBA":
        img = img.convert("RGB")
    arr = np.asarray(img, dtype=np.float32) / np.float32(peak)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    # Camera pipelines commonly overshoot slightly; clamp instead of erroring.
    return np.clip(arr, 0.0, 1.0)


def import_view_grid(directory, manifest) -> LightField:
    """Assemble a light field from per-view image files.

    ``manifest`` is a JSON file holding a list of ``{"u": .., "v": .., "file": ..}``
    entries; file paths are resolved against ``directory``. The grid extent is
    inferred from the largest indices, and every (u, v) cell must be covered
    exactly once. Placement is driven by the indices, not the entry order.
    """
    directory = Path(directory)
    entries = json.loads(Path(manifest).read_text())
    if not isinstance(entries, list) or not entries:
        raise ViewGridError(f"{manifest}: manifest must be a non-empty JSON list")

    indexed: dict[tuple[int, int], Path] = {}
    for entry in entries:
        try:
            u, v, name = int(entry["u"]), int(entry["v"]), entry["file"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ViewGridError(f"{manifest}: malformed entry {entry!r}") from exc
        if u < 0 or v < 0:
            raise ViewGridError(f"unknown view index ({u}, {v}) in entry {name!r}")
        if (u, v) in indexed:
            raise ViewGridError(f"duplicate view index ({u}, {v}) in entry {name!r}")
        indexed[(u, v)] = directory / name

    n_u = max(u for u, _ in indexed) + 1
    n_v = max(v for _, v in indexed) + 1
    for u in range(n_u):
        for v in range(n_v):
            if (u, v) not in indexed:
                raise ViewGridError(f"missing view ({u}, {v}) in {n_u}x{n_v} grid")

    samples = None
    for (u, v), path in sorted(indexed.items()):
        view = _load_view(path)
        if samples is None:
            samples = np.empty((n_u, n_v) + view.shape, dtype=np.float32)
        elif view.shape != samples.shape[2:]:
            raise ViewGridError(
                f"view ({u}, {v}) from {path.name!r} has dims {view.shape}, "
                f"expected {samples.shape[2:]}"
            )
        samples[u, v] = view
    return LightField(samples)


def center_crop(lf: LightField, target: Sequence[int]) -> LightField:
    """Crop to the centered ``(U, V, S, T)`` sub-array; color axis is kept.

    Crop offsets are ``(source - target) // 2`` on every axis, so ties break
    toward the lower index (a 9x9 angular grid cropped to 7x7 keeps views
    1..7, and an odd spatial surplus drops the trailing row/column).
    """
    lf = check_light_field(lf)
    dims = lf.dims[:4]
    target = tuple(int(d) for d in target)
    if len(target) != 4:
        raise ValueError(f"target must give (U, V, S, T), got {target}")
    if any(t < 1 for t in target):
        raise ValueError(f"target dims must be >= 1, got {target}")
    if any(t > d for t, d in zip(target, dims)):
        raise ValueError(f"crop target {target} exceeds source dims {dims}")
    off = [(d - t) // 2 for d, t in zip(dims, target)]
    sl = tuple(slice(o, o + t) for o, t in zip(off, target))
    return LightField(lf.samples[sl])


def crop_window(lf: LightField, row: int, col: int, size: int) -> LightField:
    """Spatial crop of ``size`` x ``size`` pixels at origin (row, col)."""
    lf = check_light_field(lf)
    _, _, s, t, _ = lf.dims
    if size < 1 or row < 0 or col < 0 or row + size > s or col + size > t:
        raise ValueError(
            f"crop window {size}x{size} at ({row}, {col}) exceeds spatial dims ({s}, {t})"
        )
    return LightField(lf.samples[:, :, row : row + size, col : col + size, :])


def draw_patch_origin(s: int, t: int, size: int, rng: np.random.Generator) -> tuple[int, int]:
    """Uniform crop origin over the valid range [0, S-size] x [0, T-size]."""
    if size < 1 or size > min(s, t):
        raise ValueError(f"patch size {size} does not fit spatial dims ({s}, {t})")
    return int(rng.integers(0, s - size + 1)), int(rng.integers(0, t - size + 1))


def random_patch(lf: LightField, rng_seed: int, size: int, source_id: str = "") -> PatchRecord:
    """Uniformly random spatial crop; deterministic for a given seed.

    The crop origin is recorded so label stacks can later be cropped at the
    same window. The returned record carries no labels.
    """
    lf = check_light_field(lf)
    _, _, s, t, _ = lf.dims
    row, col = draw_patch_origin(s, t, size, np.random.default_rng(rng_seed))
    return PatchRecord(
        lf_patch=crop_window(lf, row, col, size),
        source_id=source_id,
        crop_origin=(row, col),
    )
