"""Bit-exact binary containers for light fields, focal stacks and spectra.

LFR1 layout: the magic bytes ``LFR1``, six little-endian uint32 header words
``U, V, S, T, C, reserved``, then ``U*V*S*T*C`` little-endian IEEE-754 float32
samples in (u, v, s, t, c) row-major order. Light fields use ``reserved=0``.
A focal stack reuses the container with ``U=M`` (image count), ``V=1`` and
``reserved=1``, followed by ``M`` little-endian float64 alpha values after the
sample payload.

LFS1 is the spectrum cache: same header with magic ``LFS1``, payload stored as
interleaved float32 (real, imag) pairs, i.e. little-endian complex64.

Writes go to a temp file in the destination directory and are renamed into
place, so interrupted runs never leave partial outputs. Saving is
deterministic: the same object always produces byte-identical files.
"""
from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from .types import FocalStack, LightField

__all__ = [
    "BadMagicError",
    "ContainerError",
    "DimensionOverflowError",
    "TruncatedPayloadError",
    "load_focal_stack",
    "load_light_field",
    "load_spectrum_coefficients",
    "save_focal_stack",
    "save_light_field",
    "save_spectrum_coefficients",
]

MAGIC_FIELD = b"LFR1"
MAGIC_SPECTRUM = b"LFS1"
_HEADER = struct.Struct("<6I")

# Sanity cap on declared payload (samples); 2**33 float32 = 32 GiB.
_MAX_SAMPLES = 2**33

_FLAG_FIELD = 0
_FLAG_STACK = 1


class ContainerError(ValueError):
    """Base error for malformed container files."""


class BadMagicError(ContainerError):
    """File does not start with the expected magic bytes."""


class TruncatedPayloadError(ContainerError):
    """File ends before the payload declared by the header."""


class DimensionOverflowError(ContainerError):
    """Header declares dimensions beyond the supported payload size."""


def _atomic_write(path: Path, payload: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(f"{path.name}.tmp-{os.getpid()}")
    try:
        with open(tmp, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _read_header(data: bytes, path, magic: bytes) -> tuple[tuple[int, ...], int]:
    if len(data) < 4 or data[:4] != magic:
        raise BadMagicError(
            f"{path}: expected magic {magic!r}, found {bytes(data[:4])!r}"
        )
    if len(data) < 4 + _HEADER.size:
        raise TruncatedPayloadError(f"{path}: truncated header")
    u, v, s, t, c, flag = _HEADER.unpack_from(data, 4)
    dims = (u, v, s, t, c)
    if any(d < 1 for d in dims):
        raise DimensionOverflowError(f"{path}: header declares zero-size dims {dims}")
    count = u * v * s * t * c
    if count > _MAX_SAMPLES:
        raise DimensionOverflowError(
            f"{path}: header declares {count} samples (limit {_MAX_SAMPLES})"
        )
    return dims, flag


def _read_payload(data: bytes, offset: int, count: int, dtype: str, path) -> np.ndarray:
    nbytes = count * np.dtype(dtype).itemsize
    if len(data) < offset + nbytes:
        have = max(0, len(data) - offset) // np.dtype(dtype).itemsize
        raise TruncatedPayloadError(
            f"{path}: payload holds {have} values, header requires {count}"
        )
    return np.frombuffer(data, dtype=dtype, count=count, offset=offset)


def save_light_field(lf: LightField, path) -> None:
    """Write ``lf`` to ``path`` in the LFR1 layout."""
    u, v, s, t, c = lf.dims
    header = MAGIC_FIELD + _HEADER.pack(u, v, s, t, c, _FLAG_FIELD)
    _atomic_write(Path(path), header + lf.samples.astype("<f4", copy=False).tobytes())


def load_light_field(path) -> LightField:
    """Read an LFR1 light field; samples come back exactly as stored."""
    data = Path(path).read_bytes()
    dims, flag = _read_header(data, path, MAGIC_FIELD)
    if flag != _FLAG_FIELD:
        raise ContainerError(f"{path}: container holds a focal stack, not a light field")
    count = int(np.prod(dims, dtype=np.int64))
    samples = _read_payload(data, 4 + _HEADER.size, count, "<f4", path)
    return LightField(samples.reshape(dims))


def save_focal_stack(stack: FocalStack, path) -> None:
    """Write a focal stack: LFR1 container with U=M, V=1, then float64 alphas."""
    m = len(stack)
    s, t, c = stack.image_dims
    header = MAGIC_FIELD + _HEADER.pack(m, 1, s, t, c, _FLAG_STACK)
    body = stack.images.astype("<f4", copy=False).tobytes()
    tail = stack.alphas.astype("<f8", copy=False).tobytes()
    _atomic_write(Path(path), header + body + tail)


def load_focal_stack(path) -> FocalStack:
    data = Path(path).read_bytes()
    dims, flag = _read_header(data, path, MAGIC_FIELD)
    if flag != _FLAG_STACK:
        raise ContainerError(f"{path}: container holds a light field, not a focal stack")
    m, v, s, t, c = dims
    if v != 1:
        raise ContainerError(f"{path}: focal stack requires V=1 in the header, got {v}")
    count = m * s * t * c
    offset = 4 + _HEADER.size
    images = _read_payload(data, offset, count, "<f4", path).reshape(m, s, t, c)
    alphas = _read_payload(data, offset + count * 4, m, "<f8", path)
    return FocalStack(alphas=alphas, images=images)


def save_spectrum_coefficients(coeffs: np.ndarray, path) -> None:
    """Write a complex (U, V, S, T, C) coefficient array as an LFS1 cache file."""
    arr = np.ascontiguousarray(coeffs, dtype="<c8")
    if arr.ndim != 5:
        raise ValueError(f"spectrum coefficients need 5 axes, got {arr.ndim}")
    u, v, s, t, c = arr.shape
    header = MAGIC_SPECTRUM + _HEADER.pack(u, v, s, t, c, _FLAG_FIELD)
    _atomic_write(Path(path), header + arr.tobytes())


def load_spectrum_coefficients(path) -> np.ndarray:
    """Read an LFS1 cache back into a complex64 (U, V, S, T, C) array."""
    data = Path(path).read_bytes()
    dims, _ = _read_header(data, path, MAGIC_SPECTRUM)
    count = int(np.prod(dims, dtype=np.int64))
    coeffs = _read_payload(data, 4 + _HEADER.size, count, "<c8", path)
    return coeffs.reshape(dims).copy()
