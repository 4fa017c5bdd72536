"""Timing harness comparing shift-and-sum against Fourier-slice refocusing.

Measurements use synthetic random fields so results are reproducible without
datasets. Each record reports the median wall time of at least three
repetitions. Per-image records divide by the alpha count, so shift_sum and
fourier_slice rows are directly comparable; fourier_pre is the one-off 4-D
FFT preprocessing cost.
"""
from __future__ import annotations

import io
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .fourier import fft4, fourier_slice
from .shift_sum import shift_and_sum
from .types import LightField
from .validation import check_alphas

__all__ = [
    "BenchRecord",
    "measure_angular_sweep",
    "median_time",
    "run_bench",
    "records_to_csv",
    "ratios_to_csv",
]

METHODS = ("shift_sum", "fourier_pre", "fourier_slice")


@dataclass(frozen=True)
class BenchRecord:
    method: str
    dims: tuple[int, int, int, int, int]
    alphas: int
    wall_seconds: float
    repetitions: int

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.repetitions < 3:
            raise ValueError(f"need >= 3 repetitions, got {self.repetitions}")
        if not self.wall_seconds > 0:
            raise ValueError(f"wall time must be > 0, got {self.wall_seconds}")


def median_time(fn: Callable[[], object], reps: int) -> float:
    """Median wall-clock seconds of ``reps`` calls."""
    times = []
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def synthetic_field(dims: Sequence[int], seed: int = 0) -> LightField:
    rng = np.random.default_rng(seed)
    return LightField(rng.random(tuple(dims), dtype=np.float32))


def run_bench(sizes: Sequence[Sequence[int]], alphas=None, reps: int = 3,
              seed: int = 0) -> list[BenchRecord]:
    """Benchmark all three methods on each (U, V, S, T, C) size.

    shift_sum and fourier_slice report median per-image time across the alpha
    set; fourier_pre reports the median one-off fft4 time.
    """
    if reps < 3:
        raise ValueError(f"need >= 3 repetitions, got {reps}")
    alphas = check_alphas(alphas)
    records = []
    for dims in sizes:
        dims = tuple(int(d) for d in dims)
        lf = synthetic_field(dims, seed=seed)
        spectrum = fft4(lf)  # warm cache before timing

        pre = median_time(lambda: fft4(lf), reps)
        per_slice = median_time(
            lambda: [fourier_slice(spectrum, a) for a in alphas], reps
        ) / alphas.size
        per_shift = median_time(
            lambda: [shift_and_sum(lf, a) for a in alphas], reps
        ) / alphas.size

        records.append(BenchRecord("fourier_pre", dims, alphas.size, pre, reps))
        records.append(BenchRecord("fourier_slice", dims, alphas.size, per_slice, reps))
        records.append(BenchRecord("shift_sum", dims, alphas.size, per_shift, reps))
    return records


def measure_angular_sweep(angular: Sequence[tuple[int, int]] = ((3, 3), (5, 5), (7, 7)),
                          spatial: tuple[int, int] = (128, 128), channels: int = 3,
                          alphas=(0.25, 0.75, 1.25, 1.75), rounds: int = 9,
                          seed: int = 0) -> dict[int, dict[str, float]]:
    """Per-image shift/slice times across an angular-resolution sweep.

    Every round times each angular size once, round-robin, so slow drift in
    machine speed (frequency scaling, noisy neighbors) affects all sizes
    alike; per-size results are medians across rounds. Returns
    ``{U*V: {"shift_sum": s, "fourier_slice": s}}``.

    This is the measurement behind the complexity claim: shift-and-sum per
    image scales linearly with the view count while the slice cost does not
    depend on it.
    """
    alphas = check_alphas(alphas)
    cases = []
    for n_u, n_v in angular:
        lf = synthetic_field((n_u, n_v) + tuple(spatial) + (channels,), seed=seed)
        spectrum = fft4(lf)
        fourier_slice(spectrum, float(alphas[0]))  # warm up
        shift_and_sum(lf, float(alphas[0]))
        cases.append((n_u * n_v, lf, spectrum))

    shift_times: dict[int, list[float]] = {uv: [] for uv, _, _ in cases}
    slice_times: dict[int, list[float]] = {uv: [] for uv, _, _ in cases}
    for _ in range(rounds):
        for uv, lf, spectrum in cases:
            start = time.perf_counter()
            for a in alphas:
                fourier_slice(spectrum, a)
            slice_times[uv].append((time.perf_counter() - start) / alphas.size)
            start = time.perf_counter()
            for a in alphas:
                shift_and_sum(lf, a)
            shift_times[uv].append((time.perf_counter() - start) / alphas.size)
    return {
        uv: {
            "shift_sum": float(np.median(shift_times[uv])),
            "fourier_slice": float(np.median(slice_times[uv])),
        }
        for uv, _, _ in cases
    }


def derived_ratios(records: Sequence[BenchRecord]) -> list[dict]:
    """Per-size speed ratios: preprocessing vs one slice, shift vs one slice."""
    by_dims: dict[tuple, dict[str, BenchRecord]] = {}
    for rec in records:
        by_dims.setdefault(rec.dims, {})[rec.method] = rec
    rows = []
    for dims, group in by_dims.items():
        if set(group) != set(METHODS):
            continue
        slice_t = group["fourier_slice"].wall_seconds
        rows.append(
            {
                "dims": dims,
                "pre_over_slice": group["fourier_pre"].wall_seconds / slice_t,
                "shift_over_slice": group["shift_sum"].wall_seconds / slice_t,
            }
        )
    return rows


def records_to_csv(records: Sequence[BenchRecord]) -> str:
    buf = io.StringIO()
    buf.write("# lfref-bench-v1\n")
    buf.write("method,u,v,s,t,c,n_alphas,repetitions,wall_seconds\n")
    for r in records:
        u, v, s, t, c = r.dims
        buf.write(
            f"{r.method},{u},{v},{s},{t},{c},{r.alphas},{r.repetitions},"
            f"{r.wall_seconds:.9g}\n"
        )
    return buf.getvalue()


def ratios_to_csv(records: Sequence[BenchRecord]) -> str:
    buf = io.StringIO()
    buf.write("# lfref-bench-ratios-v1\n")
    buf.write("u,v,s,t,c,pre_over_slice,shift_over_slice\n")
    for row in derived_ratios(records):
        u, v, s, t, c = row["dims"]
        buf.write(
            f"{u},{v},{s},{t},{c},{row['pre_over_slice']:.9g},"
            f"{row['shift_over_slice']:.9g}\n"
        )
    return buf.getvalue()


def write_bench_csv(records: Sequence[BenchRecord], path, ratios_path=None) -> None:
    Path(path).write_text(records_to_csv(records))
    if ratios_path is not None:
        Path(ratios_path).write_text(ratios_to_csv(records))
