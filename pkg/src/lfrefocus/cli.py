"""Command-line pipeline: ingestion, refocusing, labels, patches, metrics, bench.

Subcommands are deterministic given their flags and seeds (``bench`` excepted,
which reports medians of repeated timings). All file writes go through a
temp-then-rename step so interrupted runs never leave partial outputs.

Exit codes:
    0  success
    2  input error (missing/malformed files, bad flag values)
    3  processing failure (an entry failed mid-run)

``LFREF_THREADS`` caps the worker count used when iterating over light
fields; unset means one worker per CPU.
"""
from __future__ import annotations

import functools
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np
from PIL import Image

from . import bench as bench_mod
from .container import (
    ContainerError,
    load_focal_stack,
    load_light_field,
    save_focal_stack,
    save_light_field,
)
from .fourier import refocus_fourier
from .ingest import ViewGridError, center_crop, import_view_grid, random_patch
from .metrics import LossParams, stack_loss_components, stack_report
from .shift_sum import focal_stack_shift_sum
from .types import FocalStack, LightField
from .validation import check_alphas, parse_dims

log = logging.getLogger("lfrefocus")

EXIT_INPUT_ERROR = 2
EXIT_PROCESSING_ERROR = 3

_INPUT_ERRORS = (
    ContainerError,
    ViewGridError,
    FileNotFoundError,
    NotADirectoryError,
    IsADirectoryError,
    PermissionError,
    json.JSONDecodeError,
    ValueError,
)


def worker_count() -> int:
    """Worker cap from LFREF_THREADS, defaulting to the CPU count."""
    raw = os.environ.get("LFREF_THREADS", "").strip()
    if raw:
        n = int(raw)
        if n < 1:
            raise ValueError(f"LFREF_THREADS must be >= 1, got {raw!r}")
        return n
    return os.cpu_count() or 1


def _write_text(path: Path, text: str) -> None:
    tmp = path.with_name(f"{path.name}.tmp-{os.getpid()}")
    try:
        tmp.write_text(text)
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _write_png(path: Path, image: np.ndarray) -> None:
    """8-bit export with round-half-to-even quantization of [0, 1] samples."""
    arr = np.rint(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    if arr.shape[2] == 1:
        arr = arr[:, :, 0]
    tmp = path.with_name(f"{path.name}.tmp-{os.getpid()}")
    try:
        Image.fromarray(arr).save(tmp, format="PNG")
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _refocus_stack(lf: LightField, method: str, alphas) -> FocalStack:
    if method == "shift_sum":
        return focal_stack_shift_sum(lf, alphas)
    return refocus_fourier(lf, alphas)


def _parse_alphas(text: str | None) -> np.ndarray:
    if text is None:
        return check_alphas(None)
    parts = [p for p in text.replace(",", " ").split() if p]
    return check_alphas([float(p) for p in parts])


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    path: Path
    split: str


def load_dataset_manifest(path) -> list[ManifestEntry]:
    """Read and validate a dataset manifest: unique ids, existing paths."""
    raw = json.loads(Path(path).read_text())
    items = raw["entries"] if isinstance(raw, dict) else raw
    if not isinstance(items, list) or not items:
        raise ValueError(f"{path}: manifest must list at least one entry")
    base = Path(path).parent
    entries = []
    seen = set()
    for item in items:
        try:
            entry_id, rel, split = str(item["id"]), item["path"], item.get("split", "train")
        except (KeyError, TypeError) as exc:
            raise ValueError(f"{path}: malformed manifest entry {item!r}") from exc
        if split not in ("train", "test"):
            raise ValueError(f"{path}: entry {entry_id!r} has unknown split {split!r}")
        if entry_id in seen:
            raise ValueError(f"{path}: duplicate id {entry_id!r}")
        seen.add(entry_id)
        target = (base / rel) if not Path(rel).is_absolute() else Path(rel)
        if not target.exists():
            raise FileNotFoundError(f"{path}: entry {entry_id!r} points at missing {target}")
        entries.append(ManifestEntry(entry_id, target, split))
    return entries


def _exit_codes(fn):
    """Map exceptions onto the documented exit-code table."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except _INPUT_ERRORS as exc:
            log.error("%s", exc)
            sys.exit(EXIT_INPUT_ERROR)
        except Exception as exc:  # pragma: no cover - defensive
            log.error("processing failed: %s", exc)
            sys.exit(EXIT_PROCESSING_ERROR)

    return wrapper


@click.group()
def main() -> None:
    """Light field refocusing pipeline."""
    if not logging.getLogger().handlers:
        logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    log.setLevel(logging.INFO)


@main.command("import")
@click.option("--views", "views_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--crop", default=None, help="Optional center crop UxVxSxT, e.g. 7x7x375x540.")
@_exit_codes
def cmd_import(views_dir, manifest, out_path, crop) -> None:
    """Assemble a sub-aperture view grid into an LFR1 light field."""
    lf = import_view_grid(views_dir, manifest)
    if crop:
        lf = center_crop(lf, parse_dims(crop, 4))
    save_light_field(lf, out_path)
    u, v, s, t, c = lf.dims
    log.info("imported %dx%dx%dx%dx%d field -> %s", u, v, s, t, c, out_path)


@main.command("refocus")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(["shift_sum", "fourier"]), default="shift_sum")
@click.option("--alphas", default=None, help="Space/comma separated; default is the 16-value grid.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--export-images", is_flag=True, help="Also write one 8-bit PNG per alpha.")
@_exit_codes
def cmd_refocus(input_path, method, alphas, out_path, export_images) -> None:
    """Refocus one light field into a focal stack container."""
    alphas = _parse_alphas(alphas)
    lf = load_light_field(input_path)
    stack = _refocus_stack(lf, method, alphas)
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_focal_stack(stack, out)
    if export_images:
        stem = out.name.split(".")[0]
        for alpha, image in zip(stack.alphas, stack.images):
            _write_png(out.parent / f"{stem}_a{alpha:.3f}.png", image)
    log.info("wrote %d refocused images -> %s", len(stack), out)


def _label_path(out_dir: Path, entry_id: str) -> Path:
    return out_dir / f"{entry_id}.labels.lfr"


@main.command("labels")
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(["shift_sum", "fourier"]), default="shift_sum")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--alphas", default=None)
@_exit_codes
def cmd_labels(manifest, method, out_dir, alphas) -> None:
    """Generate per-entry focal stacks; resumable (existing outputs are kept)."""
    alphas = _parse_alphas(alphas)
    entries = load_dataset_manifest(manifest)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def build(entry: ManifestEntry) -> tuple[str, str | None]:
        target = _label_path(out, entry.id)
        if target.exists():
            log.info("skipping %s (exists)", target.name)
            return entry.id, None
        try:
            stack = _refocus_stack(load_light_field(entry.path), method, alphas)
            save_focal_stack(stack, target)
            log.info("labeled %s (%d images)", entry.id, len(stack))
            return entry.id, None
        except Exception as exc:
            log.error("entry %s failed: %s", entry.id, exc)
            return entry.id, str(exc)

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(build, entries))

    index = {eid: _label_path(out, eid).name for eid, err in results if err is None
             and _label_path(out, eid).exists()}
    _write_text(out / "labels_index.json", json.dumps(index, indent=2, sort_keys=True) + "\n")
    failures = [eid for eid, err in results if err is not None]
    if failures:
        log.error("%d entries failed: %s", len(failures), ", ".join(failures))
        sys.exit(EXIT_PROCESSING_ERROR)


def _stable_entry_seed(seed: int, entry_id: str) -> np.random.Generator:
    import hashlib

    digest = hashlib.sha256(entry_id.encode()).digest()
    return np.random.default_rng([seed, int.from_bytes(digest[:8], "little")])


@main.command("patches")
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--labels", "labels_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--count", default=4, show_default=True, help="Patches per light field.")
@click.option("--seed", default=0, show_default=True)
@click.option("--size", default=192, show_default=True, help="Square patch side in pixels.")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@_exit_codes
def cmd_patches(manifest, labels_dir, count, seed, size, out_dir) -> None:
    """Export aligned (light field patch, label stack patch) pairs."""
    entries = load_dataset_manifest(manifest)
    labels_dir = Path(labels_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    index = []
    for entry in entries:
        label_file = _label_path(labels_dir, entry.id)
        if not label_file.exists():
            raise FileNotFoundError(f"no labels for id {entry.id!r} at {label_file}")
        lf = load_light_field(entry.path)
        labels = load_focal_stack(label_file)
        if labels.image_dims != lf.dims[2:]:
            raise ValueError(
                f"labels for {entry.id!r} have dims {labels.image_dims}, "
                f"field has {lf.dims[2:]}"
            )
        rng = _stable_entry_seed(seed, entry.id)
        entry_dir = out / entry.id
        entry_dir.mkdir(exist_ok=True)
        for k in range(count):
            patch = random_patch(lf, int(rng.integers(0, 2**63)), size, source_id=entry.id)
            row, col = patch.crop_origin
            label_crop = FocalStack(
                alphas=labels.alphas,
                images=labels.images[:, row : row + size, col : col + size, :],
            )
            patch_file = entry_dir / f"patch_{k:03d}.lfr"
            label_patch_file = entry_dir / f"patch_{k:03d}.labels.lfr"
            save_light_field(patch.lf_patch, patch_file)
            save_focal_stack(label_crop, label_patch_file)
            index.append(
                {
                    "id": entry.id,
                    "patch": str(patch_file.relative_to(out)),
                    "labels": str(label_patch_file.relative_to(out)),
                    "origin": [row, col],
                }
            )
        log.info("wrote %d patches for %s", count, entry.id)
    _write_text(out / "patches_index.json", json.dumps(index, indent=2) + "\n")


@main.command("metrics")
@click.option("--pred", "pred_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--truth", "truth_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_csv", required=True, type=click.Path(dir_okay=False))
@_exit_codes
def cmd_metrics(pred_dir, truth_dir, out_csv) -> None:
    """Per-field MPSNR/MSSIM summary plus per-alpha detail files."""
    truth_dir, pred_dir = Path(truth_dir), Path(pred_dir)
    stacks = sorted(p for p in truth_dir.glob("*.lfr"))
    if not stacks:
        raise FileNotFoundError(f"no .lfr stacks found in {truth_dir}")
    out = Path(out_csv)
    out.parent.mkdir(parents=True, exist_ok=True)
    detail_dir = out.parent / f"{out.name.split('.')[0]}_detail"
    detail_dir.mkdir(exist_ok=True)

    def score(truth_file: Path):
        pred_file = pred_dir / truth_file.name
        if not pred_file.exists():
            raise FileNotFoundError(f"missing prediction stack {pred_file}")
        report = stack_report(load_focal_stack(pred_file), load_focal_stack(truth_file))
        entry_id = truth_file.name.split(".")[0]
        _write_text(detail_dir / f"{entry_id}.csv", report.to_csv())
        return entry_id, report

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        rows = list(pool.map(score, stacks))

    lines = ["# lfref-metrics-v1", "id,mpsnr_db,mssim"]
    for entry_id, report in rows:
        lines.append(f"{entry_id},{report.mpsnr:.9g},{report.mssim:.9g}")
    _write_text(out, "\n".join(lines) + "\n")
    log.info("scored %d stacks -> %s", len(rows), out)


@main.command("loss")
@click.option("--pred", "pred_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--truth", "truth_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--beta", default=0.65, show_default=True)
@click.option("--gamma", default=500.0, show_default=True)
@_exit_codes
def cmd_loss(pred_path, truth_path, beta, gamma) -> None:
    """Training-loss decomposition (mse, psi1, gamma_psi2, total) for two stacks."""
    params = LossParams(beta=beta, gamma=gamma)
    parts = stack_loss_components(
        load_focal_stack(pred_path), load_focal_stack(truth_path), params
    )
    click.echo(json.dumps(parts, sort_keys=True))


@main.command("bench")
@click.option("--sizes", default="7x7x128x128x3", show_default=True,
              help="Comma separated UxVxSxTxC sizes.")
@click.option("--reps", default=3, show_default=True)
@click.option("--alphas", default=None)
@click.option("--out", "out_csv", required=True, type=click.Path(dir_okay=False))
@_exit_codes
def cmd_bench(sizes, reps, alphas, out_csv) -> None:
    """Time both refocusers on synthetic fields; writes records and ratio CSVs."""
    dims = [parse_dims(tok, 5) for tok in sizes.split(",") if tok]
    records = bench_mod.run_bench(dims, _parse_alphas(alphas), reps=reps)
    out = Path(out_csv)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_text(out, bench_mod.records_to_csv(records))
    ratios = out.parent / f"{out.name.split('.')[0]}_ratios.csv"
    _write_text(ratios, bench_mod.ratios_to_csv(records))
    log.info("bench wrote %s and %s", out, ratios)


if __name__ == "__main__":
    main()
