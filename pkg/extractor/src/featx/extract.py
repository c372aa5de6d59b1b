"""Batched image-to-feature extraction with a sidecar manifest.

An :class:`ExtractionJob` names an image directory, a backbone, and an
FVEC output path. :func:`extract` embeds every readable image and writes

  * the FVEC file, one row per image, rows in sorted filename order;
  * a JSON manifest mapping each filename to its row index and recording
    any files that were skipped because they could not be decoded.

Preprocessing is fixed: decode to RGB, resize to the backbone's square
input size with Pillow's bicubic resampler (a convolution filter, so
downscaling is anti-aliased), scale to [0, 1], and normalize channels
with the ImageNet statistics. Unreadable images are skipped with a
warning rather than aborting the run; the manifest and the returned
result report the resulting count mismatch.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .backbones import (
    CHANNEL_MEAN,
    CHANNEL_STD,
    WEIGHTS_PRETRAINED,
    Backbone,
    backbone_dim,
    backbone_input_size,
    build_backbone,
)
from .errors import ConfigError, DataError
from .fvec import write_fvec

RESIZE_BICUBIC_ANTIALIAS = "bicubic-antialias"

MANIFEST_SCHEMA = "featx/manifest-v1"

IMAGE_SUFFIXES = frozenset(
    {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".tif", ".tiff", ".webp"}
)


@dataclass(frozen=True)
class ExtractionJob:
    """One directory-to-FVEC extraction request.

    The output dimension is fixed by the backbone choice; ``manifest``
    defaults to the output path with ``.manifest.json`` appended.
    """

    input_dir: Path
    backbone: str
    output: Path
    batch_size: int = 32
    resize_policy: str = RESIZE_BICUBIC_ANTIALIAS
    weights: str = WEIGHTS_PRETRAINED
    seed: int = 0
    manifest: Path | None = None

    def __post_init__(self):
        object.__setattr__(self, "input_dir", Path(self.input_dir))
        object.__setattr__(self, "output", Path(self.output))
        if self.manifest is not None:
            object.__setattr__(self, "manifest", Path(self.manifest))
        backbone_dim(self.backbone)
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.resize_policy != RESIZE_BICUBIC_ANTIALIAS:
            raise ConfigError(
                f"unknown resize policy {self.resize_policy!r}; "
                f"only {RESIZE_BICUBIC_ANTIALIAS!r} is supported"
            )

    @property
    def dim(self) -> int:
        return backbone_dim(self.backbone)

    @property
    def manifest_path(self) -> Path:
        if self.manifest is not None:
            return self.manifest
        return self.output.with_name(self.output.name + ".manifest.json")


@dataclass(frozen=True)
class ExtractionResult:
    """What one run produced: row counts, paths, and any skipped files."""

    output: Path
    manifest: Path
    dim: int
    images_found: int
    rows_written: int
    skipped: tuple[str, ...] = field(default_factory=tuple)


def list_images(input_dir) -> list[Path]:
    """Image files in a directory, in sorted filename order.

    Only the directory itself is scanned; anything without a known image
    suffix is ignored.
    """
    directory = Path(input_dir)
    if not directory.is_dir():
        raise DataError(f"no such image directory: {directory}")
    found = [
        entry
        for entry in directory.iterdir()
        if entry.is_file() and entry.suffix.lower() in IMAGE_SUFFIXES
    ]
    return sorted(found, key=lambda entry: entry.name)


def load_image(path, input_size: int) -> np.ndarray:
    """Decode, resize, and normalize one image to a (3, s, s) float32 array."""
    with Image.open(path) as img:
        rgb = img.convert("RGB")
    resized = rgb.resize((input_size, input_size), Image.Resampling.BICUBIC)
    pixels = np.asarray(resized, dtype=np.float32) / np.float32(255.0)
    mean = np.asarray(CHANNEL_MEAN, dtype=np.float32).reshape(1, 1, 3)
    std = np.asarray(CHANNEL_STD, dtype=np.float32).reshape(1, 1, 3)
    return np.ascontiguousarray(((pixels - mean) / std).transpose(2, 0, 1))


def _write_manifest(job: ExtractionJob, kept: list[str], skipped: list[dict],
                    images_found: int) -> Path:
    path = job.manifest_path
    record = {
        "schema": MANIFEST_SCHEMA,
        "backbone": job.backbone,
        "dim": job.dim,
        "input_size": backbone_input_size(job.backbone),
        "resize_policy": job.resize_policy,
        "weights": job.weights,
        "seed": job.seed,
        "input_dir": str(job.input_dir),
        "output": str(job.output),
        "output_sha256": hashlib.sha256(job.output.read_bytes()).hexdigest(),
        "images_found": images_found,
        "rows_written": len(kept),
        "rows": {name: index for index, name in enumerate(kept)},
        "skipped": skipped,
    }
    path.write_text(json.dumps(record, indent=2) + "\n")
    return path


def extract(job: ExtractionJob, *, backbone: Backbone | None = None) -> ExtractionResult:
    """Embed every readable image in the job's directory and write FVEC.

    A prebuilt backbone can be passed to amortize construction across
    jobs; it must match the job's backbone name.
    """
    files = list_images(job.input_dir)
    images_found = len(files)
    if backbone is None:
        backbone = build_backbone(job.backbone, weights=job.weights, seed=job.seed)
    elif backbone.name != job.backbone:
        raise ConfigError(
            f"job wants backbone {job.backbone!r} but got a prebuilt {backbone.name!r}"
        )

    kept: list[str] = []
    skipped: list[dict] = []
    rows: list[np.ndarray] = []
    batch: list[np.ndarray] = []

    def flush():
        if not batch:
            return
        stacked = torch.from_numpy(np.stack(batch))
        rows.append(backbone.embed(stacked).numpy().astype(np.float32, copy=False))
        batch.clear()

    for path in files:
        try:
            batch.append(load_image(path, backbone.input_size))
        except Exception as exc:
            warnings.warn(f"skipping unreadable image {path.name}: {exc}")
            skipped.append({"file": path.name, "reason": str(exc)})
            continue
        kept.append(path.name)
        if len(batch) == job.batch_size:
            flush()
    flush()

    if not kept:
        raise DataError(f"no readable images in {job.input_dir}")
    features = np.concatenate(rows, axis=0)
    write_fvec(features, job.output)
    manifest = _write_manifest(job, kept, skipped, images_found)
    return ExtractionResult(
        output=job.output,
        manifest=manifest,
        dim=int(features.shape[1]),
        images_found=images_found,
        rows_written=len(kept),
        skipped=tuple(entry["file"] for entry in skipped),
    )
