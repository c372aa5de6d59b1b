"""Feature file formats: the FVEC binary container and a CSV fallback.

FVEC layout, all little-endian:

    bytes 0..3   magic "FLD1"
    bytes 4..7   u32 row count n
    bytes 8..11  u32 dimension d
    byte  12     u8 dtype code (0 = 32-bit float)
    bytes 13..   n * d * 4 bytes of row-major float32 payload

CSV files hold one row per line with '.' decimals; an optional first
column may carry string ids. Values are widened to float64 on read.
"""

from __future__ import annotations

import csv
import hashlib
import struct
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, FormatError
from .tensor import FeatureMatrix, Role

MAGIC = b"FLD1"
DTYPE_FLOAT32 = 0
_HEADER = struct.Struct("<4sIIB")

FORMAT_FVEC = "fvec"
FORMAT_CSV = "csv"


def infer_format(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".fvec":
        return FORMAT_FVEC
    if suffix == ".csv":
        return FORMAT_CSV
    raise ConfigError(f"cannot infer feature format from {path!r}; pass one explicitly")


def _read_fvec(path: Path, role: Role) -> FeatureMatrix:
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header, {len(raw)} bytes", offset=len(raw))
    magic, n, d, dtype = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}", offset=0)
    if dtype != DTYPE_FLOAT32:
        raise FormatError(f"{path}: unknown dtype code {dtype}", offset=12)
    if n < 1 or d < 1:
        raise FormatError(f"{path}: empty matrix ({n} x {d})", offset=4)
    expected = n * d * 4
    payload = len(raw) - _HEADER.size
    if payload < expected:
        raise FormatError(f"{path}: payload holds {payload} bytes, header promises {expected}",
                          offset=len(raw))
    if payload > expected:
        raise FormatError(f"{path}: {payload - expected} trailing bytes after payload",
                          offset=_HEADER.size + expected)
    data = np.frombuffer(raw, dtype="<f4", count=n * d, offset=_HEADER.size)
    return FeatureMatrix(data.astype(np.float64).reshape(n, d), role=role)


def _write_fvec(matrix: FeatureMatrix, path: Path) -> None:
    header = _HEADER.pack(MAGIC, matrix.n, matrix.dim, DTYPE_FLOAT32)
    payload = np.ascontiguousarray(matrix.data, dtype="<f4").tobytes()
    path.write_bytes(header + payload)


def _read_csv(path: Path, role: Role) -> FeatureMatrix:
    rows: list[tuple[int, list[str]]] = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        for record in reader:
            if record:
                rows.append((reader.line_num, record))
    if not rows:
        raise FormatError(f"{path}: no data rows", line=1)
    width = len(rows[0][1])
    try:
        float(rows[0][1][0])
        has_ids = False
    except ValueError:
        has_ids = True
    if has_ids and width < 2:
        raise FormatError(f"{path}: id column present but no numeric columns", line=rows[0][0])
    ids: list[str] | None = [] if has_ids else None
    values = np.empty((len(rows), width - 1 if has_ids else width))
    for index, (lineno, record) in enumerate(rows):
        if len(record) != width:
            raise FormatError(f"{path}: expected {width} fields, found {len(record)}", line=lineno)
        fields = record
        if has_ids:
            ids.append(fields[0])
            fields = fields[1:]
        try:
            values[index] = [float(field) for field in fields]
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}", line=lineno) from None
    try:
        return FeatureMatrix(values, role=role, ids=tuple(ids) if ids else None)
    except DataError as exc:
        raise FormatError(f"{path}: {exc}", line=1) from exc


def _write_csv(matrix: FeatureMatrix, path: Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        for i in range(matrix.n):
            row = [repr(float(v)) for v in matrix.data[i]]
            if matrix.ids is not None:
                row = [matrix.ids[i]] + row
            writer.writerow(row)


def read_features(path, fmt: str | None = None, *, role: Role = Role.TRAIN) -> FeatureMatrix:
    """Load a feature matrix, inferring the format from the suffix."""
    p = Path(path)
    if not p.is_file():
        raise DataError(f"no such feature file: {p}")
    fmt = fmt if fmt is not None else infer_format(p)
    if fmt == FORMAT_FVEC:
        return _read_fvec(p, role)
    if fmt == FORMAT_CSV:
        return _read_csv(p, role)
    raise ConfigError(f"unknown feature format {fmt!r}")


def write_features(matrix: FeatureMatrix, path, fmt: str | None = None) -> None:
    """Write a feature matrix; FVEC narrows the payload to float32."""
    p = Path(path)
    fmt = fmt if fmt is not None else infer_format(p)
    if fmt == FORMAT_FVEC:
        _write_fvec(matrix, p)
    elif fmt == FORMAT_CSV:
        _write_csv(matrix, p)
    else:
        raise ConfigError(f"unknown feature format {fmt!r}")


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def dataset_entry(path) -> dict:
    """Provenance record for one input file."""
    return {"path": str(path), "sha256": sha256_file(path)}
