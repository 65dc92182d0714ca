"""Feature and label file formats.

Features travel as a small binary container (magic ``DTCF``, u32-le row and
column counts, float32-le row-major payload) with a CSV fallback; labels are
one decimal integer per line.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import FeatureMatrix, InvariantError, LabelVector

MAGIC = b"DTCF"
_HEADER = struct.Struct("<4sII")


class DataFormatError(ValueError):
    pass


def encode_features(m: FeatureMatrix) -> bytes:
    payload = m.data.astype("<f4").tobytes(order="C")
    return _HEADER.pack(MAGIC, m.rows, m.cols) + payload


def decode_features(buf: bytes) -> FeatureMatrix:
    if len(buf) < _HEADER.size:
        raise DataFormatError(f"truncated header at byte {len(buf)}")
    magic, n, d = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise DataFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if n < 1 or d < 1:
        raise DataFormatError(f"bad dimensions N={n}, D={d}")
    need = n * d * 4
    got = len(buf) - _HEADER.size
    if got < need:
        raise DataFormatError(f"truncated payload at byte {len(buf)}: need {need} bytes, have {got}")
    data = np.frombuffer(buf, dtype="<f4", count=n * d, offset=_HEADER.size).reshape(n, d)
    bad = np.argwhere(~np.isfinite(data))
    if bad.size:
        raise DataFormatError(f"non-finite feature value at row {int(bad[0][0])}")
    return FeatureMatrix(data.astype(np.float64))


def _decode_features_csv(text: str) -> FeatureMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise DataFormatError("CSV needs a header row and at least one data row")
    header = [c.strip() for c in lines[0].split(",")]
    d = len(header)
    rows = []
    for i, ln in enumerate(lines[1:]):
        cells = ln.split(",")
        if len(cells) != d:
            raise DataFormatError(f"row {i} has {len(cells)} cells, expected {d}")
        try:
            # parse through float32 so CSV and binary routes agree bit-for-bit
            rows.append([np.float32(c) for c in cells])
        except ValueError as exc:
            raise DataFormatError(f"non-numeric value in row {i}") from exc
    data = np.array(rows, dtype=np.float32)
    if not np.all(np.isfinite(data)):
        bad = int(np.argwhere(~np.isfinite(data))[0][0])
        raise DataFormatError(f"non-finite feature value at row {bad}")
    return FeatureMatrix(data.astype(np.float64))


def load_features(path) -> FeatureMatrix:
    p = Path(path)
    buf = p.read_bytes()
    if buf.startswith(MAGIC):
        return decode_features(buf)
    try:
        return _decode_features_csv(buf.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise DataFormatError(f"{p}: neither {MAGIC!r} binary nor text CSV") from exc


def save_features(path, m: FeatureMatrix) -> None:
    Path(path).write_bytes(encode_features(m))


def load_labels(path) -> LabelVector:
    values = []
    for i, ln in enumerate(Path(path).read_text().splitlines()):
        ln = ln.strip()
        if not ln:
            continue
        try:
            values.append(int(ln))
        except ValueError as exc:
            raise DataFormatError(f"line {i}: {ln!r} is not an integer label") from exc
    if not values:
        raise DataFormatError("label file is empty")
    try:
        return LabelVector(np.array(values, dtype=np.int64))
    except InvariantError as exc:
        raise DataFormatError(str(exc)) from exc


def save_labels(path, labels: LabelVector) -> None:
    Path(path).write_text("".join(f"{v}\n" for v in labels.labels))
