"""Loading, validation, and serialization of feature/label/logit files.

Features travel in one of two formats:

* ``binary`` — a little-endian container: 4-byte magic ``POTF``, a u8
  format version (currently 1), u32 row count, u32 column count (13 header
  bytes total), followed by ``rows * cols`` float32 values in row-major
  order.  Values are stored as float32 on disk and widened to float64 in
  memory; all computation downstream is float64.
* ``csv`` — delimited text, one sample per line, no header unless
  ``skip_header`` says otherwise.

Binary errors cite byte offsets; text errors cite 0-based data-row indices
(a skipped header line is not counted).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInput,
    IoFailure,
    LabelOutOfRange,
    MalformedHeader,
    MalformedValue,
    NegativeLabel,
    NonFiniteValue,
)

MAGIC = b"POTF"
FORMAT_VERSION = 1
HEADER_SIZE = 13  # 4 magic + 1 version + 4 rows + 4 cols
_HEADER = struct.Struct("<4sBII")


@dataclass(frozen=True)
class FeatureMatrix:
    """A dense float64 matrix of row vectors (samples x dimensions)."""

    data: np.ndarray

    @classmethod
    def from_array(cls, array) -> "FeatureMatrix":
        data = np.ascontiguousarray(array, dtype=np.float64)
        if data.ndim != 2:
            raise DimensionMismatch(f"expected a 2-D array, got {data.ndim}-D")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise DimensionMismatch(f"matrix must be non-empty, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            bad_row = int(np.argwhere(~np.isfinite(data))[0, 0])
            raise NonFiniteValue(f"non-finite value in row {bad_row}")
        return cls(data)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class LabeledDataset:
    """Features paired with integer class labels in ``[0, num_classes)``."""

    features: FeatureMatrix
    labels: np.ndarray
    num_classes: int

    @classmethod
    def build(cls, features: FeatureMatrix, labels, num_classes: int | None = None) -> "LabeledDataset":
        labels = np.asarray(labels, dtype=np.int64)
        if labels.ndim != 1:
            raise DimensionMismatch(f"labels must be 1-D, got {labels.ndim}-D")
        if labels.shape[0] != features.rows:
            raise DimensionMismatch(
                f"{features.rows} feature rows but {labels.shape[0]} labels"
            )
        if labels.size and labels.min() < 0:
            row = int(np.argmin(labels))
            raise NegativeLabel(f"row {row}: label {labels[row]} is negative")
        if num_classes is None:
            num_classes = int(labels.max()) + 1
        elif labels.max() >= num_classes:
            row = int(np.argmax(labels))
            raise LabelOutOfRange(
                f"row {row}: label {labels[row]} >= num_classes={num_classes}"
            )
        return cls(features, labels, int(num_classes))

    def class_counts(self) -> np.ndarray:
        """Sample count per class id, length ``num_classes`` (zeros allowed)."""
        return np.bincount(self.labels, minlength=self.num_classes)

    @property
    def present_classes(self) -> np.ndarray:
        return np.unique(self.labels)


@dataclass(frozen=True)
class LogitMatrix:
    """Raw classifier outputs, one row of ``num_classes`` logits per sample."""

    data: np.ndarray

    @classmethod
    def from_array(cls, array) -> "LogitMatrix":
        return cls(FeatureMatrix.from_array(array).data)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def num_classes(self) -> int:
        return self.data.shape[1]


def load_features(path, format: str = "binary", *, skip_header: bool = False,
                  delimiter: str = ",") -> FeatureMatrix:
    """Read a feature matrix from ``path``.

    ``format`` selects the on-disk encoding (``"binary"`` or ``"csv"``).
    ``skip_header`` and ``delimiter`` only apply to CSV input.
    """
    if format == "binary":
        return _load_binary(path)
    if format == "csv":
        return _load_csv(path, skip_header=skip_header, delimiter=delimiter)
    raise ValueError(f"unknown format {format!r}; expected 'binary' or 'csv'")


def save_features(matrix: FeatureMatrix, path) -> None:
    """Write ``matrix`` in the binary container format (float32 payload)."""
    payload = matrix.data.astype("<f4").tobytes(order="C")
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, matrix.rows, matrix.cols)
    try:
        Path(path).write_bytes(header + payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def _load_binary(path) -> FeatureMatrix:
    buf = _read_bytes(path)
    if len(buf) < HEADER_SIZE:
        raise MalformedHeader(
            f"{path}: file is {len(buf)} bytes, header needs {HEADER_SIZE}"
        )
    magic, version, rows, cols = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise MalformedHeader(f"{path}: bad magic {magic!r} at byte offset 0")
    if version != FORMAT_VERSION:
        raise MalformedHeader(
            f"{path}: unsupported version {version} at byte offset 4"
        )
    if rows == 0 or cols == 0:
        raise DimensionMismatch(f"{path}: header declares empty shape {rows}x{cols}")
    expected = HEADER_SIZE + 4 * rows * cols
    if len(buf) != expected:
        raise DimensionMismatch(
            f"{path}: payload from byte offset {HEADER_SIZE} should make the file "
            f"{expected} bytes, found {len(buf)}"
        )
    flat = np.frombuffer(buf, dtype="<f4", count=rows * cols, offset=HEADER_SIZE)
    finite = np.isfinite(flat)
    if not finite.all():
        k = int(np.argmin(finite))
        raise NonFiniteValue(
            f"{path}: non-finite value at byte offset {HEADER_SIZE + 4 * k}"
        )
    data = flat.astype(np.float64).reshape(rows, cols)
    return FeatureMatrix.from_array(data)


def _data_lines(path, skip_header: bool):
    """Yield (data_row_index, file_line) pairs, skipping blanks and the header."""
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    with fh:
        row = 0
        for lineno, line in enumerate(fh):
            if lineno == 0 and skip_header:
                continue
            stripped = line.strip()
            if not stripped:
                continue
            yield row, stripped
            row += 1


def _load_csv(path, *, skip_header: bool, delimiter: str) -> FeatureMatrix:
    rows: list[list[float]] = []
    width = None
    for row, line in _data_lines(path, skip_header):
        tokens = line.split(delimiter)
        values = []
        for col, token in enumerate(tokens):
            try:
                values.append(float(token))
            except ValueError:
                raise MalformedValue(
                    f"{path}: row {row}, column {col}: "
                    f"cannot parse {token.strip()!r} as a number"
                ) from None
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise DimensionMismatch(
                f"{path}: row {row} has {len(values)} values, row 0 has {width}"
            )
        for col, v in enumerate(values):
            if not np.isfinite(v):
                raise NonFiniteValue(
                    f"{path}: non-finite value at row {row}, column {col}"
                )
        rows.append(values)
    if not rows:
        raise DimensionMismatch(f"{path}: no data rows")
    return FeatureMatrix.from_array(np.asarray(rows, dtype=np.float64))


def load_labels(path, num_classes: int | None = None) -> np.ndarray:
    """Read integer labels, one per line; optionally bound them by ``num_classes``."""
    labels = []
    for row, line in _data_lines(path, skip_header=False):
        try:
            value = int(line)
        except ValueError:
            raise MalformedValue(
                f"{path}: row {row}: cannot parse {line!r} as an integer"
            ) from None
        if value < 0:
            raise NegativeLabel(f"{path}: row {row}: label {value} is negative")
        if num_classes is not None and value >= num_classes:
            raise LabelOutOfRange(
                f"{path}: row {row}: label {value} >= num_classes={num_classes}"
            )
        labels.append(value)
    if not labels:
        raise EmptyInput(f"{path}: no labels found")
    return np.asarray(labels, dtype=np.int64)


def save_labels(labels, path) -> None:
    """Write integer labels, one per line."""
    labels = np.asarray(labels, dtype=np.int64)
    try:
        Path(path).write_text(
            "\n".join(str(int(v)) for v in labels) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
