"""Class prototypes: one representative vector and one mass per class.

Two constructions are supported: per-class means of labeled embeddings
(masses proportional to class frequency), or the columns of a classifier
weight matrix when no training embeddings are available (uniform masses).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatch, EmptyClass, NonFiniteValue, ValidationError
from .ingest import LabeledDataset

MASS_TOL = 1e-12


@dataclass(frozen=True)
class PrototypeSet:
    """``num_classes`` prototype vectors with a probability mass each."""

    vectors: np.ndarray  # (num_classes, dim)
    masses: np.ndarray  # (num_classes,), nonnegative, sums to 1
    source: str  # "from_data" or "from_weights"

    def __post_init__(self):
        vectors = np.ascontiguousarray(self.vectors, dtype=np.float64)
        masses = np.ascontiguousarray(self.masses, dtype=np.float64)
        if vectors.ndim != 2:
            raise DimensionMismatch(f"prototype vectors must be 2-D, got {vectors.ndim}-D")
        if vectors.shape[0] < 2:
            raise ValidationError(f"need at least 2 classes, got {vectors.shape[0]}")
        if masses.shape != (vectors.shape[0],):
            raise DimensionMismatch(
                f"{vectors.shape[0]} prototypes but {masses.shape[0]} masses"
            )
        if not np.all(np.isfinite(vectors)):
            raise NonFiniteValue("prototype vectors contain non-finite values")
        if not np.all(np.isfinite(masses)) or masses.min() < 0:
            raise ValidationError("masses must be finite and nonnegative")
        if abs(masses.sum() - 1.0) > MASS_TOL:
            raise ValidationError(f"masses sum to {masses.sum()!r}, expected 1")
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "masses", masses)

    @property
    def num_classes(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def normalized(self) -> "PrototypeSet":
        """Return a copy with each prototype scaled to unit L2 norm."""
        return replace(self, vectors=l2_normalize_rows(self.vectors))


def prototypes_from_data(train: LabeledDataset) -> PrototypeSet:
    """Build prototypes as per-class mean embeddings.

    Prototype ``c`` is the mean of all training rows labeled ``c``; its mass
    is the class frequency ``count(c) / total``, so every mass is strictly
    positive.  Every class in ``range(train.num_classes)`` must have at
    least one sample.
    """
    features = train.features.data
    counts = train.class_counts()
    for c, count in enumerate(counts):
        if count == 0:
            raise EmptyClass(c)
    vectors = np.empty((train.num_classes, features.shape[1]))
    for c in range(train.num_classes):
        vectors[c] = features[train.labels == c].mean(axis=0)
    masses = counts / counts.sum()
    return PrototypeSet(vectors=vectors, masses=masses, source="from_data")


def prototypes_from_weights(weights) -> PrototypeSet:
    """Build prototypes from a ``dim x num_classes`` classifier weight matrix.

    Column ``c`` becomes prototype ``c``.  Class frequencies are unknown in
    this mode, so masses are uniform ``1 / num_classes``.  Any bias vector
    is the caller's problem: only the weight matrix is consumed.
    """
    weights = np.asarray(
        getattr(weights, "data", weights), dtype=np.float64
    )
    if weights.ndim != 2:
        raise DimensionMismatch(f"weight matrix must be 2-D, got {weights.ndim}-D")
    num_classes = weights.shape[1]
    if num_classes < 2:
        raise ValidationError(f"need at least 2 classes, got {num_classes}")
    if not np.all(np.isfinite(weights)):
        raise NonFiniteValue("weight matrix contains non-finite values")
    masses = np.full(num_classes, 1.0 / num_classes)
    return PrototypeSet(vectors=weights.T.copy(), masses=masses, source="from_weights")


def l2_normalize_rows(array: np.ndarray) -> np.ndarray:
    """Scale each row to unit L2 norm; rows with zero norm pass through."""
    array = np.asarray(array, dtype=np.float64)
    norms = np.linalg.norm(array, axis=1, keepdims=True)
    return np.divide(array, norms, out=array.copy(), where=norms > 0)
