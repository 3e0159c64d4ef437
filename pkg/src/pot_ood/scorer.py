"""Contrastive transport scoring of test batches.

A batch is scored twice: once against the class prototypes (cost ``t_id``)
and once against *virtual outliers* — prototypes reflected through the
batch mean by a factor ``omega > 1`` (cost ``t_out``).  The score of a
sample is ``t_id - t_out``: large when the sample is far from every
prototype but close to the reflected set, i.e. likely out-of-distribution.

Both solves share one regularization value, resolved from the prototype
cost matrix when the config uses the relative rule.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import logsumexp

from .errors import BatchTooSmall, DimensionMismatch, OmegaOutOfRange, ValidationError
from .ingest import FeatureMatrix, LogitMatrix
from .prototypes import PrototypeSet
from .transport import Marginals, SolverConfig, euclidean_cost, resolve_lambda, sinkhorn


@dataclass(frozen=True)
class VirtualOutlierSet:
    """Prototypes pushed past the batch mean, with their original masses."""

    vectors: np.ndarray  # (num_classes, dim)
    masses: np.ndarray  # carried over from the PrototypeSet unchanged
    omega: float
    batch_mean: np.ndarray  # (dim,)


@dataclass(frozen=True)
class ScoredBatch:
    """Per-sample scores for one batch, plus solver diagnostics."""

    scores: np.ndarray  # t_id - t_out; higher = more out-of-distribution
    t_id: np.ndarray  # transport cost against class prototypes
    t_out: np.ndarray  # transport cost against virtual outliers
    batch_index: int
    lam: float  # shared regularization used by both solves
    omega: float
    converged: bool  # True only if both solves converged

    @property
    def batch_size(self) -> int:
        return self.scores.shape[0]


@dataclass(frozen=True)
class StreamScores:
    """Scores for a full test set, restored to input order after batching."""

    scores: np.ndarray
    t_id: np.ndarray
    t_out: np.ndarray
    batch_index: np.ndarray  # which batch each input sample landed in
    batch_lams: np.ndarray  # regularization resolved per batch
    batch_size: int
    seed: int
    omega: float
    all_converged: bool

    @property
    def n_batches(self) -> int:
        return self.batch_lams.shape[0]


def test_mean(test_vectors) -> np.ndarray:
    """Per-dimension mean of the batch rows."""
    test = _as_matrix(test_vectors)
    return test.mean(axis=0)


def make_virtual_outliers(prototypes: PrototypeSet, batch_mean,
                          omega: float = 2.0) -> VirtualOutlierSet:
    """Reflect each prototype through ``batch_mean``: ``v + omega * (mean - v)``.

    ``omega`` must be strictly greater than 1 so the image lands on the far
    side of the mean.  A prototype exactly equal to the mean is a fixed
    point for every ``omega`` and is reported with a warning.
    """
    if not omega > 1.0:
        raise OmegaOutOfRange(f"omega must be > 1, got {omega}")
    mean = np.asarray(batch_mean, dtype=np.float64)
    if mean.shape != (prototypes.dim,):
        raise DimensionMismatch(
            f"batch mean has shape {mean.shape}, prototypes have dim {prototypes.dim}"
        )
    vectors = prototypes.vectors + omega * (mean - prototypes.vectors)
    degenerate = np.all(prototypes.vectors == mean, axis=1)
    if degenerate.any():
        warnings.warn(
            f"{int(degenerate.sum())} prototype(s) coincide with the batch mean; "
            "their virtual outliers equal the prototypes themselves",
            RuntimeWarning,
            stacklevel=2,
        )
    return VirtualOutlierSet(
        vectors=vectors, masses=prototypes.masses, omega=float(omega), batch_mean=mean
    )


def score_batch(prototypes: PrototypeSet, test_vectors, omega: float = 2.0,
                config: SolverConfig = SolverConfig(), batch_index: int = 0) -> ScoredBatch:
    """Score one batch: solve against prototypes, then against virtual outliers.

    The regularization is resolved once, from the prototype cost matrix,
    and reused for the outlier solve.
    """
    test = _as_matrix(test_vectors)
    if test.shape[1] != prototypes.dim:
        raise DimensionMismatch(
            f"test dim {test.shape[1]} != prototype dim {prototypes.dim}"
        )
    if test.shape[0] == 1:
        warnings.warn(
            "scoring a batch of size 1: the batch mean is the sample itself, "
            "so the contrastive score is weakly informative",
            RuntimeWarning,
            stacklevel=2,
        )
    cost_id = euclidean_cost(prototypes.vectors, test)
    lam = resolve_lambda(config, cost_id)
    shared = replace(config, lam=lam)
    marginals = Marginals(prototypes.masses, np.full(test.shape[0], 1.0 / test.shape[0]))
    sol_id = sinkhorn(cost_id, marginals, shared)

    outliers = make_virtual_outliers(prototypes, test_mean(test), omega)
    cost_out = euclidean_cost(outliers.vectors, test)
    sol_out = sinkhorn(cost_out, marginals, shared)

    return ScoredBatch(
        scores=sol_id.per_sample_cost - sol_out.per_sample_cost,
        t_id=sol_id.per_sample_cost,
        t_out=sol_out.per_sample_cost,
        batch_index=int(batch_index),
        lam=lam,
        omega=float(omega),
        converged=sol_id.converged and sol_out.converged,
    )


def score_stream(prototypes: PrototypeSet, test_vectors, batch_size: int = 512,
                 seed: int = 0, omega: float = 2.0,
                 config: SolverConfig = SolverConfig()) -> StreamScores:
    """Shuffle the test set, score it in batches, and restore input order.

    Samples are permuted by a generator seeded with ``seed`` and split into
    consecutive batches of ``batch_size`` (the last may be smaller).  Batch
    composition changes the batch mean and hence the scores, so ``seed``
    is part of the result's identity.
    """
    if batch_size < 2:
        raise BatchTooSmall(f"batch_size must be >= 2, got {batch_size}")
    test = _as_matrix(test_vectors)
    n = test.shape[0]
    perm = np.random.default_rng(seed).permutation(n)

    scores = np.empty(n)
    t_id = np.empty(n)
    t_out = np.empty(n)
    batch_of = np.empty(n, dtype=np.int64)
    lams = []
    all_converged = True
    for k, start in enumerate(range(0, n, batch_size)):
        take = perm[start:start + batch_size]
        batch = score_batch(prototypes, test[take], omega=omega, config=config,
                            batch_index=k)
        scores[take] = batch.scores
        t_id[take] = batch.t_id
        t_out[take] = batch.t_out
        batch_of[take] = k
        lams.append(batch.lam)
        all_converged = all_converged and batch.converged
    return StreamScores(
        scores=scores,
        t_id=t_id,
        t_out=t_out,
        batch_index=batch_of,
        batch_lams=np.asarray(lams),
        batch_size=int(batch_size),
        seed=int(seed),
        omega=float(omega),
        all_converged=all_converged,
    )


def baseline_scores(logits: LogitMatrix, kind: str) -> np.ndarray:
    """Logit-based comparison scores; for both kinds, higher means more in-distribution.

    ``"msp"`` is the maximum softmax probability; ``"energy"`` is the
    log-sum-exp of the logits row.
    """
    data = logits.data if isinstance(logits, LogitMatrix) else LogitMatrix.from_array(logits).data
    lse = logsumexp(data, axis=1)
    if kind == "msp":
        return np.exp(data.max(axis=1) - lse)
    if kind == "energy":
        return lse
    raise ValidationError(f"unknown baseline {kind!r}; expected 'msp' or 'energy'")


def _as_matrix(test_vectors) -> np.ndarray:
    if isinstance(test_vectors, FeatureMatrix):
        return test_vectors.data
    return FeatureMatrix.from_array(test_vectors).data
