"""Entropy-regularized optimal transport between prototypes and a batch.

``sinkhorn`` couples a row distribution (prototype masses) with a column
distribution (uniform over batch samples) under a ground-cost matrix,
minimizing ``<cost, plan>`` plus an entropy term with weight ``lam``.
Smaller ``lam`` tracks the unregularized optimum more closely but needs
more iterations; by default ``lam`` is set per cost matrix as
``lam_factor * median(cost)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import DimensionMismatch, NonFiniteValue, NumericalUnderflow, ValidationError
from ._backend import kernels

logger = logging.getLogger(__name__)

MASS_TOL = 1e-12


@dataclass(frozen=True)
class CostMatrix:
    """Nonnegative ground costs, one row per source atom, one column per target."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.ascontiguousarray(self.entries, dtype=np.float64)
        if entries.ndim != 2:
            raise DimensionMismatch(f"cost matrix must be 2-D, got {entries.ndim}-D")
        if entries.shape[0] < 1 or entries.shape[1] < 1:
            raise DimensionMismatch(f"cost matrix must be non-empty, got {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise NonFiniteValue("cost matrix contains non-finite values")
        if entries.min() < 0:
            raise ValidationError("cost matrix contains negative entries")
        object.__setattr__(self, "entries", entries)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


@dataclass(frozen=True)
class Marginals:
    """Row and column mass vectors; each is nonnegative and sums to 1."""

    mu: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        mu = np.ascontiguousarray(self.mu, dtype=np.float64)
        nu = np.ascontiguousarray(self.nu, dtype=np.float64)
        for name, vec in (("mu", mu), ("nu", nu)):
            if vec.ndim != 1 or vec.shape[0] < 1:
                raise DimensionMismatch(f"{name} must be a non-empty vector")
            if not np.all(np.isfinite(vec)) or vec.min() < 0:
                raise ValidationError(f"{name} must be finite and nonnegative")
            if abs(vec.sum() - 1.0) > MASS_TOL:
                raise ValidationError(f"{name} sums to {vec.sum()!r}, expected 1")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "nu", nu)

    @classmethod
    def uniform(cls, num_rows: int, num_cols: int) -> "Marginals":
        return cls(np.full(num_rows, 1.0 / num_rows), np.full(num_cols, 1.0 / num_cols))


@dataclass(frozen=True)
class SolverConfig:
    """Sinkhorn settings.

    ``lam`` pins the regularization strength; when ``None`` it is resolved
    per solve as ``lam_factor * median(cost entries)``.  ``stabilization``
    selects the iteration domain: ``"log_domain"`` (default, safe for small
    ``lam``) or ``"plain"`` (linear-domain scaling, slightly cheaper, can
    underflow).
    """

    lam: float | None = None
    lam_factor: float = 0.5
    tolerance: float = 1e-8
    max_iterations: int = 10000
    stabilization: str = "log_domain"

    def __post_init__(self):
        if self.lam is not None and not self.lam > 0:
            raise ValidationError(f"lam must be positive, got {self.lam}")
        if not self.lam_factor > 0:
            raise ValidationError(f"lam_factor must be positive, got {self.lam_factor}")
        if not self.tolerance > 0:
            raise ValidationError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValidationError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.stabilization not in ("log_domain", "plain"):
            raise ValidationError(
                f"stabilization must be 'log_domain' or 'plain', got {self.stabilization!r}"
            )


@dataclass(frozen=True)
class TransportSolution:
    """A solved coupling plus its cost decomposition and diagnostics."""

    plan: np.ndarray  # (rows, cols), approximately couples mu with nu
    per_sample_cost: np.ndarray  # (cols,) transport cost attributed to each column
    total_cost: float
    iterations: int
    marginal_residual: float
    lam: float  # regularization actually used (after the relative rule)
    converged: bool
    stabilization: str
    cost: np.ndarray = field(repr=False)  # ground-cost matrix, kept for decomposition


def euclidean_cost(source_vectors, target_vectors) -> CostMatrix:
    """Pairwise Euclidean distances; entry (i, j) is ``||source_i - target_j||``.

    Accepts plain arrays or any object carrying its rows in ``.vectors`` /
    ``.data`` (PrototypeSet, VirtualOutlierSet, FeatureMatrix).  Computed
    coordinate-wise (not via the dot-product expansion), so identical rows
    give an exact zero.
    """
    source = np.atleast_2d(np.asarray(_rows_of(source_vectors), dtype=np.float64))
    target = np.atleast_2d(np.asarray(_rows_of(target_vectors), dtype=np.float64))
    if source.shape[1] != target.shape[1]:
        raise DimensionMismatch(
            f"source dim {source.shape[1]} != target dim {target.shape[1]}"
        )
    return CostMatrix(cdist(source, target, metric="euclidean"))


def _rows_of(obj):
    for attr in ("vectors", "data"):
        inner = getattr(obj, attr, None)
        if inner is not None:
            return inner
    return obj


def resolve_lambda(config: SolverConfig, cost: CostMatrix) -> float:
    """The regularization the solver will use for this cost matrix."""
    if config.lam is not None:
        return float(config.lam)
    lam = config.lam_factor * float(np.median(cost.entries))
    if lam <= 0:
        # degenerate all-zero (or half-zero) costs; any positive value gives
        # the same product-coupling solution, so pick something stable
        scale = float(cost.entries.max())
        lam = config.lam_factor * scale if scale > 0 else 1.0
    return lam


def sinkhorn(cost: CostMatrix, marginals: Marginals,
             config: SolverConfig = SolverConfig()) -> TransportSolution:
    """Solve the entropy-regularized coupling of ``marginals`` under ``cost``.

    Iterates until the plan's worst row/column mass violation is at most
    ``config.tolerance`` or ``config.max_iterations`` is reached; the
    outcome is reported in ``converged`` / ``marginal_residual`` rather
    than raised.  Raises :class:`NumericalUnderflow` if the scaling
    breaks down numerically (typical for ``stabilization="plain"`` with
    small ``lam``; the log-domain default is robust).
    """
    entries = cost.entries
    rows, cols = entries.shape
    if marginals.mu.shape[0] != rows or marginals.nu.shape[0] != cols:
        raise DimensionMismatch(
            f"marginals ({marginals.mu.shape[0]}, {marginals.nu.shape[0]}) do not "
            f"match cost matrix {entries.shape}"
        )
    lam = resolve_lambda(config, cost)
    mu, nu = marginals.mu, marginals.nu
    if config.stabilization == "plain":
        K = np.exp(-entries / lam)
        plan, iterations, residual, converged, underflow = kernels.plain_kernel(
            K, mu, nu, config.tolerance, config.max_iterations
        )
        if underflow:
            raise NumericalUnderflow(
                f"plain-mode scaling underflowed after {iterations} iterations at "
                f"lam={lam:.6g}; retry with stabilization='log_domain'"
            )
    else:
        logK = np.ascontiguousarray(-entries / lam)
        with np.errstate(divide="ignore"):
            log_mu = np.log(mu)
            log_nu = np.log(nu)
        plan, iterations, residual, converged, underflow = kernels.log_kernel(
            logK, log_mu, log_nu, mu, nu, config.tolerance, config.max_iterations
        )
        if underflow:
            raise NumericalUnderflow(
                f"log-domain iteration produced non-finite values after "
                f"{iterations} iterations at lam={lam:.6g}"
            )
    if not converged:
        logger.warning(
            "sinkhorn stopped at max_iterations=%d with residual %.3e (tol %.1e)",
            iterations, residual, config.tolerance,
        )
    per_sample = (entries * plan).sum(axis=0)
    return TransportSolution(
        plan=plan,
        per_sample_cost=per_sample,
        total_cost=float(per_sample.sum()),
        iterations=int(iterations),
        marginal_residual=float(residual),
        lam=lam,
        converged=bool(converged),
        stabilization=config.stabilization,
        cost=entries,
    )


def decompose_cost(solution: TransportSolution) -> np.ndarray:
    """Per-column transport costs ``T_j = sum_i cost_ij * plan_ij``.

    Recomputed from the stored plan; sums to ``solution.total_cost``.
    """
    return (solution.cost * solution.plan).sum(axis=0)
