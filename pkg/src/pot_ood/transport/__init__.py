"""Entropy-regularized optimal transport with interchangeable kernels."""

from ._backend import backend_name
from .oracle import exact_ot_1d
from .solver import (
    CostMatrix,
    Marginals,
    SolverConfig,
    TransportSolution,
    decompose_cost,
    euclidean_cost,
    resolve_lambda,
    sinkhorn,
)

__all__ = [
    "CostMatrix",
    "Marginals",
    "SolverConfig",
    "TransportSolution",
    "backend_name",
    "decompose_cost",
    "euclidean_cost",
    "exact_ot_1d",
    "resolve_lambda",
    "sinkhorn",
]
