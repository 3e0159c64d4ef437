"""Exact optimal transport on the line, used as an independent check.

For sorted 1-D atoms the optimal coupling under ``|x - y|`` is the monotone
(north-west-corner) one, computable in closed form from cumulative masses:
``plan[i, j] = max(0, min(CA_i, CB_j) - max(CA_{i-1}, CB_{j-1}))``.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch, MassMismatch, NonFiniteValue, UnsortedInput, ValidationError

_SUM_TOL = 1e-9


def exact_ot_1d(positions_a, masses_a, positions_b, masses_b):
    """Optimal plan and total cost between two sorted 1-D discrete measures.

    Positions must be ascending; each mass vector must be nonnegative and
    sum to 1 (within 1e-9).  Returns ``(plan, total_cost)`` where ``plan``
    has shape ``(len(a), len(b))``.
    """
    x = np.asarray(positions_a, dtype=np.float64)
    a = np.asarray(masses_a, dtype=np.float64)
    y = np.asarray(positions_b, dtype=np.float64)
    b = np.asarray(masses_b, dtype=np.float64)
    for name, pos, mass in (("a", x, a), ("b", y, b)):
        if pos.ndim != 1 or mass.ndim != 1 or pos.shape != mass.shape or pos.size == 0:
            raise DimensionMismatch(
                f"side {name}: positions {pos.shape} and masses {mass.shape} must be "
                "equal-length non-empty vectors"
            )
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(mass))):
            raise NonFiniteValue(f"side {name} contains non-finite values")
        if np.any(np.diff(pos) < 0):
            raise UnsortedInput(f"side {name}: positions must be sorted ascending")
        if mass.min() < 0:
            raise ValidationError(f"side {name}: masses must be nonnegative")
        if abs(mass.sum() - 1.0) > _SUM_TOL:
            raise MassMismatch(f"side {name}: masses sum to {mass.sum()!r}, expected 1")

    ca = np.concatenate(([0.0], np.cumsum(a)))
    cb = np.concatenate(([0.0], np.cumsum(b)))
    upper = np.minimum(ca[1:, None], cb[None, 1:])
    lower = np.maximum(ca[:-1, None], cb[None, :-1])
    plan = np.clip(upper - lower, 0.0, None)
    total_cost = float((plan * np.abs(x[:, None] - y[None, :])).sum())
    return plan, total_cost
