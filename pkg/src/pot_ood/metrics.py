"""Detection metrics over scored ID/OOD samples: AUROC and FPR at fixed TPR.

Both metrics take the two score vectors separately plus an ``orientation``
saying which direction means "more OOD":

* ``"higher_is_ood"`` — the native direction of the contrastive score,
* ``"higher_is_id"`` — the direction of the logit baselines.

ID samples are the positives: ``fpr_at_tpr`` reports how many OOD samples
leak past a threshold that keeps at least ``tpr_target`` of the ID set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import EmptyInput, NonFiniteValue, ValidationError

_ORIENTATIONS = ("higher_is_ood", "higher_is_id")


@dataclass(frozen=True)
class EvalReport:
    """Summary of one evaluation run."""

    auroc: float
    fpr95: float  # FPR at the requested TPR (default 0.95, hence the name)
    threshold_at_tpr95: float
    n_id: int
    n_ood: int


def auroc(scores_id, scores_ood, orientation: str = "higher_is_ood") -> float:
    """Probability that a random OOD score outranks a random ID score.

    Mann-Whitney formulation with average ranks, so ties count 1/2 and the
    result is exact (no curve discretization).  ``higher_is_id`` flips the
    orientation and returns the complement.
    """
    ids, oods = _validated(scores_id, scores_ood, orientation)
    n_id, n_ood = ids.size, oods.size
    ranks = rankdata(np.concatenate([ids, oods]))
    u_ood = ranks[n_id:].sum() - n_ood * (n_ood + 1) / 2.0
    p_ood_above = u_ood / (n_id * n_ood)
    if orientation == "higher_is_ood":
        return float(p_ood_above)
    return float(1.0 - p_ood_above)


def fpr_at_tpr(scores_id, scores_ood, tpr_target: float = 0.95,
               orientation: str = "higher_is_ood") -> tuple[float, float]:
    """FPR (OOD passing as ID) at the loosest threshold keeping ``tpr_target`` of ID.

    In ``higher_is_id`` orientation the threshold is the largest score ``t``
    with ``mean(id >= t) >= tpr_target`` and the FPR is ``mean(ood >= t)``;
    ``higher_is_ood`` mirrors both comparisons.  Returns ``(fpr, threshold)``
    with the threshold in the original score units.
    """
    ids, oods = _validated(scores_id, scores_ood, orientation)
    if not 0.0 < tpr_target <= 1.0:
        raise ValidationError(f"tpr_target must be in (0, 1], got {tpr_target}")
    if orientation == "higher_is_id":
        fpr, threshold = _fpr_scan(ids, oods, tpr_target)
        return fpr, threshold
    # mean(x <= t) == mean(-x >= -t), so negation maps this orientation
    # onto the scan above exactly
    fpr, threshold = _fpr_scan(-ids, -oods, tpr_target)
    return fpr, -threshold


def evaluate(scores_id, scores_ood, orientation: str = "higher_is_ood",
             tpr_target: float = 0.95) -> EvalReport:
    """Run both metrics and bundle them."""
    area = auroc(scores_id, scores_ood, orientation)
    fpr, threshold = fpr_at_tpr(scores_id, scores_ood, tpr_target, orientation)
    return EvalReport(
        auroc=area,
        fpr95=fpr,
        threshold_at_tpr95=threshold,
        n_id=int(np.asarray(scores_id).size),
        n_ood=int(np.asarray(scores_ood).size),
    )


def _fpr_scan(ids: np.ndarray, oods: np.ndarray, tpr_target: float) -> tuple[float, float]:
    """Largest t with mean(id >= t) >= target; fpr = mean(ood >= t)."""
    ids_sorted = np.sort(ids)
    candidates = np.unique(ids_sorted)
    count_ge = ids.size - np.searchsorted(ids_sorted, candidates, side="left")
    tpr = count_ge / ids.size
    # tpr is nonincreasing along ascending candidates, so the admissible
    # ones form a prefix; take the last of them
    admissible = int(np.sum(tpr >= tpr_target))
    threshold = candidates[admissible - 1]
    fpr = float(np.mean(oods >= threshold))
    return fpr, float(threshold)


def _validated(scores_id, scores_ood, orientation: str) -> tuple[np.ndarray, np.ndarray]:
    if orientation not in _ORIENTATIONS:
        raise ValidationError(
            f"orientation must be one of {_ORIENTATIONS}, got {orientation!r}"
        )
    ids = np.asarray(scores_id, dtype=np.float64).ravel()
    oods = np.asarray(scores_ood, dtype=np.float64).ravel()
    if ids.size == 0 or oods.size == 0:
        raise EmptyInput("both score vectors must be nonempty")
    if not (np.all(np.isfinite(ids)) and np.all(np.isfinite(oods))):
        raise NonFiniteValue("scores must be finite")
    return ids, oods
