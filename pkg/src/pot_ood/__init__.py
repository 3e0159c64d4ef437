"""Prototype-based optimal-transport out-of-distribution detection.

The pipeline: load embeddings (:mod:`~pot_ood.ingest`), build one prototype
per class (:mod:`~pot_ood.prototypes`), couple prototypes with test batches
by entropic optimal transport (:mod:`~pot_ood.transport`), and score each
sample by the contrast between its transport cost to the prototypes and to
virtual outliers extrapolated through the batch mean
(:mod:`~pot_ood.scorer`).  :mod:`~pot_ood.metrics` evaluates the scores;
:mod:`~pot_ood.synth` generates deterministic benchmarks; :mod:`~pot_ood.cli`
drives everything from the command line.
"""

from . import errors, ingest, metrics, prototypes, scorer, synth, transport
from .ingest import FeatureMatrix, LabeledDataset, LogitMatrix, load_features, load_labels, save_features
from .metrics import EvalReport, auroc, evaluate, fpr_at_tpr
from .prototypes import PrototypeSet, prototypes_from_data, prototypes_from_weights
from .scorer import (
    ScoredBatch,
    StreamScores,
    VirtualOutlierSet,
    baseline_scores,
    make_virtual_outliers,
    score_batch,
    score_stream,
    test_mean,
)
from .synth import OodCluster, SynthSpec, generate
from .transport import (
    CostMatrix,
    Marginals,
    SolverConfig,
    TransportSolution,
    backend_name,
    decompose_cost,
    euclidean_cost,
    exact_ot_1d,
    sinkhorn,
)

__version__ = "0.1.0"

__all__ = [
    "CostMatrix",
    "EvalReport",
    "FeatureMatrix",
    "LabeledDataset",
    "LogitMatrix",
    "Marginals",
    "OodCluster",
    "PrototypeSet",
    "ScoredBatch",
    "SolverConfig",
    "StreamScores",
    "SynthSpec",
    "TransportSolution",
    "VirtualOutlierSet",
    "auroc",
    "backend_name",
    "baseline_scores",
    "decompose_cost",
    "errors",
    "euclidean_cost",
    "evaluate",
    "exact_ot_1d",
    "fpr_at_tpr",
    "generate",
    "ingest",
    "load_features",
    "load_labels",
    "make_virtual_outliers",
    "metrics",
    "prototypes",
    "prototypes_from_data",
    "prototypes_from_weights",
    "save_features",
    "score_batch",
    "score_stream",
    "scorer",
    "sinkhorn",
    "synth",
    "test_mean",
    "transport",
]
