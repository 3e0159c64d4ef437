"""Deterministic synthetic benchmark: Gaussian ID classes plus shifted OOD clusters.

ID class centers sit on a scaled simplex (pairwise distance exactly
``radius``) embedded in ``dim`` dimensions and centered on the origin; each
class is an isotropic Gaussian around its center.  Each OOD cluster is a
Gaussian placed ``offset`` away from one ID center, pushed outward along
the ray from the ID centroid through that center, so ``offset`` is also the
distance to the nearest ID center.

Sampling uses a counter-based generator (Philox) seeded by ``spec.seed``;
draws happen in a fixed documented order (train samples class by class,
then test-ID samples class by class, then OOD clusters in listed order),
so identical specs produce bitwise-identical matrices.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidSpec
from .ingest import FeatureMatrix, LabeledDataset

PLACEMENT_SIMPLEX = "simplex_scaled"


@dataclass(frozen=True)
class OodCluster:
    """One OOD blob: distance from its anchor ID center, spread, and size."""

    offset: float
    sigma: float
    count: int


@dataclass(frozen=True)
class SynthSpec:
    """Full description of one synthetic dataset; JSON-serializable."""

    num_classes: int
    dim: int
    train_per_class: int
    test_id_count: int  # total; split round-robin over classes
    radius: float
    sigma: float
    ood_clusters: tuple[OodCluster, ...]
    seed: int = 0
    placement: str = field(default=PLACEMENT_SIMPLEX)

    def __post_init__(self):
        object.__setattr__(
            self,
            "ood_clusters",
            tuple(
                c if isinstance(c, OodCluster) else OodCluster(**c)
                for c in self.ood_clusters
            ),
        )
        if self.num_classes < 2:
            raise InvalidSpec(f"num_classes must be >= 2, got {self.num_classes}")
        if self.dim < self.num_classes:
            raise InvalidSpec(
                f"dim ({self.dim}) must be >= num_classes ({self.num_classes}) "
                "for the simplex placement"
            )
        if self.train_per_class < 1:
            raise InvalidSpec(f"train_per_class must be >= 1, got {self.train_per_class}")
        if self.test_id_count < 1:
            raise InvalidSpec(f"test_id_count must be >= 1, got {self.test_id_count}")
        if not self.radius > 0:
            raise InvalidSpec(f"radius must be positive, got {self.radius}")
        if self.sigma < 0:
            raise InvalidSpec(f"sigma must be >= 0, got {self.sigma}")
        if self.placement != PLACEMENT_SIMPLEX:
            raise InvalidSpec(f"unknown placement {self.placement!r}")
        if not self.ood_clusters:
            raise InvalidSpec("at least one OOD cluster is required")
        for k, cluster in enumerate(self.ood_clusters):
            if cluster.count < 1:
                raise InvalidSpec(f"ood cluster {k}: count must be >= 1")
            if cluster.offset < 0 or cluster.sigma < 0:
                raise InvalidSpec(f"ood cluster {k}: offset and sigma must be >= 0")
        if self.seed < 0:
            raise InvalidSpec(f"seed must be >= 0, got {self.seed}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SynthSpec":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"spec is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise InvalidSpec("spec JSON must be an object")
        try:
            return cls(
                num_classes=raw["num_classes"],
                dim=raw["dim"],
                train_per_class=raw["train_per_class"],
                test_id_count=raw["test_id_count"],
                radius=raw["radius"],
                sigma=raw["sigma"],
                ood_clusters=tuple(OodCluster(**c) for c in raw["ood_clusters"]),
                seed=raw.get("seed", 0),
                placement=raw.get("placement", PLACEMENT_SIMPLEX),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidSpec(f"bad spec field: {exc}") from exc


def class_centers(spec: SynthSpec) -> np.ndarray:
    """Simplex vertices: scaled standard basis vectors, recentered to the origin.

    Scaling by ``radius / sqrt(2)`` makes every pairwise distance exactly
    ``radius``; recentering makes "outward from the centroid" the direction
    of the vertex itself.
    """
    centers = np.zeros((spec.num_classes, spec.dim))
    scale = spec.radius / np.sqrt(2.0)
    centers[np.arange(spec.num_classes), np.arange(spec.num_classes)] = scale
    return centers - centers.mean(axis=0)


def generate(spec: SynthSpec) -> tuple[LabeledDataset, FeatureMatrix, FeatureMatrix]:
    """Draw (train, test_id, test_ood) for ``spec``."""
    rng = np.random.Generator(np.random.Philox(spec.seed))
    centers = class_centers(spec)
    C, d = spec.num_classes, spec.dim

    train_blocks = []
    train_labels = []
    for c in range(C):
        noise = rng.standard_normal((spec.train_per_class, d))
        train_blocks.append(centers[c] + spec.sigma * noise)
        train_labels.extend([c] * spec.train_per_class)
    train = LabeledDataset.build(
        FeatureMatrix.from_array(np.vstack(train_blocks)),
        np.asarray(train_labels),
        num_classes=C,
    )

    base, extra = divmod(spec.test_id_count, C)
    id_blocks = []
    for c in range(C):
        count = base + (1 if c < extra else 0)
        if count == 0:
            continue
        noise = rng.standard_normal((count, d))
        id_blocks.append(centers[c] + spec.sigma * noise)
    test_id = FeatureMatrix.from_array(np.vstack(id_blocks))

    ood_blocks = []
    for k, cluster in enumerate(spec.ood_clusters):
        anchor = centers[k % C]
        direction = anchor / np.linalg.norm(anchor)
        ood_center = anchor + cluster.offset * direction
        noise = rng.standard_normal((cluster.count, d))
        ood_blocks.append(ood_center + cluster.sigma * noise)
    test_ood = FeatureMatrix.from_array(np.vstack(ood_blocks))
    return train, test_id, test_ood


def far_ood_spec(seed: int = 0, **overrides) -> SynthSpec:
    """Well-separated benchmark: one OOD cluster a full simplex edge away."""
    return _preset(seed, offset=8.0, **overrides)


def near_ood_spec(seed: int = 0, **overrides) -> SynthSpec:
    """Hard benchmark: the OOD cluster sits two within-class sigmas out."""
    return _preset(seed, offset=1.0, **overrides)


def _preset(seed: int, offset: float, **overrides) -> SynthSpec:
    kwargs = dict(
        num_classes=3,
        dim=32,
        train_per_class=100,
        test_id_count=200,
        radius=8.0,
        sigma=0.5,
        ood_clusters=(OodCluster(offset=offset, sigma=0.5, count=200),),
        seed=seed,
    )
    kwargs.update(overrides)
    return SynthSpec(**kwargs)
