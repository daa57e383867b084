"""Supervised nearest-neighbor bundle segmentation and voxel-level scoring.

Given an expert-segmented example bundle from one subject, the predicted
bundle in a co-registered target tractogram is the set of embedded-space
nearest neighbors of the example streamlines. Quality is assessed as the
Dice coefficient between the voxel sets crossed by predicted and true
bundles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ann import KdTree
from .distances import DistanceKind
from .embedding import EmbeddedTractogram, embed, embed_tractogram, select_prototypes_sff
from .errors import BothEmpty, EmptyExampleBundle, IndexOutOfRange, InvalidSpec, KindMismatch
from .model import BundleRef, Tractogram, points_at_arc_lengths, arc_lengths

VoxelSet = set  # of (i, j, k) integer tuples


@dataclass(frozen=True)
class VoxelGrid:
    """Isotropic voxel grid: origin in mm and edge length in mm."""

    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    voxel_size: float = 1.25

    def __post_init__(self):
        if not self.voxel_size > 0:
            raise InvalidSpec(f"voxel size must be positive, got {self.voxel_size}")


@dataclass(frozen=True)
class SegmentationResult:
    """Predicted bundle plus per-query diagnostics.

    per_query is ordered by example streamline index; multiplicity counts
    how many example streamlines selected each target index, and sums to
    the example bundle size.
    """

    predicted: BundleRef
    multiplicity: dict[int, int]
    per_query: tuple[tuple[int, int, float], ...]
    kind: DistanceKind
    prototype_count: int
    example_indices: tuple[int, ...] = ()

    def to_json_dict(self) -> dict:
        """JSON-ready document; all indices as decimal integers."""
        return {
            "kind": str(self.kind),
            "prototype_count": self.prototype_count,
            "example": list(self.example_indices),
            "predicted": list(self.predicted.indices),
            "multiplicity": {str(k): v for k, v in sorted(self.multiplicity.items())},
            "per_query": [[e, t, d] for e, t, d in self.per_query],
        }


def prepare_target(
    target: Tractogram,
    kind: DistanceKind,
    prototype_count: int = 40,
    subset_size: int | None = None,
    rng_seed: int = 0,
    threads: int | None = None,
) -> tuple[EmbeddedTractogram, KdTree]:
    """Select prototypes on the target, embed it, and index it.

    Convenience wrapper for the query side of the pipeline; segment()
    accepts the two return values directly.
    """
    protos = select_prototypes_sff(
        target, kind, prototype_count, subset_size=subset_size,
        rng_seed=rng_seed, threads=threads,
    )
    embedded = embed_tractogram(target, protos, target, kind, threads=threads)
    tree = KdTree(embedded.vectors)
    return embedded, tree


def segment(
    example: BundleRef,
    target_embedded: EmbeddedTractogram,
    target_tree: KdTree,
    protos_source: Tractogram,
    kind: DistanceKind,
) -> SegmentationResult:
    """Transfer the example bundle onto the target by embedded-space NN.

    Each example streamline is embedded against the target's prototypes
    and matched to its exact nearest neighbor in the target's embedding
    via the kd-tree. The predicted bundle is the deduplicated set of
    matches; multiplicities are kept for diagnostics.
    """
    if len(example) == 0:
        raise EmptyExampleBundle("example bundle has no streamlines")
    if kind != target_embedded.kind:
        raise KindMismatch(
            f"query kind {kind} != target embedding kind {target_embedded.kind}"
        )
    if target_tree.dimension != target_embedded.dimension:
        raise KindMismatch(
            f"tree dimension {target_tree.dimension} != embedding dimension "
            f"{target_embedded.dimension}"
        )
    if len(target_tree) != len(target_embedded):
        raise KindMismatch(
            f"tree holds {len(target_tree)} vectors but the embedding has "
            f"{len(target_embedded)} rows"
        )

    protos = target_embedded.prototypes
    per_query = []
    multiplicity: dict[int, int] = {}
    for e_idx in example.indices:
        vec = embed(example.tractogram[e_idx], protos, protos_source, kind)
        t_idx, dist = target_tree.nearest(vec)
        per_query.append((e_idx, t_idx, dist))
        multiplicity[t_idx] = multiplicity.get(t_idx, 0) + 1

    # Embedding rows index the target tractogram; in this pipeline the
    # prototype source is the target itself, so it anchors the result.
    predicted = BundleRef(protos_source, multiplicity.keys(), name=example.name)
    return SegmentationResult(
        predicted=predicted,
        multiplicity=multiplicity,
        per_query=tuple(per_query),
        kind=kind,
        prototype_count=len(protos),
        example_indices=example.indices,
    )


def voxelize(bundle: BundleRef, tractogram: Tractogram, grid: VoxelGrid) -> VoxelSet:
    """Set of voxel indices crossed by the bundle's streamlines.

    Each streamline is walked at arc-length steps of half a voxel edge
    (both endpoints included); each sample maps to
    floor((p - origin) / voxel_size) per axis. A half-edge step cannot
    skip a voxel the sampled path passes through for longer than the step.
    """
    step = grid.voxel_size / 2.0
    origin = np.asarray(grid.origin, dtype=np.float64)
    voxels: VoxelSet = set()
    n = len(tractogram)
    for i in bundle.indices:
        if i >= n:
            raise IndexOutOfRange(f"bundle index {i} not in tractogram of size {n}")
        pts = tractogram[i].points
        total = arc_lengths(pts)[-1]
        ts = np.arange(0.0, total, step)
        ts = np.append(ts, total)
        samples = points_at_arc_lengths(pts, ts)
        idx = np.floor((samples - origin) / grid.voxel_size).astype(np.int64)
        voxels.update(map(tuple, idx.tolist()))
    return voxels


def dsc(a: VoxelSet, b: VoxelSet) -> float:
    """Dice similarity coefficient 2|a & b| / (|a| + |b|)."""
    if not a and not b:
        raise BothEmpty("dice of two empty voxel sets is undefined")
    return 2.0 * len(a & b) / (len(a) + len(b))
