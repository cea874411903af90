"""Agglomerative hierarchical clustering over a dissimilarity matrix.

The agglomerator starts from singletons and repeatedly merges the closest
pair of active clusters under the selected linkage, updating inter-cluster
distances with the Lance-Williams coefficients:

    single    d(k, ij) = min(d(k,i), d(k,j))
    complete  d(k, ij) = max(d(k,i), d(k,j))
    average   d(k, ij) = (n_i d(k,i) + n_j d(k,j)) / (n_i + n_j)
    centroid  d(k, ij) = (n_i d(k,i) + n_j d(k,j)) / (n_i + n_j)
                         - n_i n_j d(i,j) / (n_i + n_j)^2

Centroid treats matrix entries as squared-distance surrogates and may
produce inversions (a later merge at a smaller distance); these are legal
and exposed via ``Dendrogram.has_inversions``. Ties between candidate pairs
resolve to the lexicographically smallest (min node index, max node index),
with nodes numbered leaves ``0..P-1`` then internal nodes ``P..2P-2`` in
creation order.

Flat cuts use merge-step-count semantics: the k-cluster partition is the
state after exactly ``P - k`` merges. This guarantees exactly k clusters
for every k and stays well defined under centroid inversions, unlike a
distance-threshold cut.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ClassifierId
from .diversity import DissimilarityMatrix

LINKAGE_METHODS = ("single", "complete", "average", "centroid")


@dataclass(frozen=True)
class MergeStep:
    """One agglomeration step; ``left < right`` are node indices."""

    left: int
    right: int
    distance: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Ordered merge steps over ``leaf_ids``; cuttable into k flat clusters."""

    leaf_ids: tuple[ClassifierId, ...]
    merges: tuple[MergeStep, ...]

    def __post_init__(self) -> None:
        p = len(self.leaf_ids)
        if len(self.merges) != p - 1:
            raise ValueError(f"expected {p - 1} merges for {p} leaves, got {len(self.merges)}")
        sizes = {i: 1 for i in range(p)}
        used: set[int] = set()
        for step_index, step in enumerate(self.merges):
            node = p + step_index
            for child in (step.left, step.right):
                if child in used:
                    raise ValueError(f"node {child} appears as a child more than once")
                if child not in sizes:
                    raise ValueError(f"merge references unknown node {child}")
                used.add(child)
            if step.size != sizes[step.left] + sizes[step.right]:
                raise ValueError(f"merge {step_index}: size does not equal children sizes")
            sizes[node] = step.size
        if self.merges and self.merges[-1].size != p:
            raise ValueError("root size must equal the leaf count")

    @property
    def num_leaves(self) -> int:
        return len(self.leaf_ids)

    @property
    def has_inversions(self) -> bool:
        """True when any merge distance drops below the preceding one."""
        distances = [step.distance for step in self.merges]
        return any(b < a for a, b in zip(distances, distances[1:]))


def _validated_square(matrix: DissimilarityMatrix | np.ndarray) -> np.ndarray:
    if isinstance(matrix, DissimilarityMatrix):
        return np.asarray(matrix.values, dtype=np.float64)
    values = np.asarray(matrix, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError(f"linkage needs a square matrix, got shape {values.shape}")
    if not np.array_equal(values, values.T):
        raise ValueError("linkage needs a symmetric matrix")
    return values


def linkage(
    matrix: DissimilarityMatrix | np.ndarray,
    method: str = "complete",
    leaf_ids: Sequence[ClassifierId] | None = None,
) -> Dendrogram:
    """Agglomerate the matrix into a dendrogram under the given linkage.

    Naive O(P^3): pools here are at most a few hundred classifiers, so the
    simple scan is both fast enough and easy to check against a reference
    agglomerator.
    """
    method = method.strip().lower()
    if method not in LINKAGE_METHODS:
        raise ValueError(f"unknown linkage method {method!r}; expected one of {LINKAGE_METHODS}")
    values = _validated_square(matrix)
    p = values.shape[0]
    if p < 2:
        raise ValueError("linkage needs at least 2 items")
    if leaf_ids is None:
        if isinstance(matrix, DissimilarityMatrix):
            leaf_ids = matrix.ids
        else:
            leaf_ids = tuple(ClassifierId("ITEM", f"N{i}") for i in range(p))
    if len(leaf_ids) != p:
        raise ValueError("leaf_ids length must match the matrix size")

    dist = values.astype(np.float64).copy()
    nodes = list(range(p))
    sizes = [1] * p
    active = list(range(p))
    merges: list[MergeStep] = []

    for step_index in range(p - 1):
        best = None
        for a_pos in range(len(active)):
            for b_pos in range(a_pos + 1, len(active)):
                i, j = active[a_pos], active[b_pos]
                d = dist[i, j]
                pair_key = (min(nodes[i], nodes[j]), max(nodes[i], nodes[j]))
                if best is None or d < best[0] or (d == best[0] and pair_key < best[1]):
                    best = (d, pair_key, a_pos, b_pos)
        d, pair_key, a_pos, b_pos = best
        i, j = active[a_pos], active[b_pos]
        ni, nj = sizes[i], sizes[j]
        new_size = ni + nj

        for k in active:
            if k in (i, j):
                continue
            if method == "single":
                updated = min(dist[k, i], dist[k, j])
            elif method == "complete":
                updated = max(dist[k, i], dist[k, j])
            elif method == "average":
                updated = (ni * dist[k, i] + nj * dist[k, j]) / new_size
            else:
                updated = (ni * dist[k, i] + nj * dist[k, j]) / new_size - (
                    ni * nj * dist[i, j]
                ) / (new_size * new_size)
            dist[k, i] = dist[i, k] = updated

        merges.append(
            MergeStep(left=pair_key[0], right=pair_key[1], distance=float(d), size=new_size)
        )
        # Slot i now carries the merged cluster; slot j retires.
        nodes[i] = p + step_index
        sizes[i] = new_size
        active.pop(b_pos)

    return Dendrogram(leaf_ids=tuple(leaf_ids), merges=tuple(merges))


def f_cluster(dendrogram: Dendrogram, k: int) -> np.ndarray:
    """Flat clusters after exactly ``P - k`` merge steps.

    Returns a length-P array of labels in ``1..k``; labels are assigned by
    each cluster's smallest contained leaf index, ascending. The k-cluster
    partition always refines the (k-1)-cluster partition because both are
    prefixes of the same merge sequence.
    """
    p = dendrogram.num_leaves
    if not 1 <= k <= p:
        raise ValueError(f"k must lie in 1..{p}, got {k}")
    members: dict[int, list[int]] = {i: [i] for i in range(p)}
    for step_index in range(p - k):
        step = dendrogram.merges[step_index]
        merged = members.pop(step.left) + members.pop(step.right)
        members[p + step_index] = merged

    clusters = sorted(members.values(), key=min)
    labels = np.zeros(p, dtype=np.int64)
    for label, leaves in enumerate(clusters, start=1):
        for leaf in leaves:
            labels[leaf] = label
    return labels


DENDROGRAM_FORMAT = "hsel-dendrogram v1"


def write_dendrogram(dendrogram: Dendrogram, path: str) -> None:
    """Plain-text export: leaf table then merge table, stable field order."""
    lines = [DENDROGRAM_FORMAT, f"leaves {dendrogram.num_leaves}"]
    for i, cid in enumerate(dendrogram.leaf_ids):
        lines.append(f"{i} {cid.canonical}")
    lines.append(f"merges {len(dendrogram.merges)}")
    for step_index, step in enumerate(dendrogram.merges):
        node = dendrogram.num_leaves + step_index
        lines.append(f"{node} {step.left} {step.right} {step.distance!r} {step.size}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_dendrogram(path: str) -> Dendrogram:
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines or lines[0] != DENDROGRAM_FORMAT:
        raise ValueError(f"{path}: not a {DENDROGRAM_FORMAT} file")
    if not lines[1].startswith("leaves "):
        raise ValueError(f"{path}: line 2: expected 'leaves <count>'")
    n_leaves = int(lines[1].split()[1])
    leaf_ids = []
    for i in range(n_leaves):
        _, name = lines[2 + i].split(" ", 1)
        leaf_ids.append(ClassifierId.parse(name))
    merge_header = lines[2 + n_leaves]
    if not merge_header.startswith("merges "):
        raise ValueError(f"{path}: expected 'merges <count>' after the leaf table")
    merges = []
    for line in lines[3 + n_leaves :]:
        _, left, right, distance, size = line.split()
        merges.append(
            MergeStep(left=int(left), right=int(right), distance=float(distance), size=int(size))
        )
    return Dendrogram(leaf_ids=tuple(leaf_ids), merges=tuple(merges))
