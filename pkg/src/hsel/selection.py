"""Ensemble candidate selection over the clustered pool.

``hierarchy_select`` sweeps every hierarchy level k, cutting the dendrogram
into k flat clusters and keeping the best-scoring classifier of each
cluster, which yields one candidate ensemble per level. ``choose_final``
turns the candidate list into a single deployed ensemble under a
configurable rule. The elbow heuristic, per-token groups, and the random
baseline provide the comparison points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .core import METRIC_NAMES, ClassifierId, EvalEntry
from .diversity import DissimilarityMatrix
from .hiercluster import Dendrogram, f_cluster

FINAL_RULES = ("max-validation", "max-diversity", "weighted")


@dataclass(frozen=True)
class EnsembleCandidate:
    """A selected classifier subset: one member per cluster at level k.

    ``validation_score`` is the stacked candidate's metric on VALIDATION and
    is filled in by the combination stage; selection itself only knows the
    per-member scores.
    """

    level_k: int
    metric_name: str
    members: tuple[ClassifierId, ...]
    mean_pairwise_distance: float
    validation_score: float | None = None

    def with_score(self, score: float) -> "EnsembleCandidate":
        return replace(self, validation_score=score)


def hierarchy_select(
    dendrogram: Dendrogram,
    matrix: DissimilarityMatrix,
    scores: Mapping[str, EvalEntry],
    metric: str = "accuracy",
) -> list[EnsembleCandidate]:
    """One candidate ensemble per hierarchy level k = 1..P.

    At each level the pool is partitioned into k flat clusters and the
    classifier maximizing the chosen metric is kept from each cluster, ties
    broken toward the lexicographically smallest canonical id. Candidate
    members are ordered by cluster label (ascending smallest leaf index).
    """
    if metric not in METRIC_NAMES:
        raise ValueError(f"metric {metric!r} absent from scores; expected one of {METRIC_NAMES}")
    dendro_ids = [cid.canonical for cid in dendrogram.leaf_ids]
    matrix_ids = [cid.canonical for cid in matrix.ids]
    if dendro_ids != matrix_ids:
        raise ValueError("dendrogram and dissimilarity matrix must share one id order")
    missing = [name for name in dendro_ids if name not in scores]
    if missing:
        raise ValueError(f"scores missing for classifiers: {missing}")

    p = dendrogram.num_leaves
    candidates = []
    for k in range(1, p + 1):
        labels = f_cluster(dendrogram, k)
        member_indices = []
        for label in range(1, k + 1):
            cluster = [i for i in range(p) if labels[i] == label]
            best = min(
                cluster,
                key=lambda i: (-scores[dendro_ids[i]].metric(metric), dendro_ids[i]),
            )
            member_indices.append(best)
        candidates.append(
            EnsembleCandidate(
                level_k=k,
                metric_name=metric,
                members=tuple(dendrogram.leaf_ids[i] for i in member_indices),
                mean_pairwise_distance=matrix.mean_pairwise(member_indices),
            )
        )
    return candidates


def _rule_key(candidate: EnsembleCandidate, rule: str, alpha: float):
    score = candidate.validation_score
    dist = candidate.mean_pairwise_distance
    if rule == "max-diversity":
        tie_score = score if score is not None else -math.inf
        return (dist, tie_score, -candidate.level_k)
    if score is None:
        raise ValueError(
            f"rule {rule!r} needs stacked validation scores on every candidate"
        )
    if rule == "max-validation":
        return (score, dist, -candidate.level_k)
    return (alpha * score + (1.0 - alpha) * dist, dist, -candidate.level_k)


def choose_final(
    candidates: Sequence[EnsembleCandidate],
    rule: str = "max-validation",
    alpha: float = 0.5,
) -> EnsembleCandidate:
    """Pick the deployed ensemble from the level sweep.

    max-diversity: highest mean pairwise distance, ties by validation score
    then smaller k. max-validation: highest stacked validation score, ties
    by distance then smaller k. weighted: ``alpha * score +
    (1 - alpha) * distance`` with the max-validation tie chain.
    """
    rule = rule.strip().lower()
    if rule not in FINAL_RULES:
        raise ValueError(f"unknown rule {rule!r}; expected one of {FINAL_RULES}")
    if not candidates:
        raise ValueError("no candidates to choose from")
    if rule == "weighted" and not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    ordered = sorted(candidates, key=lambda c: c.level_k)
    return max(ordered, key=lambda c: _rule_key(c, rule, alpha))


def _chord_knee(w: Sequence[float]) -> int:
    """Knee of the curve (k, w[k-1]) for k = 1..P by chord distance.

    Returns the interior k whose point is farthest from the chord joining
    the endpoints; ties resolve to the smaller k. Endpoints are never
    returned (their chord distance is identically 0).
    """
    p = len(w)
    if p < 3:
        raise ValueError("need at least 3 levels to locate a knee")
    x1, y1 = 1.0, float(w[0])
    x2, y2 = float(p), float(w[-1])
    norm = math.hypot(x2 - x1, y2 - y1)
    best_k, best_d = 2, -1.0
    for k in range(2, p):
        y = float(w[k - 1])
        area = abs((y2 - y1) * k - (x2 - x1) * y + x2 * y1 - y2 * x1)
        d = area / norm if norm > 0 else 0.0
        if d > best_d:
            best_k, best_d = k, d
    return best_k


def within_cluster_totals(dendrogram: Dendrogram, matrix: DissimilarityMatrix) -> list[float]:
    """W(k) for k = 1..P: total within-cluster pairwise distance at level k."""
    p = dendrogram.num_leaves
    totals = []
    for k in range(1, p + 1):
        labels = f_cluster(dendrogram, k)
        w = 0.0
        for i in range(p):
            for j in range(i + 1, p):
                if labels[i] == labels[j]:
                    w += float(matrix.values[i, j])
        totals.append(w)
    return totals


def elbow_select(dendrogram: Dendrogram, matrix: DissimilarityMatrix) -> int:
    """Comparator heuristic: the level k at the knee of the W(k) curve."""
    if dendrogram.num_leaves < 3:
        raise ValueError("elbow selection needs at least 3 classifiers")
    return _chord_knee(within_cluster_totals(dendrogram, matrix))


def group_members(
    ids: Sequence[ClassifierId], mode: str, token: str | None = None
) -> list[ClassifierId]:
    """Comparison groups over the pool ids.

    A: all classifiers sharing one algorithm token. B: all sharing one
    extractor token. C: the whole pool. Order follows the pool.
    """
    mode = mode.strip().upper()
    if mode == "C":
        return list(ids)
    if mode not in ("A", "B"):
        raise ValueError(f"unknown group mode {mode!r}; expected A, B, or C")
    if token is None:
        raise ValueError(f"group mode {mode} needs a token")
    token = token.strip().upper()
    if mode == "A":
        members = [cid for cid in ids if cid.algorithm == token]
        available = sorted({cid.algorithm for cid in ids})
    else:
        members = [cid for cid in ids if cid.extractor == token]
        available = sorted({cid.extractor for cid in ids})
    if not members:
        raise ValueError(f"unknown token {token!r} for group {mode}; pool has {available}")
    return members


def random_baseline(num_classes: int) -> float:
    """Expected accuracy of uniform random guessing: 1 / num_classes."""
    if num_classes < 2:
        raise ValueError("baseline needs at least 2 classes")
    return 1.0 / num_classes
