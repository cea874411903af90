"""Pairwise double-fault measure and the dissimilarity matrix built from it."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import ClassifierId, PredictionMatrix


def double_fault(
    pred_a: Sequence[int], pred_b: Sequence[int], truth: Sequence[int]
) -> float:
    """Fraction of instances on which both classifiers are wrong.

    A low value means the pair rarely fails together, i.e. their errors are
    decorrelated; this is the quantity whose structure the clustering stage
    exploits. Exact: an integer count divided by N.
    """
    a = np.asarray(pred_a, dtype=np.int64)
    b = np.asarray(pred_b, dtype=np.int64)
    t = np.asarray(truth, dtype=np.int64)
    if a.shape != t.shape or b.shape != t.shape or a.ndim != 1:
        raise ValueError("pred_a, pred_b, and truth must be 1-d and the same length")
    if a.size == 0:
        raise ValueError("double_fault needs at least one instance")
    both_wrong = int(((a != t) & (b != t)).sum())
    return both_wrong / a.size


def complement(df: float) -> float:
    """Default double-fault-to-distance conversion: distance = 1 - DF.

    High co-failure means redundancy, so redundant pairs come out close and
    cluster together. Two perfect classifiers sit at distance 1 under this
    mapping even though they behave identically; that is the double-fault
    semantics (diversity as error decorrelation), not a bug.
    """
    return 1.0 - df


CONVERSIONS: dict[str, Callable[[float], float]] = {"complement": complement}


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Symmetric pairwise classifier distances in [0, 1] with a zero diagonal."""

    ids: tuple[ClassifierId, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        n = len(self.ids)
        if values.shape != (n, n):
            raise ValueError(f"matrix shape {values.shape} does not match {n} ids")
        if not np.array_equal(values, values.T):
            raise ValueError("dissimilarity matrix must be exactly symmetric")
        if np.any(np.diag(values) != 0.0):
            raise ValueError("self-distance must be 0")
        if values.min() < 0.0 or values.max() > 1.0:
            raise ValueError("distances must lie in [0, 1]")
        canon = [cid.canonical for cid in self.ids]
        if len(set(canon)) != len(canon):
            raise ValueError("duplicate classifier ids in dissimilarity matrix")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "ids", tuple(self.ids))

    @property
    def size(self) -> int:
        return len(self.ids)

    def mean_pairwise(self, indices: Sequence[int]) -> float:
        """Average distance over unordered pairs of the given members; 0 for
        fewer than two members."""
        idx = list(indices)
        if len(idx) < 2:
            return 0.0
        total = 0.0
        count = 0
        for i in range(len(idx)):
            for j in range(i + 1, len(idx)):
                total += float(self.values[idx[i], idx[j]])
                count += 1
        return total / count


def dissimilarity_matrix(
    pm: PredictionMatrix,
    conversion: str | Callable[[float], float] = "complement",
) -> DissimilarityMatrix:
    """Pairwise distances over a prediction matrix's classifier columns.

    Each off-diagonal entry is ``conversion(double_fault(col_i, col_j))``;
    the diagonal is 0 by construction. Each unordered pair is computed once
    and mirrored, so the result is exactly symmetric. Alternate conversion
    strategies can be passed as a callable mapping a DF fraction to a
    distance in [0, 1].
    """
    if pm.n_classifiers < 2:
        raise ValueError("need at least 2 classifiers to build a dissimilarity matrix")
    if isinstance(conversion, str):
        if conversion not in CONVERSIONS:
            raise ValueError(
                f"unknown conversion {conversion!r}; expected one of {sorted(CONVERSIONS)}"
            )
        convert = CONVERSIONS[conversion]
    else:
        convert = conversion
    n = pm.n_classifiers
    wrong = pm.predictions != pm.truth[:, None]
    values = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            df = int((wrong[:, i] & wrong[:, j]).sum()) / pm.n_instances
            values[i, j] = values[j, i] = float(convert(df))
    return DissimilarityMatrix(ids=pm.classifier_ids, values=values)


def write_dissimilarity_csv(matrix: DissimilarityMatrix, path: str) -> None:
    """Square DSV export with the id header row and column, full precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        names = [cid.canonical for cid in matrix.ids]
        writer.writerow(["id"] + names)
        for i, name in enumerate(names):
            writer.writerow([name] + [repr(float(v)) for v in matrix.values[i]])


def read_dissimilarity_csv(path: str) -> DissimilarityMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty matrix file") from None
        if not header or header[0].strip().lower() != "id":
            raise ValueError(f"{path}: line 1: first header field must be 'id'")
        names = [h.strip() for h in header[1:]]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(names) + 1:
                raise ValueError(
                    f"{path}: line {lineno}: expected {len(names) + 1} fields, found {len(row)}"
                )
            if row[0].strip() != names[lineno - 2]:
                raise ValueError(
                    f"{path}: line {lineno}: row id {row[0]!r} does not match header order"
                )
            rows.append([float(v) for v in row[1:]])
    ids = tuple(ClassifierId.parse(name) for name in names)
    return DissimilarityMatrix(ids=ids, values=np.array(rows, dtype=np.float64))
