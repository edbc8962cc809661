"""Per-participant strategy vectors and K-means clustering with elbow-based
k selection.

A strategy vector holds, for each condition, the five IS-type proportions,
giving a point in R^10 per source. Distances are raw Euclidean: all
dimensions already share the [0, 1] scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import IS_TYPE_LABELS, FocusCondition
from .errors import KTooLarge, RangeTooSmall
from .metrics import RunProfile, merge_profiles

# Fixed vector layout: OBJ_FOC block then SUBJ_FOC block, IS-types in
# IS_TYPE_LABELS order within each block.
CONDITION_ORDER = (FocusCondition.OBJECT_FOCUS, FocusCondition.SUBJECT_FOCUS)
VECTOR_LABELS = tuple(
    f"{cond.value}:{label}" for cond in CONDITION_ORDER for label in IS_TYPE_LABELS
)


@dataclass(frozen=True)
class StrategyVector:
    source_id: str
    values: tuple[float, ...]   # len 10; absent categories are 0

    def __post_init__(self):
        if len(self.values) != len(VECTOR_LABELS):
            raise ValueError(f"expected {len(VECTOR_LABELS)} values, got {len(self.values)}")


@dataclass
class Clustering:
    k: int
    assignments: dict[str, int]
    centroids: np.ndarray
    inertia: float


@dataclass
class ElbowResult:
    k: int
    curve: list[tuple[int, float]]          # (k, inertia), full range
    second_differences: dict[int, float]
    low_confidence: bool


def build_vectors(profiles: Iterable[RunProfile]) -> list[StrategyVector]:
    """One vector per source, pooling runs within each condition.

    Conditions with no categorised responses contribute five zeros.
    Output sorted by source_id.
    """
    by_source: dict[str, list[RunProfile]] = {}
    for profile in profiles:
        by_source.setdefault(profile.source_id, []).append(profile)
    vectors = []
    for source_id in sorted(by_source):
        merged = merge_profiles(by_source[source_id], source_id)
        values: list[float] = []
        for cond in CONDITION_ORDER:
            profile = merged.get(cond)
            if profile is None or profile.n_categorised == 0:
                values.extend([0.0] * len(IS_TYPE_LABELS))
            else:
                props = profile.proportions()
                values.extend(props[label] for label in IS_TYPE_LABELS)
        vectors.append(StrategyVector(source_id=source_id, values=tuple(values)))
    return vectors


def _canonical(vectors: Sequence[StrategyVector]) -> tuple[list[str], np.ndarray]:
    """Sort by source_id so results are independent of input order."""
    ordered = sorted(vectors, key=lambda v: v.source_id)
    ids = [v.source_id for v in ordered]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate source_id among strategy vectors")
    return ids, np.array([v.values for v in ordered], dtype=float)


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: D^2-weighted sampling of initial centroids."""
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = x[first]
    d2 = ((x - centroids[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))  # all points coincide with a centroid
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centroids[i] = x[idx]
        d2 = np.minimum(d2, ((x - centroids[i]) ** 2).sum(axis=1))
    return centroids


def _lloyd(x: np.ndarray, centroids: np.ndarray, max_iter: int, tol: float):
    k = centroids.shape[0]
    labels = np.zeros(len(x), dtype=int)
    prev_inertia = np.inf
    for _ in range(max_iter):
        d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        inertia = float(d2[np.arange(len(x)), labels].sum())
        assert inertia <= prev_inertia + 1e-9, "inertia increased across an iteration"
        new_centroids = centroids.copy()
        for j in range(k):
            members = x[labels == j]
            if len(members):
                new_centroids[j] = members.mean(axis=0)
            else:
                # Re-seat an empty cluster on the worst-fit point.
                worst = int(d2[np.arange(len(x)), labels].argmax())
                new_centroids[j] = x[worst]
        shift = float(np.abs(new_centroids - centroids).max())
        centroids = new_centroids
        if shift <= tol:
            break
        prev_inertia = inertia
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    inertia = float(d2[np.arange(len(x)), labels].sum())
    return labels, centroids, inertia


def kmeans(
    vectors: Sequence[StrategyVector],
    k: int,
    seed: int = 0,
    restarts: int = 10,
    max_iter: int = 300,
    tol: float = 1e-9,
) -> Clustering:
    """Lloyd's algorithm with k-means++ init, best inertia over restarts.

    Deterministic given (data, k, seed, restarts); input order never
    matters because vectors are canonicalized by source_id first.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(vectors):
        raise KTooLarge(f"k={k} exceeds {len(vectors)} vectors")
    ids, x = _canonical(vectors)
    best = None
    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        centroids = _kmeans_pp_init(x, k, rng)
        labels, centroids, inertia = _lloyd(x, centroids, max_iter, tol)
        if best is None or inertia < best[0] - 1e-12:
            best = (inertia, labels, centroids)
    inertia, labels, centroids = best
    return Clustering(
        k=k,
        assignments={sid: int(lab) for sid, lab in zip(ids, labels)},
        centroids=centroids,
        inertia=inertia,
    )


def elbow(
    vectors: Sequence[StrategyVector],
    k_range: Sequence[int],
    seed: int = 0,
    restarts: int = 10,
) -> ElbowResult:
    """Pick k maximizing the second difference of the inertia curve.

    Needs at least three contiguous k values. When no knee clearly
    dominates (the best curvature is not well above the runner-up) the
    choice is flagged low-confidence; the full curve is returned either
    way so callers can override.
    """
    ks = list(k_range)
    if len(ks) < 3:
        raise RangeTooSmall("need at least 3 k values for a second difference")
    if ks != list(range(ks[0], ks[-1] + 1)) or ks[0] < 1:
        raise ValueError("k_range must be contiguous with min >= 1")
    inertias = {k: kmeans(vectors, k, seed=seed, restarts=restarts).inertia for k in ks}
    d2 = {
        k: inertias[k - 1] - 2.0 * inertias[k] + inertias[k + 1]
        for k in ks[1:-1]
    }
    chosen = max(sorted(d2), key=lambda k: d2[k])
    ranked = sorted(d2.values(), reverse=True)
    runner_up = ranked[1] if len(ranked) > 1 else 0.0
    low_confidence = d2[chosen] <= 0 or (runner_up > 0 and d2[chosen] < 1.5 * runner_up)
    return ElbowResult(
        k=chosen,
        curve=[(k, inertias[k]) for k in ks],
        second_differences=d2,
        low_confidence=low_confidence,
    )
