"""User partitioning: channel features, k-means seeding, bottleneck refinement.

The initial partition clusters users whose end-to-end channel rows look alike
(scale removed), so members of a group see similar interference structure for
their shared stream.  Refinement then walks the current bottleneck user to
whichever other group lifts the minimum rate most, never emptying a group.

A brute-force enumerator over all set partitions provides the oracle for
small instances.
"""

from __future__ import annotations

import warnings
from typing import Callable, Iterator

import numpy as np

from .rsma import Grouping

BRUTE_FORCE_MAX_USERS = 8


def user_features(end_to_end: np.ndarray, mode: str = "reim") -> np.ndarray:
    """Per-user feature rows from the end-to-end channel, unit L2 norm.

    ``reim`` concatenates real and imaginary parts (dimension 2*N_t);
    ``magnitude`` uses entry magnitudes (dimension N_t).  An all-zero channel
    row yields an all-zero feature and a warning.
    """
    h = np.asarray(end_to_end)
    if mode == "reim":
        feats = np.concatenate([h.real, h.imag], axis=1)
    elif mode == "magnitude":
        feats = np.abs(h)
    else:
        raise ValueError(f"user_features: unknown mode {mode!r}")
    feats = np.asarray(feats, dtype=float)
    norms = np.linalg.norm(feats, axis=1, keepdims=True)
    zero = norms[:, 0] == 0.0
    if np.any(zero):
        warnings.warn(f"user_features: zero channel row(s) at users {np.nonzero(zero)[0].tolist()}")
        norms[zero] = 1.0
    return feats / norms


def _kpp_init(points: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding."""
    centroids = np.empty((n, points.shape[1]))
    centroids[0] = points[rng.integers(points.shape[0])]
    for j in range(1, n):
        d2 = np.min(
            ((points[:, None, :] - centroids[None, :j, :]) ** 2).sum(axis=2), axis=1
        )
        total = d2.sum()
        if total == 0.0:
            centroids[j] = points[rng.integers(points.shape[0])]
        else:
            centroids[j] = points[rng.choice(points.shape[0], p=d2 / total)]
    return centroids


def _lloyd(points: np.ndarray, n: int, rng: np.random.Generator, max_iters: int) -> tuple[np.ndarray, float]:
    centroids = _kpp_init(points, n, rng)
    labels = None
    for _ in range(max_iters):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        # reseed any empty cluster with the farthest point of a multi-member cluster
        for j in range(n):
            if not np.any(new_labels == j):
                assigned = d2[np.arange(points.shape[0]), new_labels]
                donors = np.bincount(new_labels, minlength=n)[new_labels] > 1
                far = int(np.where(donors, assigned, -np.inf).argmax())
                new_labels[far] = j
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(n):
            centroids[j] = points[labels == j].mean(axis=0)
    wcss = float(((points - centroids[labels]) ** 2).sum())
    return labels, wcss


def kmeans_partition(
    features: np.ndarray,
    num_groups: int,
    rng: np.random.Generator,
    replicates: int = 10,
    max_iters: int = 100,
) -> Grouping:
    """Best-of-``replicates`` Lloyd clustering into non-empty groups.

    Restarts are scored by within-cluster sum of squares; the whole procedure
    is deterministic given the generator state.
    """
    points = np.asarray(features, dtype=float)
    k = points.shape[0]
    if num_groups < 1:
        raise ValueError(f"kmeans_partition: num_groups must be >= 1, got {num_groups}")
    if num_groups > k:
        raise ValueError(f"kmeans_partition: num_groups {num_groups} exceeds user count {k}")
    best_labels, best_wcss = None, np.inf
    for _ in range(replicates):
        labels, wcss = _lloyd(points, num_groups, rng, max_iters)
        if wcss < best_wcss:
            best_labels, best_wcss = labels, wcss
    return Grouping(tuple(int(g) for g in best_labels), num_groups)


def greedy_refine(
    rate_eval: Callable[[Grouping], np.ndarray],
    initial: Grouping,
    max_rounds: int,
) -> Grouping:
    """Bottleneck-user reassignment, steepest ascent on the minimum rate.

    Per round: find the lowest-rate user (lowest index on ties), try moving it
    to every other group, take the best strictly improving move.  Moves that
    would empty the source group are skipped.  Stops after ``max_rounds``
    rounds or when no move improves; the returned partition's minimum rate is
    never below the initial one.
    """
    if max_rounds < 1:
        raise ValueError(f"greedy_refine: max_rounds must be >= 1, got {max_rounds}")
    current = initial
    rates = np.asarray(rate_eval(current), dtype=float)
    best_min = float(rates.min())
    for _ in range(max_rounds):
        bottleneck = int(np.argmin(rates))
        source = current.group_of[bottleneck]
        if current.sizes()[source] <= 1:
            break
        best_move = None
        best_move_rates = None
        candidate_min = best_min
        for g in range(current.num_groups):
            if g == source:
                continue
            candidate = current.move(bottleneck, g)
            cand_rates = np.asarray(rate_eval(candidate), dtype=float)
            cand_min = float(cand_rates.min())
            if cand_min > candidate_min:
                best_move, best_move_rates, candidate_min = candidate, cand_rates, cand_min
        if best_move is None:
            break
        current, rates, best_min = best_move, best_move_rates, candidate_min
    return current


def _canonical_partitions(num_users: int, num_groups: int) -> Iterator[tuple[int, ...]]:
    """Set partitions into exactly ``num_groups`` non-empty blocks
    (restricted-growth form; Stirling-number many)."""
    assign = [0] * num_users

    def rec(i: int, used: int) -> Iterator[tuple[int, ...]]:
        if i == num_users:
            if used == num_groups:
                yield tuple(assign)
            return
        # prune: remaining users must still be able to open the missing groups
        if used + (num_users - i) < num_groups:
            return
        for g in range(min(used + 1, num_groups)):
            assign[i] = g
            yield from rec(i + 1, max(used, g + 1))

    yield from rec(0, 0)


def _surjective_assignments(num_users: int, num_groups: int) -> Iterator[tuple[int, ...]]:
    """All labeled assignments onto ``num_groups`` non-empty groups.

    Group labels matter to the rate math (each group stream rides its own
    feed antenna), so every relabeling of every set partition is yielded.
    """
    from itertools import permutations

    for assignment in _canonical_partitions(num_users, num_groups):
        for perm in permutations(range(num_groups)):
            yield tuple(perm[g] for g in assignment)


def brute_force_grouping(
    rate_eval: Callable[[Grouping], np.ndarray],
    num_users: int,
    num_groups: int,
) -> tuple[Grouping, float]:
    """Exhaustive max-min partition search; guard-railed to small instances."""
    if num_users > BRUTE_FORCE_MAX_USERS:
        raise ValueError(
            f"brute_force_grouping: {num_users} users exceeds the guard of {BRUTE_FORCE_MAX_USERS}"
        )
    if not (1 <= num_groups <= num_users):
        raise ValueError("brute_force_grouping: need 1 <= num_groups <= num_users")
    best: Grouping | None = None
    best_min = -np.inf
    for assignment in _surjective_assignments(num_users, num_groups):
        grouping = Grouping(assignment, num_groups)
        value = float(np.min(rate_eval(grouping)))
        if value > best_min:
            best, best_min = grouping, value
    assert best is not None
    return best, best_min
