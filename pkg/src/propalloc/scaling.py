"""Alternating (S, C)-scaling of the 0/1 incidence matrix.

Rows are rescaled to the supplies and columns to the capacities until the
largest sum error, divided by the total supply, drops below tolerance. On
matching-covered instances this converges; on the rest the scaling vectors
drift apart without bound, which is reported as divergence.
"""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

import numpy as np

from propalloc.flow import NoPerfectMatching, has_perfect_matching
from propalloc.instance import Instance
from propalloc.structure import DisconnectedInstance, is_connected

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 1_000_000
DIVERGENCE_RATIO = 1e15


class Status(str, Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    ITERATION_CAP = "iteration_cap"


class NotConverged(ValueError):
    pass


@dataclass(frozen=True)
class ScalingResult:
    left_ids: tuple[str, ...]
    right_ids: tuple[str, ...]
    x: np.ndarray
    y: np.ndarray
    residual: float
    iterations: int
    status: Status

    def with_vectors(self, x, y) -> ScalingResult:
        return ScalingResult(
            self.left_ids, self.right_ids, np.asarray(x, float), np.asarray(y, float),
            self.residual, self.iterations, self.status,
        )


class WeightVector(Mapping):
    """Positive per-right-node weights, normalized so the smallest is 1."""

    def __init__(self, alpha: Mapping[str, float]):
        values = np.array(list(alpha.values()), dtype=float)
        if values.size and (not np.all(np.isfinite(values)) or np.any(values <= 0)):
            raise ValueError("weights must be finite and strictly positive")
        low = float(values.min()) if values.size else 1.0
        self._alpha = {k: float(v) / low for k, v in alpha.items()}

    def __getitem__(self, key: str) -> float:
        return self._alpha[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._alpha)

    def __len__(self) -> int:
        return len(self._alpha)

    def __repr__(self) -> str:
        return f"WeightVector({self._alpha!r})"


def _arrays(instance: Instance):
    idx = np.array(instance.edge_index, dtype=np.int64).reshape(-1, 2)
    rows, cols = idx[:, 0], idx[:, 1]
    supply = np.array(instance.supplies, dtype=float)
    capacity = np.array(instance.capacities, dtype=float)
    return rows, cols, supply, capacity


def row_col_sums(instance: Instance, x, y) -> tuple[np.ndarray, np.ndarray]:
    """Row and column sums of the scaled matrix A_ij x_i y_j."""
    rows, cols, _, _ = _arrays(instance)
    entries = np.asarray(x, float)[rows] * np.asarray(y, float)[cols]
    return (
        np.bincount(rows, entries, minlength=len(instance.left)),
        np.bincount(cols, entries, minlength=len(instance.right)),
    )


def sinkhorn_step(instance: Instance, x, y) -> tuple[np.ndarray, np.ndarray]:
    """One row update followed by one column update."""
    rows, cols, supply, capacity = _arrays(instance)
    y = np.asarray(y, float)
    x = supply / np.bincount(rows, y[cols], minlength=len(supply))
    y = capacity / np.bincount(cols, x[rows], minlength=len(capacity))
    return x, y


def sinkhorn(
    instance: Instance,
    tolerance: float = DEFAULT_TOL,
    max_iterations: int = DEFAULT_MAX_ITER,
) -> ScalingResult:
    """Scale the incidence matrix to row sums S and column sums C.

    Starts from x = y = 1. After each row-then-column sweep the column sums
    are exact, so the residual is the worst row error over the total supply.

    Raises:
        DisconnectedInstance, NoPerfectMatching: precondition failures.
    """
    if tolerance <= 0 or max_iterations < 1:
        raise ValueError("tolerance and max_iterations must be positive")
    if not is_connected(instance):
        raise DisconnectedInstance("instance is disconnected")
    if not has_perfect_matching(instance):
        raise NoPerfectMatching("no perfect matching")

    rows, cols, supply, capacity = _arrays(instance)
    n_left, n_right = len(supply), len(capacity)
    total = supply.sum()
    x = np.ones(n_left)
    y = np.ones(n_right)
    status = Status.ITERATION_CAP
    residual = np.inf
    it = 0
    with np.errstate(all="ignore"):
        while it < max_iterations:
            it += 1
            x = supply / np.bincount(rows, y[cols], minlength=n_left)
            y = capacity / np.bincount(cols, x[rows], minlength=n_right)
            row_sums = x * np.bincount(rows, y[cols], minlength=n_left)
            col_sums = y * np.bincount(cols, x[rows], minlength=n_right)
            residual = max(
                np.max(np.abs(row_sums - supply)), np.max(np.abs(col_sums - capacity))
            ) / total
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y)) and np.isfinite(residual)):
                status = Status.DIVERGED
                break
            if x.max() / x.min() > DIVERGENCE_RATIO or y.max() / y.min() > DIVERGENCE_RATIO:
                status = Status.DIVERGED
                break
            if residual <= tolerance:
                status = Status.CONVERGED
                break
    return ScalingResult(
        instance.left_ids, instance.right_ids, x, y, float(residual), it, status
    )


def weights_from_scaling(result: ScalingResult) -> WeightVector:
    """Proportional weights alpha = y, normalized to min 1."""
    if result.status is not Status.CONVERGED:
        raise NotConverged(f"scaling status is {result.status.value}")
    return WeightVector(dict(zip(result.right_ids, result.y.tolist())))


def verify_scaling(instance: Instance, result: ScalingResult, tolerance: float) -> bool:
    if result.x.shape != (len(instance.left),) or result.y.shape != (len(instance.right),):
        return False
    row, col = row_col_sums(instance, result.x, result.y)
    supply = np.array(instance.supplies, float)
    capacity = np.array(instance.capacities, float)
    return bool(
        np.all(np.abs(row - supply) <= tolerance) and np.all(np.abs(col - capacity) <= tolerance)
    )
