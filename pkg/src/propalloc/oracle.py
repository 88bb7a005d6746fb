"""Exhaustive ground-truth checks for small instances.

Nothing here calls the flow, structure or scaling code; each verifier works
from the instance data alone so it can be used to cross-check them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from propalloc.instance import Instance

HALL_MAX_LEFT = 20
ASSIGN_MAX_SUPPLY = 8
SCALING_MAX_NODES = 24


class OracleTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Certificate:
    holds: bool
    witness: Optional[Any] = None


def _neighbour_mask(instance: Instance) -> list[int]:
    masks = [0] * len(instance.left)
    for a, b in instance.edge_index:
        masks[a] |= 1 << b
    return masks


def _mask_sum(values, mask: int) -> int:
    total, k = 0, 0
    while mask:
        if mask & 1:
            total += values[k]
        mask >>= 1
        k += 1
    return total


def _ids(ids, mask: int) -> tuple[str, ...]:
    return tuple(nid for k, nid in enumerate(ids) if mask >> k & 1)


def brute_hall_slack(instance: Instance) -> Certificate:
    """Check C_{N(X)} > S_X for every nonempty proper subset X of the left side.

    The witness is the first X (in bitmask order) where it fails.
    """
    n = len(instance.left)
    if n > HALL_MAX_LEFT:
        raise OracleTooLarge(f"|I| = {n} exceeds {HALL_MAX_LEFT}")
    nbr = _neighbour_mask(instance)
    for mask in range(1, (1 << n) - 1):
        nx = 0
        for a in range(n):
            if mask >> a & 1:
                nx |= nbr[a]
        if _mask_sum(instance.capacities, nx) <= _mask_sum(instance.supplies, mask):
            return Certificate(False, _ids(instance.left_ids, mask))
    return Certificate(True)


def enumerate_perfect_assignments(instance: Instance) -> list[dict[tuple[str, str], int]]:
    """All integral assignments that place every unit of supply within capacity.

    Unit copies of a left node are interchangeable, so copies of the same node
    pick neighbours in non-decreasing edge order; this yields each assignment
    exactly once. Returned maps hold only edges with positive flow.
    """
    total = instance.total_supply
    if total > ASSIGN_MAX_SUPPLY:
        raise OracleTooLarge(f"S_I = {total} exceeds {ASSIGN_MAX_SUPPLY}")
    if total != instance.total_capacity:
        return []
    copies = [a for a, s in enumerate(instance.supplies) for _ in range(s)]
    edges_of = [[k for k, (p, _) in enumerate(instance.edge_index) if p == a] for a in range(len(instance.left))]
    room = list(instance.capacities)
    counts = [0] * len(instance.edges)
    out: list[dict[tuple[str, str], int]] = []

    def place(pos: int, floor: int) -> None:
        if pos == len(copies):
            out.append({instance.edges[k]: c for k, c in enumerate(counts) if c})
            return
        a = copies[pos]
        for k in edges_of[a]:
            if k < floor:
                continue
            b = instance.edge_index[k][1]
            if room[b] == 0:
                continue
            room[b] -= 1
            counts[k] += 1
            same_next = pos + 1 < len(copies) and copies[pos + 1] == a
            place(pos + 1, k if same_next else 0)
            counts[k] -= 1
            room[b] += 1

    place(0, 0)
    return out


def scalability_certificate(instance: Instance) -> Certificate:
    """Combinatorial (S, C)-scalability test of the incidence matrix.

    Requires equal totals, and for every independent pair (X, Y) that
    S_X + C_Y <= n, with equality only when no edge joins the left
    complement of X to the right complement of Y.
    """
    n_l, n_r = len(instance.left), len(instance.right)
    if n_l + n_r > SCALING_MAX_NODES:
        raise OracleTooLarge(f"|I| + |J| = {n_l + n_r} exceeds {SCALING_MAX_NODES}")
    total = instance.total_supply
    if total != instance.total_capacity:
        return Certificate(False, {"supply_total": total, "capacity_total": instance.total_capacity})
    nbr = _neighbour_mask(instance)
    full_r = (1 << n_r) - 1
    for xm in range(1 << n_l):
        nx = 0
        for a in range(n_l):
            if xm >> a & 1:
                nx |= nbr[a]
        free = full_r & ~nx
        sx = _mask_sum(instance.supplies, xm)
        # submasks of the non-neighbourhood, ascending
        ym = 0
        while True:
            lhs = sx + _mask_sum(instance.capacities, ym)
            if lhs > total:
                return Certificate(False, (_ids(instance.left_ids, xm), _ids(instance.right_ids, ym)))
            if lhs == total:
                comp_y = full_r & ~ym
                if any(nbr[a] & comp_y for a in range(n_l) if not xm >> a & 1):
                    return Certificate(
                        False, (_ids(instance.left_ids, xm), _ids(instance.right_ids, ym))
                    )
            if ym == free:
                break
            ym = (ym - free) & free
    return Certificate(True)


def _values(instance: Instance, alpha: np.ndarray) -> np.ndarray:
    """Allocation value for each row of a weight batch, straight from the formula."""
    idx = np.array(instance.edge_index, dtype=np.int64).reshape(-1, 2)
    rows, cols = idx[:, 0], idx[:, 1]
    supply = np.array(instance.supplies, float)
    cap = np.array(instance.capacities, float)
    a_e = alpha[:, cols]
    denom = np.zeros((alpha.shape[0], len(supply)))
    np.add.at(denom.T, rows, a_e.T)
    x = supply[rows] * a_e / denom[:, rows]
    alloc = np.zeros((alpha.shape[0], len(cap)))
    np.add.at(alloc.T, cols, x.T)
    return np.minimum(alloc, cap).sum(axis=1)


def best_proportional_search(instance: Instance, samples: int, seed: int):
    """Best proportional value over random and a few fixed weight vectors.

    Samples are log-uniform in [1e-6, 1e6]; uniform weights and weights equal
    to the capacities are always tried first. Returns (value, weights).
    """
    n_r = len(instance.right)
    rng = np.random.default_rng(seed)
    fixed = np.vstack([np.ones(n_r), np.array(instance.capacities, float)])
    batch = np.vstack([fixed, 10.0 ** rng.uniform(-6.0, 6.0, size=(samples, n_r))])
    vals = _values(instance, batch)
    k = int(np.argmax(vals))
    return float(vals[k]), dict(zip(instance.right_ids, batch[k].tolist()))
