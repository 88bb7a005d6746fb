"""Proportional and rank-based allocators, allocation value, perfect strategy."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from propalloc.instance import Instance
from propalloc.scaling import NotConverged, Status, WeightVector, sinkhorn, weights_from_scaling
from propalloc.structure import dm_decomposition


class IsolatedLeftNode(ValueError):
    pass


@dataclass(frozen=True)
class Allocation:
    """Sparse x_ij over instance edges, keyed in edge document order."""

    x: dict[tuple[str, str], float]

    def to_document(self, instance: Instance | None = None) -> dict:
        doc: dict = {"x": [[i, j, v] for (i, j), v in self.x.items()]}
        if instance is not None:
            doc["value"] = value(instance, self)
        return doc


@dataclass(frozen=True)
class RankedStrategy:
    rank: dict[str, int]
    weights: dict[str, float]

    def to_document(self) -> dict:
        return {"ranks": dict(self.rank), "weights": dict(self.weights)}


def _check_weights(instance: Instance, weights: Mapping[str, float]) -> None:
    for j in instance.right_ids:
        if j not in weights:
            raise ValueError(f"missing weight for right node {j!r}")
        w = weights[j]
        if not (w > 0 and w != float("inf")):
            raise ValueError(f"weight for {j!r} must be finite and strictly positive")


def _split(instance: Instance, weights: Mapping[str, float], eligible) -> Allocation:
    x: dict[tuple[str, str], float] = {}
    per_left: list[list[int]] = [[] for _ in instance.left]
    for k, (a, b) in enumerate(instance.edge_index):
        per_left[a].append(k)
    for a, ks in enumerate(per_left):
        if not ks:
            raise IsolatedLeftNode(f"{instance.left_ids[a]!r}: no neighbors to allocate to")
    shares: list[float] = [0.0] * len(instance.edges)
    for a, ks in enumerate(per_left):
        chosen = [k for k in ks if eligible(a, instance.edge_index[k][1])]
        denom = sum(weights[instance.edges[k][1]] for k in chosen)
        supply = instance.supplies[a]
        for k in chosen:
            shares[k] = supply * weights[instance.edges[k][1]] / denom
    for k, edge in enumerate(instance.edges):
        x[edge] = shares[k]
    return Allocation(x)


def proportional(instance: Instance, weights: Mapping[str, float]) -> Allocation:
    """x_ij = S_i * alpha_j / sum of alpha over i's neighbours."""
    _check_weights(instance, weights)
    return _split(instance, weights, lambda a, b: True)


def ranked(instance: Instance, strategy: RankedStrategy) -> Allocation:
    """Each left node splits its supply proportionally among its top-rank neighbours.

    All neighbours sharing the maximum rank take part; there is no tie-break.
    """
    _check_weights(instance, strategy.weights)
    missing = [j for j in instance.right_ids if j not in strategy.rank]
    if missing:
        raise ValueError(f"missing rank for right nodes {missing}")
    rank = [strategy.rank[j] for j in instance.right_ids]
    top = [max((rank[b] for b in nbrs), default=None) for nbrs in instance.left_adj]
    return _split(instance, strategy.weights, lambda a, b: rank[b] == top[a])


def alloc_of(instance: Instance, allocation: Allocation, right_id: str) -> float:
    if right_id not in instance.right_index:
        raise KeyError(f"unknown right node {right_id!r}")
    return sum(v for (_, j), v in allocation.x.items() if j == right_id)


def alloc_all(instance: Instance, allocation: Allocation) -> dict[str, float]:
    totals = dict.fromkeys(instance.right_ids, 0.0)
    for (_, j), v in allocation.x.items():
        totals[j] += v
    return totals


def value(instance: Instance, allocation: Allocation) -> float:
    """Sum over right nodes of min(C_j, alloc(j))."""
    totals = alloc_all(instance, allocation)
    return float(sum(min(float(node.capacity), totals[node.id]) for node in instance.right))


def perfect_strategy(instance: Instance) -> RankedStrategy:
    """Rank each right node by its decomposition part and weight it by the
    part's own perfect proportional weights.

    Raises:
        DisconnectedInstance, NoPerfectMatching: precondition failures.
        RuntimeError: a part failed to scale (cannot happen for a valid
            decomposition).
    """
    dm = dm_decomposition(instance)
    rank: dict[str, int] = {}
    weights: dict[str, float] = {}
    for k, (xs, ys) in enumerate(dm.parts, 1):
        part = instance.induced(xs, ys)
        result = sinkhorn(part)
        try:
            alpha = weights_from_scaling(result)
        except NotConverged as exc:
            raise RuntimeError(f"part {k} did not scale: {exc}") from exc
        for j in ys:
            rank[j] = k
            weights[j] = alpha[j]
    order = instance.right_ids
    return RankedStrategy({j: rank[j] for j in order}, {j: weights[j] for j in order})


def sinkhorn_weights(instance: Instance, **kwargs) -> WeightVector:
    result = sinkhorn(instance, **kwargs)
    if result.status is not Status.CONVERGED:
        raise NotConverged(f"scaling status is {result.status.value}")
    return weights_from_scaling(result)


def allocation_from_document(instance: Instance, doc) -> Allocation:
    """Read ``{"x": [[i, j, v], ...]}``; missing instance edges count as 0."""
    if not isinstance(doc, dict) or not isinstance(doc.get("x"), list):
        raise ValueError("allocation document needs an 'x' list")
    known = set(instance.edges)
    x = dict.fromkeys(instance.edges, 0.0)
    for pos, entry in enumerate(doc["x"]):
        if not (isinstance(entry, list) and len(entry) == 3):
            raise ValueError(f"x[{pos}] must be [left, right, amount]")
        i, j, v = entry
        if (i, j) not in known:
            raise ValueError(f"x[{pos}]: ({i}, {j}) is not an instance edge")
        if not isinstance(v, (int, float)) or isinstance(v, bool) or v < 0:
            raise ValueError(f"x[{pos}]: amount must be a nonnegative number")
        x[(i, j)] = float(v)
    return Allocation(x)


def strategy_from_document(doc) -> RankedStrategy:
    if not isinstance(doc, dict) or set(doc) != {"ranks", "weights"}:
        raise ValueError("strategy document needs exactly 'ranks' and 'weights'")
    ranks, weights = doc["ranks"], doc["weights"]
    if not isinstance(ranks, dict) or not isinstance(weights, dict):
        raise ValueError("'ranks' and 'weights' must be objects")
    if any(not isinstance(r, int) or isinstance(r, bool) for r in ranks.values()):
        raise ValueError("ranks must be integers")
    return RankedStrategy(dict(ranks), {k: float(v) for k, v in weights.items()})

