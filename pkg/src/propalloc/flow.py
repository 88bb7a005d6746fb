"""Exact OPT via integral max-flow, plus Hall-deficiency witnesses.

Network: source -> i (cap S_i), i -> j (cap min(S_i, C_j)), j -> sink (cap C_j).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from propalloc.instance import Instance


class NoPerfectMatching(ValueError):
    pass


@dataclass(frozen=True)
class FlowResult:
    value: int
    edge_flows: dict[tuple[str, str], int]
    deficiency_witness: Optional[tuple[str, ...]] = None


class _Dinic:
    def __init__(self, n_nodes: int):
        self.n = n_nodes
        self.head: list[list[int]] = [[] for _ in range(n_nodes)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add_arc(self, u: int, v: int, cap: int) -> int:
        """Add u->v with its reverse arc; returns the forward arc id."""
        arc = len(self.to)
        self.to += [v, u]
        self.cap += [cap, 0]
        self.head[u].append(arc)
        self.head[v].append(arc + 1)
        return arc

    def _levels(self, s: int, t: int) -> Optional[list[int]]:
        level = [-1] * self.n
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for arc in self.head[u]:
                v = self.to[arc]
                if self.cap[arc] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)
        return level if level[t] >= 0 else None

    def _augment(self, s: int, t: int, level: list[int], it: list[int]) -> int:
        # iterative DFS for one blocking-flow path
        stack = [s]
        arcs: list[int] = []
        while stack:
            u = stack[-1]
            if u == t:
                push = min(self.cap[a] for a in arcs)
                for a in arcs:
                    self.cap[a] -= push
                    self.cap[a ^ 1] += push
                return push
            advanced = False
            while it[u] < len(self.head[u]):
                arc = self.head[u][it[u]]
                v = self.to[arc]
                if self.cap[arc] > 0 and level[v] == level[u] + 1:
                    stack.append(v)
                    arcs.append(arc)
                    advanced = True
                    break
                it[u] += 1
            if not advanced:
                level[u] = -1
                stack.pop()
                if arcs:
                    arcs.pop()
                    it[stack[-1]] += 1
        return 0

    def max_flow(self, s: int, t: int) -> int:
        total = 0
        while (level := self._levels(s, t)) is not None:
            it = [0] * self.n
            while push := self._augment(s, t, level, it):
                total += push
        return total

    def reachable(self, s: int) -> list[bool]:
        seen = [False] * self.n
        seen[s] = True
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for arc in self.head[u]:
                v = self.to[arc]
                if self.cap[arc] > 0 and not seen[v]:
                    seen[v] = True
                    queue.append(v)
        return seen


def _solve(
    supplies: Sequence[int],
    capacities: Sequence[int],
    edges: Sequence[tuple[int, int]],
    edge_caps: Optional[Sequence[int]] = None,
):
    """Max-flow on index data. Returns (value, per-edge flows, source-side left set)."""
    n_left, n_right = len(supplies), len(capacities)
    source, sink = n_left + n_right, n_left + n_right + 1
    net = _Dinic(n_left + n_right + 2)
    for a, s in enumerate(supplies):
        net.add_arc(source, a, s)
    for b, c in enumerate(capacities):
        net.add_arc(n_left + b, sink, c)
    arc_ids = []
    for k, (a, b) in enumerate(edges):
        cap = min(supplies[a], capacities[b]) if edge_caps is None else edge_caps[k]
        arc_ids.append(net.add_arc(a, n_left + b, cap))
    value = net.max_flow(source, sink)
    flows = [net.cap[arc ^ 1] for arc in arc_ids]
    seen = net.reachable(source)
    return value, flows, [a for a in range(n_left) if seen[a]]


def max_matching_value(instance: Instance) -> FlowResult:
    """Maximum integral assignment of supply to capacity (OPT).

    When OPT falls short of the total supply, ``deficiency_witness`` holds a
    left set X with C_{N(X)} < S_X, read off the residual min cut.
    """
    value, flows, src_side = _solve(instance.supplies, instance.capacities, instance.edge_index)
    edge_flows = dict(zip(instance.edges, flows))
    witness = None
    if value < instance.total_supply:
        witness = tuple(instance.left_ids[a] for a in src_side)
    return FlowResult(value, edge_flows, witness)


def has_perfect_matching(instance: Instance) -> bool:
    total = instance.total_supply
    if total != instance.total_capacity:
        return False
    return max_matching_value(instance).value == total


def edge_in_some_perfect_assignment(instance: Instance, edge: tuple[str, str]) -> bool:
    """Whether some perfect integral assignment routes at least one unit over ``edge``.

    One unit is forced onto the edge (supply and capacity of its endpoints drop
    by one, the edge keeps its remaining room) and the rest must still be
    perfectly assignable.
    """
    if not has_perfect_matching(instance):
        raise NoPerfectMatching("no perfect matching")
    edge = tuple(edge)
    if edge not in set(instance.edges):
        raise KeyError(f"edge {edge} not in instance")
    a, b = instance.left_index[edge[0]], instance.right_index[edge[1]]
    supplies = list(instance.supplies)
    capacities = list(instance.capacities)
    supplies[a] -= 1
    capacities[b] -= 1
    caps = [min(supplies[p], capacities[q]) for p, q in instance.edge_index]
    value, _, _ = _solve(supplies, capacities, instance.edge_index, caps)
    return value == instance.total_supply - 1
