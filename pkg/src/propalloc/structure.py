"""Connectivity, matching-covered test and Dulmage-Mendelsohn decomposition.

The decomposition works on the unit expansion of an instance: every left node
i becomes S_i unit copies, every right node j becomes C_j unit copies, and
copies inherit all adjacencies. A perfect matching of the expansion is
oriented into a digraph (matched edges both ways, other edges left to right);
its strongly connected components, listed sinks first, are the parts.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from propalloc.flow import NoPerfectMatching, has_perfect_matching, max_matching_value
from propalloc.instance import Instance


class DisconnectedInstance(ValueError):
    pass


class ProjectionError(RuntimeError):
    """Unit copies of one node landed in different components (a bug, not bad input)."""


@dataclass(frozen=True)
class DmDecomposition:
    """Ordered parts (X_k, Y_k); ``parts[0]`` is part 1.

    Edges only run from X_k to Y_k' with k >= k'.
    """

    parts: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]

    def __len__(self) -> int:
        return len(self.parts)

    def left_part(self) -> dict[str, int]:
        """Map left id -> 1-based part index."""
        return {i: k for k, (xs, _) in enumerate(self.parts, 1) for i in xs}

    def right_part(self) -> dict[str, int]:
        return {j: k for k, (_, ys) in enumerate(self.parts, 1) for j in ys}


@dataclass(frozen=True)
class McVerdict:
    covered: bool
    tight_set: Optional[tuple[str, ...]] = None
    disconnected: bool = False


def is_connected(instance: Instance) -> bool:
    n_left, n_right = len(instance.left), len(instance.right)
    total = n_left + n_right
    if total == 0:
        return True
    seen = [False] * total
    seen[0] = True
    queue = deque([0])
    while queue:
        u = queue.popleft()
        if u < n_left:
            nbrs = [n_left + b for b in instance.left_adj[u]]
        else:
            nbrs = list(instance.right_adj[u - n_left])
        for v in nbrs:
            if not seen[v]:
                seen[v] = True
                queue.append(v)
    return all(seen)


def strongly_connected_components(succ: Sequence[Sequence[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative, roots tried in index order.

    Components come out in reverse topological order: every arc leaving a
    component points to one emitted earlier.
    """
    n = len(succ)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, pos = work[-1]
            if pos < len(succ[v]):
                work[-1] = (v, pos + 1)
                w = succ[v][pos]
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
    return out


@dataclass(frozen=True)
class UnitExpansion:
    """Unit copies of an instance with a fixed perfect matching.

    Copy nodes are numbered left copies first (grouped by original node in
    document order), then right copies. ``owner[u]`` is ('L', a) or ('R', b).
    """

    owner: tuple[tuple[str, int], ...]
    succ: tuple[tuple[int, ...], ...]
    mate: tuple[int, ...]


def unit_expansion(instance: Instance) -> UnitExpansion:
    """Expand to unit copies and orient a perfect matching.

    The matching comes from the max-flow edge flows; each edge's flow is
    spread over the lowest-numbered free copies of its endpoints, in edge
    document order.
    """
    flows = max_matching_value(instance).edge_flows
    left_start, right_start = [], []
    owner: list[tuple[str, int]] = []
    for a, s in enumerate(instance.supplies):
        left_start.append(len(owner))
        owner += [("L", a)] * s
    for b, c in enumerate(instance.capacities):
        right_start.append(len(owner))
        owner += [("R", b)] * c

    mate = [-1] * len(owner)
    next_left = list(left_start)
    next_right = list(right_start)
    for (i, j), (a, b) in zip(instance.edges, instance.edge_index):
        for _ in range(flows[(i, j)]):
            u, v = next_left[a], next_right[b]
            next_left[a] += 1
            next_right[b] += 1
            mate[u], mate[v] = v, u
    if any(m < 0 for m in mate):
        raise NoPerfectMatching("no perfect matching")

    succ: list[list[int]] = [[] for _ in owner]
    for a, b in instance.edge_index:
        rs = range(right_start[b], right_start[b] + instance.capacities[b])
        for u in range(left_start[a], left_start[a] + instance.supplies[a]):
            succ[u].extend(rs)
    for v in range(len(owner)):
        if owner[v][0] == "R":
            succ[v].append(mate[v])
    return UnitExpansion(tuple(owner), tuple(tuple(s) for s in succ), tuple(mate))


def project_check(
    instance: Instance, owner: Sequence[tuple[str, int]], components: Sequence[Sequence[int]]
) -> DmDecomposition:
    """Contract copy-level components to original nodes.

    Raises:
        ProjectionError: if copies of one original node are split.
    """
    where: dict[tuple[str, int], int] = {}
    for k, comp in enumerate(components):
        for u in comp:
            node = owner[u]
            if where.setdefault(node, k) != k:
                side, pos = node
                nid = instance.left_ids[pos] if side == "L" else instance.right_ids[pos]
                raise ProjectionError(f"unit copies of {nid!r} split across components")
    parts = []
    for k in range(len(components)):
        xs = tuple(i for a, i in enumerate(instance.left_ids) if where.get(("L", a)) == k)
        ys = tuple(j for b, j in enumerate(instance.right_ids) if where.get(("R", b)) == k)
        parts.append((xs, ys))
    return DmDecomposition(tuple(parts))


def dm_decomposition(instance: Instance) -> DmDecomposition:
    """Dulmage-Mendelsohn parts of a connected instance with a perfect matching.

    Parts are indexed so that an arc between parts always runs from the
    higher index to the lower one; consequently no edge joins X_k to Y_k'
    with k < k'.
    """
    if not is_connected(instance):
        raise DisconnectedInstance("instance is disconnected")
    if not has_perfect_matching(instance):
        raise NoPerfectMatching("no perfect matching")
    exp = unit_expansion(instance)
    comps = strongly_connected_components(exp.succ)
    return project_check(instance, exp.owner, comps)


def is_matching_covered(instance: Instance) -> McVerdict:
    """Matching-covered test routed through the decomposition.

    Covered iff connected with a single part. Otherwise the left side of
    part 1 is returned as a tight set: its neighbours all lie in Y_1 and
    S_{X_1} = C_{Y_1}.
    """
    if not has_perfect_matching(instance):
        raise NoPerfectMatching("no perfect matching")
    if not is_connected(instance):
        return McVerdict(False, None, True)
    dm = dm_decomposition(instance)
    if len(dm) == 1:
        return McVerdict(True)
    return McVerdict(False, dm.parts[0][0])
