"""Single-capacity allocation instances: data model, validation, JSON I/O, generators.

An instance is a bipartite graph whose left nodes carry an integer supply and
whose right nodes carry an integer capacity. Instances are immutable once
validated and all iteration follows document order.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterable

INT64_MAX = 2**63 - 1

_TOP_KEYS = {"left", "right", "edges"}
_LEFT_KEYS = {"id", "supply"}
_RIGHT_KEYS = {"id", "capacity"}


class ValidationError(ValueError):
    """Raised when an instance document violates one or more invariants.

    ``problems`` lists every violation found, not just the first.
    """

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ParseError(ValueError):
    """Malformed JSON. ``line`` and ``column`` locate the failure (1-based)."""

    def __init__(self, msg: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{msg}{where}")


@dataclass(frozen=True)
class LeftNode:
    id: str
    supply: int


@dataclass(frozen=True)
class RightNode:
    id: str
    capacity: int


@dataclass(frozen=True)
class Instance:
    """Validated bipartite allocation instance.

    Construct through :func:`validate`, :func:`parse` or the generators; the
    bare constructor does not check invariants.
    """

    left: tuple[LeftNode, ...]
    right: tuple[RightNode, ...]
    edges: tuple[tuple[str, str], ...]

    @cached_property
    def left_ids(self) -> tuple[str, ...]:
        return tuple(node.id for node in self.left)

    @cached_property
    def right_ids(self) -> tuple[str, ...]:
        return tuple(node.id for node in self.right)

    @cached_property
    def left_index(self) -> dict[str, int]:
        return {nid: k for k, nid in enumerate(self.left_ids)}

    @cached_property
    def right_index(self) -> dict[str, int]:
        return {nid: k for k, nid in enumerate(self.right_ids)}

    @cached_property
    def supplies(self) -> tuple[int, ...]:
        return tuple(node.supply for node in self.left)

    @cached_property
    def capacities(self) -> tuple[int, ...]:
        return tuple(node.capacity for node in self.right)

    @cached_property
    def edge_index(self) -> tuple[tuple[int, int], ...]:
        """Edges as (left position, right position) pairs, document order."""
        li, ri = self.left_index, self.right_index
        return tuple((li[i], ri[j]) for i, j in self.edges)

    @cached_property
    def left_adj(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in self.left]
        for a, b in self.edge_index:
            adj[a].append(b)
        return tuple(tuple(row) for row in adj)

    @cached_property
    def right_adj(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in self.right]
        for a, b in self.edge_index:
            adj[b].append(a)
        return tuple(tuple(col) for col in adj)

    @property
    def total_supply(self) -> int:
        return sum(self.supplies)

    @property
    def total_capacity(self) -> int:
        return sum(self.capacities)

    def neighbors(self, left_id: str) -> list[str]:
        return [self.right_ids[b] for b in self.left_adj[self.left_index[left_id]]]

    def induced(self, left_ids: Iterable[str], right_ids: Iterable[str]) -> Instance:
        """Sub-instance on the given node sets, keeping document order."""
        keep_l, keep_r = set(left_ids), set(right_ids)
        return Instance(
            left=tuple(n for n in self.left if n.id in keep_l),
            right=tuple(n for n in self.right if n.id in keep_r),
            edges=tuple(e for e in self.edges if e[0] in keep_l and e[1] in keep_r),
        )


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def validate(doc: Any) -> Instance:
    """Check a parsed instance document and build an :class:`Instance`.

    Raises:
        ValidationError: listing every violated invariant.
    """
    problems: list[str] = []
    if not isinstance(doc, dict):
        raise ValidationError(["document must be a JSON object"])
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        problems.append(f"unknown keys: {sorted(unknown)}")
    missing = _TOP_KEYS - set(doc)
    if missing:
        problems.append(f"missing keys: {sorted(missing)}")
        raise ValidationError(problems)

    left: list[LeftNode] = []
    right: list[RightNode] = []
    # declared ids, including nodes rejected for a bad quantity
    left_ids: set[str] = set()
    right_ids: set[str] = set()
    for side, keys, qty, out, cls, seen in (
        ("left", _LEFT_KEYS, "supply", left, LeftNode, left_ids),
        ("right", _RIGHT_KEYS, "capacity", right, RightNode, right_ids),
    ):
        nodes = doc[side]
        if not isinstance(nodes, list):
            problems.append(f"'{side}' must be a list")
            continue
        for pos, node in enumerate(nodes):
            if not isinstance(node, dict):
                problems.append(f"{side}[{pos}] must be an object")
                continue
            extra = set(node) - keys
            if extra:
                problems.append(f"{side}[{pos}]: unknown keys {sorted(extra)}")
            nid = node.get("id")
            amount = node.get(qty)
            if not isinstance(nid, str):
                problems.append(f"{side}[{pos}]: id must be a string")
                continue
            if nid in seen:
                problems.append(f"duplicate id {nid!r} on {side} side")
                continue
            seen.add(nid)
            if not _is_int(amount):
                problems.append(f"{side} node {nid!r}: {qty} must be an integer")
                continue
            if amount <= 0:
                problems.append(f"{side} node {nid!r}: non-positive {qty}")
                continue
            if amount > INT64_MAX:
                problems.append(f"{side} node {nid!r}: {qty} exceeds 64-bit range")
                continue
            out.append(cls(nid, amount))

    for name, total in (
        ("supply", sum(n.supply for n in left)),
        ("capacity", sum(n.capacity for n in right)),
    ):
        if total > INT64_MAX:
            problems.append(f"total {name} overflows 64-bit range")

    edges: list[tuple[str, str]] = []
    raw_edges = doc["edges"]
    if not isinstance(raw_edges, list):
        problems.append("'edges' must be a list")
        raw_edges = []
    seen_edges: set[tuple[str, str]] = set()
    for pos, edge in enumerate(raw_edges):
        if (
            not isinstance(edge, list)
            or len(edge) != 2
            or not all(isinstance(v, str) for v in edge)
        ):
            problems.append(f"edges[{pos}] must be a pair of id strings")
            continue
        i, j = edge
        if i not in left_ids or j not in right_ids:
            if i in right_ids and j in left_ids:
                problems.append(f"edges[{pos}] ({i}, {j}): endpoints reversed, left id must come first")
            elif (i in right_ids and j in right_ids) or (i in left_ids and j in left_ids):
                problems.append(f"edges[{pos}] ({i}, {j}): same-side edge")
            else:
                bad = i if i not in left_ids and i not in right_ids else j
                problems.append(f"edges[{pos}]: dangling endpoint {bad!r}")
            continue
        if (i, j) in seen_edges:
            problems.append(f"duplicate edge ({i}, {j})")
            continue
        seen_edges.add((i, j))
        edges.append((i, j))

    if problems:
        raise ValidationError(problems)
    return Instance(tuple(left), tuple(right), tuple(edges))


def to_document(instance: Instance) -> dict:
    return {
        "left": [{"id": n.id, "supply": n.supply} for n in instance.left],
        "right": [{"id": n.id, "capacity": n.capacity} for n in instance.right],
        "edges": [[i, j] for i, j in instance.edges],
    }


def serialize(instance: Instance) -> str:
    return json.dumps(to_document(instance))


def load_json(text: str) -> Any:
    """``json.loads`` that reports failures as :class:`ParseError`."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def parse(text: str) -> Instance:
    return validate(load_json(text))


def _unit(left_ids, right_ids, edges) -> Instance:
    return Instance(
        tuple(LeftNode(i, 1) for i in left_ids),
        tuple(RightNode(j, 1) for j in right_ids),
        tuple(edges),
    )


def gen_path3() -> Instance:
    """Path i2-j2-i1-j1 with unit supplies and capacities."""
    return _unit(["i1", "i2"], ["j1", "j2"], [("i1", "j1"), ("i1", "j2"), ("i2", "j2")])


def gen_complete(n: int) -> Instance:
    if n < 1:
        raise ValueError("gen_complete needs n >= 1")
    li = [f"i{k}" for k in range(1, n + 1)]
    rj = [f"j{k}" for k in range(1, n + 1)]
    return _unit(li, rj, [(i, j) for i in li for j in rj])


def gen_even_cycle(n: int) -> Instance:
    """Cycle i1-j1-i2-j2-...-in-jn-i1 on 2n nodes."""
    if n < 2:
        raise ValueError("gen_even_cycle needs n >= 2")
    li = [f"i{k}" for k in range(1, n + 1)]
    rj = [f"j{k}" for k in range(1, n + 1)]
    edges = []
    for k in range(n):
        edges.append((li[k], rj[k]))
        edges.append((li[(k + 1) % n], rj[k]))
    return _unit(li, rj, edges)


def gen_random_mc(n: int, extra_edges: int, seed: int) -> Instance:
    """Even cycle on 2n nodes plus ``extra_edges`` random chords.

    Chords are redrawn until the result is matching covered. Same arguments
    always give the same instance.
    """
    from propalloc.structure import is_matching_covered

    base = gen_even_cycle(n)
    present = set(base.edges)
    candidates = [(i, j) for i in base.left_ids for j in base.right_ids if (i, j) not in present]
    if extra_edges < 0 or extra_edges > len(candidates):
        raise ValueError(
            f"extra_edges must be in [0, {len(candidates)}] for n={n}, got {extra_edges}"
        )
    rng = random.Random(seed)
    while True:
        chords = rng.sample(candidates, extra_edges)
        inst = Instance(base.left, base.right, base.edges + tuple(chords))
        if is_matching_covered(inst).covered:
            return inst
