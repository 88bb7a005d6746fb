"""Two-capacity instances: items with (weight, volume), bins with two capacities.

Includes the power-of-two complete bipartite construction on which every
proportional allocation overloads some bin by a factor growing like
2^(n/2 - 1) / n, and tools to measure that overload.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Mapping

import numpy as np

from propalloc.instance import ValidationError, load_json

MAX_POWERS_N = 60


@dataclass(frozen=True)
class Item:
    id: str
    c: float
    v: float


@dataclass(frozen=True)
class Bin:
    id: str
    C: float
    V: float


@dataclass(frozen=True)
class TwoCapInstance:
    items: tuple[Item, ...]
    bins: tuple[Bin, ...]
    edges: tuple[tuple[str, str], ...]

    @cached_property
    def bin_ids(self) -> tuple[str, ...]:
        return tuple(b.id for b in self.bins)

    @cached_property
    def _index(self):
        ii = {it.id: k for k, it in enumerate(self.items)}
        bi = {b.id: k for k, b in enumerate(self.bins)}
        idx = np.array([(ii[i], bi[j]) for i, j in self.edges], dtype=np.int64).reshape(-1, 2)
        return idx[:, 0], idx[:, 1]

    def arrays(self):
        """(rows, cols, c, v, C, V) as numpy arrays."""
        rows, cols = self._index
        return (
            rows,
            cols,
            np.array([it.c for it in self.items]),
            np.array([it.v for it in self.items]),
            np.array([b.C for b in self.bins]),
            np.array([b.V for b in self.bins]),
        )


@dataclass(frozen=True)
class ViolationReport:
    factor: float
    argmax_bin: str
    argmax_kind: str  # "weight" | "volume"


def _positive(value: Any) -> bool:
    return (
        isinstance(value, (int, float))
        and not isinstance(value, bool)
        and math.isfinite(value)
        and value > 0
    )


def validate_twocap(doc: Any) -> TwoCapInstance:
    problems: list[str] = []
    if not isinstance(doc, dict) or set(doc) != {"items", "bins", "edges"}:
        raise ValidationError(["two-cap document needs exactly 'items', 'bins', 'edges'"])
    items: list[Item] = []
    bins: list[Bin] = []
    for side, keys, out, cls in (
        ("items", ("c", "v"), items, Item),
        ("bins", ("C", "V"), bins, Bin),
    ):
        if not isinstance(doc[side], list):
            problems.append(f"'{side}' must be a list")
            continue
        seen: set[str] = set()
        for pos, node in enumerate(doc[side]):
            if not isinstance(node, dict) or set(node) != {"id", *keys}:
                problems.append(f"{side}[{pos}] must have exactly keys id, {', '.join(keys)}")
                continue
            nid = node["id"]
            if not isinstance(nid, str) or nid in seen:
                problems.append(f"{side}[{pos}]: id must be a unique string")
                continue
            seen.add(nid)
            bad = [k for k in keys if not _positive(node[k])]
            if bad:
                problems.append(f"{side} {nid!r}: non-positive {', '.join(bad)}")
                continue
            out.append(cls(nid, float(node[keys[0]]), float(node[keys[1]])))
    item_ids = {it.id for it in items}
    bin_ids = {b.id for b in bins}
    edges: list[tuple[str, str]] = []
    seen_edges: set[tuple[str, str]] = set()
    raw = doc["edges"] if isinstance(doc["edges"], list) else []
    if not isinstance(doc["edges"], list):
        problems.append("'edges' must be a list")
    for pos, e in enumerate(raw):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(s, str) for s in e)):
            problems.append(f"edges[{pos}] must be a pair of id strings")
            continue
        i, j = e
        if i not in item_ids or j not in bin_ids:
            problems.append(f"edges[{pos}]: dangling endpoint")
            continue
        if (i, j) in seen_edges:
            problems.append(f"duplicate edge ({i}, {j})")
            continue
        seen_edges.add((i, j))
        edges.append((i, j))
    if problems:
        raise ValidationError(problems)
    return TwoCapInstance(tuple(items), tuple(bins), tuple(edges))


def parse_twocap(text: str) -> TwoCapInstance:
    return validate_twocap(load_json(text))


def to_document(inst: TwoCapInstance) -> dict:
    return {
        "items": [{"id": it.id, "c": it.c, "v": it.v} for it in inst.items],
        "bins": [{"id": b.id, "C": b.C, "V": b.V} for b in inst.bins],
        "edges": [[i, j] for i, j in inst.edges],
    }


def gen_powers(n: int) -> TwoCapInstance:
    """K_{n,n} with c_i = C_i = 2^(i-1) and v_i = V_i = 2^(n-i)."""
    if not 2 <= n <= MAX_POWERS_N:
        raise ValueError(f"n must be in [2, {MAX_POWERS_N}], got {n}")
    items = tuple(Item(f"i{k}", float(2 ** (k - 1)), float(2 ** (n - k))) for k in range(1, n + 1))
    bins = tuple(Bin(f"j{k}", float(2 ** (k - 1)), float(2 ** (n - k))) for k in range(1, n + 1))
    return TwoCapInstance(items, bins, tuple((it.id, b.id) for it in items for b in bins))


def powers_n(inst: TwoCapInstance) -> int | None:
    """n if ``inst`` is exactly gen_powers(n), else None."""
    n = len(inst.items)
    if 2 <= n <= MAX_POWERS_N and inst == gen_powers(n):
        return n
    return None


def diagonal_feasible(inst: TwoCapInstance) -> bool:
    """Whether item k fits wholly into bin k for every k."""
    n = len(inst.items)
    if len(inst.bins) != n or len(set(inst.edges)) != n * n:
        raise ValueError("diagonal check needs a square complete instance")
    return all(it.c <= b.C and it.v <= b.V for it, b in zip(inst.items, inst.bins))


def _weights_array(inst: TwoCapInstance, weights) -> np.ndarray:
    if isinstance(weights, Mapping):
        alpha = np.array([weights[j] for j in inst.bin_ids], dtype=float)
    else:
        alpha = np.asarray(weights, dtype=float)
    if alpha.shape != (len(inst.bins),):
        raise ValueError("one weight per bin required")
    if not np.all(np.isfinite(alpha)) or np.any(alpha <= 0):
        raise ValueError("weights must be finite and strictly positive")
    return alpha


def proportional_twocap(inst: TwoCapInstance, weights) -> tuple[np.ndarray, np.ndarray]:
    """Per-bin (weight, volume) totals when items split proportionally to ``weights``.

    ``weights`` is a bin-id mapping or a sequence in bin order.
    """
    alpha = _weights_array(inst, weights)
    rows, cols, c, v, _, _ = inst.arrays()
    denom = np.bincount(rows, alpha[cols], minlength=len(inst.items))
    if np.any(denom == 0):
        raise ValueError("every item needs at least one neighbouring bin")
    share = alpha[cols] / denom[rows]
    w_alloc = np.bincount(cols, c[rows] * share, minlength=len(inst.bins))
    v_alloc = np.bincount(cols, v[rows] * share, minlength=len(inst.bins))
    return w_alloc, v_alloc


def violation_factor(inst: TwoCapInstance, weights) -> ViolationReport:
    """Largest allocated/capacity ratio over bins and both kinds.

    Ties go to the earlier bin, then to weight over volume.
    """
    w_alloc, v_alloc = proportional_twocap(inst, weights)
    _, _, _, _, C, V = inst.arrays()
    best = (-1.0, "", "")
    for k, bid in enumerate(inst.bin_ids):
        for ratio, kind in ((w_alloc[k] / C[k], "weight"), (v_alloc[k] / V[k], "volume")):
            if ratio > best[0]:
                best = (float(ratio), bid, kind)
    return ViolationReport(*best)


def violation_factors(inst: TwoCapInstance, batch: np.ndarray) -> np.ndarray:
    """Violation factor for each row of a (k, n_bins) weight batch."""
    batch = np.asarray(batch, dtype=float)
    if batch.ndim != 2 or batch.shape[1] != len(inst.bins):
        raise ValueError("batch must have one column per bin")
    if not np.all(np.isfinite(batch)) or np.any(batch <= 0):
        raise ValueError("weights must be finite and strictly positive")
    rows, cols, c, v, C, V = inst.arrays()
    n_items = len(inst.items)
    dense = np.zeros((n_items, len(inst.bins)))
    dense[rows, cols] = 1.0
    if np.any(dense.sum(axis=1) == 0):
        raise ValueError("every item needs at least one neighbouring bin")
    # share[k, i, j] = alpha_kj / sum over i's bins
    weighted = batch[:, None, :] * dense[None, :, :]
    share = weighted / weighted.sum(axis=2, keepdims=True)
    w_alloc = np.einsum("kij,i->kj", share, c)
    v_alloc = np.einsum("kij,i->kj", share, v)
    return np.maximum((w_alloc / C).max(axis=1), (v_alloc / V).max(axis=1))


def lower_bound(n: int) -> float:
    """2^(n/2 - 1) / n, for even n."""
    if n < 2 or n % 2:
        raise ValueError("lower bound is defined for even n >= 2")
    return 2.0 ** (n // 2 - 1) / n


def random_weights(n_bins: int, samples: int, seed: int) -> np.ndarray:
    """Log-uniform weights in [1e-6, 1e6], shape (samples, n_bins)."""
    rng = np.random.default_rng(seed)
    return 10.0 ** rng.uniform(-6.0, 6.0, size=(samples, n_bins))
