"""Command-line interface. Every command prints one JSON document on stdout.

Exit codes: 0 success, 1 domain failure (payload carries ``error``),
2 usage or parse error (message on stderr).
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

import numpy as np

from propalloc import allocation as al
from propalloc import instance as inst_mod
from propalloc import twocap
from propalloc.flow import has_perfect_matching, max_matching_value
from propalloc.instance import Instance, ParseError, ValidationError, load_json
from propalloc.scaling import DEFAULT_MAX_ITER, DEFAULT_TOL, Status, sinkhorn, weights_from_scaling
from propalloc.structure import is_connected, is_matching_covered

GEN_KINDS = ("path3", "complete", "cycle", "random-mc", "twocap-powers")


class DomainFailure(Exception):
    def __init__(self, payload: dict):
        self.payload = payload
        super().__init__(payload.get("error", ""))


class UsageFailure(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageFailure(f"cannot read {path}: {exc.strerror}") from None


def _load_doc(path: str):
    try:
        return load_json(_read(path))
    except ParseError as exc:
        raise UsageFailure(f"{path}: {exc}") from None


def _load_instance(path: str) -> Instance:
    try:
        return inst_mod.validate(_load_doc(path))
    except ValidationError as exc:
        raise UsageFailure(f"{path}: invalid instance: {exc}") from None


def _load_twocap(path: str) -> twocap.TwoCapInstance:
    try:
        return twocap.validate_twocap(_load_doc(path))
    except ValidationError as exc:
        raise UsageFailure(f"{path}: invalid two-cap instance: {exc}") from None


def _require_perfect(inst: Instance) -> None:
    if not has_perfect_matching(inst):
        raise DomainFailure({"error": "no perfect matching"})


def _require_connected(inst: Instance) -> None:
    if not is_connected(inst):
        raise DomainFailure({"error": "instance is disconnected", "disconnected": True})


def _weights_arg(source: str, ids: Sequence[str]) -> dict[str, float]:
    if source == "uniform":
        return dict.fromkeys(ids, 1.0)
    doc = _load_doc(source)
    if isinstance(doc, dict) and isinstance(doc.get("weights"), dict):
        doc = doc["weights"]
    if not isinstance(doc, dict):
        raise UsageFailure(f"{source}: weights must be an object of id -> number")
    out = {}
    for j in ids:
        w = doc.get(j)
        if not isinstance(w, (int, float)) or isinstance(w, bool) or not w > 0:
            raise UsageFailure(f"{source}: missing or non-positive weight for {j!r}")
        out[j] = float(w)
    return out


def cmd_gen(args) -> dict:
    kind = args.kind
    try:
        if kind == "path3":
            doc = inst_mod.to_document(inst_mod.gen_path3())
        elif kind == "complete":
            doc = inst_mod.to_document(inst_mod.gen_complete(args.n))
        elif kind == "cycle":
            doc = inst_mod.to_document(inst_mod.gen_even_cycle(args.n))
        elif kind == "random-mc":
            doc = inst_mod.to_document(inst_mod.gen_random_mc(args.n, args.extra, args.seed))
        else:
            doc = twocap.to_document(twocap.gen_powers(args.n))
    except ValueError as exc:
        raise UsageFailure(str(exc)) from None
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(doc) + "\n")
    return doc


def cmd_opt(args) -> dict:
    inst = _load_instance(args.instance)
    return {"opt": max_matching_value(inst).value, "perfect": has_perfect_matching(inst)}


def cmd_check_mc(args) -> dict:
    inst = _load_instance(args.instance)
    _require_perfect(inst)
    verdict = is_matching_covered(inst)
    doc: dict = {"matching_covered": verdict.covered}
    if verdict.disconnected:
        doc["disconnected"] = True
    if verdict.tight_set is not None:
        doc["tight_set"] = list(verdict.tight_set)
    return doc


def cmd_weights(args) -> dict:
    inst = _load_instance(args.instance)
    _require_perfect(inst)
    verdict = is_matching_covered(inst)
    if not verdict.covered:
        payload: dict = {"error": "not matching covered"}
        if verdict.disconnected:
            payload["disconnected"] = True
        else:
            payload["tight_set"] = list(verdict.tight_set)
        raise DomainFailure(payload)
    result = sinkhorn(inst, args.tol, args.max_iter)
    if result.status is not Status.CONVERGED:
        raise DomainFailure(
            {"error": f"scaling {result.status.value}", "iterations": result.iterations,
             "residual": result.residual}
        )
    return {
        "weights": dict(weights_from_scaling(result)),
        "iterations": result.iterations,
        "residual": result.residual,
    }


def cmd_strategy(args) -> dict:
    inst = _load_instance(args.instance)
    _require_perfect(inst)
    _require_connected(inst)
    return al.perfect_strategy(inst).to_document()


def cmd_allocate(args) -> dict:
    inst = _load_instance(args.instance)
    try:
        if args.strategy:
            strat = al.strategy_from_document(_load_doc(args.strategy))
            result = al.ranked(inst, strat)
        else:
            result = al.proportional(inst, _weights_arg(args.weights, inst.right_ids))
    except al.IsolatedLeftNode as exc:
        raise DomainFailure({"error": str(exc)}) from None
    except ValueError as exc:
        raise UsageFailure(str(exc)) from None
    return result.to_document(inst)


def cmd_eval(args) -> dict:
    inst = _load_instance(args.instance)
    try:
        allocation = al.allocation_from_document(inst, _load_doc(args.allocation))
    except ValueError as exc:
        raise UsageFailure(f"{args.allocation}: {exc}") from None
    return {"value": al.value(inst, allocation), "opt": max_matching_value(inst).value}


def cmd_twocap_violation(args) -> dict:
    tc = _load_twocap(args.instance)
    ids = tc.bin_ids
    if args.weights:
        batch = np.array([[_weights_arg(args.weights, ids)[j] for j in ids]])
    else:
        capacity = np.array([b.C for b in tc.bins])
        volume = np.array([b.V for b in tc.bins])
        fixed = np.vstack([np.ones(len(ids)), capacity, volume])
        batch = np.vstack([fixed, twocap.random_weights(len(ids), args.samples, args.seed)])
    try:
        factors = twocap.violation_factors(tc, batch)
    except ValueError as exc:
        raise DomainFailure({"error": str(exc)}) from None
    observed = float(factors.min())
    n = twocap.powers_n(tc)
    bound = twocap.lower_bound(n) if n is not None and n % 2 == 0 else None
    return {
        "min_factor_observed": observed,
        "lower_bound": bound,
        "bound_holds": None if bound is None else observed >= bound,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="propalloc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an instance")
    p.add_argument("kind", choices=GEN_KINDS)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--extra", type=int, default=0, help="random-mc: number of chords")
    p.add_argument("--seed", type=int, default=0, help="random-mc: RNG seed (default 0)")
    p.add_argument("--out", help="write here as well as to stdout")
    p.set_defaults(func=cmd_gen)

    for name, func, help_ in (
        ("opt", cmd_opt, "maximum assignment value"),
        ("check-mc", cmd_check_mc, "matching-covered test with tight-set witness"),
        ("strategy", cmd_strategy, "ranked perfect strategy"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("instance", help="instance JSON path, or - for stdin")
        p.set_defaults(func=func)

    p = sub.add_parser("weights", help="perfect proportional weights")
    p.add_argument("instance")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("allocate", help="allocation from a strategy or weights")
    p.add_argument("instance")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--strategy", help="strategy JSON path")
    group.add_argument("--weights", help="weights JSON path, or 'uniform'")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("eval", help="value of an allocation and OPT")
    p.add_argument("instance")
    p.add_argument("allocation")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("twocap-violation", help="proportional overload on a two-cap instance")
    p.add_argument("instance")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--weights", help="weights JSON path, or 'uniform'")
    group.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0, help="RNG seed for --samples (default 0)")
    p.set_defaults(func=cmd_twocap_violation)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload = args.func(args)
        code = 0
    except DomainFailure as exc:
        payload = exc.payload
        code = 1
        print(f"propalloc: {payload['error']}", file=sys.stderr)
    except UsageFailure as exc:
        print(f"propalloc: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(payload))
    return code


if __name__ == "__main__":
    sys.exit(main())
