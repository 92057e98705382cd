"""Command line entry point.

Exit codes: 0 success, 1 no spanning tree (check-graph), 2 invalid input,
3 numerical failure during a run.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .algebra import NotUnitError
from .graph import DirectedGraph, GraphError, spanning_tree_spectrum, zero_tolerance, laplacian
from .logmap import SingularMappingError
from .sim import (
    SCENARIO_FAMILIES,
    NumericalFailure,
    ScenarioError,
    dump_scenario,
    load_scenario,
    run,
    write_outputs,
)

EXIT_OK = 0
EXIT_NO_TREE = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def _fail(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def cmd_run(args) -> int:
    try:
        sc = load_scenario(args.scenario, seed=args.seed)
        if args.dt is not None:
            sc.dt = args.dt
        if args.horizon is not None:
            sc.horizon = args.horizon
        sc.validate()
    except (ScenarioError, GraphError) as exc:
        return _fail(str(exc), EXIT_INVALID)
    try:
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            log = run(sc)
    except (NumericalFailure, SingularMappingError, NotUnitError, FloatingPointError) as exc:
        return _fail(f"numerical failure: {exc}", EXIT_NUMERICAL)
    try:
        write_outputs(log, args.out)
    except OSError as exc:
        return _fail(f"cannot write outputs: {exc}", EXIT_INVALID)
    print(json.dumps(log.metrics()))
    return EXIT_OK


def cmd_gen(args) -> int:
    family = SCENARIO_FAMILIES.get(args.family)
    if family is None:
        return _fail(f"unknown family {args.family!r}; choose from {sorted(SCENARIO_FAMILIES)}",
                     EXIT_INVALID)
    try:
        if args.family == "manipulator-box":
            if args.n not in (None, 3):
                raise ScenarioError("manipulator-box always has 3 agents")
            sc = family(seed=args.seed)
        else:
            n = args.n if args.n is not None else (5 if args.family == "circle" else 20)
            if n < 2:
                raise ScenarioError("need at least two agents")
            sc = family(n=n, seed=args.seed)
    except (ScenarioError, GraphError) as exc:
        return _fail(str(exc), EXIT_INVALID)
    text = dump_scenario(sc)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK


def _load_graph(path) -> DirectedGraph:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ScenarioError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from None
    if isinstance(data, dict) and "graph" in data:
        data = data["graph"]
    return DirectedGraph.from_dict(data)


def cmd_check(args) -> int:
    try:
        g = _load_graph(args.scenario)
    except (ScenarioError, GraphError) as exc:
        return _fail(str(exc), EXIT_INVALID)
    eig, verdict = spanning_tree_spectrum(g)
    tol = zero_tolerance(laplacian(g))
    order = np.lexsort((eig.imag, eig.real))
    summary = {
        "n": g.n,
        "eigenvalues": [[float(eig[k].real), float(eig[k].imag)] for k in order],
        "zero_eigenvalues": int(np.sum(np.abs(eig) < tol)),
        "min_nonzero_real": float(min((e.real for e in eig if abs(e) >= tol), default=0.0)),
        "spanning_tree": bool(verdict),
    }
    print(json.dumps(summary))
    return EXIT_OK if verdict else EXIT_NO_TREE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dqconsensus",
                                     description="Dual quaternion consensus and formation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a scenario and write trajectory.csv + metrics.json")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dt", type=float)
    p.add_argument("--horizon", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("gen-scenario", help="write a built-in scenario family as JSON")
    p.add_argument("--family", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check-graph", help="spanning-tree test on a scenario's graph")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, which matches EXIT_INVALID
        return int(exc.code) if exc.code is not None else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
