"""matineq command line: check, fuzz, falsify, certify, approx.

Exit codes are 0 (holds / found / verified), 1 (violated / not found /
bound exceeded) and 2 (usage, parse or precondition error). Nothing is read
from the environment.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from . import campaign as camp
from . import engine, linalg
from . import functions as fn
from .instance import Instance
from .shrink import shrink

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CERT_CLAIMS = ("eq2", "contractive-sum", "thm-dominance")


class UsageError(Exception):
    pass


def _dump(obj, out: TextIO) -> None:
    out.write(json.dumps(obj, indent=2) + "\n")


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n")


def _load(path: str, claim: str | None) -> Instance:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON ({exc})") from None
    try:
        return Instance.from_json(obj, claim)
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"{path}: {exc}") from None


# check --------------------------------------------------------------------------


def cmd_check(path: str, claim: str | None = None, tol: float = engine.HOLD_TOL,
              force: bool = False, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    inst = _load(path, claim)
    engine.get_check(inst.claim)
    v = engine.adjudicate(inst, tol, force)
    report = v.to_json()
    if not v.evaluated:
        report["error"] = "hypotheses not satisfied (use --force to evaluate anyway)"
        _dump(report, out)
        return EXIT_USAGE
    if v.status == "violated":
        small = shrink(inst, camp.violation_recheck(inst.claim, tol))
        report["witness"] = camp.witness_json(small, engine.adjudicate(small, tol, force))
        _dump(report, out)
        return EXIT_FAIL
    _dump(report, out)
    return EXIT_OK


# fuzz ---------------------------------------------------------------------------


def cmd_fuzz(c: camp.Campaign, out_path: str | None = None, witness_path: str | None = None,
             out: TextIO | None = None, err: TextIO | None = None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    result = camp.run_campaign(c)
    lines = "".join(camp.record_line(r) + "\n" for r in result.records)
    if out_path:
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        Path(out_path).write_text(lines)
    else:
        out.write(lines)
    statuses: dict[str, int] = {}
    for r in result.records:
        statuses[r["status"]] = statuses.get(r["status"], 0) + 1
    summary = {"claim": c.claim, "trials": c.trials, "seed": c.seed, "statuses": statuses}
    if result.witnesses:
        wpath = Path(witness_path or (f"{out_path}.witness.json" if out_path else f"{c.claim}-witness.json"))
        _write_json(wpath, result.witnesses[0])
        summary["violations"] = [w["trial"] for w in result.witnesses]
        summary["witness_file"] = str(wpath)
    err.write(json.dumps(summary) + "\n")
    return EXIT_OK if result.ok else EXIT_FAIL


# falsify ------------------------------------------------------------------------


def cmd_falsify(target: str, budget: int, seed: int = 0, dim_max: int = 3, jobs: int = 1,
                out_path: str | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    res = camp.falsify(target, budget, seed, dim_max, jobs)
    summary = {"target": target, "found": res.found, "trials_used": res.trials_used,
               "budget": res.budget, "seed": seed}
    if res.found:
        wpath = Path(out_path or f"{target}-witness.json")
        _write_json(wpath, res.witness)
        summary["witness_file"] = str(wpath)
        summary["n"] = len(res.witness["terms"][0]["A"]["re"])
        summary["margin"] = res.witness["verdict"]["margin"]
    _dump(summary, out)
    return EXIT_OK if res.found else EXIT_FAIL


# certify ------------------------------------------------------------------------


def cmd_certify(path: str, claim: str, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    if claim not in CERT_CLAIMS:
        raise UsageError(f"certify supports {', '.join(CERT_CLAIMS)}, not {claim!r}")
    inst = _load(path, "thm31" if claim == "thm-dominance" else claim)
    if claim == "thm-dominance":
        cert = engine.projection_certificate(inst)
    else:
        if claim == "eq2":
            if inst.m != 1:
                raise UsageError("eq2 takes a single term")
            L, R = engine._trace_pair(inst)
        else:
            L = linalg.apply_scalar_function(engine.congruence_sum(inst.terms), inst.f)
            R = engine.congruence_sum(inst.terms, inst.f)
        try:
            cert = engine.dominance_unitary(L, R)
        except engine.DominanceError as exc:
            _dump({"claim": claim, "error": "dominance", "index": exc.index, "message": str(exc)}, out)
            return EXIT_USAGE
    report = {"claim": claim, "certificate": cert.to_json()}
    _dump(report, out)
    return EXIT_OK if cert.ok else EXIT_FAIL


# approx -------------------------------------------------------------------------


def parse_grid(spec: str) -> np.ndarray:
    try:
        start, stop, count = spec.split(":")
        t = np.linspace(float(start), float(stop), int(count))
    except ValueError:
        raise UsageError(f"grid must look like start:stop:count, got {spec!r}") from None
    if t.size < 1 or t[0] < 0 or not np.all(np.isfinite(t)):
        raise UsageError(f"grid {spec!r} must be a non-empty range in [0, inf)")
    return t


def sup_gaps(a: float, rs: Sequence[float], t: np.ndarray) -> tuple[np.ndarray, list[np.ndarray], list[float]]:
    gamma = fn.angle(a)(t)
    cols = [fn.smoother(a, r)(t) for r in rs]
    return gamma, cols, [float(np.max(np.abs(h - gamma))) for h in cols]


def cmd_approx(a: float, rs: Sequence[float], grid: str, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    if a <= 0 or any(r <= 0 for r in rs):
        raise UsageError("a and every r must be positive")
    t = parse_grid(grid)
    gamma, cols, gaps = sup_gaps(a, rs, t)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["t", "gamma"] + [f"h_{r!r}" for r in rs])
    for i in range(t.size):
        w.writerow([repr(float(t[i])), repr(float(gamma[i]))] + [repr(float(h[i])) for h in cols])
    ok = True
    for r, g in zip(rs, gaps):
        bound = math.sqrt(r)
        ok &= g <= bound
        out.write(f"# sup-gap a={a!r} r={r!r} gap={g!r} bound={bound!r} ok={str(g <= bound).lower()}\n")
    return EXIT_OK if ok else EXIT_FAIL


# argument parsing -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="matineq", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="evaluate one instance file")
    c.add_argument("instance")
    c.add_argument("--claim")
    c.add_argument("--tol", type=float, default=engine.HOLD_TOL)
    c.add_argument("--force", action="store_true", help="evaluate even if hypotheses fail")

    f = sub.add_parser("fuzz", help="seeded campaign over a claim that should hold")
    f.add_argument("--claim", required=True)
    f.add_argument("--trials", type=int, default=1000)
    f.add_argument("--dim-max", type=int, default=8)
    f.add_argument("--terms-max", type=int, default=4)
    f.add_argument("--seed", type=int, default=42)
    f.add_argument("--tol", type=float, default=engine.HOLD_TOL)
    f.add_argument("--jobs", type=int, default=1)
    f.add_argument("--out", help="JSONL report path (default: standard output)")
    f.add_argument("--witness", help="where to write a shrunk counterexample")
    f.add_argument("--timing", action="store_true", help="add wall time (ms) to each record")

    s = sub.add_parser("falsify", help="search for a counterexample to a claim that can fail")
    s.add_argument("target")
    s.add_argument("--budget", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--dim-max", type=int, default=3)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", help="witness file path")

    e = sub.add_parser("certify", help="emit a re-verified dominance certificate")
    e.add_argument("instance")
    e.add_argument("--claim", required=True)

    a = sub.add_parser("approx", help="tabulate the smoothed angle functions")
    a.add_argument("--a", type=float, default=1.0)
    a.add_argument("--r", type=float, action="append", required=True)
    a.add_argument("--grid", default="0:10:1001")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            return cmd_check(args.instance, args.claim, args.tol, args.force)
        if args.command == "fuzz":
            c = camp.Campaign(args.claim, args.trials, args.dim_max, args.terms_max, args.seed,
                              args.tol, args.jobs, timing=args.timing)
            return cmd_fuzz(c, args.out, args.witness)
        if args.command == "falsify":
            return cmd_falsify(args.target, args.budget, args.seed, args.dim_max, args.jobs, args.out)
        if args.command == "certify":
            return cmd_certify(args.instance, args.claim)
        return cmd_approx(args.a, args.r, args.grid)
    except engine.UnknownClaim as exc:
        print(f"matineq: unknown claim {exc.args[0]!r}", file=sys.stderr)
    except (UsageError, linalg.LinalgError, ValueError) as exc:
        print(f"matineq: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
