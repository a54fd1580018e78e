"""Seeded fuzz and falsification campaigns.

Trial ``i`` of a campaign is a pure function of ``(campaign, i)``: its
dimension, term count, function and ensembles are drawn from the stream
``derive_seed(seed, i)`` and recorded as a :class:`GenSpec`, which alone
regenerates the matrices. Worker count therefore never changes a report.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Iterable, NamedTuple

from . import engine
from . import functions as fn
from .engine import Verdict
from .generators import GenSpec, SplitMix64, derive_seed, materialize
from .instance import Instance
from .shrink import shrink

# function sets -----------------------------------------------------------------

_J = lambda fs: tuple(f.to_json() for f in fs)  # noqa: E731

CONCAVE = _J(fn.CONCAVE_CATALOG)
OPERATOR_CONCAVE = _J(fn.OPERATOR_CONCAVE_CATALOG)
CONVEX = _J(fn.CONVEX_CATALOG)
COR32 = _J([fn.power(2), fn.power(2.5), fn.power(3), fn.angle(0.5), fn.angle(1.0), fn.angle(2.0)])
POWERS = _J([fn.power(1.5), fn.power(2), fn.power(2.5), fn.power(3)])
REAL_LINE = _J(fn.REAL_LINE_CONCAVE)
REAL_LINE_ZERO = _J([f for f in fn.REAL_LINE_CONCAVE if f.value_at_zero == 0.0])
SQRT = _J([fn.sqrt()])


class Plan(NamedTuple):
    functions: tuple[dict, ...]
    A: str | None  # psd | hermitian | None
    Z: str  # identity | expansive | contraction | family | none
    terms: str  # one | many | two
    k: bool = False
    X: bool = False
    dim_min: int = 1


PLANS: dict[str, Plan] = {
    "thm31": Plan(CONCAVE, "psd", "expansive", "many"),
    "thm21": Plan(CONCAVE, "psd", "expansive", "one"),
    "thm22": Plan(CONCAVE, "psd", "identity", "many"),
    "cor32": Plan(COR32, "psd", "expansive", "many"),
    "thm11": Plan(POWERS, "psd", "expansive", "many"),
    "mccarthy": Plan(POWERS, "psd", "identity", "two"),
    "eq1": Plan(CONCAVE, "psd", "contraction", "one"),
    "eq1-hermitian": Plan(REAL_LINE, "hermitian", "contraction", "one"),
    "eq2": Plan(CONCAVE, "psd", "contraction", "one"),
    "eq3": Plan(OPERATOR_CONCAVE, "psd", "contraction", "one"),
    "eq3-reversed": Plan(OPERATOR_CONCAVE, "psd", "expansive", "one"),
    "eq4": Plan(CONCAVE, "psd", "expansive", "one"),
    "eq5": Plan(CONCAVE, "psd", "identity", "many"),
    "eq6-weyl": Plan(CONCAVE, "psd", "identity", "two"),
    "uchiyama": Plan(CONCAVE, None, "none", "many", X=True),
    "contractive-sum": Plan(CONCAVE, "psd", "family", "many"),
    "eq9": Plan(CONVEX, "psd", "expansive", "many", k=True),
    # negative claims: searched for counterexamples, starting at n = 2
    "eq4-nonpsd": Plan(REAL_LINE_ZERO, "hermitian", "expansive", "one", dim_min=2),
    "eq2-reversed": Plan(CONCAVE, "psd", "expansive", "one", dim_min=2),
    "loewner-subadd": Plan(SQRT, "psd", "identity", "two", dim_min=2),
}

FUZZ_CLAIMS = tuple(c for c in PLANS if not engine.CLAIMS[c].negative)
FALSIFY_TARGETS = tuple(c for c in PLANS if engine.CLAIMS[c].negative)


@dataclass(frozen=True)
class Campaign:
    claim: str
    trials: int = 1000
    dim_max: int = 8
    terms_max: int = 4
    seed: int = 42
    tol: float = engine.HOLD_TOL
    jobs: int = 1
    dim_min: int | None = None
    functions: tuple[dict, ...] | None = None
    timing: bool = False

    def __post_init__(self):
        if self.claim not in PLANS:
            raise engine.UnknownClaim(self.claim)
        if self.trials < 0 or self.dim_max < 1 or self.terms_max < 1:
            raise ValueError("trials, dim-max and terms-max must be positive")

    def to_json(self) -> dict:
        return asdict(self)


def _a_slot(rng: SplitMix64, kind: str, negative: bool) -> dict:
    # wide magnitude range so kinks and curvature of the catalog are both hit
    lo, width = (-1.0, 3.0) if negative else (-1.0, 2.0)
    scale = 10.0 ** (lo + width * rng.uniform())
    if kind == "hermitian":
        return {"kind": "hermitian-indefinite", "scale": scale}
    u = rng.uniform()
    if u < 0.5:
        return {"kind": "psd", "scale": scale}
    if u < 0.8:
        return {"kind": "psd-rank-deficient", "scale": scale}
    return {"kind": "psd-degenerate-spectrum", "scale": scale}


def _z_slot(rng: SplitMix64, kind: str, negative: bool) -> dict:
    u = rng.uniform()
    if kind == "expansive":
        if negative:
            return {"kind": "expansive", "spread": rng.choice((1.0, 3.0, 8.0))}
        if u < 0.6:
            return {"kind": "expansive", "spread": rng.choice((0.5, 2.0, 5.0))}
        if u < 0.9:
            return {"kind": "expansive-near-identity"}
        return {"kind": "unitary"}
    if kind == "contraction":
        return {"kind": "contraction"} if u < 0.85 else {"kind": "unitary"}
    if kind == "identity":
        return {"kind": "identity"}
    raise ValueError(kind)


def build_genspec(c: Campaign, i: int) -> GenSpec:
    plan = PLANS[c.claim]
    negative = engine.CLAIMS[c.claim].negative
    rng = SplitMix64(derive_seed(c.seed, i))
    lo = max(plan.dim_min, c.dim_min or 1)
    n = rng.integer(lo, max(lo, c.dim_max))
    if plan.terms == "one":
        m = 1
    elif plan.terms == "two":
        m = 2
    else:
        m = rng.integer(1, c.terms_max)
    funcs = c.functions or plan.functions
    f = dict(rng.choice(funcs))
    slots = []
    for _ in range(m):
        slot: dict[str, dict] = {}
        if plan.X:
            slot["X"] = {"kind": "general", "scale": 10.0 ** (2.0 * rng.uniform() - 1.0)}
        if plan.A is not None:
            slot["A"] = _a_slot(rng, plan.A, negative)
        if plan.Z == "family":
            slot["Z"] = {"kind": "contractive-family"}
        elif plan.Z != "none":
            slot["Z"] = _z_slot(rng, plan.Z, negative)
        slots.append(slot)
    k = rng.integer(1, n) if plan.k else None
    return GenSpec(derive_seed(c.seed, i, 1), n, c.claim, f, slots, k)


# trials --------------------------------------------------------------------------


class TrialResult(NamedTuple):
    record: dict
    verdict: Verdict
    instance: Instance


def run_trial(c: Campaign, i: int) -> TrialResult:
    t0 = time.perf_counter()
    gs = build_genspec(c, i)
    inst = materialize(gs)
    v = engine.adjudicate(inst, c.tol)
    rec: dict[str, Any] = {
        "trial": i,
        "claim": c.claim,
        "n": inst.n,
        "m": inst.m,
        "f": gs.f,
        "genspec": gs.to_json(),
        "holds": v.holds,
        "status": v.status,
        "margin": v.margin,
        "binding_k": v.binding_k,
        "hypotheses_ok": v.hypotheses_ok,
    }
    if v.certificate is not None:
        rec["certificate"] = {"ok": v.certificate.ok, "margin": v.certificate.margin}
    if c.timing:
        rec["ms"] = round(1e3 * (time.perf_counter() - t0), 3)
    return TrialResult(rec, v, inst)


def _run_chunk(args) -> list[TrialResult]:
    c, start, stop = args
    return [run_trial(c, i) for i in range(start, stop)]


def _chunks(lo: int, hi: int, size: int) -> Iterable[tuple[int, int]]:
    for s in range(lo, hi, size):
        yield s, min(hi, s + size)


def run_trials(c: Campaign, lo: int, hi: int, jobs: int | None = None) -> list[TrialResult]:
    """Trials lo..hi-1 in index order, on ``jobs`` worker processes."""
    jobs = c.jobs if jobs is None else jobs
    if jobs <= 1 or hi - lo < 2:
        return [run_trial(c, i) for i in range(lo, hi)]
    size = max(1, (hi - lo) // (4 * jobs))
    out: list[TrialResult] = []
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for chunk in pool.map(_run_chunk, [(c, s, e) for s, e in _chunks(lo, hi, size)]):
            out.extend(chunk)
    return out


def record_line(rec: dict) -> str:
    return json.dumps(rec, separators=(",", ":"))


def violation_recheck(claim: str, tol: float) -> Callable[[Instance], bool]:
    def fails(inst: Instance) -> bool:
        try:
            v = engine.adjudicate(inst.with_claim(claim), tol)
        except (ValueError, ArithmeticError, engine.EngineError):
            return False
        return v.status == "violated"

    return fails


def witness_json(inst: Instance, verdict: Verdict, **extra) -> dict:
    out = inst.to_json()
    out["verdict"] = verdict.to_json()
    out.update(extra)
    return out


class CampaignResult(NamedTuple):
    records: list[dict]
    violations: list[TrialResult]
    witnesses: list[dict]

    @property
    def ok(self) -> bool:
        return not self.violations


def run_campaign(c: Campaign) -> CampaignResult:
    results = run_trials(c, 0, c.trials)
    violations = [r for r in results if r.verdict.status == "violated"]
    witnesses = []
    for r in violations:
        small = shrink(r.instance, violation_recheck(c.claim, c.tol))
        v = engine.adjudicate(small, c.tol)
        witnesses.append(witness_json(small, v, trial=r.record["trial"], genspec=r.record["genspec"]))
    return CampaignResult([r.record for r in results], violations, witnesses)


# falsification ------------------------------------------------------------------

REPLAY_TOL = 1e-7


@dataclass
class FalsifyResult:
    target: str
    found: bool
    trials_used: int
    budget: int
    witness: dict | None = None
    original: dict | None = None
    info: dict = field(default_factory=dict)


def falsify(target: str, budget: int = 100_000, seed: int = 0, dim_max: int = 3,
            jobs: int = 1, batch: int = 256) -> FalsifyResult:
    """Search for an instance violating a claim that fails in general.

    Trials are scanned in index order; the first one whose violation survives
    adjudication is shrunk and re-verified at tolerance 1e-7.
    """
    if target not in FALSIFY_TARGETS:
        raise engine.UnknownClaim(target)
    c = Campaign(target, trials=budget, dim_max=max(2, dim_max), seed=seed, jobs=jobs)
    for lo, hi in _chunks(0, budget, batch):
        for r in run_trials(c, lo, hi):
            if r.verdict.status != "violated":
                continue
            small = shrink(r.instance, violation_recheck(target, engine.HOLD_TOL))
            v = engine.adjudicate(small, REPLAY_TOL)
            if v.status != "violated":
                continue
            return FalsifyResult(
                target, True, r.record["trial"] + 1, budget,
                witness=witness_json(small, v, trial=r.record["trial"], genspec=r.record["genspec"]),
                original=r.instance.to_json(),
            )
    return FalsifyResult(target, False, budget, budget)
