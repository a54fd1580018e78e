"""Scalar functions on [0, inf) or the real line, tagged with their shape.

A :class:`ScalarFunction` is built from a JSON-style dict such as
``{"kind": "power", "p": 0.5}`` and evaluates exactly in closed form. The
tags (shape, value at zero, monotonicity, operator concavity) describe the
literature claim about the function; :func:`check_shape_on_grid` and
:func:`check_operator_concave_sample` test them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, NamedTuple, Sequence

import numpy as np

from . import linalg

KINDS = (
    "power",
    "sqrt",
    "log1p",
    "clamp",
    "affine",
    "angle",
    "smoother",
    "smoother-inverse",
    "pwl",
)


class FunctionDomainError(ValueError):
    pass


class ShapeError(ValueError):
    def __init__(self, message: str, knot: float):
        super().__init__(message)
        self.knot = knot


@dataclass(frozen=True, eq=False)
class ScalarFunction:
    kind: str
    params: dict = field(repr=False)
    shape: str  # "concave" | "convex" | "affine"
    value_at_zero: float
    monotone: bool
    operator_concave: bool
    domain: str  # "nonneg" | "real"

    def __call__(self, t):
        x = np.asarray(t, dtype=float)
        if self.domain == "nonneg" and np.any(x < 0):
            raise FunctionDomainError(f"{self.label} is defined on [0, inf) only")
        return _EVAL[self.kind](self.params, x)

    def __repr__(self) -> str:
        return f"ScalarFunction({self.label})"

    def __eq__(self, other) -> bool:
        return isinstance(other, ScalarFunction) and self.to_json() == other.to_json()

    __hash__ = None

    @property
    def label(self) -> str:
        args = ", ".join(f"{k}={v}" for k, v in self.params.items() if k != "nodes")
        if self.kind == "pwl":
            args = f"{len(self.params['nodes'])} nodes"
        return f"{self.kind}({args})"

    @property
    def is_concave(self) -> bool:
        return self.shape in ("concave", "affine")

    @property
    def is_convex(self) -> bool:
        return self.shape in ("convex", "affine")

    def to_json(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind}
        for k, v in self.params.items():
            out[k] = [list(map(float, nd)) for nd in v] if k == "nodes" else float(v)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ScalarFunction":
        kind = obj.get("kind")
        if kind not in _BUILDERS:
            raise ValueError(f"unknown function kind {kind!r}")
        kwargs = {k: v for k, v in obj.items() if k != "kind"}
        try:
            return _BUILDERS[kind](**kwargs)
        except TypeError as exc:
            raise ValueError(f"bad parameters for {kind}: {exc}") from None


# closed forms ---------------------------------------------------------------


def _eval_power(p, x):
    return np.power(x, p["p"])


def _eval_angle(p, x):
    a = p["a"]
    return 0.5 * (np.abs(x - a) + x - a)


def _eval_smoother(p, x):
    a, r = p["a"], p["r"]
    return 0.5 * (np.sqrt((x - a) ** 2 + r) + x - math.sqrt(a * a + r))


def _eval_smoother_inverse(p, x):
    a, r = p["a"], p["r"]
    root = math.sqrt(a * a + r)
    return x - (r / 2.0) / (2.0 * x + root - a) + (root + a) / 2.0


def _eval_pwl(p, x):
    nodes = p["nodes"]
    ts = np.array([nd[0] for nd in nodes], dtype=float)
    gs = np.array([nd[1] for nd in nodes], dtype=float)
    y = np.interp(x, ts, gs)
    # linear extension beyond both end nodes
    lo_slope = (gs[1] - gs[0]) / (ts[1] - ts[0])
    hi_slope = (gs[-1] - gs[-2]) / (ts[-1] - ts[-2])
    y = np.where(x < ts[0], gs[0] + lo_slope * (x - ts[0]), y)
    y = np.where(x > ts[-1], gs[-1] + hi_slope * (x - ts[-1]), y)
    return y


_EVAL = {
    "power": _eval_power,
    "sqrt": lambda p, x: np.sqrt(x),
    "log1p": lambda p, x: np.log1p(x),
    "clamp": lambda p, x: np.minimum(x, p["a"]),
    "affine": lambda p, x: p["alpha"] * x + p["beta"],
    "angle": _eval_angle,
    "smoother": _eval_smoother,
    "smoother-inverse": _eval_smoother_inverse,
    "pwl": _eval_pwl,
}


# constructors ---------------------------------------------------------------


def power(p: float) -> ScalarFunction:
    p = float(p)
    if not p > 0:
        raise ValueError("power needs p > 0")
    if p == 1.0:
        shape = "affine"
    else:
        shape = "concave" if p < 1 else "convex"
    return ScalarFunction("power", {"p": p}, shape, 0.0, True, p <= 1.0, "nonneg")


def sqrt() -> ScalarFunction:
    return ScalarFunction("sqrt", {}, "concave", 0.0, True, True, "nonneg")


def log1p() -> ScalarFunction:
    return ScalarFunction("log1p", {}, "concave", 0.0, True, True, "nonneg")


def clamp(a: float) -> ScalarFunction:
    """min(t, a), concave on the whole real line."""
    a = float(a)
    return ScalarFunction("clamp", {"a": a}, "concave", min(0.0, a), True, False, "real")


def affine(alpha: float, beta: float = 0.0) -> ScalarFunction:
    alpha, beta = float(alpha), float(beta)
    return ScalarFunction(
        "affine", {"alpha": alpha, "beta": beta}, "affine", beta, alpha >= 0, alpha >= 0, "real"
    )


def angle(a: float) -> ScalarFunction:
    a = float(a)
    if not a > 0:
        raise ValueError("angle knot must be positive")
    return ScalarFunction("angle", {"a": a}, "convex", 0.0, True, False, "nonneg")


def smoother(a: float, r: float) -> ScalarFunction:
    a, r = float(a), float(r)
    if not (a > 0 and r > 0):
        raise ValueError("smoother needs a > 0 and r > 0")
    return ScalarFunction("smoother", {"a": a, "r": r}, "convex", 0.0, True, False, "nonneg")


def smoother_inverse(a: float, r: float) -> ScalarFunction:
    a, r = float(a), float(r)
    if not (a > 0 and r > 0):
        raise ValueError("smoother-inverse needs a > 0 and r > 0")
    return ScalarFunction(
        "smoother-inverse", {"a": a, "r": r}, "concave", 0.0, True, True, "nonneg"
    )


def pwl(nodes: Sequence[Sequence[float]]) -> ScalarFunction:
    """Piecewise-linear interpolant through ``nodes``, extended linearly at both ends.

    The domain is the real line when some node has a negative abscissa and
    [0, inf) otherwise. Shape and monotonicity are read from the slopes.
    """
    nd = [(float(t), float(g)) for t, g in nodes]
    if len(nd) < 2:
        raise ValueError("pwl needs at least two nodes")
    ts = [t for t, _ in nd]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("pwl nodes must be strictly increasing in t")
    slopes = [(g1 - g0) / (t1 - t0) for (t0, g0), (t1, g1) in zip(nd, nd[1:])]
    scale = max(1.0, max(abs(s) for s in slopes))
    dec = all(b <= a + 1e-12 * scale for a, b in zip(slopes, slopes[1:]))
    inc = all(b >= a - 1e-12 * scale for a, b in zip(slopes, slopes[1:]))
    shape = "affine" if dec and inc else "concave" if dec else "convex" if inc else "none"
    domain = "real" if ts[0] < 0 else "nonneg"
    params = {"nodes": [list(x) for x in nd]}
    f0 = float(_eval_pwl(params, np.array(0.0)))
    return ScalarFunction(
        "pwl",
        params,
        shape,
        f0,
        all(s >= 0 for s in slopes),
        shape == "affine" and slopes[0] >= 0,
        domain,
    )


_BUILDERS = {
    "power": power,
    "sqrt": sqrt,
    "log1p": log1p,
    "clamp": clamp,
    "affine": affine,
    "angle": angle,
    "smoother": smoother,
    "smoother-inverse": smoother_inverse,
    "pwl": pwl,
}


def eval(f: ScalarFunction, t: float) -> float:  # noqa: A001 - mirrors the catalog vocabulary
    """Evaluate ``f`` at a single point."""
    if not math.isfinite(t):
        raise FunctionDomainError("t must be finite")
    return float(f(np.array(float(t))))


# catalog --------------------------------------------------------------------

CONCAVE_CATALOG: tuple[ScalarFunction, ...] = (
    sqrt(),
    power(0.3),
    power(0.7),
    log1p(),
    clamp(0.5),
    clamp(1.0),
    smoother_inverse(1.0, 0.5),
    smoother_inverse(0.5, 0.01),
    pwl([[0, 0], [0.5, 1.0], [2.0, 1.5], [5.0, 1.8]]),
    affine(0.5, 0.2),
)

OPERATOR_CONCAVE_CATALOG: tuple[ScalarFunction, ...] = tuple(
    f for f in CONCAVE_CATALOG if f.operator_concave
)

CONVEX_CATALOG: tuple[ScalarFunction, ...] = (
    power(2.0),
    power(2.5),
    power(3.0),
    angle(0.5),
    angle(1.0),
    smoother(1.0, 0.01),
    pwl([[0, 0], [0.5, 0.1], [1.0, 0.6], [3.0, 4.0]]),
)

# concave on the whole real line with f(0) >= 0
REAL_LINE_CONCAVE: tuple[ScalarFunction, ...] = (
    clamp(0.0),
    clamp(1.0),
    affine(1.0, 0.0),
    pwl([[-1.0, -2.0], [0.0, 0.0], [1.0, 0.5]]),
    pwl([[-2.0, -3.0], [-0.5, -0.5], [0.0, 0.0], [1.0, 0.3], [3.0, 0.5]]),
)


# shape checks ---------------------------------------------------------------


class ShapeCheck(NamedTuple):
    ok: bool
    witness: tuple[float, float, float] | None


def check_shape_on_grid(f: ScalarFunction, grid: Iterable[float], shape: str | None = None) -> ShapeCheck:
    """Check the second-order shape of ``f`` on a grid via chord slopes.

    ``shape`` defaults to the tag on ``f``. A failure reports the offending
    triple of consecutive grid points.
    """
    t = np.asarray(list(grid), dtype=float)
    if t.size < 3 or np.any(np.diff(t) <= 0):
        raise ValueError("grid needs at least 3 strictly increasing points")
    shape = f.shape if shape is None else shape
    y = np.asarray(f(t), dtype=float)
    slopes = np.diff(y) / np.diff(t)
    tol = 1e-9 * max(1.0, float(np.max(np.abs(slopes))))
    inc = np.diff(slopes)
    if shape == "concave":
        bad = np.flatnonzero(inc > tol)
    elif shape == "convex":
        bad = np.flatnonzero(inc < -tol)
    elif shape == "affine":
        bad = np.flatnonzero(np.abs(inc) > tol)
    else:
        raise ValueError(f"unknown shape tag {shape!r}")
    if bad.size:
        i = int(bad[0])
        return ShapeCheck(False, (float(t[i]), float(t[i + 1]), float(t[i + 2])))
    return ShapeCheck(True, None)


class AngleDecomposition(NamedTuple):
    lambda0: float
    terms: list[tuple[float, float]]  # (knot, coefficient)

    def __call__(self, t):
        x = np.asarray(t, dtype=float)
        out = self.lambda0 * x
        for a, c in self.terms:
            out = out + c * 0.5 * (np.abs(x - a) + x - a)
        return out


def angle_decompose(g: ScalarFunction, grid: Sequence[float]) -> AngleDecomposition:
    """Write the grid interpolant of a convex g with g(0) = 0 as
    ``lambda0 * t + sum c_i * angle_{a_i}(t)`` with non-negative c_i."""
    t = np.asarray(grid, dtype=float)
    if t.size < 2 or t[0] != 0.0 or np.any(np.diff(t) <= 0):
        raise ValueError("grid must start at 0 and be strictly increasing")
    y = np.asarray(g(t), dtype=float)
    scale = max(1.0, float(np.max(np.abs(y))))
    if abs(y[0]) > 1e-12 * scale:
        raise ShapeError(f"g(0) = {y[0]} is not 0", knot=0.0)
    slopes = np.diff(y) / np.diff(t)
    sscale = max(1.0, float(np.max(np.abs(slopes))))
    terms = []
    for i in range(1, slopes.size):
        c = float(slopes[i] - slopes[i - 1])
        if c < -1e-9 * sscale:
            raise ShapeError(f"slope decreases by {-c:.3e} at knot t={t[i]}", knot=float(t[i]))
        if c > 1e-12:
            terms.append((float(t[i]), c))
    return AngleDecomposition(float(slopes[0]), terms)


class SampleCheck(NamedTuple):
    ok: bool
    worst_margin: float
    witness: tuple[np.ndarray, np.ndarray] | None


def check_operator_concave_sample(
    f: ScalarFunction, n: int, trials: int, seed: int, tol: float = 1e-9
) -> SampleCheck:
    """Sample midpoint operator concavity f((A+B)/2) >= (f(A)+f(B))/2 on random PSD pairs.

    Returns the worst Loewner margin seen and the first violating pair.
    """
    from .generators import SplitMix64, derive_seed, random_psd

    worst = math.inf
    witness = None
    ok = True
    for i in range(trials):
        rng = SplitMix64(derive_seed(seed, i))
        # mix spectral scales so kinks and curvature both get exercised
        sa, sb = 10.0 ** (2.0 * rng.uniform() - 1.0), 10.0 ** (2.0 * rng.uniform() - 1.0)
        A = sa * random_psd(rng, n, rank=n if rng.uniform() < 0.7 else max(1, n - 1))
        B = sb * random_psd(rng, n)
        lhs = linalg.apply_scalar_function(0.5 * (A + B), f)
        rhs = 0.5 * (linalg.apply_scalar_function(A, f) + linalg.apply_scalar_function(B, f))
        res = linalg.loewner_leq(rhs, lhs, tol)
        if res.margin < worst:
            worst = res.margin
        if not res.holds and ok:
            ok = False
            witness = (A, B)
    return SampleCheck(ok, float(worst), witness)


class SanityReport(NamedTuple):
    ok: bool
    checked: int
    failures: list[tuple[str, float, float, float]]


SANITY_GRID = (0.0, 0.5, 1.0, 2.0, 10.0)


def scalar_sanity(f: ScalarFunction, grid: Sequence[float] = SANITY_GRID) -> SanityReport:
    """Check f(z a) <= z f(a) for z >= 1 and f(a + b) <= f(a) + f(b) on a grid."""
    failures = []
    checked = 0
    pts = [float(x) for x in grid]
    for a, b in itertools.product(pts, repeat=2):
        checked += 1
        lhs, rhs = eval(f, a + b), eval(f, a) + eval(f, b)
        if lhs > rhs + 1e-12 * max(1.0, abs(rhs)):
            failures.append(("subadditive", a, b, lhs - rhs))
    for a, z in itertools.product(pts, [z for z in pts if z >= 1.0]):
        checked += 1
        lhs, rhs = eval(f, z * a), z * eval(f, a)
        if lhs > rhs + 1e-12 * max(1.0, abs(rhs)):
            failures.append(("dilation", a, z, lhs - rhs))
    return SanityReport(not failures, checked, failures)
