"""Symmetric (unitarily invariant) norms and Ky Fan dominance."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import linalg


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class NormSpec:
    kind: str  # ky_fan | schatten | operator | trace | frobenius
    k: int | None = None
    p: float | None = None

    def __post_init__(self):
        if self.kind not in ("ky_fan", "schatten", "operator", "trace", "frobenius"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind == "ky_fan" and (self.k is None or self.k < 1):
            raise ValueError("ky_fan needs k >= 1")
        if self.kind == "schatten" and (self.p is None or not self.p >= 1):
            raise ValueError("schatten needs p >= 1")

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "ky_fan":
            out["k"] = self.k
        if self.kind == "schatten":
            out["p"] = "inf" if math.isinf(self.p) else self.p
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "NormSpec":
        p = obj.get("p")
        if p is not None:
            p = math.inf if p in ("inf", "Infinity") else float(p)
        return cls(obj["kind"], obj.get("k"), p)


def ky_fan(k: int) -> NormSpec:
    return NormSpec("ky_fan", k=k)


def schatten(p: float) -> NormSpec:
    return NormSpec("schatten", p=p)


OPERATOR = NormSpec("operator")
TRACE = NormSpec("trace")
FROBENIUS = NormSpec("frobenius")

SANITY_SCHATTEN = (1.0, 1.5, 2.0, 3.0, math.inf)


def norm_from_singular_values(s: np.ndarray, spec: NormSpec) -> float:
    n = s.size
    if spec.kind == "ky_fan":
        if spec.k > n:
            raise ValueError(f"ky_fan k={spec.k} exceeds dimension {n}")
        return float(np.sum(s[: spec.k]))
    if spec.kind == "operator":
        return float(s[0])
    if spec.kind == "trace":
        return float(np.sum(s))
    if spec.kind == "frobenius":
        return float(math.sqrt(np.sum(s * s)))
    p = spec.p
    if math.isinf(p):
        return float(s[0])
    top = float(s[0])
    if top == 0.0:
        return 0.0
    return top * float(np.sum((s / top) ** p)) ** (1.0 / p)


def norm(M, spec: NormSpec) -> float:
    return norm_from_singular_values(linalg.singular_values(M), spec)


def ky_fan_norms(M) -> np.ndarray:
    """All Ky Fan norms k = 1..n as a vector (cumulative singular value sums)."""
    return np.cumsum(linalg.singular_values(M))


class Dominance(NamedTuple):
    holds: bool
    margins: np.ndarray  # margins[k-1] = ||Y||_k - ||X||_k
    min_margin: float
    binding_k: int
    scale: float


def dominance_from_norms(kx: np.ndarray, ky: np.ndarray, tol: float) -> Dominance:
    margins = ky - kx
    j = int(np.argmin(margins))
    scale = max(1.0, float(ky[-1]))
    m = float(margins[j])
    return Dominance(bool(m >= -tol * scale), margins, m, j + 1, scale)


def ky_fan_dominance(X, Y, tol: float = 1e-8) -> Dominance:
    """Does ||X||_k <= ||Y||_k hold for every k, hence for every symmetric norm?"""
    x = linalg.as_matrix(X)
    y = linalg.as_matrix(Y)
    if x.shape != y.shape:
        raise linalg.DimensionError(f"shape mismatch {x.shape} vs {y.shape}")
    return dominance_from_norms(ky_fan_norms(x), ky_fan_norms(y), tol)


def weak_majorization(x, y) -> bool:
    """True iff the partial sums of sorted(x) never exceed those of sorted(y)."""
    xs = np.sort(np.asarray(x, dtype=float))[::-1]
    ys = np.sort(np.asarray(y, dtype=float))[::-1]
    if xs.shape != ys.shape:
        raise ValueError("length mismatch")
    return bool(np.all(np.cumsum(xs) <= np.cumsum(ys)))


def monotone_convex_transfer_check(X, Y, g, tol: float = 1e-8) -> Dominance:
    """If X, Y >= 0 and X is Ky Fan dominated by Y, so is g(X) by g(Y)
    for increasing convex g with g(0) = 0. Checks the conclusion."""
    if not (linalg.is_psd(X) and linalg.is_psd(Y)):
        raise PreconditionError("X and Y must be positive semidefinite")
    if not ky_fan_dominance(X, Y, tol).holds:
        raise PreconditionError("X is not Ky Fan dominated by Y")
    if not (g.is_convex and g.monotone and abs(g.value_at_zero) <= 1e-12):
        raise PreconditionError(f"{g.label} is not increasing convex with g(0) = 0")
    return ky_fan_dominance(
        linalg.apply_scalar_function(X, g), linalg.apply_scalar_function(Y, g), tol
    )
