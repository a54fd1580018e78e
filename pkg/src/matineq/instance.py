"""Instances and their JSON wire format.

Matrix JSON::

    {"n": 2, "re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]]}

``"im"`` may be omitted for real matrices. Instance JSON::

    {"claim": "thm31", "f": {"kind": "sqrt"},
     "terms": [{"A": <matrix>, "Z": <matrix>}, ...], "k": 2}

``"Z"`` omitted means the identity. Claims about arbitrary (non-Hermitian)
matrices use ``{"X": <matrix>}`` terms instead. ``"k"`` is only read by
claims that need a rank.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from . import linalg
from .functions import ScalarFunction


def matrix_to_json(M: np.ndarray) -> dict:
    a = np.asarray(M, dtype=np.complex128)
    out: dict[str, Any] = {"n": int(a.shape[0]), "re": a.real.tolist()}
    if np.any(a.imag != 0):
        out["im"] = a.imag.tolist()
    return out


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float) if "im" in obj else np.zeros_like(re)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from None
    if re.ndim == 0:
        re, im = re.reshape(1, 1), im.reshape(1, 1)
    n = int(obj.get("n", re.shape[0]))
    if re.shape != (n, n) or im.shape != (n, n):
        raise ValueError(f"matrix JSON declares n={n} but has shape {re.shape}")
    return linalg.as_matrix(re + 1j * im)


@dataclass(frozen=True, eq=False)
class Term:
    A: np.ndarray | None = None
    Z: np.ndarray | None = None
    X: np.ndarray | None = None

    @property
    def n(self) -> int:
        for M in (self.A, self.Z, self.X):
            if M is not None:
                return M.shape[0]
        raise ValueError("empty term")

    def z(self) -> np.ndarray:
        return np.eye(self.n, dtype=np.complex128) if self.Z is None else self.Z

    def to_json(self) -> dict:
        out = {}
        for key in ("A", "Z", "X"):
            M = getattr(self, key)
            if M is not None:
                out[key] = matrix_to_json(M)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Term":
        if not isinstance(obj, dict):
            raise ValueError("term must be an object")
        A = linalg.hermitian(matrix_from_json(obj["A"])) if "A" in obj else None
        Z = matrix_from_json(obj["Z"]) if "Z" in obj else None
        X = matrix_from_json(obj["X"]) if "X" in obj else None
        if A is None and X is None:
            raise ValueError("term needs an 'A' or an 'X' matrix")
        return cls(A, Z, X)


@dataclass(frozen=True, eq=False)
class Instance:
    claim: str
    f: ScalarFunction
    terms: tuple[Term, ...]
    k: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.terms:
            raise ValueError("instance needs at least one term")
        dims = {t.n for t in self.terms}
        for t in self.terms:
            dims.update(M.shape[0] for M in (t.A, t.Z, t.X) if M is not None)
        if len(dims) != 1:
            raise linalg.DimensionError(f"terms have mixed dimensions {sorted(dims)}")

    @property
    def n(self) -> int:
        return self.terms[0].n

    @property
    def m(self) -> int:
        return len(self.terms)

    def with_claim(self, claim: str) -> "Instance":
        return replace(self, claim=claim)

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "claim": self.claim,
            "f": self.f.to_json(),
            "terms": [t.to_json() for t in self.terms],
        }
        if self.k is not None:
            out["k"] = self.k
        return out

    @classmethod
    def from_json(cls, obj: dict, claim: str | None = None) -> "Instance":
        if not isinstance(obj, dict):
            raise ValueError("instance JSON must be an object")
        try:
            f = ScalarFunction.from_json(obj["f"])
            terms = tuple(Term.from_json(t) for t in obj["terms"])
        except KeyError as exc:
            raise ValueError(f"instance JSON is missing {exc}") from None
        c = claim or obj.get("claim")
        if not c:
            raise ValueError("no claim given in the instance or on the command line")
        k = obj.get("k")
        return cls(c, f, terms, None if k is None else int(k))


def load_instance(path: str | Path, claim: str | None = None) -> Instance:
    with open(path) as fh:
        return Instance.from_json(json.load(fh), claim)
