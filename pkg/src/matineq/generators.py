"""Seeded random matrix ensembles.

Randomness comes from SplitMix64, fully specified by its integer recurrence
so that any implementation reproduces the same stream::

    state <- (state + 0x9E3779B97F4A7C15) mod 2**64
    z <- state
    z <- ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z <- ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    output z ^ (z >> 31)

A uniform double is ``(output >> 11) * 2**-53``. Gaussians use Box-Muller on
consecutive uniform pairs (u1, u2): ``r = sqrt(-2 log(1 - u1))``, giving
``r cos(2 pi u2)`` and ``r sin(2 pi u2)``; a standard complex Gaussian takes
both as its real and imaginary part, scaled by 1/sqrt(2). Sub-streams are
keyed by :func:`derive_seed`, so trial ``i`` never depends on trial ``j``.

Haar unitaries are the Q factor of a Householder QR of a complex Gaussian
matrix, with column j multiplied by the phase of R[j, j].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import linalg
from .functions import ScalarFunction
from .instance import Instance, Term

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * _M1) & MASK
    z = ((z ^ (z >> 27)) * _M2) & MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic sub-stream seed for ``(seed, key1, key2, ...)``."""
    s = int(seed) & MASK
    for k in keys:
        s = mix64(s ^ mix64((int(k) + GAMMA) & MASK))
    return s


class SplitMix64:
    """Counter-based 64-bit generator. The only mutable state is the counter."""

    def __init__(self, seed: int):
        self.state = int(seed) & MASK

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK
        return mix64(self.state)

    def u64s(self, count: int) -> np.ndarray:
        steps = np.arange(1, count + 1, dtype=np.uint64) * np.uint64(GAMMA)
        z = steps + np.uint64(self.state)
        self.state = (self.state + GAMMA * count) & MASK
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        return z ^ (z >> np.uint64(31))

    def uniforms(self, count: int) -> np.ndarray:
        return (self.u64s(count) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi]."""
        return lo + min(int(self.uniform() * (hi - lo + 1)), hi - lo)

    def choice(self, seq: Sequence):
        return seq[self.integer(0, len(seq) - 1)]

    def _box_muller(self, pairs: int) -> tuple[np.ndarray, np.ndarray]:
        u = self.uniforms(2 * pairs)
        r = np.sqrt(-2.0 * np.log1p(-u[0::2]))
        theta = 2.0 * math.pi * u[1::2]
        return r * np.cos(theta), r * np.sin(theta)

    def normals(self, count: int) -> np.ndarray:
        c, s = self._box_muller((count + 1) // 2)
        return np.column_stack([c, s]).ravel()[:count]

    def complex_normals(self, shape: tuple[int, ...]) -> np.ndarray:
        size = int(np.prod(shape))
        c, s = self._box_muller(size)
        return ((c + 1j * s) / math.sqrt(2.0)).reshape(shape)


# building blocks --------------------------------------------------------------


def householder_qr(G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Thin QR of a tall (rows >= cols) complex matrix by Householder reflections."""
    R = np.array(G, dtype=np.complex128, copy=True)
    rows, cols = R.shape
    Q = np.eye(rows, dtype=np.complex128)
    for j in range(cols):
        x = R[j:, j]
        nx = math.sqrt(float(np.sum(x.real**2 + x.imag**2)))
        if nx == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * nx
        v /= math.sqrt(float(np.sum(v.real**2 + v.imag**2)))
        R[j:, :] -= 2.0 * np.outer(v, v.conj() @ R[j:, :])
        Q[:, j:] -= 2.0 * np.outer(Q[:, j:] @ v, v.conj())
    return Q[:, :cols], np.triu(R[:cols, :])


def _phase_fixed_q(G: np.ndarray) -> np.ndarray:
    Q, R = householder_qr(G)
    d = R.diagonal()
    mag = np.abs(d)
    ph = np.where(mag > 0, d / np.where(mag > 0, mag, 1.0), 1.0)
    return Q * ph[None, :]


def random_unitary(rng: SplitMix64, n: int) -> np.ndarray:
    """Haar-distributed unitary."""
    return _phase_fixed_q(rng.complex_normals((n, n)))


def random_general(rng: SplitMix64, n: int) -> np.ndarray:
    return rng.complex_normals((n, n)) / math.sqrt(n)


def random_psd(rng: SplitMix64, n: int, rank: int | None = None) -> np.ndarray:
    """G*G/n for complex Gaussian G; rows of G past ``rank`` are zeroed."""
    G = rng.complex_normals((n, n))
    if rank is not None and rank < n:
        G[rank:, :] = 0.0
    return linalg.hermitian(G.conj().T @ G / n)


def random_psd_spectrum(rng: SplitMix64, n: int, spectrum: Sequence[float]) -> np.ndarray:
    if len(spectrum) != n:
        raise ValueError(f"spectrum has {len(spectrum)} values for n={n}")
    U = random_unitary(rng, n)
    return linalg.hermitian((U * np.asarray(spectrum, dtype=float)[None, :]) @ U.conj().T)


def random_hermitian(rng: SplitMix64, n: int) -> np.ndarray:
    G = rng.complex_normals((n, n))
    return linalg.hermitian((G + G.conj().T) / math.sqrt(2.0 * n))


def random_expansive(rng: SplitMix64, n: int, spread: float = 2.0) -> np.ndarray:
    """U (I + D) W* with Haar U, W and D >= 0 diagonal."""
    U = random_unitary(rng, n)
    W = random_unitary(rng, n)
    d = 1.0 + spread * rng.uniforms(n) ** 2
    return (U * d[None, :]) @ W.conj().T


def random_near_identity(rng: SplitMix64, n: int, eps: float) -> np.ndarray:
    """I + eps P with P >= 0 normalized to operator norm at most 1."""
    P = random_psd(rng, n)
    top = linalg.eigvalsh(P)[0]
    if top > 0:
        P = P / top
    return np.eye(n, dtype=np.complex128) + eps * P


def random_contraction(rng: SplitMix64, n: int) -> np.ndarray:
    U = random_unitary(rng, n)
    W = random_unitary(rng, n)
    d = rng.uniforms(n)
    return (U * d[None, :]) @ W.conj().T


def random_contractive_family(
    rng: SplitMix64, n: int, m: int, rho: float | None = None
) -> list[np.ndarray]:
    """m blocks of a scaled (mn x n) isometry, so sum Z_i* Z_i = rho**2 I."""
    if rho is None:
        rho = 1.0 - rng.uniform()
    Q = _phase_fixed_q(rng.complex_normals((m * n, n)))
    return [rho * Q[i * n : (i + 1) * n, :] for i in range(m)]


# generation specs -------------------------------------------------------------

A_KINDS = ("psd", "psd-rank-deficient", "psd-degenerate-spectrum", "hermitian-indefinite")
Z_KINDS = (
    "identity",
    "expansive",
    "expansive-near-identity",
    "contraction",
    "unitary",
    "contractive-family",
)
X_KINDS = ("general",)

_SLOT_KEY = {"A": 0, "Z": 1, "X": 2}
_FAMILY_KEY = 1_000_003


@dataclass(frozen=True, eq=False)
class GenSpec:
    """Everything needed to regenerate an instance without storing matrices."""

    seed: int
    n: int
    claim: str
    f: dict
    slots: list[dict[str, dict]] = field(default_factory=list)
    k: int | None = None

    @property
    def m(self) -> int:
        return len(self.slots)

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "seed": self.seed,
            "n": self.n,
            "m": self.m,
            "claim": self.claim,
            "f": self.f,
            "slots": self.slots,
        }
        if self.k is not None:
            out["k"] = self.k
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "GenSpec":
        return cls(int(obj["seed"]), int(obj["n"]), obj["claim"], obj["f"], obj["slots"], obj.get("k"))


def _make_A(rng: SplitMix64, n: int, spec: dict) -> np.ndarray:
    kind = spec["kind"]
    scale = float(spec.get("scale", 1.0))
    if kind == "psd":
        A = random_psd(rng, n)
    elif kind == "psd-rank-deficient":
        r = spec.get("r")
        if r is None:
            r = rng.integer(0, max(0, n - 1)) if n > 1 else 0
        A = random_psd(rng, n, rank=int(r))
    elif kind == "psd-degenerate-spectrum":
        spectrum = spec.get("spectrum")
        if spectrum is None:
            spectrum = [rng.choice((0.0, 0.5, 1.0, 2.0)) for _ in range(n)]
        A = random_psd_spectrum(rng, n, spectrum)
    elif kind == "hermitian-indefinite":
        A = random_hermitian(rng, n)
    else:
        raise ValueError(f"unknown A ensemble {kind!r}")
    return A * scale


def _make_Z(rng: SplitMix64, n: int, spec: dict) -> np.ndarray | None:
    kind = spec["kind"]
    if kind == "identity":
        return None
    if kind == "expansive":
        return random_expansive(rng, n, float(spec.get("spread", 2.0)))
    if kind == "expansive-near-identity":
        eps = spec.get("eps")
        if eps is None:
            eps = 10.0 ** (-6.0 * rng.uniform())
        return random_near_identity(rng, n, float(eps))
    if kind == "contraction":
        return random_contraction(rng, n)
    if kind == "unitary":
        return random_unitary(rng, n)
    raise ValueError(f"unknown Z ensemble {kind!r}")


def materialize(gs: GenSpec) -> Instance:
    """Build the instance described by ``gs``; identical specs give identical bits."""
    n = gs.n
    family = None
    if any(s.get("Z", {}).get("kind") == "contractive-family" for s in gs.slots):
        if not all(s.get("Z", {}).get("kind") == "contractive-family" for s in gs.slots):
            raise ValueError("contractive-family must cover every term")
        rho = gs.slots[0]["Z"].get("rho")
        family = random_contractive_family(
            SplitMix64(derive_seed(gs.seed, _FAMILY_KEY)), n, gs.m, rho
        )
    terms = []
    for i, slot in enumerate(gs.slots):
        rngs = {k: SplitMix64(derive_seed(gs.seed, i, v)) for k, v in _SLOT_KEY.items()}
        A = _make_A(rngs["A"], n, slot["A"]) if "A" in slot else None
        X = None
        if "X" in slot:
            if slot["X"]["kind"] != "general":
                raise ValueError(f"unknown X ensemble {slot['X']['kind']!r}")
            X = random_general(rngs["X"], n) * float(slot["X"].get("scale", 1.0))
        if family is not None:
            Z = family[i]
        elif "Z" in slot:
            Z = _make_Z(rngs["Z"], n, slot["Z"])
        else:
            Z = None
        terms.append(Term(A, Z, X))
    return Instance(gs.claim, ScalarFunction.from_json(gs.f), tuple(terms), gs.k)
