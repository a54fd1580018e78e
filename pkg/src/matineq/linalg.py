"""Dense complex linear algebra for small matrices.

Everything here is a pure function of its inputs. Matrices are plain
``numpy`` arrays of dtype ``complex128``; Hermitian inputs are symmetrized
on the way in so that ``H[i, j] == conj(H[j, i])`` holds exactly.

The eigensolver is a cyclic complex Jacobi iteration. Its convergence
threshold lives in a context variable so that a caller can re-run a whole
computation at a tighter threshold without threading a parameter through
every helper::

    with eigensolver_threshold(1e-15):
        verdict = check(instance)
"""

from __future__ import annotations

import contextlib
import contextvars
import math
from typing import Iterator, NamedTuple

import numba
import numpy as np

MAX_DIM = 64
DEFAULT_THRESHOLD = 1e-13
TIGHT_THRESHOLD = 1e-15
MAX_SWEEPS = 64
# eigenvalues in [-CLAMP_SLACK * scale, 0) are treated as 0 for functions on [0, inf)
CLAMP_SLACK = 1e-9
# |eigenvalue| <= NOISE_FLOOR * ||H||_op is round-off around an exact zero (numerical rank cut)
NOISE_FLOOR = 1e-12

_threshold: contextvars.ContextVar[float] = contextvars.ContextVar(
    "jacobi_threshold", default=DEFAULT_THRESHOLD
)


class LinalgError(Exception):
    pass


class DimensionError(LinalgError, ValueError):
    pass


class DomainError(LinalgError, ValueError):
    """An eigenvalue fell outside the domain of a scalar function."""

    def __init__(self, message: str, eigenvalue: float):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class SolverError(LinalgError, RuntimeError):
    """The Jacobi iteration hit its sweep cap."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray  # real, non-increasing
    eigenvectors: np.ndarray  # unitary, column j pairs with eigenvalues[j]


class LoewnerResult(NamedTuple):
    holds: bool
    margin: float


@contextlib.contextmanager
def eigensolver_threshold(value: float) -> Iterator[None]:
    """Temporarily change the relative off-diagonal threshold of the eigensolver."""
    token = _threshold.set(float(value))
    try:
        yield
    finally:
        _threshold.reset(token)


def current_threshold() -> float:
    return _threshold.get()


def as_matrix(M) -> np.ndarray:
    """Validate and convert to a square finite complex matrix."""
    a = np.array(M, dtype=np.complex128)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if not 1 <= n <= MAX_DIM:
        raise DimensionError(f"dimension {n} outside 1..{MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def hermitian(M) -> np.ndarray:
    """Return (M + M*)/2, which is exactly Hermitian with a real diagonal."""
    a = as_matrix(M)
    # conj and + are exact/commutative in IEEE arithmetic, so this is exactly Hermitian
    return 0.5 * (a + a.conj().T)


def is_hermitian(M) -> bool:
    M = np.asarray(M)
    return M.ndim == 2 and M.shape[0] == M.shape[1] and np.array_equal(M, M.conj().T)


def dagger(M: np.ndarray) -> np.ndarray:
    return M.conj().T


@numba.njit(cache=True)
def _jacobi_kernel(a, rel_thresh, max_sweeps):
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += a[i, j].real ** 2 + a[i, j].imag ** 2
    thresh = rel_thresh * math.sqrt(fro)
    off = 0.0
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += a[i, j].real ** 2 + a[i, j].imag ** 2
        off = math.sqrt(off)
        if off <= thresh:
            return v, sweep, off, True
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                beta = abs(b)
                if beta == 0.0:
                    continue
                # phase-rotate the pair to a real off-diagonal, then a real rotation
                u = b / beta
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * beta)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                su = s * u
                suc = s * u.conjugate()
                for r in range(n):
                    arp = a[r, p]
                    arq = a[r, q]
                    a[r, p] = c * arp - suc * arq
                    a[r, q] = su * arp + c * arq
                for r in range(n):
                    apr = a[p, r]
                    aqr = a[q, r]
                    a[p, r] = c * apr - su * aqr
                    a[q, r] = suc * apr + c * aqr
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = app - t * beta
                a[q, q] = aqq + t * beta
                for r in range(n):
                    vrp = v[r, p]
                    vrq = v[r, q]
                    v[r, p] = c * vrp - suc * vrq
                    v[r, q] = su * vrp + c * vrq
    return v, max_sweeps, off, False


def _normalize_phases(U: np.ndarray) -> np.ndarray:
    # first component with |u| > 1e-8 of each column made real positive
    mags = np.abs(U)
    idx = np.argmax(mags > 1e-8, axis=0)
    lead = U[idx, np.arange(U.shape[1])]
    return U * (np.abs(lead) / lead)[None, :]


def eig_hermitian(H, threshold: float | None = None) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi.

    Eigenvalues come back sorted non-increasing (stable with respect to the
    Jacobi index order on exact ties) and every eigenvector is scaled so its
    first non-negligible component is real and positive.
    """
    work = hermitian(H)
    thr = _threshold.get() if threshold is None else threshold
    V, sweeps, off, ok = _jacobi_kernel(work, thr, MAX_SWEEPS)
    if not ok:
        raise SolverError(
            f"Jacobi did not converge in {MAX_SWEEPS} sweeps (off-diagonal norm {off:.3e})",
            residual=off,
        )
    lam = work.diagonal().real.copy()
    order = np.argsort(-lam, kind="stable")
    return Spectrum(lam[order], _normalize_phases(V[:, order]))


def eigvalsh(H) -> np.ndarray:
    return eig_hermitian(H).eigenvalues


def op_norm_hermitian(H: np.ndarray) -> float:
    lam = eigvalsh(H)
    return float(max(abs(lam[0]), abs(lam[-1])))


def lambda_min(H) -> float:
    return float(eigvalsh(H)[-1])


def reconstruct(spec: Spectrum, values: np.ndarray | None = None) -> np.ndarray:
    U = spec.eigenvectors
    lam = spec.eigenvalues if values is None else values
    return hermitian((U * lam[None, :]) @ U.conj().T)


def apply_scalar_function(H, f) -> np.ndarray:
    """f(H) = U f(Lambda) U* through the Jacobi eigenbasis.

    ``f`` is a vectorized callable. When it carries ``domain == "nonneg"``
    eigenvalues slightly below zero (within the clamp slack) are set to 0
    and anything further below raises :class:`DomainError`. Eigenvalues at
    the round-off level of ``||H||`` are also set to 0; functions like
    t**0.3 would otherwise turn a 1e-16 rounding error into 1e-5.
    """
    spec = eig_hermitian(H)
    lam = spec.eigenvalues
    if getattr(f, "domain", "real") == "nonneg":
        scale = max(1.0, float(np.max(np.abs(lam))))
        if lam[-1] < -CLAMP_SLACK * scale:
            raise DomainError(
                f"eigenvalue {lam[-1]:.6g} is below the domain [0, inf) of {f!r}",
                eigenvalue=float(lam[-1]),
            )
        top = float(np.max(np.abs(lam)))
        lam = np.where(lam <= NOISE_FLOOR * top, 0.0, lam)
    return reconstruct(spec, np.asarray(f(lam), dtype=float))


def _dilation_singular_values(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    dil = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    dil[:n, n:] = a
    dil[n:, :n] = a.conj().T
    return eig_hermitian(dil).eigenvalues[:n]


def singular_values(M) -> np.ndarray:
    """Singular values sorted non-increasing.

    Mathematically these are the square roots of the eigenvalues of M*M.
    They are read off instead as |eigenvalues| for Hermitian M and as the
    top half of the spectrum of the Hermitian dilation [[0, M], [M*, 0]]
    otherwise; both routes avoid the squaring that loses small singular
    values.
    """
    a = as_matrix(M)
    if is_hermitian(a):
        s = np.abs(eigvalsh(a))
        return np.sort(s)[::-1]
    if a.shape[0] > MAX_DIM // 2:
        s = np.sqrt(np.maximum(eigvalsh(a.conj().T @ a), 0.0))
        return np.sort(s)[::-1]
    return np.maximum(_dilation_singular_values(a), 0.0)


def abs_matrix(M) -> np.ndarray:
    """|M| = (M*M)^(1/2)."""
    a = as_matrix(M)
    spec = eig_hermitian(a.conj().T @ a)
    return reconstruct(spec, np.sqrt(np.maximum(spec.eigenvalues, 0.0)))


def congruence(Z, A) -> np.ndarray:
    """Z* A Z, symmetrized."""
    z = as_matrix(Z)
    a = as_matrix(A)
    if z.shape != a.shape:
        raise DimensionError(f"congruence of {a.shape} by {z.shape}")
    return hermitian(z.conj().T @ a @ z)


def loewner_leq(X, Y, tol: float = 1e-9) -> LoewnerResult:
    """Test X <= Y in the Loewner order; the margin is lambda_min(Y - X)."""
    x = hermitian(X)
    y = hermitian(Y)
    if x.shape != y.shape:
        raise DimensionError(f"shape mismatch {x.shape} vs {y.shape}")
    margin = lambda_min(y - x)
    scale = max(op_norm_hermitian(x), op_norm_hermitian(y), 1.0)
    return LoewnerResult(bool(margin >= -tol * scale), float(margin))


def is_psd(H, tol: float = 1e-9) -> bool:
    lam = eigvalsh(H)
    return bool(lam[-1] >= -tol * max(1.0, abs(lam[0]), abs(lam[-1])))


def is_expansive(Z, tol: float = 1e-9) -> bool:
    return bool(singular_values(Z)[-1] >= 1.0 - tol)


def is_contraction(Z, tol: float = 1e-9) -> bool:
    return bool(singular_values(Z)[0] <= 1.0 + tol)
