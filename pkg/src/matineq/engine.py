"""Named inequality claims evaluated on concrete instances.

Every claim maps an :class:`~matineq.instance.Instance` to a :class:`Verdict`
carrying a signed margin (non-negative means the inequality is satisfied),
per-k Ky Fan margins where the claim is a symmetric-norm statement, the
hypothesis predicates that were checked, and an optional certificate.

Claims are gated on their hypotheses: a claim whose hypotheses fail is not
evaluated unless ``force=True``. :func:`adjudicate` separates round-off from
genuine violations by re-running at a tighter eigensolver threshold.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, NamedTuple, Sequence

import numpy as np

from . import functions as fn
from . import linalg
from .functions import ScalarFunction
from .instance import Instance, Term, matrix_to_json
from .norms import SANITY_SCHATTEN, ky_fan_norms, norm_from_singular_values, schatten

HOLD_TOL = 1e-8  # holds iff margin >= -HOLD_TOL * scale
REPORT_TOL = 1e-6  # raw margin must be below -REPORT_TOL * scale to be a counterexample
CONFIRM_TOL = 1e-7  # ...and stay below -CONFIRM_TOL * scale at the tight threshold
HYP_TOL = 1e-9
CERT_TOL = 1e-8


class EngineError(Exception):
    pass


class DominanceError(EngineError, ValueError):
    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class CertificateError(EngineError, RuntimeError):
    pass


class UnknownClaim(EngineError, KeyError):
    pass


# results ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class UnitaryCertificate:
    V: np.ndarray
    residual: float  # ||V*V - I||_F
    margin: float  # lambda_min(L - V R V*)
    scale: float

    @property
    def ok(self) -> bool:
        return self.residual <= 1e-9 and self.margin >= -CERT_TOL * self.scale

    def to_json(self) -> dict:
        return {
            "type": "unitary",
            "V": matrix_to_json(self.V),
            "residual": self.residual,
            "margin": self.margin,
            "scale": self.scale,
            "ok": self.ok,
        }


@dataclass(frozen=True, eq=False)
class ProjectionCertificate:
    """Top-k spectral projections E_k = Q[:, :k] Q[:, :k]* of the congruence sum.

    ``lhs[k-1] = Tr E_k f(S) E_k`` equals the Ky Fan k-norm of f(S), and
    ``mid[k-1] = Tr E_k R E_k`` is bounded by the Ky Fan k-norm ``rhs[k-1]``
    of R, so lhs <= mid certifies the k-th Ky Fan inequality.
    """

    basis: np.ndarray
    lhs: np.ndarray
    mid: np.ndarray
    rhs: np.ndarray
    gaps: np.ndarray
    margin: float
    scale: float

    @property
    def ok(self) -> bool:
        slack = CERT_TOL * self.scale
        return bool(self.margin >= -slack and np.all(self.mid <= self.rhs + slack))

    def to_json(self) -> dict:
        return {
            "type": "spectral-projection",
            "basis": matrix_to_json(self.basis),
            "trace_f_compressed": self.lhs.tolist(),
            "trace_rhs_compressed": self.mid.tolist(),
            "ky_fan_rhs": self.rhs.tolist(),
            "gaps": [g if math.isfinite(g) else None for g in self.gaps.tolist()],
            "margin": self.margin,
            "scale": self.scale,
            "ok": self.ok,
        }


@dataclass(frozen=True, eq=False)
class Verdict:
    claim: str
    holds: bool
    margin: float | None
    scale: float
    tolerance_used: float
    hypotheses: dict[str, bool]
    status: str  # holds | fails | violated | inconclusive | unchecked
    per_k_margins: np.ndarray | None = None
    binding_k: int | None = None
    certificate: Any = None
    warning: str | None = None
    details: dict = field(default_factory=dict)

    @property
    def hypotheses_ok(self) -> bool:
        return all(self.hypotheses.values())

    @property
    def evaluated(self) -> bool:
        return self.margin is not None

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "claim": self.claim,
            "holds": self.holds,
            "status": self.status,
            "margin": self.margin,
            "scale": self.scale,
            "tolerance_used": self.tolerance_used,
            "hypotheses_ok": self.hypotheses_ok,
            "hypotheses": dict(self.hypotheses),
        }
        if self.per_k_margins is not None:
            out["per_k_margins"] = [float(x) for x in self.per_k_margins]
        if self.binding_k is not None:
            out["binding_k"] = self.binding_k
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        if self.warning:
            out["warning"] = self.warning
        if self.details:
            out["details"] = self.details
        return out


# hypothesis predicates ----------------------------------------------------------


def _f_concave_nonneg(f: ScalarFunction) -> bool:
    # concave and non-negative on [0, inf) forces f(0) >= 0 and non-decreasing
    return f.is_concave and f.value_at_zero >= 0 and f.monotone


def _f_convex_zero(f: ScalarFunction) -> bool:
    return f.is_convex and abs(f.value_at_zero) <= 1e-12 and f.monotone


def _is_identity(Z: np.ndarray | None) -> bool:
    if Z is None:
        return True
    return bool(np.max(np.abs(Z - np.eye(Z.shape[0]))) <= HYP_TOL)


def _hyp(inst: Instance, *names: str) -> dict[str, bool]:
    out: dict[str, bool] = {}
    f = inst.f
    terms = inst.terms
    for name in names:
        if name == "A_psd":
            out[name] = all(t.A is not None and linalg.is_psd(t.A, HYP_TOL) for t in terms)
        elif name == "A_hermitian":
            out[name] = all(t.A is not None for t in terms)
        elif name == "Z_expansive":
            out[name] = all(linalg.is_expansive(t.z(), HYP_TOL) for t in terms)
        elif name == "Z_contraction":
            out[name] = all(linalg.is_contraction(t.z(), HYP_TOL) for t in terms)
        elif name == "Z_identity":
            out[name] = all(_is_identity(t.Z) for t in terms)
        elif name == "Z_sum_contractive":
            G = sum(t.z().conj().T @ t.z() for t in terms)
            out[name] = bool(linalg.eigvalsh(G)[0] <= 1.0 + HYP_TOL)
        elif name == "X_given":
            out[name] = all(t.X is not None or t.A is not None for t in terms)
        elif name == "single_term":
            out[name] = inst.m == 1
        elif name == "two_or_more_terms":
            out[name] = inst.m >= 2
        elif name == "f_concave_nonneg":
            out[name] = _f_concave_nonneg(f)
        elif name == "f_concave_f0_nonneg":
            out[name] = f.is_concave and f.value_at_zero >= 0
        elif name == "f_concave_real_line_f0_nonneg":
            out[name] = f.is_concave and f.domain == "real" and f.value_at_zero >= 0
        elif name == "f_concave_real_line_f0_zero":
            out[name] = f.is_concave and f.domain == "real" and abs(f.value_at_zero) <= 1e-12
        elif name == "f_operator_concave_f0_nonneg":
            out[name] = f.operator_concave and f.value_at_zero >= 0
        elif name == "f_convex_zero_at_0":
            out[name] = _f_convex_zero(f)
        elif name == "f_power_gt_1":
            out[name] = f.kind == "power" and f.params["p"] > 1
        elif name == "k_in_range":
            out[name] = inst.k is not None and 1 <= inst.k <= inst.n
        else:  # pragma: no cover - programming error
            raise KeyError(name)
    return out


# shared pieces ----------------------------------------------------------------


def congruence_sum(terms: Sequence[Term], g: ScalarFunction | None = None) -> np.ndarray:
    """sum Z_i* g(A_i) Z_i (g = identity when None)."""
    total = None
    for t in terms:
        A = t.A if g is None else linalg.apply_scalar_function(t.A, g)
        C = A if t.Z is None else linalg.congruence(t.Z, A)
        total = C if total is None else total + C
    return linalg.hermitian(total)


def _trace(H: np.ndarray) -> float:
    return float(np.trace(H).real)


def _scale(*traces: float) -> float:
    return max(1.0, *[abs(t) for t in traces])


def _unchecked(claim: str, hyps: dict[str, bool], tol: float) -> Verdict:
    return Verdict(claim, False, None, 1.0, tol, hyps, "unchecked",
                   warning="hypotheses not satisfied; not evaluated")


def _finish(claim, margin, scale, tol, hyps, force, **kw) -> Verdict:
    ok = bool(margin >= -tol * scale)
    holds = ok and (all(hyps.values()) or force)
    status = "holds" if ok else "fails"
    return Verdict(claim, holds, float(margin), float(scale), tol, hyps, status, **kw)


def _ky_fan_verdict(claim, L, R, tol, hyps, force, details=None) -> Verdict:
    """Verdict for ||L||_k <= ||R||_k for all k."""
    sL = linalg.singular_values(L)
    sR = linalg.singular_values(R)
    margins = np.cumsum(sR) - np.cumsum(sL)
    j = int(np.argmin(margins))
    scale = _scale(float(np.sum(sL)), float(np.sum(sR)))
    d = dict(details or {})
    d["schatten_margins"] = {
        ("inf" if math.isinf(p) else str(p)): norm_from_singular_values(sR, schatten(p))
        - norm_from_singular_values(sL, schatten(p))
        for p in SANITY_SCHATTEN
    }
    return _finish(claim, margins[j], scale, tol, hyps, force,
                   per_k_margins=margins, binding_k=j + 1, details=d)


def _spectral_verdict(claim, big, small, tol, hyps, force, certify=False) -> Verdict:
    """Verdict for lambda_j(small) <= lambda_j(big) for every j."""
    lb = linalg.eigvalsh(big)
    ls = linalg.eigvalsh(small)
    diffs = lb - ls
    j = int(np.argmin(diffs))
    scale = _scale(float(np.sum(np.abs(lb))), float(np.sum(np.abs(ls))))
    v = _finish(claim, diffs[j], scale, tol, hyps, force,
                per_k_margins=diffs, binding_k=j + 1)
    if certify and v.status == "holds":
        cert = dominance_unitary(big, small, slack=max(tol, 1e-9))
        if not cert.ok:
            raise CertificateError(
                f"certificate for {claim} re-verified with margin {cert.margin:.3e} "
                f"(scale {cert.scale:.3g})"
            )
        v = replace(v, certificate=cert)
    return v


def dominance_unitary(L, R, slack: float = 1e-9) -> UnitaryCertificate:
    """Unitary V with V R V* <= L, built from the sorted eigenbases.

    Requires lambda_j(L) >= lambda_j(R) for every j (up to ``slack * scale``).
    The returned certificate is re-verified from a fresh eigendecomposition.
    """
    L = linalg.hermitian(L)
    R = linalg.hermitian(R)
    sl = linalg.eig_hermitian(L)
    sr = linalg.eig_hermitian(R)
    scale = _scale(float(np.sum(np.abs(sl.eigenvalues))), float(np.sum(np.abs(sr.eigenvalues))))
    gap = sl.eigenvalues - sr.eigenvalues
    bad = np.flatnonzero(gap < -slack * scale)
    if bad.size:
        j = int(bad[0])
        raise DominanceError(
            f"lambda_{j + 1}(L) = {sl.eigenvalues[j]:.6g} < lambda_{j + 1}(R) = {sr.eigenvalues[j]:.6g}",
            index=j + 1,
        )
    return verify_unitary_certificate(sl.eigenvectors @ sr.eigenvectors.conj().T, L, R)


def verify_unitary_certificate(V, L, R) -> UnitaryCertificate:
    V = np.asarray(V, dtype=np.complex128)
    n = V.shape[0]
    residual = float(np.linalg.norm(V.conj().T @ V - np.eye(n)))
    VRV = linalg.hermitian(V @ R @ V.conj().T)
    res = linalg.loewner_leq(VRV, L, CERT_TOL)
    scale = _scale(float(np.sum(np.abs(linalg.eigvalsh(L)))), float(np.sum(np.abs(linalg.eigvalsh(R)))))
    return UnitaryCertificate(V, residual, res.margin, scale)


# claims -----------------------------------------------------------------------

_CONCAVE_CONGRUENCE_HYPS = ("A_psd", "Z_expansive", "f_concave_nonneg")


def _thm31_family(claim: str, extra: tuple[str, ...]) -> Callable:
    def check(inst: Instance, tol: float = HOLD_TOL, force: bool = False) -> Verdict:
        hyps = _hyp(inst, *_CONCAVE_CONGRUENCE_HYPS, *extra)
        if not all(hyps.values()) and not force:
            return _unchecked(claim, hyps, tol)
        L = linalg.apply_scalar_function(congruence_sum(inst.terms), inst.f)
        R = congruence_sum(inst.terms, inst.f)
        return _ky_fan_verdict(claim, L, R, tol, hyps, force)

    check.__name__ = f"check_{claim.replace('-', '_')}"
    check.__doc__ = f"||f(sum Z_i* A_i Z_i)||_k <= ||sum Z_i* f(A_i) Z_i||_k for all k ({claim})."
    return check


check_thm31 = _thm31_family("thm31", ())
_check_thm21 = _thm31_family("thm21", ("single_term",))
_check_thm22 = _thm31_family("thm22", ("Z_identity",))


def _convex_congruence(inst: Instance, tol: float, force: bool, claim: str, extra=()) -> Verdict:
    hyps = _hyp(inst, "A_psd", "Z_expansive", "f_convex_zero_at_0", *extra)
    if not all(hyps.values()) and not force:
        return _unchecked(claim, hyps, tol)
    L = congruence_sum(inst.terms, inst.f)
    R = linalg.apply_scalar_function(congruence_sum(inst.terms), inst.f)
    return _ky_fan_verdict(claim, L, R, tol, hyps, force)


def check_cor32(inst: Instance, tol: float = HOLD_TOL, force: bool = False) -> Verdict:
    """||sum Z_i* g(A_i) Z_i||_k <= ||g(sum Z_i* A_i Z_i)||_k, g convex with g(0) = 0."""
    return _convex_congruence(inst, tol, force, "cor32")


def _check_thm11(inst: Instance, tol: float = HOLD_TOL, force: bool = False) -> Verdict:
    return _convex_congruence(inst, tol, force, "thm11", ("f_power_gt_1",))


def check_mccarthy(inst: Instance, tol: float = HOLD_TOL, force: bool = False) -> Verdict:
    """Tr sum A_i^p <= Tr (sum A_i)^p, read off as the top Ky Fan margin."""
    v = _convex_congruence(inst, tol, force, "mccarthy", ("f_power_gt_1", "Z_identity"))
    if not v.evaluated:
        return v
    n = v.per_k_margins.size
    return _finish("mccarthy", v.per_k_margins[-1], v.scale, tol, v.hypotheses, force,
                   per_k_margins=v.per_k_margins, binding_k=n)


def _trace_pair(inst: Instance):
    t = inst.terms[0]
    L = linalg.apply_scalar_function(linalg.congruence(t.z(), t.A), inst.f)
    R = linalg.congruence(t.z(), linalg.apply_scalar_function(t.A, inst.f))
    return L, R


def _trace_claim(claim: str, hyps_names: tuple[str, ...], sign: int) -> Callable:
    # sign = +1: Tr f(Z*AZ) >= Tr Z*f(A)Z ; sign = -1: reversed
    def check(inst: Instance, tol: float = HOLD_TOL, force: bool = False) -> Verdict:
        hyps = _hyp(inst, "single_term", *hyps_names)
        if not all(hyps.values()) and not force:
            return _unchecked(claim, hyps, tol)
        L, R = _trace_pair(inst)
        tL, tR = _trace(L), _trace(R)
        scale = _scale(float(np.sum(np.abs(linalg.eigvalsh(L)))), float(np.sum(np.abs(linalg.eigvalsh(R)))))
        return _finish(claim, sign * (tL - tR), scale, tol, hyps, force,
                       details={"trace_f_congruence": tL, "trace_congruence_f": tR})

    check.__name__ = f"check_{claim.replace('-', '_')}"
    return check


check_eq1 = _trace_claim("eq1", ("A_psd", "Z_contraction", "f_concave_f0_nonneg"), +1)
check_eq1_hermitian = _trace_claim(
    "eq1-hermitian", ("A_hermitian", "Z_contraction", "f_concave_real_line_f0_nonneg"), +1
)
check_eq4 = _trace_claim("eq4", ("A_psd", "Z_expansive", "f_concave_nonneg"), -1)
check_eq4_nonpsd = _trace_claim(
    "eq4-nonpsd", ("A_hermitian", "Z_expansive", "f_concave_real_line_f0_zero"), -1
)


def check_eq2(inst: Instance, tol: float = HOLD_TOL, force: bool = False) -> Verdict:
    """lambda_j(f(Z*AZ)) >= lambda_j(Z*f(A)Z) for every j, with a unitary certificate."""
    hyps = _hyp(inst, "single_term", "A_psd", "Z_contraction", "f_concave_nonneg")
    if not all(hyps.values()) and not force:
        return _unchecked("eq2", hyps, tol)
    L, R = _trace_pair(inst)
    return _spectral_verdict("eq2", L, R, tol, hyps, force, certify=True)


def check_eq2_reversed(inst: Instance, tol: float = HOLD_TOL, force: bool = False) -> Verdict:
    """The (false) reversal of eq2 for expansive Z: lambda_j(f(Z*AZ)) <= lambda_j(Z*f(A)Z)."""
    hyps = _hyp(inst, "single_term", "A_psd", "Z_expansive", "f_concave_nonneg")
    if not all(hyps.values()) and not force:
        return _unchecked("eq2-reversed", hyps, tol)
    L, R = _trace_pair(inst)
    return _spectral_verdict("eq2-reversed", R, L, tol, hyps, force)


def _loewner_claim(claim: str, hyps_names: tuple[str, ...], reverse: bool) -> Callable:
    def check(inst: Instance, tol: float = HOLD_TOL, force: bool = False) -> Verdict:
        hyps = _hyp(inst, "single_term", *hyps_names)
        if not all(hyps.values()) and not force:
            return _unchecked(claim, hyps, tol)
        L, R = _trace_pair(inst)
        diff = R - L if reverse else L - R
        lam = linalg.eigvalsh(diff)
        scale = _scale(float(np.sum(np.abs(linalg.eigvalsh(L)))), float(np.sum(np.abs(linalg.eigvalsh(R)))))
        return _finish(claim, lam[-1], scale, tol, hyps, force)

    check.__name__ = f"check_{claim.replace('-', '_')}"
    return check


check_eq3 = _loewner_claim("eq3", ("A_psd", "Z_contraction", "f_operator_concave_f0_nonneg"), False)
check_eq3_reversed = _loewner_claim(
    "eq3-reversed", ("A_psd", "Z_expansive", "f_operator_concave_f0_nonneg"), True
)


def check_eq5(inst: Instance, tol: float = HOLD_TOL, force: bool = False) -> Verdict:
    """Tr f(sum A_i) <= sum Tr f(A_i)."""
    hyps = _hyp(inst, "A_psd", "Z_identity", "f_concave_nonneg")
    if not all(hyps.values()) and not force:
        return _unchecked("eq5", hyps, tol)
    S = linalg.hermitian(sum(t.A for t in inst.terms))
    lhs = _trace(linalg.apply_scalar_function(S, inst.f))
    rhs = sum(_trace(linalg.apply_scalar_function(t.A, inst.f)) for t in inst.terms)
    return _finish("eq5", rhs - lhs, _scale(lhs, rhs), tol, hyps, force)


def check_loewner_subadd(inst: Instance, tol: float = HOLD_TOL, force: bool = False) -> Verdict:
    """The (false in general) operator inequality f(sum A_i) <= sum f(A_i)."""
    hyps = _hyp(inst, "A_psd", "Z_identity", "two_or_more_terms", "f_concave_nonneg")
    if not all(hyps.values()) and not force:
        return _unchecked("loewner-subadd", hyps, tol)
    S = linalg.hermitian(sum(t.A for t in inst.terms))
    L = linalg.apply_scalar_function(S, inst.f)
    R = linalg.hermitian(sum(linalg.apply_scalar_function(t.A, inst.f) for t in inst.terms))
    scale = _scale(_trace(L), _trace(R))
    return _finish("loewner-subadd", linalg.lambda_min(R - L), scale, tol, hyps, force)


def check_eq6_weyl(inst: Instance, tol: float = HOLD_TOL, force: bool = False) -> Verdict:
    """Weyl-type necessary conditions of f(sum A_i) <= sum U_i f(A_i) U_i*:
    lambda_{i_1 + ... + i_m - m + 1}(f(sum A_i)) <= sum_j lambda_{i_j}(f(A_j))."""
    hyps = _hyp(inst, "A_psd", "Z_identity", "f_concave_nonneg")
    if not all(hyps.values()) and not force:
        return _unchecked("eq6-weyl", hyps, tol)
    n, m = inst.n, inst.m
    S = linalg.hermitian(sum(t.A for t in inst.terms))
    ls = linalg.eigvalsh(linalg.apply_scalar_function(S, inst.f))
    parts = [linalg.eigvalsh(linalg.apply_scalar_function(t.A, inst.f)) for t in inst.terms]
    worst, where = math.inf, None
    for idx in itertools.product(range(n), repeat=m):
        target = sum(idx)  # zero-based: i_1 + ... + i_m - m + 1 - 1
        if target >= n:
            continue
        gap = sum(p[i] for p, i in zip(parts, idx)) - ls[target]
        if gap < worst:
            worst, where = gap, idx
    scale = _scale(float(np.sum(ls)), float(sum(np.sum(p) for p in parts)))
    return _finish("eq6-weyl", worst, scale, tol, hyps, force,
                   details={"binding_indices": [i + 1 for i in where]})


def _f_of_singular_values(M: np.ndarray, f: ScalarFunction) -> np.ndarray:
    # f >= 0 non-decreasing, so f(|M|) has eigenvalues f(sigma_j) in the same order
    return np.asarray(f(linalg.singular_values(M)), dtype=float)


def check_uchiyama(inst: Instance, tol: float = HOLD_TOL, force: bool = False) -> Verdict:
    """||f(|sum X_i|)||_k <= sum ||f(|X_i|)||_k for every k."""
    hyps = _hyp(inst, "X_given", "f_concave_nonneg")
    if not all(hyps.values()) and not force:
        return _unchecked("uchiyama", hyps, tol)
    Xs = [t.X if t.X is not None else t.A for t in inst.terms]
    lhs = np.cumsum(_f_of_singular_values(sum(Xs), inst.f))
    rhs = sum(np.cumsum(_f_of_singular_values(X, inst.f)) for X in Xs)
    margins = rhs - lhs
    j = int(np.argmin(margins))
    return _finish("uchiyama", margins[j], _scale(lhs[-1], rhs[-1]), tol, hyps, force,
                   per_k_margins=margins, binding_k=j + 1)


def check_contractive_sum(inst: Instance, tol: float = HOLD_TOL, force: bool = False) -> Verdict:
    """lambda_j(f(sum Z_i* A_i Z_i)) >= lambda_j(sum Z_i* f(A_i) Z_i) when sum Z_i* Z_i <= I."""
    hyps = _hyp(inst, "A_psd", "Z_sum_contractive", "f_concave_nonneg")
    if not all(hyps.values()) and not force:
        return _unchecked("contractive-sum", hyps, tol)
    L = linalg.apply_scalar_function(congruence_sum(inst.terms), inst.f)
    R = congruence_sum(inst.terms, inst.f)
    return _spectral_verdict("contractive-sum", L, R, tol, hyps, force, certify=True)


def check_eq9(inst: Instance, tol: float = HOLD_TOL, force: bool = False) -> Verdict:
    """Tr E (sum Z_i* h(A_i) Z_i) E <= Tr E h(S) E for the top-k spectral projection E of
    S = sum Z_i* A_i Z_i and convex h >= 0 with h(0) = 0."""
    hyps = _hyp(inst, "A_psd", "Z_expansive", "f_convex_zero_at_0", "k_in_range")
    if not all(hyps.values()) and not force:
        return _unchecked("eq9", hyps, tol)
    S = congruence_sum(inst.terms)
    spec = linalg.eig_hermitian(S)
    k = inst.k
    E = spec.eigenvectors[:, :k]
    hS = linalg.apply_scalar_function(S, inst.f)
    R = congruence_sum(inst.terms, inst.f)
    lhs = float(np.trace(E.conj().T @ R @ E).real)
    rhs = float(np.trace(E.conj().T @ hS @ E).real)
    lam = spec.eigenvalues
    gap = float(lam[k - 1] - lam[k]) if k < lam.size else math.inf
    return _finish("eq9", rhs - lhs, _scale(lhs, rhs), tol, hyps, force,
                   details={"k": k, "eigen_gap_at_cut": gap if math.isfinite(gap) else None,
                            "trace_lhs": lhs, "trace_rhs": rhs})


# named ops with matrix arguments --------------------------------------------------


def _inst(claim, f, pairs, k=None) -> Instance:
    return Instance(claim, f, tuple(Term(linalg.hermitian(A), None if Z is None else linalg.as_matrix(Z)) for A, Z in pairs), k)


def check_thm21(A, Z, f: ScalarFunction, tol: float = HOLD_TOL, force: bool = False) -> Verdict:
    """||f(Z*AZ)|| <= ||Z*f(A)Z|| for all symmetric norms; the congruence check with one term."""
    return _check_thm21(_inst("thm21", f, [(A, Z)]), tol, force)


def check_thm22(As: Sequence, f: ScalarFunction, tol: float = HOLD_TOL, force: bool = False) -> Verdict:
    return _check_thm22(_inst("thm22", f, [(A, None) for A in As]), tol, force)


def check_thm11(inst_or_pairs, p: float | None = None, tol: float = HOLD_TOL, force: bool = False) -> Verdict:
    """||sum Z_i* A_i^p Z_i|| <= ||(sum Z_i* A_i Z_i)^p||, via cor32 with g = t^p."""
    if isinstance(inst_or_pairs, Instance):
        inst = inst_or_pairs
        if p is not None:
            inst = replace(inst, f=fn.power(p))
    else:
        inst = _inst("thm11", fn.power(p), inst_or_pairs)
    return _check_thm11(inst, tol, force)


# eq6 witness search ------------------------------------------------------------


class Eq6Witness(NamedTuple):
    U: np.ndarray
    V: np.ndarray
    margin: float
    evaluations: int


def search_eq6_witness(A, B, f: ScalarFunction, budget: int = 10_000, seed: int = 0) -> Eq6Witness | None:
    """Best-effort search for unitaries with f(A+B) <= U f(A) U* + V f(B) V*.

    Starts from eigenbasis alignments (every pairing of sorted eigenvalues for
    n <= 4) and refines with a (1+1) evolution strategy on the unitary pair.
    Returns ``None`` when ``budget`` objective evaluations are spent without
    a verified witness; that is not evidence against existence.
    """
    from .generators import SplitMix64, _phase_fixed_q

    A = linalg.hermitian(A)
    B = linalg.hermitian(B)
    n = A.shape[0]
    FA = linalg.apply_scalar_function(A, f)
    FB = linalg.apply_scalar_function(B, f)
    FS = linalg.apply_scalar_function(A + B, f)
    scale = _scale(_trace(FA) + _trace(FB), _trace(FS))
    sa, sb, ss = (linalg.eig_hermitian(M) for M in (FA, FB, FS))
    evals = 0

    def objective(U, V):
        nonlocal evals
        evals += 1
        return linalg.lambda_min(U @ FA @ U.conj().T + V @ FB @ V.conj().T - FS)

    W = ss.eigenvectors
    perms = list(itertools.permutations(range(n))) if n <= 4 else [tuple(range(n)), tuple(range(n))[::-1]]
    starts = [(np.eye(n, dtype=complex), np.eye(n, dtype=complex))]
    for pa in perms:
        for pb in perms:
            starts.append((W[:, list(pa)] @ sa.eigenvectors.conj().T, W[:, list(pb)] @ sb.eigenvectors.conj().T))
    best = None
    for U, V in starts:
        if evals >= budget:
            break
        val = objective(U, V)
        if best is None or val > best[2]:
            best = (U, V, val)
    rng = SplitMix64(seed)
    U, V, val = best
    sigma = 0.3
    while val < 0 and evals < budget:
        Up = U @ _phase_fixed_q(np.eye(n) + sigma * rng.complex_normals((n, n)))
        Vp = V @ _phase_fixed_q(np.eye(n) + sigma * rng.complex_normals((n, n)))
        cand = objective(Up, Vp)
        if cand > val:
            U, V, val = Up, Vp, cand
            sigma = min(1.0, sigma * 1.5)
        else:
            sigma *= 0.9
            if sigma < 1e-7:
                # restart from a random pair
                U = _phase_fixed_q(rng.complex_normals((n, n)))
                V = _phase_fixed_q(rng.complex_normals((n, n)))
                val = objective(U, V)
                sigma = 0.3
        if val > best[2]:
            best = (U, V, val)
    U, V, val = best
    verified = linalg.lambda_min(U @ FA @ U.conj().T + V @ FB @ V.conj().T - FS)
    if verified >= -CERT_TOL * scale:
        return Eq6Witness(U, V, float(verified), evals)
    return None


# projection certificate ------------------------------------------------------------


def projection_certificate(inst: Instance, tol: float = HOLD_TOL) -> ProjectionCertificate:
    """Spectral-projection certificate for the Ky Fan inequalities of thm31."""
    S = congruence_sum(inst.terms)
    spec = linalg.eig_hermitian(S)
    Q = spec.eigenvectors
    FS = linalg.apply_scalar_function(S, inst.f)
    R = congruence_sum(inst.terms, inst.f)
    n = inst.n
    lhs = np.array([np.trace(Q[:, :k].conj().T @ FS @ Q[:, :k]).real for k in range(1, n + 1)])
    mid = np.array([np.trace(Q[:, :k].conj().T @ R @ Q[:, :k]).real for k in range(1, n + 1)])
    rhs = ky_fan_norms(R)
    lam = spec.eigenvalues
    gaps = np.array([lam[k - 1] - lam[k] if k < n else math.inf for k in range(1, n + 1)])
    margin = float(np.min(mid - lhs))
    return ProjectionCertificate(Q, lhs, mid, rhs, gaps, margin, _scale(lhs[-1], rhs[-1]))


# registry and adjudication ---------------------------------------------------------


class ClaimInfo(NamedTuple):
    check: Callable[..., Verdict]
    negative: bool  # false in general; searched for counterexamples


CLAIMS: dict[str, ClaimInfo] = {
    "thm31": ClaimInfo(check_thm31, False),
    "thm21": ClaimInfo(_check_thm21, False),
    "thm22": ClaimInfo(_check_thm22, False),
    "cor32": ClaimInfo(check_cor32, False),
    "thm11": ClaimInfo(_check_thm11, False),
    "mccarthy": ClaimInfo(check_mccarthy, False),
    "eq1": ClaimInfo(check_eq1, False),
    "eq1-hermitian": ClaimInfo(check_eq1_hermitian, False),
    "eq2": ClaimInfo(check_eq2, False),
    "eq3": ClaimInfo(check_eq3, False),
    "eq3-reversed": ClaimInfo(check_eq3_reversed, False),
    "eq4": ClaimInfo(check_eq4, False),
    "eq5": ClaimInfo(check_eq5, False),
    "eq6-weyl": ClaimInfo(check_eq6_weyl, False),
    "uchiyama": ClaimInfo(check_uchiyama, False),
    "contractive-sum": ClaimInfo(check_contractive_sum, False),
    "eq9": ClaimInfo(check_eq9, False),
    "eq4-nonpsd": ClaimInfo(check_eq4_nonpsd, True),
    "eq2-reversed": ClaimInfo(check_eq2_reversed, True),
    "loewner-subadd": ClaimInfo(check_loewner_subadd, True),
}


def get_check(claim: str) -> Callable[..., Verdict]:
    try:
        return CLAIMS[claim].check
    except KeyError:
        raise UnknownClaim(claim) from None


def check(inst: Instance, tol: float = HOLD_TOL, force: bool = False) -> Verdict:
    return get_check(inst.claim)(inst, tol, force)


def adjudicate(inst: Instance, tol: float = HOLD_TOL, force: bool = False,
               checker: Callable[..., Verdict] | None = None) -> Verdict:
    """Evaluate, and settle any failure as violated / inconclusive / holds.

    A failing margin is re-computed with the eigensolver threshold tightened
    to 1e-15. It is a violation only if the raw margin is below
    -max(1e-6, tol) * scale and the tight one below -max(1e-7, tol) * scale.
    """
    checker = checker or get_check(inst.claim)
    v = checker(inst, tol, force)
    if not v.evaluated or v.status == "holds":
        return v
    with linalg.eigensolver_threshold(linalg.TIGHT_THRESHOLD):
        v2 = checker(inst, tol, force)
    if v2.status == "holds":
        return replace(v2, warning="held only after the tight re-run")
    raw = v.margin < -max(REPORT_TOL, tol) * v.scale
    tight = v2.margin < -max(CONFIRM_TOL, tol) * v2.scale
    if raw and tight:
        return replace(v2, status="violated", holds=False)
    return replace(v2, status="inconclusive", holds=False,
                   warning=f"margin {v2.margin:.3e} lies between round-off and counterexample thresholds")
