import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from matineq import functions as fn
from matineq import linalg
from matineq import norms

from conftest import rand_complex, rand_psd, rand_unitary

seeds = st.integers(0, 2**32)
dims = st.integers(1, 7)


def svd(M):
    return np.linalg.svd(M, compute_uv=False)


def test_examples(rng):
    D = np.diag([3.0, 1.0])
    assert norms.norm(D, norms.ky_fan(1)) == 3
    assert norms.norm(D, norms.ky_fan(2)) == 4
    assert norms.norm([[1, 1], [1, 1]], norms.schatten(2)) == pytest.approx(2)
    assert norms.norm(rand_unitary(rng, 3), norms.schatten(1)) == pytest.approx(3)


@pytest.mark.parametrize("p", [1, 1.5, 2, 3, 7])
def test_schatten_matches_svd(rng, p):
    M = rand_complex(rng, 5)
    assert norms.norm(M, norms.schatten(p)) == pytest.approx(np.sum(svd(M) ** p) ** (1 / p), rel=1e-12)


@given(dims, seeds)
def test_aliases_coherent(n, seed):
    M = rand_complex(np.random.default_rng(seed), n) * 5
    s = linalg.singular_values(M)
    tol = 1e-10 * max(1, s.sum())
    op = norms.norm_from_singular_values(s, norms.OPERATOR)
    assert op == pytest.approx(norms.norm_from_singular_values(s, norms.ky_fan(1)), abs=tol)
    assert op == pytest.approx(norms.norm_from_singular_values(s, norms.schatten(math.inf)), abs=tol)
    tr = norms.norm_from_singular_values(s, norms.TRACE)
    assert tr == pytest.approx(norms.norm_from_singular_values(s, norms.ky_fan(n)), abs=tol)
    assert tr == pytest.approx(norms.norm_from_singular_values(s, norms.schatten(1)), abs=tol)
    fro = norms.norm_from_singular_values(s, norms.FROBENIUS)
    assert fro == pytest.approx(norms.norm_from_singular_values(s, norms.schatten(2)), abs=tol)
    assert fro == pytest.approx(np.linalg.norm(M), abs=tol)


@given(dims, seeds)
def test_triangle_inequality(n, seed):
    rng = np.random.default_rng(seed)
    X, Y = rand_complex(rng, n), rand_complex(rng, n)
    for spec in [norms.ky_fan(k) for k in range(1, n + 1)] + [norms.schatten(p) for p in norms.SANITY_SCHATTEN]:
        assert norms.norm(X + Y, spec) <= norms.norm(X, spec) + norms.norm(Y, spec) + 1e-10


@given(dims, seeds)
def test_monotone_in_k_and_p(n, seed):
    M = rand_complex(np.random.default_rng(seed), n)
    kf = norms.ky_fan_norms(M)
    assert np.all(np.diff(kf) >= 0)
    sp = [norms.norm(M, norms.schatten(p)) for p in norms.SANITY_SCHATTEN]
    assert all(b <= a + 1e-12 for a, b in zip(sp, sp[1:]))


@given(dims, seeds)
def test_unitary_invariance(n, seed):
    rng = np.random.default_rng(seed)
    M = rand_complex(rng, n)
    U, V = rand_unitary(rng, n), rand_unitary(rng, n)
    assert np.allclose(norms.ky_fan_norms(U @ M @ V), norms.ky_fan_norms(M), atol=1e-11)


def test_ky_fan_k_beyond_dimension():
    with pytest.raises(ValueError):
        norms.norm(np.eye(2), norms.ky_fan(3))


@pytest.mark.parametrize("bad", [("ky_fan", 0, None), ("schatten", None, 0.5), ("nuclear", None, None)])
def test_normspec_validation(bad):
    with pytest.raises(ValueError):
        norms.NormSpec(*bad)


@pytest.mark.parametrize("spec", [norms.ky_fan(3), norms.schatten(1.5), norms.schatten(math.inf), norms.TRACE])
def test_normspec_json(spec):
    assert norms.NormSpec.from_json(spec.to_json()) == spec


def test_zero_matrix_norms():
    assert norms.norm(np.zeros((3, 3)), norms.schatten(3)) == 0


def test_dominance_examples():
    d = norms.ky_fan_dominance(np.eye(2), np.diag([2.0, 0.0]))
    assert d.holds and np.allclose(d.margins, [1, 0])
    d = norms.ky_fan_dominance(np.diag([2.0, 0.0]), np.eye(2))
    assert not d.holds and d.binding_k == 1 and np.allclose(d.margins, [-1, 0])


def test_dominance_reflexive(rng):
    M = rand_complex(rng, 4)
    d = norms.ky_fan_dominance(M, M)
    assert d.holds and np.all(d.margins == 0)


def test_dominance_shape_mismatch():
    with pytest.raises(linalg.DimensionError):
        norms.ky_fan_dominance(np.eye(2), np.eye(3))


def test_weak_majorization_examples():
    assert norms.weak_majorization([1, 1], [2, 0])
    assert not norms.weak_majorization([2, 0], [1, 1])
    assert norms.weak_majorization([3, 1, 2], [2, 3, 1])


def test_transfer_examples():
    d = norms.monotone_convex_transfer_check(np.eye(2), np.diag([2.0, 0.0]), fn.power(2))
    assert d.holds and np.allclose(d.margins, [3, 2])
    d = norms.monotone_convex_transfer_check(np.eye(2), np.diag([2.0, 0.0]), fn.affine(1.0, 0.0))
    assert d.holds
    A = np.diag([1.0, 3.0])
    assert norms.monotone_convex_transfer_check(A, A, fn.power(3)).holds


def test_transfer_preconditions():
    with pytest.raises(norms.PreconditionError):
        norms.monotone_convex_transfer_check(np.diag([2.0, 0.0]), np.eye(2), fn.power(2))
    with pytest.raises(norms.PreconditionError):
        norms.monotone_convex_transfer_check(np.diag([-1.0, 0.0]), np.eye(2), fn.power(2))
    with pytest.raises(norms.PreconditionError):
        norms.monotone_convex_transfer_check(np.eye(2), np.diag([2.0, 0.0]), fn.sqrt())


@given(st.integers(1, 6), seeds)
def test_transfer_on_loewner_pairs(n, seed):
    # X <= Y in the Loewner order implies Ky Fan dominance
    rng = np.random.default_rng(seed)
    X = rand_psd(rng, n)
    Y = X + rand_psd(rng, n, rank=1)
    for g in fn.CONVEX_CATALOG:
        assert norms.monotone_convex_transfer_check(X, Y, g).holds
