import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from matineq import functions as fn
from matineq import linalg
from matineq.generators import SplitMix64, random_psd, random_psd_spectrum

from conftest import np_fun, rand_complex, rand_herm, rand_psd, rand_unitary

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def test_diagonal_input_is_already_solved():
    s = linalg.eig_hermitian(np.diag([5.0, 2.0]))
    assert np.array_equal(s.eigenvalues, [5.0, 2.0])
    assert np.allclose(s.eigenvectors, np.eye(2), atol=0)


def test_real_2x2():
    assert np.allclose(linalg.eigvalsh([[2, 1], [1, 2]]), [3, 1], atol=1e-14)


def test_complex_2x2():
    assert np.allclose(linalg.eigvalsh([[0, 1j], [-1j, 0]]), [1, -1], atol=1e-14)


@given(finite, finite, finite, finite)
def test_2x2_matches_characteristic_polynomial(a, d, br, bi):
    H = np.array([[a, br + 1j * bi], [br - 1j * bi, d]])
    mid, rad = (a + d) / 2, math.hypot((a - d) / 2, abs(br + 1j * bi))
    lam = linalg.eigvalsh(H)
    scale = max(1.0, abs(a), abs(d), abs(br), abs(bi))
    assert lam[0] == pytest.approx(mid + rad, abs=1e-12 * scale)
    assert lam[1] == pytest.approx(mid - rad, abs=1e-12 * scale)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 13, 32, 64])
def test_agrees_with_lapack(rng, n):
    H = rand_herm(rng, n)
    lam = linalg.eigvalsh(H)
    ref = np.sort(np.linalg.eigvalsh(H))[::-1]
    assert np.allclose(lam, ref, atol=1e-12 * max(1, abs(ref).max()))


@given(st.integers(1, 8), st.integers(0, 2**32))
def test_reconstruction_and_unitarity(n, seed):
    rng = np.random.default_rng(seed)
    H = rand_herm(rng, n) * 10 ** rng.uniform(-3, 3)
    s = linalg.eig_hermitian(H)
    scale = max(1.0, np.abs(s.eigenvalues).max())
    U = s.eigenvectors
    assert np.abs(U @ np.diag(s.eigenvalues) @ U.conj().T - H).max() <= 1e-10 * scale
    assert np.abs(U.conj().T @ U - np.eye(n)).max() <= 1e-10
    assert np.all(np.diff(s.eigenvalues) <= 0)


def test_degenerate_and_rank_deficient(rng):
    g = SplitMix64(7)
    for H in (random_psd_spectrum(g, 5, [2, 2, 2, 0, 0]), random_psd(g, 6, rank=2), np.zeros((4, 4))):
        s = linalg.eig_hermitian(H)
        U = s.eigenvectors
        assert np.abs(linalg.reconstruct(s) - H).max() <= 1e-12
        assert np.abs(U.conj().T @ U - np.eye(len(H))).max() <= 1e-12


def test_eigenvector_phase_convention(rng):
    U = linalg.eig_hermitian(rand_herm(rng, 6)).eigenvectors
    for j in range(6):
        lead = U[np.argmax(np.abs(U[:, j]) > 1e-8), j]
        assert lead.imag == pytest.approx(0, abs=1e-15) and lead.real > 0


def test_unitary_covariance(rng):
    H = rand_herm(rng, 6)
    U = rand_unitary(rng, 6)
    assert np.allclose(linalg.eigvalsh(U @ H @ U.conj().T), linalg.eigvalsh(H), atol=1e-12)


def test_trace_is_sum_of_eigenvalues(rng):
    H = rand_herm(rng, 7)
    assert linalg.eigvalsh(H).sum() == pytest.approx(np.trace(H).real, abs=1e-12)


def test_threshold_context_restores():
    assert linalg.current_threshold() == linalg.DEFAULT_THRESHOLD
    with linalg.eigensolver_threshold(1e-15):
        assert linalg.current_threshold() == 1e-15
    assert linalg.current_threshold() == linalg.DEFAULT_THRESHOLD


def test_tight_threshold_still_converges(rng):
    H = rand_herm(rng, 16)
    with linalg.eigensolver_threshold(linalg.TIGHT_THRESHOLD):
        lam = linalg.eigvalsh(H)
    assert np.allclose(lam, np.sort(np.linalg.eigvalsh(H))[::-1], atol=1e-13)


def test_sweep_cap_raises_with_residual(monkeypatch, rng):
    monkeypatch.setattr(linalg, "MAX_SWEEPS", 0)
    with pytest.raises(linalg.SolverError) as exc:
        linalg.eig_hermitian(rand_herm(rng, 4))
    assert exc.value.residual > 0


@pytest.mark.parametrize("bad", [np.zeros((2, 3)), np.zeros((0, 0)), np.zeros((65, 65)), [[np.nan]]])
def test_rejects_bad_shapes(bad):
    with pytest.raises(ValueError):
        linalg.eig_hermitian(bad)


def test_hermitian_is_exact(rng):
    H = linalg.hermitian(rand_complex(rng, 5))
    assert np.array_equal(H, H.conj().T)


# matrix functions


def test_sqrt_of_diagonal():
    assert np.allclose(linalg.apply_scalar_function(np.diag([4.0, 9.0]), fn.sqrt()), np.diag([2, 3]))


def test_square_matches_product():
    H = np.array([[2, 1], [1, 2]], dtype=complex)
    assert np.allclose(linalg.apply_scalar_function(H, fn.power(2)), H @ H, atol=1e-13)


def test_identity_function_returns_input(rng):
    H = rand_herm(rng, 5)
    assert np.allclose(linalg.apply_scalar_function(H, fn.affine(1, 0)), H, atol=1e-13)


@pytest.mark.parametrize("f", fn.CONCAVE_CATALOG + fn.CONVEX_CATALOG, ids=lambda f: f.label)
def test_function_matches_numpy_route(rng, f):
    A = rand_psd(rng, 5) * 3
    assert np.allclose(linalg.apply_scalar_function(A, f), np_fun(A, f), atol=1e-11)


def test_domain_error_names_eigenvalue():
    with pytest.raises(linalg.DomainError) as exc:
        linalg.apply_scalar_function(np.diag([1.0, -0.5]), fn.sqrt())
    assert exc.value.eigenvalue == -0.5


def test_tiny_negative_is_clamped():
    out = linalg.apply_scalar_function(np.diag([4.0, -1e-12]), fn.sqrt())
    assert np.allclose(out, np.diag([2.0, 0.0]), atol=0)


def test_roundoff_zeros_are_snapped(rng):
    # exact rank 2 matrix: the zero eigenvalues come out as +-1e-16 noise
    g = SplitMix64(3)
    A = random_psd(g, 5, rank=2)
    f = fn.power(0.3)
    lam, U = np.linalg.eigh(A)
    lam[np.abs(lam) < 1e-12] = 0
    expect = (U * f(lam)[None, :]) @ U.conj().T
    assert np.abs(linalg.apply_scalar_function(A, f) - expect).max() < 1e-10


def test_real_line_function_accepts_negative_spectrum():
    out = linalg.apply_scalar_function(np.diag([2.0, -3.0]), fn.clamp(1.0))
    assert np.allclose(out, np.diag([1.0, -3.0]))


# singular values and friends


def test_singular_value_examples():
    assert np.allclose(linalg.singular_values(np.diag([3.0, 1.0])), [3, 1])
    assert np.allclose(linalg.singular_values([[0, 2], [0, 0]]), [2, 0], atol=1e-14)


def test_unitary_has_unit_singular_values(rng):
    assert np.allclose(linalg.singular_values(rand_unitary(rng, 3)), 1, atol=1e-13)


@pytest.mark.parametrize("n", [1, 3, 8, 20, 40])
def test_singular_values_match_svd(rng, n):
    M = rand_complex(rng, n)
    assert np.allclose(linalg.singular_values(M), np.linalg.svd(M, compute_uv=False), atol=1e-12)


def test_small_singular_values_survive(rng):
    # the squaring route would lose the 1e-9 value entirely
    U, W = rand_unitary(rng, 3), rand_unitary(rng, 3)
    M = U @ np.diag([1.0, 1e-4, 1e-9]) @ W
    assert linalg.singular_values(M)[-1] == pytest.approx(1e-9, rel=1e-5)


def test_abs_matrix_examples(rng):
    assert np.allclose(linalg.abs_matrix(np.diag([-2.0, 3.0])), np.diag([2, 3]), atol=1e-14)
    assert np.allclose(linalg.abs_matrix([[0, 2], [0, 0]]), np.diag([0, 2]), atol=1e-14)
    A = rand_psd(rng, 4)
    assert np.allclose(linalg.abs_matrix(A), A, atol=1e-12)
    M = rand_complex(rng, 4)
    P = linalg.abs_matrix(M)
    assert np.allclose(P @ P, M.conj().T @ M, atol=1e-12)


def test_congruence_examples(rng):
    A = rand_herm(rng, 3)
    assert np.allclose(linalg.congruence(np.eye(3), A), A)
    assert np.allclose(linalg.congruence([[2]], [[4]]), [[16]])
    Z = np.array([[1, 1], [0, 1]])
    assert np.allclose(linalg.congruence(Z, np.eye(2)), [[1, 1], [1, 2]])
    with pytest.raises(linalg.DimensionError):
        linalg.congruence(np.eye(2), np.eye(3))


def test_loewner_examples():
    assert linalg.loewner_leq(np.zeros((2, 2)), np.eye(2)) == (True, 1.0)
    r = linalg.loewner_leq(np.diag([2.0, 0.0]), np.eye(2))
    assert not r.holds and r.margin == pytest.approx(-1)
    r = linalg.loewner_leq([[1, 1], [1, 1]], 2 * np.eye(2))
    assert r.holds and r.margin == pytest.approx(0, abs=1e-14)


def test_expansive_and_contraction_predicates():
    assert linalg.is_expansive(np.eye(3)) and linalg.is_contraction(np.eye(3))
    assert linalg.is_expansive(np.diag([2.0, 1.0])) and not linalg.is_contraction(np.diag([2.0, 1.0]))
    Z = [[1, 1], [0, 1]]
    assert not linalg.is_expansive(Z) and not linalg.is_contraction(Z)
    assert np.allclose(linalg.singular_values(Z), [(1 + 5**0.5) / 2, (5**0.5 - 1) / 2])


def test_is_psd(rng):
    assert linalg.is_psd(rand_psd(rng, 4, rank=1))
    assert not linalg.is_psd(np.diag([1.0, -1e-3]))
