import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def np_rng(seed=0):
    return np.random.default_rng(seed)


def rand_complex(rng, n):
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)


def rand_herm(rng, n):
    G = rand_complex(rng, n)
    return (G + G.conj().T) / 2


def rand_psd(rng, n, rank=None):
    G = rand_complex(rng, n)
    if rank is not None:
        G[rank:, :] = 0
    return G.conj().T @ G / n


def rand_unitary(rng, n):
    Q, R = np.linalg.qr(rand_complex(rng, n))
    d = np.diag(R)
    return Q * (d / np.abs(d))[None, :]


def np_fun(H, f):
    """f(H) through numpy's eigh: an independent route for the oracle."""
    lam, U = np.linalg.eigh(H)
    return (U * f(lam)[None, :]) @ U.conj().T


@pytest.fixture
def rng():
    return np_rng(12345)
