"""Greedy counterexample shrinking."""

from __future__ import annotations

import itertools
from dataclasses import replace
from typing import Callable

import numpy as np

from . import linalg
from .instance import Instance, Term

MAX_DIGITS = 12


def _sub(M: np.ndarray | None, idx: list[int]) -> np.ndarray | None:
    return None if M is None else M[np.ix_(idx, idx)]


def principal_compression(inst: Instance, keep: list[int]) -> Instance:
    terms = tuple(Term(_sub(t.A, keep), _sub(t.Z, keep), _sub(t.X, keep)) for t in inst.terms)
    k = None if inst.k is None else min(inst.k, len(keep))
    return replace(inst, terms=terms, k=k)


def round_entries(inst: Instance, digits: int) -> Instance:
    def rnd(M):
        if M is None:
            return None
        return np.round(M.real, digits) + 1j * np.round(M.imag, digits)

    terms = tuple(
        Term(None if t.A is None else linalg.hermitian(rnd(t.A)), rnd(t.Z), rnd(t.X))
        for t in inst.terms
    )
    return replace(inst, terms=terms)


def _try_compress(inst: Instance, fails: Callable[[Instance], bool]) -> Instance | None:
    n = inst.n
    for size in range(1, n):
        for keep in itertools.combinations(range(n), size):
            cand = principal_compression(inst, list(keep))
            if fails(cand):
                return cand
    return None


def _try_drop_term(inst: Instance, fails: Callable[[Instance], bool]) -> Instance | None:
    if inst.m == 1:
        return None
    for i in range(inst.m):
        cand = replace(inst, terms=inst.terms[:i] + inst.terms[i + 1 :])
        if fails(cand):
            return cand
    return None


def _reduce(inst: Instance, fails) -> Instance:
    while True:
        cand = _try_compress(inst, fails) or _try_drop_term(inst, fails)
        if cand is None:
            return inst
        inst = cand


def shrink(inst: Instance, fails: Callable[[Instance], bool]) -> Instance:
    """Smallest still-failing instance reachable by principal compressions,
    term removal and entry rounding (fewest decimal digits first).

    ``fails`` is the re-check; it must return True for ``inst`` itself.
    Deterministic given ``inst`` and ``fails``.
    """
    inst = _reduce(inst, fails)
    for digits in range(1, MAX_DIGITS + 1):
        cand = round_entries(inst, digits)
        if fails(cand):
            return _reduce(cand, fails)
    return inst
