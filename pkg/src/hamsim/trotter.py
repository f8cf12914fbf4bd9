"""Suzuki product formulas, nested-commutator bounds and segment-count prediction."""

from __future__ import annotations

import itertools
from collections import Counter
from typing import Sequence

import numpy as np

from . import matkernel as mk
from .errors import (
    ArgumentOutOfRange,
    DimensionMismatch,
    EmptyList,
    KTooSmall,
    OrderUnsupported,
    TooManyTerms,
)

MAX_COMMUTATOR_TERMS = 4


def p_coefficient(k: int) -> float:
    """Suzuki weight ``p_k = 1 / (4 - 4^(1/(2k-1)))``."""
    if k < 2:
        raise KTooSmall("p_k is defined for k >= 2")
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * k - 1)))


class _Exponentials:
    """Caches eigendecompositions so each ``exp(H_i * c)`` is a diagonal rescale."""

    def __init__(self, h_list: Sequence[np.ndarray]) -> None:
        if not h_list:
            raise EmptyList("need at least one Hamiltonian term")
        mats = [mk.check_hermitian(h) for h in h_list]
        dim = mats[0].shape
        if any(h.shape != dim for h in mats):
            raise DimensionMismatch("Hamiltonian terms have different dimensions")
        self.dim = dim[0]
        self.eigs = [mk.eig_hermitian(h) for h in mats]
        self.count = 0

    def __call__(self, i: int, scale: complex) -> np.ndarray:
        self.count += 1
        e = self.eigs[i]
        v = e.eigenvectors
        return (v * np.exp(scale * e.eigenvalues)) @ v.conj().T


def _s2(exps: _Exponentials, lam: complex) -> np.ndarray:
    m = len(exps.eigs)
    # middle half-steps of H_m merge into one full step
    out = exps(m - 1, lam)
    for i in range(m - 2, -1, -1):
        half = exps(i, lam / 2)
        out = half @ out @ half
    return out


def _s2k(exps: _Exponentials, lam: complex, k: int) -> tuple[np.ndarray, int]:
    """Return ``(S_2k(lam), number of S_2 leaves used by the formula)``."""
    if k == 1:
        return _s2(exps, lam), 1
    p = p_coefficient(k)
    outer, n_outer = _s2k(exps, p * lam, k - 1)
    middle, n_middle = _s2k(exps, (1 - 4 * p) * lam, k - 1)
    outer2 = outer @ outer
    return outer2 @ middle @ outer2, 4 * n_outer + n_middle


def s2(h_list: Sequence[np.ndarray], lam: complex) -> np.ndarray:
    """Symmetric second-order product ``prod_i e^{H_i lam/2} prod_{i reversed} e^{H_i lam/2}``."""
    return _s2(_Exponentials(h_list), lam)


def s2k(
    h_list: Sequence[np.ndarray], lam: complex, k: int, stats: Counter | None = None
) -> np.ndarray:
    """Order-``2k`` Suzuki formula via the five-factor recursion.

    ``stats["s2_leaves"]`` counts the ``S_2`` leaves of the formula
    (``5^(k-1)``); ``stats["exponentials"]`` counts the single-term exponentials
    actually formed, which is fewer because repeated sub-products are reused.
    """
    if k < 1:
        raise KTooSmall("k must be at least 1")
    exps = _Exponentials(h_list)
    out, leaves = _s2k(exps, lam, k)
    if stats is not None:
        stats["s2_leaves"] += leaves
        stats["exponentials"] += exps.count
    return out


def segmented_evolution(
    h_list: Sequence[np.ndarray], t: float, r: int, k: int, stats: Counter | None = None
) -> np.ndarray:
    """``S_2k(-i t / r)^r``."""
    if r < 1:
        raise ArgumentOutOfRange("r must be at least 1")
    seg = s2k(h_list, -1j * t / r, k, stats)
    return np.linalg.matrix_power(seg, r)


def exponential_count(m: int, k: int, r: int) -> int:
    """Single-term exponential factors in ``S_2k(-it/r)^r``, counted as ``r * 2m * 5^(k-1)``."""
    return r * 2 * m * 5 ** (k - 1)


def _nested(chain: Sequence[np.ndarray]) -> np.ndarray:
    acc = chain[0]
    for h in chain[1:]:
        acc = h @ acc - acc @ h
    return acc


def commutator_bound_alpha(h_list: Sequence[np.ndarray], p: int) -> float:
    """``sum ||[H_{i_{p+1}}, ... [H_{i_2}, H_{i_1}]]||`` over all index tuples in ``[m]^(p+1)``."""
    if p not in (1, 2):
        raise OrderUnsupported("only p = 1 and p = 2 are supported")
    if len(h_list) > MAX_COMMUTATOR_TERMS:
        raise TooManyTerms(f"at most {MAX_COMMUTATOR_TERMS} terms")
    mats = [mk.check_hermitian(h) for h in h_list]
    total = 0.0
    for idx in itertools.product(range(len(mats)), repeat=p + 1):
        if idx[0] == idx[1]:
            continue  # innermost commutator vanishes
        total += mk.spectral_norm(_nested([mats[i] for i in idx]))
    return total


def segment_bound(t: float, r: int, k: int, alpha: float) -> float:
    """``2 Gamma^(p+1) t^(p+1) alpha / (r^p (p+1))`` with ``p = 2k``, ``Gamma = 2 * 5^(k-1)``.

    ``alpha`` is the nested-commutator sum of order ``p``.
    """
    gamma = 2 * 5 ** (k - 1)
    p = 2 * k
    return 2.0 * gamma ** (p + 1) * abs(t) ** (p + 1) * alpha / (r**p * (p + 1))


def required_segments(
    delta: float,
    k: int,
    t: float,
    h_list: Sequence[np.ndarray] | None = None,
    alpha: float | None = None,
) -> tuple[int, float]:
    """Smallest ``r`` whose segmented bound is at most ``delta``; returns ``(r, bound)``.

    ``alpha`` defaults to ``commutator_bound_alpha(h_list, 2k)``, which is only
    available for ``k = 1``.
    """
    if not delta > 0:
        raise ArgumentOutOfRange("delta must be positive")
    if alpha is None:
        if h_list is None:
            raise ArgumentOutOfRange("need h_list or alpha")
        alpha = commutator_bound_alpha(h_list, 2 * k)
    if alpha == 0.0 or segment_bound(t, 1, k, alpha) <= delta:
        return 1, segment_bound(t, 1, k, alpha)
    hi = 1
    while segment_bound(t, hi, k, alpha) > delta:
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if segment_bound(t, mid, k, alpha) > delta:
            lo = mid
        else:
            hi = mid
    return hi, segment_bound(t, hi, k, alpha)
