"""Bessel functions and the truncated Jacobi-Anger series for ``exp(-i x t)``.

``exp(-i x t) = J_0(-t) + 2 sum_k i^k J_k(-t) T_k(x)`` on ``[-1, 1]``. The
truncation degree is picked from a certified Bessel tail, not from the
asymptotic order estimate.
"""

from __future__ import annotations

import math

import numpy as np

from .blockenc import BlockEncoding, embed_unitary, to_tracked
from .errors import ArgumentOutOfRange, NormTooLarge
from .qet import ChebyshevSeries, _hermitian_block, apply_chebyshev_series

MAX_ARG = 50.0
MAX_ORDER = 200
_TAIL_FLOOR = 1e-300


def _miller(nmax: int, x: float) -> np.ndarray:
    """``J_0..J_nmax`` at ``x > 0`` by normalised downward recurrence."""
    top = max(nmax, math.ceil(x))
    start = top + 60 + math.ceil(math.sqrt(100.0 * max(top, 1)))
    start += start % 2
    vals = np.zeros(start + 2)
    vals[start] = 1.0
    for k in range(start, 0, -1):
        vals[k - 1] = (2.0 * k / x) * vals[k] - vals[k + 1]
        if abs(vals[k - 1]) > 1e250:
            vals[k - 1 :] *= 1e-250
    norm = vals[0] + 2.0 * np.sum(vals[2 : start + 1 : 2])
    return vals[: nmax + 1] / norm


def bessel_j_all(nmax: int, t: float) -> np.ndarray:
    """``J_0(t)..J_nmax(t)``; negative ``t`` handled by parity."""
    if nmax < 0:
        raise ArgumentOutOfRange("order must be non-negative")
    if abs(t) > MAX_ARG:
        raise ArgumentOutOfRange(f"|t| = {abs(t)} exceeds {MAX_ARG}")
    if t == 0.0:
        out = np.zeros(nmax + 1)
        out[0] = 1.0
        return out
    vals = _miller(nmax, abs(t))
    if t < 0:
        vals = vals * (-1.0) ** np.arange(nmax + 1)
    return vals


def bessel_j(k: int, t: float) -> float:
    """Bessel function of the first kind ``J_k(t)`` for ``0 <= k <= 200``, ``|t| <= 50``."""
    if not 0 <= k <= MAX_ORDER:
        raise ArgumentOutOfRange(f"order {k} outside [0, {MAX_ORDER}]")
    return float(bessel_j_all(k, t)[k])


def _tail_profile(t: float, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Bessel values and certified tails ``tails[K] >= sum_{k>K} 2|J_k(t)|``."""
    x = abs(t)
    n = max(int(2 * x) + 20, 40)
    while True:
        vals = bessel_j_all(n, x)
        if n > x + 2 and 2 * abs(vals[-1]) < max(epsilon * 1e-6, _TAIL_FLOOR):
            break
        n *= 2
        if n > 4 * MAX_ORDER:
            raise ArgumentOutOfRange("Bessel tail did not fall below the requested tolerance")
    # |J_k(x)| <= (x/2)^k / k!, summed geometrically beyond n
    log_term = (n + 1) * math.log(x / 2.0) - math.lgamma(n + 2) if x > 0 else -math.inf
    beyond = 2.0 * math.exp(log_term) / (1.0 - x / (2.0 * (n + 2))) if x > 0 else 0.0
    mags = 2.0 * np.abs(vals)
    # tails[K] = sum_{k=K+1}^{n} mags[k] + beyond
    rev = np.cumsum(mags[::-1])[::-1]
    tails = np.append(rev[1:], 0.0) + beyond
    return vals, tails


def truncation_order(t: float, epsilon: float) -> int:
    """Smallest ``K`` whose certified tail ``sum_{k>K} 2|J_k(t)|`` is at most ``epsilon``."""
    if not t > 0:
        raise ArgumentOutOfRange("t must be positive")
    if not 0 < epsilon < 1:
        raise ArgumentOutOfRange("epsilon must lie in (0, 1)")
    _, tails = _tail_profile(t, epsilon)
    hits = np.nonzero(tails <= epsilon)[0]
    return int(hits[0])


def evolution_series(t: float, epsilon: float) -> ChebyshevSeries:
    """Truncated Jacobi-Anger series of ``exp(-i x t)`` with certified remainder."""
    if t == 0:
        return ChebyshevSeries(np.array([1.0 + 0j]), 0.0)
    if not 0 < epsilon < 1:
        raise ArgumentOutOfRange("epsilon must lie in (0, 1)")
    x = abs(t)
    vals, tails = _tail_profile(x, epsilon)
    degree = int(np.nonzero(tails <= epsilon)[0][0])
    k = np.arange(degree + 1)
    jk = vals[: degree + 1] * (-1.0) ** k if t > 0 else vals[: degree + 1]  # J_k(-t)
    coeffs = 2.0 * (1j**k) * jk
    coeffs[0] = jk[0]
    return ChebyshevSeries(coeffs, float(tails[degree]))


def evolve_block(be: BlockEncoding, t: float, epsilon: float) -> BlockEncoding:
    """Encode ``exp(-i A t)`` from an encoding of Hermitian ``A``.

    The series acts on the block ``A/alpha``, so its time argument is
    ``alpha * t``. The result carries ``alpha = beta_JA = sum |c_k|``.
    """
    if t == 0:
        d = be.system_dim
        out = embed_unitary(np.eye(d))
        return out if be.explicit else to_tracked(out)
    block = _hermitian_block(be)
    peak = float(np.max(np.abs(np.linalg.eigvalsh(block)), initial=0.0))
    if peak > 1.0 + 1e-9:
        raise NormTooLarge(f"encoded block norm {peak:.6g} exceeds 1")
    series_time = be.alpha * t
    series = evolution_series(series_time, epsilon)
    out = apply_chebyshev_series(be, series, label="walk:ja")
    meta = dict(out.meta)
    meta.update(series_time=series_time, remainder=series.remainder_bound)
    return BlockEncoding(out.block, out.alpha, out.ancillas, out.epsilon, out.unitary, out.cost, meta)
