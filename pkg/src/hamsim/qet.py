"""Eigenvalue transformation of block-encoded Hermitian operators.

Chebyshev polynomials ``T_k(A/alpha)`` come from powers of the qubitized walk
``W = (2 Pi - I) U``; a polynomial ``sum_k c_k T_k`` is then applied as a linear
combination of those powers. Complex coefficients are handled by the LCU
phases directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from . import matkernel as mk
from .blockenc import BlockEncoding, from_unitary, lcu_sum, merge_costs
from .errors import (
    BlockNotHermitian,
    EmptySeries,
    NormTooLarge,
    PolynomialTooLarge,
    PreconditionError,
)

BLOCK_HERMITIAN_TOL = 1e-8
GUARD_POINTS = 1001
MAX_DEGREE = 400


@dataclass(frozen=True)
class ChebyshevSeries:
    """Coefficients ``c_0..c_K`` in the Chebyshev-T basis.

    ``remainder_bound`` certifies ``|f(x) - sum_k c_k T_k(x)|`` on the domain
    the series was built for.
    """

    coeffs: np.ndarray
    remainder_bound: float = 0.0

    def __post_init__(self) -> None:
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        object.__setattr__(self, "coeffs", c)
        if self.remainder_bound < 0 or not np.all(np.isfinite(c)):
            raise ValueError("remainder_bound must be >= 0 and coefficients finite")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def one_norm(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))

    def __call__(self, x):
        return npcheb.chebval(np.asarray(x, dtype=float), self.coeffs)

    def max_abs(self, points: int = GUARD_POINTS) -> float:
        grid = np.cos(np.pi * np.arange(points) / (points - 1))
        return float(np.max(np.abs(self(grid))))


def _hermitian_block(be: BlockEncoding) -> np.ndarray:
    b = be.block
    res = mk.hermiticity_residual(b)
    if res > BLOCK_HERMITIAN_TOL:
        raise BlockNotHermitian(f"encoded block hermiticity residual {res:.3e}")
    return 0.5 * (b + b.conj().T)


def symmetrize(be: BlockEncoding) -> BlockEncoding:
    """Return an encoding of the same block whose unitary is Hermitian.

    Encodings flagged ``self_inverse`` are returned unchanged; otherwise one ancilla is added
    and ``U`` is replaced by ``1/2 [[U + U^+, U^+ - U], [U - U^+, -(U + U^+)]]``,
    which uses ``U`` (or ``U^+``) once and has block ``(B + B^+)/2``.
    """
    _hermitian_block(be)
    if be.unitary is None:
        raise PreconditionError("symmetrize needs an explicit-mode encoding")
    u = be.unitary
    if be.meta.get("self_inverse"):
        return be
    s = u + u.conj().T
    a = u.conj().T - u
    v = 0.5 * np.block([[s, a], [-a, -s]])
    meta = dict(be.meta)
    meta["symmetrized"] = True
    meta["self_inverse"] = True
    return from_unitary(v, be.system_dim, be.alpha, be.epsilon, be.cost, meta)


def walk_operator(be: BlockEncoding) -> np.ndarray:
    """Qubitized walk ``(2 Pi - I) U`` on the (symmetrized) dilation space."""
    sym = symmetrize(be)
    d = sym.system_dim
    reflect = -np.ones(sym.dim)
    reflect[:d] = 1.0
    return reflect[:, None] * sym.unitary


def _chebyshev_steps(be: BlockEncoding, degree: int) -> Iterator[tuple[int, np.ndarray, int]]:
    """Yield ``(k, M_k, walks)`` for ``k = 0..degree``.

    Explicit mode: ``M_k = W^k`` built by one walk application per step.
    Tracked mode: ``M_k = T_k(B)`` from the three-term recurrence.
    """
    if be.unitary is not None:
        w = walk_operator(be)
        current = np.eye(w.shape[0], dtype=complex)
        walks = 0
        yield 0, current, walks
        for k in range(1, degree + 1):
            current = w @ current
            walks += 1
            yield k, current, walks
        return
    b = _hermitian_block(be)
    prev = np.eye(b.shape[0], dtype=complex)
    yield 0, prev, 0
    if degree == 0:
        return
    current = b.copy()
    yield 1, current, 1
    for k in range(2, degree + 1):
        prev, current = current, 2.0 * b @ current - prev
        yield k, current, k


def _power_error(be: BlockEncoding, k: int) -> float:
    if k == 0 or be.epsilon == 0.0:
        return 0.0
    return 4.0 * k * math.sqrt(be.epsilon / be.alpha)


def _term(be: BlockEncoding, k: int, mat: np.ndarray) -> BlockEncoding:
    d = be.system_dim
    eps = _power_error(be, k)
    if be.unitary is not None:
        return from_unitary(mat, d, 1.0, eps)
    ancillas = be.ancillas + (0 if be.meta.get("self_inverse") else 1)
    return BlockEncoding(mat, 1.0, ancillas, eps)


def chebyshev_block(be: BlockEncoding, k: int, label: str = "walk") -> BlockEncoding:
    """Encode ``T_k(A/alpha)`` with ``k`` walk applications.

    The error bound grows as ``4 k sqrt(epsilon / alpha)``.
    """
    if k < 0:
        raise ValueError("degree must be non-negative")
    for kk, mat, walks in _chebyshev_steps(be, k):
        if kk == k:
            out = _term(be, k, mat)
            cost = merge_costs(be.cost, times=walks)
            cost = merge_costs(cost, {label: walks})
            meta = {"walks": walks, "degree": k}
            return BlockEncoding(out.block, out.alpha, out.ancillas, out.epsilon, out.unitary, cost, meta)
    raise AssertionError("unreachable")


def apply_chebyshev_series(
    be: BlockEncoding, series: ChebyshevSeries, label: str = "walk"
) -> BlockEncoding:
    """Encode ``P(A/alpha) = sum_k c_k T_k(A/alpha)``.

    The result has ``alpha = max(beta_P, 1)`` with ``beta_P = sum |c_k|``. When
    ``beta_P < 1`` a cancelling pair ``+-(1 - beta_P)/2 * T_0`` pads the LCU so
    the block equals ``P`` itself. The error bound is the LCU-composed walk
    error plus ``series.remainder_bound``. Exactly ``K = degree`` walk
    applications are used, shared across all terms.
    """
    if series.coeffs.size == 0:
        raise EmptySeries("empty Chebyshev series")
    if series.degree > MAX_DEGREE:
        raise PolynomialTooLarge(f"degree {series.degree} exceeds {MAX_DEGREE}")
    peak = series.max_abs()
    if peak > 1.0 + series.remainder_bound + 1e-12:
        raise PolynomialTooLarge(f"max |P| on [-1, 1] is {peak:.6g} > 1")
    _hermitian_block(be)

    coeffs = series.coeffs
    degree = series.degree
    terms: list[BlockEncoding] = []
    weights: list[complex] = []
    identity_term = None
    walks = 0
    for k, mat, walks in _chebyshev_steps(be, degree):
        if k == 0:
            identity_term = _term(be, 0, mat)
        if coeffs[k] != 0:
            terms.append(_term(be, k, mat) if k else identity_term)
            weights.append(coeffs[k])
    beta_p = series.one_norm
    if not terms:
        raise EmptySeries("all Chebyshev coefficients are zero")
    if beta_p < 1.0:
        pad = 0.5 * (1.0 - beta_p)
        terms += [identity_term, identity_term]
        weights += [pad, -pad]
    combined = lcu_sum(terms, weights)
    alpha = max(beta_p, 1.0)
    epsilon = alpha * combined.epsilon + series.remainder_bound
    cost = merge_costs(merge_costs(be.cost, times=walks), {label: walks})
    meta = {
        "beta_P": beta_p,
        "degree": degree,
        "walks": walks,
        "max_abs_P": peak,
        "half_bound_violated": peak > 0.5,
        "lcu_terms": len(terms),
    }
    return BlockEncoding(
        combined.block, alpha, combined.ancillas, epsilon, combined.unitary, cost, meta
    )


def apply_poly_oracle(a, series: ChebyshevSeries) -> np.ndarray:
    """``sum_k c_k T_k(A)`` through the eigendecomposition of ``A``."""
    a = mk.check_hermitian(a)
    eig = mk.eig_hermitian(a)
    if np.max(np.abs(eig.eigenvalues), initial=0.0) > 1.0 + 1e-12:
        raise NormTooLarge("apply_poly_oracle needs ||A|| <= 1")
    return mk.func_hermitian(a, series, decomposition=eig)
