"""Recover a block encoding of ``H`` from ``U = exp(-i H)`` when ``||H|| <= 1/2``.

``sin(H) = (U^+ - U) / (2i)`` is block encoded by a two-term LCU, and an odd
polynomial approximating ``(2/pi) arcsin`` on the reachable range
``[-sin(1/2), sin(1/2)]`` turns it into ``(2/pi) H``. The returned encoding
therefore has ``alpha = pi/2``.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from . import matkernel as mk
from .blockenc import EXPLICIT, BlockEncoding, embed_unitary, lcu_sum
from .errors import EpsilonOutOfRange, NormViolation, PolynomialTooLarge
from .qet import MAX_DEGREE, ChebyshevSeries, apply_chebyshev_series

ARCSIN_HALF_WIDTH = math.sin(0.5) + 0.01


def sin_block(u, mode: str = EXPLICIT, label: str | None = None) -> BlockEncoding:
    """Exact encoding of ``sin(H)`` for ``U = exp(-i H)``, one LCU ancilla."""
    u = mk.as_matrix(u)
    fwd = embed_unitary(u, mode, label)
    back = embed_unitary(u.conj().T, mode, label)
    return lcu_sum([back, fwd], [1 / 2j, -1 / 2j])


def _arcsin_taylor(max_order: int) -> np.ndarray:
    """Power-basis coefficients of ``(2/pi) arcsin(x)`` up to ``x^max_order``."""
    c = np.zeros(max_order + 1)
    b = 1.0  # (2n)! / (4^n (n!)^2)
    for n in range((max_order - 1) // 2 + 1):
        if n:
            b *= (2 * n - 1) / (2 * n)
        c[2 * n + 1] = (2 / math.pi) * b / (2 * n + 1)
    return c


def _arcsin_tail(degree: int, half_width: float) -> float:
    # terms decrease in n, so the tail is dominated by a geometric series
    n = (degree + 1) // 2
    b = 1.0
    for j in range(1, n + 1):
        b *= (2 * j - 1) / (2 * j)
    lead = (2 / math.pi) * b / (2 * n + 1) * half_width ** (2 * n + 1)
    return lead / (1.0 - half_width**2)


def arcsin_series(epsilon: float, half_width: float = ARCSIN_HALF_WIDTH) -> ChebyshevSeries:
    """Odd Chebyshev series for ``(2/pi) arcsin(x)`` with remainder at most ``epsilon/4``.

    Built from the truncated Maclaurin series, whose coefficients are all
    positive; hence ``|P| <= P(1) < 1`` on ``[-1, 1]`` and the conversion to the
    Chebyshev basis is free of cancellation.
    """
    if not 0 < epsilon <= 0.5:
        raise EpsilonOutOfRange("epsilon must lie in (0, 1/2]")
    target = epsilon / 4
    degree = 1
    while _arcsin_tail(degree, half_width) > target:
        degree += 2
        if degree > MAX_DEGREE:
            raise PolynomialTooLarge("arcsin series degree exceeds the cap")
    coeffs = npcheb.poly2cheb(_arcsin_taylor(degree))
    return ChebyshevSeries(coeffs.astype(complex), _arcsin_tail(degree, half_width))


def log_of_unitary(
    u, epsilon: float, mode: str = EXPLICIT, label: str | None = None
) -> BlockEncoding:
    """Encoding of ``H`` (``alpha = pi/2``) from ``U = exp(-i H)`` within ``epsilon``."""
    if not 0 < epsilon <= 0.5:
        raise EpsilonOutOfRange("epsilon must lie in (0, 1/2]")
    sb = sin_block(u, mode, label)
    reach = float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (sb.block + sb.block.conj().T)))))
    if reach > ARCSIN_HALF_WIDTH:
        raise NormViolation(f"||sin(H)|| = {reach:.6g}; the generator exceeds norm 1/2")
    series = arcsin_series(epsilon)
    walk_label = f"walk:log[{label}]" if label else "walk:log"
    out = apply_chebyshev_series(sb, series, label=walk_label)
    alpha = math.pi / 2
    meta = dict(out.meta)
    meta.update(arcsin_degree=series.degree, requested_epsilon=epsilon)
    return BlockEncoding(
        out.block, alpha, out.ancillas, alpha * out.epsilon, out.unitary, out.cost, meta
    )
