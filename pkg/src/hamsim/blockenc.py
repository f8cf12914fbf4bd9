"""Block encodings and their composition rules.

A :class:`BlockEncoding` stores the encoded ``d x d`` block together with the
``(alpha, a, epsilon)`` metadata. In explicit mode the full dilation unitary of
dimension ``2**a * d`` is carried as well, ancilla qubits leading, so the block
is ``unitary[:d, :d]``. In block-tracked mode only the block is propagated;
the composition rules are the same.

``epsilon`` is a certified worst-case bound on ``||A - alpha * block||`` for the
operator ``A`` the encoding is meant to represent.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

import numpy as np

from . import matkernel as mk
from .errors import (
    DimensionMismatch,
    EmptyList,
    NotUnitary,
    PreconditionError,
    ResultTooLarge,
    ZeroWeights,
)

EXPLICIT = "explicit"
TRACKED = "block-tracked"
MODES = (EXPLICIT, TRACKED)

UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class BlockEncoding:
    block: np.ndarray
    alpha: float = 1.0
    ancillas: int = 0
    epsilon: float = 0.0
    unitary: np.ndarray | None = None
    cost: Mapping[str, int] = field(default_factory=dict)
    meta: Mapping[str, Any] = field(default_factory=dict)

    @property
    def system_dim(self) -> int:
        return self.block.shape[0]

    @property
    def dim(self) -> int:
        return 2**self.ancillas * self.system_dim

    @property
    def mode(self) -> str:
        return EXPLICIT if self.unitary is not None else TRACKED

    @property
    def explicit(self) -> bool:
        return self.unitary is not None

    def operator(self) -> np.ndarray:
        """``alpha * block``, the estimate of the encoded operator."""
        return self.alpha * self.block


def _check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def _check_dim(dim: int) -> None:
    if dim > mk.max_dim():
        raise ResultTooLarge(
            f"dilation dimension {dim} exceeds cap {mk.max_dim()}; use block-tracked mode"
        )


def merge_costs(*costs: Mapping[str, int], times: int = 1) -> dict[str, int]:
    total: Counter = Counter()
    for c in costs:
        total.update(c)
    return {k: v * times for k, v in sorted(total.items())}


def from_unitary(
    unitary: np.ndarray,
    system_dim: int,
    alpha: float = 1.0,
    epsilon: float = 0.0,
    cost: Mapping[str, int] | None = None,
    meta: Mapping[str, Any] | None = None,
) -> BlockEncoding:
    u = mk.as_matrix(unitary)
    ancillas = int(round(math.log2(u.shape[0] // system_dim)))
    if 2**ancillas * system_dim != u.shape[0]:
        raise DimensionMismatch(f"unitary dim {u.shape[0]} is not 2^a * {system_dim}")
    return BlockEncoding(
        block=u[:system_dim, :system_dim].copy(),
        alpha=alpha,
        ancillas=ancillas,
        epsilon=epsilon,
        unitary=u,
        cost=dict(cost or {}),
        meta=dict(meta or {}),
    )


def to_tracked(be: BlockEncoding) -> BlockEncoding:
    """Drop the dilation unitary, keeping block and metadata."""
    return replace(be, unitary=None)


def embed_unitary(u, mode: str = EXPLICIT, label: str | None = None) -> BlockEncoding:
    """A unitary is a ``(1, 0, 0)`` block encoding of itself."""
    _check_mode(mode)
    u = mk.as_matrix(u)
    res = mk.unitarity_residual(u)
    if res > UNITARY_TOL:
        raise NotUnitary(f"unitarity residual {res:.3e}")
    cost = {f"U[{label}]": 1} if label else {}
    meta = {"self_inverse": mk.hermiticity_residual(u) <= UNITARY_TOL}
    be = from_unitary(u, u.shape[0], cost=cost, meta=meta)
    return be if mode == EXPLICIT else to_tracked(be)


def dilate(a, alpha: float | None = None, mode: str = EXPLICIT) -> BlockEncoding:
    """Exact one-ancilla encoding of ``a`` with subnormalisation ``alpha``.

    Uses ``[[B, sqrt(I - B B^+)], [sqrt(I - B^+ B), -B^+]]`` with ``B = a / alpha``;
    for Hermitian ``a`` the dilation is itself Hermitian. ``alpha`` defaults to
    ``max(1, ||a||)``.
    """
    _check_mode(mode)
    a = mk.as_matrix(a)
    if alpha is None:
        alpha = max(1.0, mk.spectral_norm(a))
    b = a / alpha
    d = b.shape[0]
    meta = {"self_inverse": mk.is_hermitian(a, tol=1e-12)}
    if mode == TRACKED:
        return BlockEncoding(block=b, alpha=alpha, ancillas=1, meta=meta)
    _check_dim(2 * d)
    if meta["self_inverse"]:
        # I - B^2 is shared by both off-diagonal corners, so U = U^+ exactly
        top = mk.func_hermitian(0.5 * (b + b.conj().T), lambda x: np.sqrt(np.clip(1.0 - x * x, 0.0, None)))
        bottom = top
    else:
        # one SVD for both roots keeps them consistent when ||B|| = 1
        w, sv, vh = np.linalg.svd(b)
        root = np.sqrt(np.clip(1.0 - sv * sv, 0.0, None))
        top = (w * root) @ w.conj().T
        bottom = (vh.conj().T * root) @ vh
    u = np.block([[b, top], [bottom, -b.conj().T]])
    return from_unitary(u, d, alpha=alpha, meta=meta)


def extract_block(be: BlockEncoding) -> np.ndarray:
    """Top-left ``d x d`` block (ancillas in ``|0...0>``)."""
    if be.unitary is not None:
        d = be.system_dim
        return be.unitary[:d, :d]
    return be.block


def verify(be: BlockEncoding, a) -> float:
    """``||A - alpha * block||`` in spectral norm."""
    a = mk.as_matrix(a)
    if a.shape != be.block.shape:
        raise DimensionMismatch(f"operator shape {a.shape} vs block shape {be.block.shape}")
    return mk.spectral_norm(a - be.alpha * extract_block(be))


def _pad_ancillas(u: np.ndarray, extra: int) -> np.ndarray:
    # New ancillas become the highest-order qubits, so the top-left block is unchanged.
    if extra == 0:
        return u
    return np.kron(np.eye(2**extra), u)


def prepare_unitary(amplitudes: np.ndarray) -> np.ndarray:
    """Householder reflection mapping ``|0>`` to the unit vector ``amplitudes``."""
    v = np.asarray(amplitudes, dtype=complex)
    n = v.shape[0]
    w = -v.copy()
    w[0] += 1.0
    nw = np.vdot(w, w).real
    if nw < 1e-30:
        return np.eye(n, dtype=complex)
    return np.eye(n, dtype=complex) - 2.0 * np.outer(w, w.conj()) / nw


def lcu_sum(bes: Sequence[BlockEncoding], weights: Sequence[complex]) -> BlockEncoding:
    """Encode ``sum_i y_i M_i / beta`` with ``beta = sum_i |y_i|``.

    All inputs must share ``alpha``; the result keeps it. The prepared amplitudes
    are ``sqrt(|y_i| / beta)`` and the phases ``y_i / |y_i|`` act inside the select
    operator. ``meta["beta"]`` records ``beta``.
    """
    if not bes:
        raise EmptyList("lcu_sum needs at least one encoding")
    if len(weights) != len(bes):
        raise DimensionMismatch(f"{len(bes)} encodings but {len(weights)} weights")
    d = bes[0].system_dim
    if any(be.system_dim != d for be in bes):
        raise DimensionMismatch("encodings act on different system dimensions")
    alpha = bes[0].alpha
    if any(abs(be.alpha - alpha) > 1e-12 * max(1.0, abs(alpha)) for be in bes):
        raise PreconditionError("lcu_sum requires a common alpha; rescale weights first")
    y = np.asarray(weights, dtype=complex)
    mags = np.abs(y)
    beta = float(np.sum(mags))
    if beta == 0.0:
        raise ZeroWeights("all LCU weights are zero")
    phases = np.where(mags > 0, y / np.where(mags > 0, mags, 1.0), 1.0)

    m = len(bes)
    a_sel = math.ceil(math.log2(m)) if m > 1 else 0
    a_max = max(be.ancillas for be in bes)
    ancillas = a_sel + a_max
    block = sum(yi * be.block for yi, be in zip(y, bes)) / beta
    epsilon = float(sum(mi * be.epsilon for mi, be in zip(mags, bes)) / beta)
    cost = merge_costs(*(be.cost for be in bes))
    meta = {"beta": beta, "terms": m}

    if not all(be.explicit for be in bes):
        return BlockEncoding(block, alpha, ancillas, epsilon, None, cost, meta)

    slots = 2**a_sel
    inner = 2**a_max * d
    _check_dim(slots * inner)
    select = np.empty((slots, inner, inner), dtype=complex)
    for i in range(slots):
        if i < m:
            select[i] = phases[i] * _pad_ancillas(bes[i].unitary, a_max - bes[i].ancillas)
        else:
            select[i] = np.eye(inner)
    amps = np.zeros(slots)
    amps[:m] = np.sqrt(mags / beta)
    prep = prepare_unitary(amps)
    # (P^+ (x) I) . blockdiag(select) . (P (x) I)
    u = np.einsum("ki,kj,kab->iajb", prep.conj(), prep, select, optimize=True)
    u = u.reshape(slots * inner, slots * inner)
    return from_unitary(u, d, alpha=alpha, epsilon=epsilon, cost=cost, meta=meta)


def product(be1: BlockEncoding, be2: BlockEncoding) -> BlockEncoding:
    """Encode ``A1 A2`` with ``alpha1 * alpha2`` on disjoint ancilla registers.

    ``be2`` acts first. The error bound is ``a1 e2 + a2 e1 + e1 e2``.
    """
    if be1.system_dim != be2.system_dim:
        raise DimensionMismatch("product of encodings on different system dimensions")
    d = be1.system_dim
    alpha = be1.alpha * be2.alpha
    epsilon = be1.alpha * be2.epsilon + be2.alpha * be1.epsilon + be1.epsilon * be2.epsilon
    ancillas = be1.ancillas + be2.ancillas
    block = be1.block @ be2.block
    cost = merge_costs(be1.cost, be2.cost)
    meta = {"factors": 2}
    if not (be1.explicit and be2.explicit):
        return BlockEncoding(block, alpha, ancillas, epsilon, None, cost, meta)
    n1, n2 = 2**be1.ancillas, 2**be2.ancillas
    _check_dim(n1 * n2 * d)
    # layout (anc1, anc2, sys); be1 ignores anc2, be2 ignores anc1
    u1 = be1.unitary.reshape(n1, d, n1, d)
    big1 = np.einsum("aibj,cd->acibdj", u1, np.eye(n2)).reshape(n1 * n2 * d, n1 * n2 * d)
    big2 = np.kron(np.eye(n1), be2.unitary)
    return from_unitary(big1 @ big2, d, alpha=alpha, epsilon=epsilon, cost=cost, meta=meta)


def tensor(bes: Sequence[BlockEncoding]) -> BlockEncoding:
    """Encode ``(x)_i M_i`` with all ancilla registers regrouped in front."""
    if not bes:
        raise EmptyList("tensor needs at least one encoding")
    alpha = float(np.prod([be.alpha for be in bes]))
    epsilon = float(np.prod([be.alpha + be.epsilon for be in bes]) - alpha)
    ancillas = sum(be.ancillas for be in bes)
    d = int(np.prod([be.system_dim for be in bes]))
    block = bes[0].block
    for be in bes[1:]:
        block = np.kron(block, be.block)
    cost = merge_costs(*(be.cost for be in bes))
    if not all(be.explicit for be in bes):
        return BlockEncoding(block, alpha, ancillas, epsilon, None, cost, {})
    _check_dim(2**ancillas * d)
    u = bes[0].unitary
    for be in bes[1:]:
        u = np.kron(u, be.unitary)
    # axes currently (a1, s1, a2, s2, ...) for rows then columns
    shape = []
    for be in bes:
        shape += [2**be.ancillas, be.system_dim]
    k = len(bes)
    u = u.reshape(shape + shape)
    row_order = [2 * i for i in range(k)] + [2 * i + 1 for i in range(k)]
    perm = row_order + [2 * k + j for j in row_order]
    u = u.transpose(perm).reshape(2**ancillas * d, 2**ancillas * d)
    return from_unitary(u, d, alpha=alpha, epsilon=epsilon, cost=cost)
