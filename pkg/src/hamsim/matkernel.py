"""Dense complex linear algebra used as the exact reference for every other module.

Matrices are plain ``numpy`` complex arrays. Hermitian eigendecompositions go
through a cyclic Jacobi solver for small matrices (auditable, no LAPACK) and
through ``numpy.linalg.eigh`` above ``JACOBI_MAX_DIM``.
"""

from __future__ import annotations

import os
import zlib
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    DimensionTooLarge,
    NoConvergence,
    NonHermitian,
    NonSquare,
    ResultTooLarge,
)

DEFAULT_MAX_DIM = 4096
JACOBI_MAX_DIM = 32
HERMITIAN_TOL = 1e-10

PAULI = {
    "I": np.array([[1, 0], [0, 1]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def max_dim() -> int:
    """Dimension cap, overridable through ``HAMSIM_MAX_DIM``."""
    raw = os.environ.get("HAMSIM_MAX_DIM")
    return int(raw) if raw else DEFAULT_MAX_DIM


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def _require_square(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise NonSquare(f"matrix of shape {a.shape} is not square")


def hermiticity_residual(a) -> float:
    a = as_matrix(a)
    _require_square(a)
    return float(np.max(np.abs(a - a.conj().T), initial=0.0))


def unitarity_residual(u) -> float:
    u = as_matrix(u)
    _require_square(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])), initial=0.0))


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_residual(a) <= tol


def is_unitary(u, tol: float = 1e-10) -> bool:
    return unitarity_residual(u) <= tol


def check_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = as_matrix(a)
    res = hermiticity_residual(a)
    if res > tol:
        raise NonHermitian(f"hermiticity residual {res:.3e} exceeds {tol:.1e}")
    return a


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: np.ndarray  # unitary, columns

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def jacobi_eigh(a, rel_tol: float = 1e-14, max_sweeps: int = 100) -> EigenDecomposition:
    """Cyclic complex Jacobi eigensolver for a Hermitian matrix.

    Each pivot (p, q) is first made real by a diagonal phase and then annihilated
    by a real plane rotation. Sweeps stop once the off-diagonal Frobenius mass
    drops below ``rel_tol * ||A||_F``.
    """
    a = np.array(as_matrix(a), copy=True)
    n = a.shape[0]
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    total = np.linalg.norm(a)
    threshold = rel_tol * total

    offdiag = ~np.eye(n, dtype=bool)

    def off_mass() -> float:
        return float(np.linalg.norm(a[offdiag]))

    for _ in range(max_sweeps):
        if total == 0.0 or off_mass() <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ g
    else:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], v[:, order])


def eig_hermitian(a, method: str = "auto") -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix with ascending eigenvalues.

    ``method`` is ``"jacobi"``, ``"lapack"`` or ``"auto"`` (Jacobi up to
    ``JACOBI_MAX_DIM``).
    """
    a = as_matrix(a)
    _require_square(a)
    n = a.shape[0]
    if n > max_dim():
        raise DimensionTooLarge(f"dimension {n} exceeds cap {max_dim()}")
    check_hermitian(a)
    if method == "auto":
        method = "jacobi" if n <= JACOBI_MAX_DIM else "lapack"
    if method == "jacobi":
        return jacobi_eigh(a)
    if method == "lapack":
        w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
        return EigenDecomposition(w, v)
    raise ValueError(f"unknown eigensolver method {method!r}")


def _apply_scalar(f: Callable, x: np.ndarray) -> np.ndarray:
    try:
        y = np.asarray(f(x), dtype=complex)
        if y.shape == x.shape:
            return y
    except (TypeError, ValueError):
        pass
    return np.array([complex(f(float(xi))) for xi in x])


def func_hermitian(a, f: Callable, decomposition: EigenDecomposition | None = None) -> np.ndarray:
    """``V diag(f(lambda)) V^dagger`` for Hermitian ``a``.

    ``f`` may be vectorised (numpy ufunc style) or scalar-only.
    """
    eig = decomposition if decomposition is not None else eig_hermitian(a)
    fv = _apply_scalar(f, eig.eigenvalues)
    v = eig.eigenvectors
    out = (v * fv) @ v.conj().T
    if np.all(np.abs(fv.imag) == 0.0):
        out = 0.5 * (out + out.conj().T)
    return out


def expm_evolution(h, t: float) -> np.ndarray:
    """Exact ``exp(-i H t)``."""
    h = check_hermitian(h)
    if t == 0:
        return np.eye(h.shape[0], dtype=complex)
    return func_hermitian(h, lambda x: np.exp(-1j * t * x))


def _start_block(a: np.ndarray, width: int) -> np.ndarray:
    seed = zlib.crc32(np.ascontiguousarray(a).tobytes())
    rng = np.random.Generator(np.random.Philox(seed))
    n = a.shape[1]
    z = rng.standard_normal((n, width)) + 1j * rng.standard_normal((n, width))
    q, _ = np.linalg.qr(z)
    return q


def spectral_norm(a, rtol: float = 1e-10, max_iter: int = 10000, block: int = 8) -> float:
    """Largest singular value by block power iteration on ``A^dagger A``.

    A block of ``block`` start vectors (seeded from the matrix bytes) is iterated
    with Rayleigh-Ritz extraction, so clustered leading singular values do not
    stall convergence. The Gram matrix is squared a few times first to sharpen
    the spectral gap; Ritz values always use the unsquared Gram matrix.
    """
    a = as_matrix(a)
    _require_square(a)
    if not np.any(a):
        return 0.0
    gram = a.conj().T @ a
    gram = 0.5 * (gram + gram.conj().T)
    n = a.shape[0]
    width = min(n, block)
    boosted = gram / np.linalg.norm(gram)
    squarings = 0 if width == n else (4 if n <= 256 else (2 if n <= 1024 else 0))
    for _ in range(squarings):
        boosted = boosted @ boosted
        nb = np.linalg.norm(boosted)
        if nb == 0.0:
            break
        boosted /= nb
    q = _start_block(a, width)
    prev = -1.0
    hits = 0
    for _ in range(max_iter):
        small = q.conj().T @ gram @ q
        est = float(eig_hermitian(0.5 * (small + small.conj().T), method="jacobi").eigenvalues[-1])
        if width == n:
            return float(np.sqrt(max(est, 0.0)))
        if abs(est - prev) <= rtol * abs(est):
            hits += 1
            if hits >= 2:
                return float(np.sqrt(max(est, 0.0)))
        else:
            hits = 0
        prev = est
        q, _ = np.linalg.qr(boosted @ q)
    raise NoConvergence(f"power iteration did not converge in {max_iter} iterations")


def max_norm(a) -> float:
    return float(np.max(np.abs(as_matrix(a)), initial=0.0))


def kron(a, b) -> np.ndarray:
    """Kronecker product; ``a`` carries the high-order indices."""
    a = as_matrix(a)
    b = as_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if max(rows, cols) > max_dim():
        raise ResultTooLarge(f"kron result {rows}x{cols} exceeds cap {max_dim()}")
    return np.kron(a, b)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (g + g.conj().T)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via phase-corrected QR."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
