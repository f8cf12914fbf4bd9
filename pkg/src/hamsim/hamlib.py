"""Decomposed Hamiltonians ``H = sum_i H_i`` built from Pauli-string groups or random ensembles."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import matkernel as mk
from .errors import (
    BadCharacter,
    DimensionTooLarge,
    LengthMismatch,
    NormViolation,
    ParseError,
    QubitCountMismatch,
)

NORM_CAP = 0.5
NORM_SLACK = 1e-12
MAX_RANDOM_QUBITS = 5
MAX_RANDOM_TERMS = 8


@dataclass(frozen=True)
class PauliTerm:
    string: str
    coeff: float

    def __post_init__(self) -> None:
        bad = set(self.string) - set("IXYZ")
        if bad:
            raise BadCharacter(f"invalid Pauli characters {sorted(bad)} in {self.string!r}")
        if not self.string:
            raise LengthMismatch("empty Pauli string")
        if not math.isfinite(self.coeff):
            raise ParseError(f"non-finite coefficient for {self.string!r}")


def pauli_term_to_matrix(term: PauliTerm, n_qubits: int | None = None) -> np.ndarray:
    """``coeff * P_0 (x) P_1 (x) ...`` with qubit 0 as the highest-order factor."""
    if n_qubits is not None and len(term.string) != n_qubits:
        raise LengthMismatch(f"{term.string!r} has length {len(term.string)}, expected {n_qubits}")
    op = reduce(np.kron, (mk.PAULI[c] for c in term.string))
    return term.coeff * op


@dataclass
class HamiltonianSum:
    n_qubits: int
    terms: list[np.ndarray]
    norms: np.ndarray
    names: list[str] = field(default_factory=list)
    groups: list[list[PauliTerm]] | None = None
    sparsity: list[int] = field(default_factory=list)
    norm_enforced: bool = True
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not self.names:
            self.names = [f"H{i + 1}" for i in range(len(self.terms))]
        if not self.sparsity:
            self.sparsity = [self.dim] * len(self.terms)

    @property
    def m(self) -> int:
        return len(self.terms)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def total(self) -> np.ndarray:
        if not self.terms:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return np.sum(self.terms, axis=0)

    def check_norms(self, cap: float = NORM_CAP) -> None:
        worst = float(np.max(self.norms, initial=0.0))
        if worst > cap + NORM_SLACK:
            raise NormViolation(f"max term norm {worst:.6g} exceeds cap {cap}")


def _build(
    n_qubits: int,
    groups: list[list[PauliTerm]],
    names: list[str],
    sparsity: list[int],
    rescale: bool,
    norm_enforced: bool,
) -> HamiltonianSum:
    def assemble(scale: float) -> list[np.ndarray]:
        mats = []
        for group in groups:
            acc = np.zeros((2**n_qubits, 2**n_qubits), dtype=complex)
            for term in group:
                acc = acc + pauli_term_to_matrix(PauliTerm(term.string, scale * term.coeff), n_qubits)
            mats.append(acc)
        return mats

    terms = assemble(1.0)
    norms = np.array([mk.spectral_norm(h) for h in terms])
    scale = 1.0
    worst = float(np.max(norms, initial=0.0))
    if rescale and worst > NORM_CAP + NORM_SLACK:
        scale = NORM_CAP / worst
        groups = [[PauliTerm(t.string, scale * t.coeff) for t in g] for g in groups]
        terms = assemble(1.0)
        norms = np.array([mk.spectral_norm(h) for h in terms])
    ham = HamiltonianSum(
        n_qubits=n_qubits,
        terms=terms,
        norms=norms,
        names=names,
        groups=groups,
        sparsity=sparsity,
        norm_enforced=norm_enforced,
        scale=scale,
    )
    if norm_enforced:
        ham.check_norms()
    return ham


def load_hamiltonian(spec: dict[str, Any] | str | Path, norm_enforced: bool = True) -> HamiltonianSum:
    """Build a :class:`HamiltonianSum` from a HamiltonianSpec document.

    ``spec`` is either the parsed JSON object or a path to it. Each entry of
    ``groups`` becomes one term ``H_i``, in file order.
    """
    if isinstance(spec, (str, Path)):
        try:
            spec = json.loads(Path(spec).read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(spec, dict):
        raise ParseError("HamiltonianSpec must be a JSON object")
    try:
        n_qubits = int(spec["qubits"])
        raw_groups = spec["groups"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"missing or malformed field: {exc}") from exc
    if n_qubits < 1:
        raise ParseError("qubits must be positive")
    if not isinstance(raw_groups, list) or not raw_groups:
        raise ParseError("groups must be a non-empty list")
    rescale = bool(spec.get("rescale", False))

    groups: list[list[PauliTerm]] = []
    names: list[str] = []
    sparsity: list[int] = []
    for i, g in enumerate(raw_groups):
        try:
            paulis = g["paulis"]
            terms = [PauliTerm(str(p["string"]).upper(), float(p["coeff"])) for p in paulis]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"group {i}: {exc}") from exc
        if not terms:
            raise ParseError(f"group {i} has no Pauli terms")
        for t in terms:
            if len(t.string) != n_qubits:
                raise QubitCountMismatch(
                    f"group {i}: {t.string!r} has {len(t.string)} qubits, spec declares {n_qubits}"
                )
        groups.append(terms)
        names.append(str(g.get("name", f"H{i + 1}")))
        sparsity.append(int(g.get("sparsity", 2**n_qubits)))
    return _build(n_qubits, groups, names, sparsity, rescale, norm_enforced)


def pauli_decompose(matrix: np.ndarray, n_qubits: int, tol: float = 0.0) -> list[PauliTerm]:
    """Real Pauli coefficients of a Hermitian matrix, ``c_P = tr(P M) / 2^n``."""
    out = []
    for letters in itertools.product("IXYZ", repeat=n_qubits):
        s = "".join(letters)
        p = reduce(np.kron, (mk.PAULI[c] for c in s))
        c = float(np.real(np.trace(p @ matrix))) / 2**n_qubits
        if abs(c) > tol:
            out.append(PauliTerm(s, c))
    return out


def to_spec(ham: HamiltonianSum) -> dict[str, Any]:
    """Serialise back to a HamiltonianSpec document.

    Terms that did not come from Pauli groups are Pauli-decomposed first.
    Coefficients are already scaled, so ``rescale`` is written as false.
    """
    groups = ham.groups
    if groups is None:
        groups = [pauli_decompose(h, ham.n_qubits) for h in ham.terms]
    return {
        "qubits": ham.n_qubits,
        "rescale": False,
        "groups": [
            {
                "name": name,
                "sparsity": d,
                "paulis": [{"string": t.string, "coeff": t.coeff} for t in g],
            }
            for name, d, g in zip(ham.names, ham.sparsity, groups)
        ],
    }


def random_decomposed_hamiltonian(
    n_qubits: int, m: int, norm_cap: float = NORM_CAP, seed: int = 0
) -> HamiltonianSum:
    """``m`` GUE-style Hermitian terms, each rescaled to spectral norm exactly ``norm_cap``."""
    if n_qubits > MAX_RANDOM_QUBITS or m > MAX_RANDOM_TERMS or n_qubits < 1 or m < 1:
        raise DimensionTooLarge(
            f"random ensemble limited to 1..{MAX_RANDOM_QUBITS} qubits and 1..{MAX_RANDOM_TERMS} terms"
        )
    if not 0 < norm_cap <= NORM_CAP:
        raise NormViolation(f"norm_cap must lie in (0, {NORM_CAP}]")
    rng = np.random.Generator(np.random.Philox(seed))
    dim = 2**n_qubits
    terms = []
    for _ in range(m):
        h = mk.random_hermitian(dim, rng)
        lam = mk.eig_hermitian(h).eigenvalues
        terms.append(h * (norm_cap / float(np.max(np.abs(lam)))))
    norms = np.array([mk.spectral_norm(h) for h in terms])
    return HamiltonianSum(n_qubits=n_qubits, terms=terms, norms=norms)


def from_matrices(terms: Sequence[np.ndarray], norm_enforced: bool = True) -> HamiltonianSum:
    """Wrap explicit Hermitian matrices as a :class:`HamiltonianSum`."""
    mats = [mk.check_hermitian(t, tol=1e-12) for t in terms]
    dim = mats[0].shape[0]
    n_qubits = int(round(math.log2(dim)))
    if 2**n_qubits != dim or any(t.shape != (dim, dim) for t in mats):
        raise QubitCountMismatch("terms must share a power-of-two dimension")
    ham = HamiltonianSum(
        n_qubits=n_qubits,
        terms=mats,
        norms=np.array([mk.spectral_norm(t) for t in mats]),
        norm_enforced=norm_enforced,
    )
    if norm_enforced:
        ham.check_norms()
    return ham
