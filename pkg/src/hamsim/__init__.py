"""Hamiltonian simulation from the evolutions of the summands.

Given black-box access to ``exp(-i H_i)`` for each term of ``H = sum_i H_i``,
the package rebuilds ``exp(-i H t)`` through block encodings (log of each
unitary, LCU, Jacobi-Anger series, product) and benchmarks the result against
Suzuki product formulas.
"""

from __future__ import annotations

from .blockenc import EXPLICIT, TRACKED, BlockEncoding
from .errors import HamsimError, NoConvergence, PreconditionError
from .hamlib import HamiltonianSum, load_hamiltonian, random_decomposed_hamiltonian
from .pipeline import ComparisonTable, SimulationReport, compare, epsilon_budget, run_trotter, simulate

__version__ = "0.1.0"

__all__ = [
    "EXPLICIT",
    "TRACKED",
    "BlockEncoding",
    "ComparisonTable",
    "HamiltonianSum",
    "HamsimError",
    "NoConvergence",
    "PreconditionError",
    "SimulationReport",
    "compare",
    "epsilon_budget",
    "load_hamiltonian",
    "random_decomposed_hamiltonian",
    "run_trotter",
    "simulate",
]
