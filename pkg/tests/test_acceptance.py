"""Acceptance criteria 1-8, one test each; every test records a pass/fail line."""

from __future__ import annotations

import math
import subprocess
import sys
import time

import numpy as np
from conftest import make_rng, opnorm, rand_herm, record_acceptance

from hamsim import matkernel as mk
from hamsim.blockenc import EXPLICIT, TRACKED, dilate, embed_unitary, lcu_sum, product, tensor
from hamsim.hamlib import from_matrices, random_decomposed_hamiltonian
from hamsim.jacobi_anger import bessel_j_all, evolution_series
from hamsim.pipeline import budget_forward, compare, epsilon_budget, fit_line, simulate
from hamsim.trotter import segmented_evolution
from hamsim.unitary_log import log_of_unitary

X = mk.PAULI["X"]
Z = mk.PAULI["Z"]


def _random_encoding(rng: np.random.Generator, dim: int):
    """Exact encoding of either a Hermitian matrix or a unitary, plus the operator itself."""
    if rng.uniform() < 0.5:
        a = mk.random_hermitian(dim, rng)
        a *= rng.uniform(0.1, 1.0) / mk.spectral_norm(a)
        return dilate(a, alpha=1.0), a
    u = mk.random_unitary(dim, rng)
    return embed_unitary(u), u


def test_criterion_1_block_algebra():
    start = time.perf_counter()
    worst = 0.0
    for seed in range(100):
        rng = make_rng(seed)
        dim = 2 ** int(rng.integers(1, 3))
        (b1, a1), (b2, a2) = _random_encoding(rng, dim), _random_encoding(rng, dim)
        y = rng.normal(size=2) + 1j * rng.normal(size=2)
        s = lcu_sum([b1, b2], y)
        worst = max(worst, opnorm(s.block - (y[0] * a1 + y[1] * a2) / np.sum(np.abs(y))))
        worst = max(worst, opnorm(product(b1, b2).block - a1 @ a2))
        worst = max(worst, opnorm(tensor([b1, b2]).block - np.kron(a1, a2)))
        for be in (s, product(b1, b2), tensor([b1, b2])):
            worst = max(worst, mk.unitarity_residual(be.unitary))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 10
    record_acceptance(1, ok, f"max deviation {worst:.2e} (tol 1e-10), {elapsed:.2f}s (< 10s)")
    assert ok


def test_criterion_2_log_round_trip():
    start = time.perf_counter()
    epsilons = [1e-3, 1e-5, 1e-7, 1e-9]
    failures = 0
    walks: dict[float, set[int]] = {e: set() for e in epsilons}
    for seed in range(50):
        dim = 2 if seed % 2 == 0 else 4
        h = rand_herm(dim, 200 + seed, norm=0.5)
        u = mk.expm_evolution(h, 1.0)
        for eps in epsilons:
            be = log_of_unitary(u, eps, mode=EXPLICIT, label="u")
            if opnorm(be.operator() - h) > eps:
                failures += 1
            walks[eps].add(be.cost["walk:log[u]"])
    counts = [walks[e].pop() for e in epsilons if len(walks[e]) == 1]
    fit = fit_line(np.log([1 / e for e in epsilons]), counts) if len(counts) == 4 else {"r2": 0.0, "slope": 0.0}
    elapsed = time.perf_counter() - start
    ok = failures == 0 and fit["r2"] >= 0.95 and elapsed < 60
    record_acceptance(
        2, ok,
        f"{failures} of 200 recoveries outside eps; walks {counts} vs log(1/eps): "
        f"slope {fit['slope']:.3f}, R^2 {fit['r2']:.4f} (>= 0.95); {elapsed:.1f}s (< 60s)",
    )
    assert ok


def test_criterion_3_jacobi_anger_certificate():
    start = time.perf_counter()
    x = np.cos(np.pi * np.arange(1001) / 1000)
    worst_ratio = 0.0
    for t in (0.5, 1.0, 2.0, 4.0):
        for eps in (1e-4, 1e-8, 1e-12):
            s = evolution_series(t, eps)
            err = float(np.max(np.abs(s(x) - np.exp(-1j * t * x))))
            worst_ratio = max(worst_ratio, err / s.remainder_bound if s.remainder_bound else math.inf)
    norm_err = max(abs(j[0] + 2 * np.sum(j[2::2]) - 1) for j in (bessel_j_all(120, t) for t in (0.5, 1, 2, 4, 10, 30)))
    elapsed = time.perf_counter() - start
    ok = worst_ratio <= 1.0 and norm_err <= 1e-10 and elapsed < 5
    record_acceptance(
        3, ok,
        f"max error/remainder {worst_ratio:.3f} (<= 1); normalisation residual {norm_err:.1e}; {elapsed:.2f}s (< 5s)",
    )
    assert ok


def test_criterion_4_end_to_end():
    start = time.perf_counter()
    ham = random_decomposed_hamiltonian(2, 3, 0.4, seed=5)
    errors = {}
    for delta in (1e-2, 1e-4, 1e-6):
        _, rep = simulate(ham, 1.0, delta, TRACKED)
        errors[delta] = rep.measured_error
    elapsed = time.perf_counter() - start
    ok = all(err <= d for d, err in errors.items()) and elapsed < 300
    detail = ", ".join(f"delta {d:g}: {e:.2e}" for d, e in errors.items())
    record_acceptance(4, ok, f"{detail}; {elapsed:.1f}s (< 300s)")
    assert ok


def test_criterion_5_scaling_separation():
    start = time.perf_counter()
    ham = from_matrices([0.3 * X, 0.2 * Z])
    table = compare(ham, 1.0, [1e-2, 1e-3, 1e-4, 1e-5, 1e-6], k_trotter=1)
    trot = table.fits["trotter_power"]["slope"]
    qsvt = table.fits["qsvt_power"]["slope"]
    lin_r2 = table.fits["qsvt_vs_log"]["r2"]
    elapsed = time.perf_counter() - start
    ok = 0.375 <= trot <= 0.625 and qsvt <= 0.1 and lin_r2 >= 0.9 and elapsed < 300
    record_acceptance(
        5, ok,
        f"Trotter power {trot:.3f} in [0.375, 0.625]; QSVT power {qsvt:.3f} (<= 0.1); "
        f"QSVT cost vs log(1/delta) R^2 {lin_r2:.3f} (>= 0.9); {elapsed:.1f}s (< 300s)",
    )
    assert ok


def test_criterion_6_trotter_order():
    start = time.perf_counter()
    pair = [0.3 * X, 0.2 * Z]
    t = 2.0
    exact = mk.expm_evolution(sum(pair), t)
    orders = {}
    for k, rs in ((1, [2, 4, 8, 16, 32, 64]), (2, [1, 2, 4, 8, 16])):
        errs = [opnorm(segmented_evolution(pair, t, r, k) - exact) for r in rs]
        orders[k] = -np.polyfit(np.log(rs), np.log(errs), 1)[0]
    commuting_worst = 0.0
    for seed in range(5):
        rng = make_rng(seed)
        terms = [np.diag(rng.uniform(-0.5, 0.5, 4)).astype(complex) for _ in range(3)]
        ex = mk.expm_evolution(sum(terms), 1.5)
        for k in (1, 2, 3):
            for r in (1, 2, 5, 8):
                commuting_worst = max(commuting_worst, opnorm(segmented_evolution(terms, 1.5, r, k) - ex))
    elapsed = time.perf_counter() - start
    ok = all(abs(orders[k] - 2 * k) <= 0.2 * 2 * k for k in (1, 2)) and commuting_worst <= 1e-10 and elapsed < 60
    record_acceptance(
        6, ok,
        f"orders k=1: {orders[1]:.3f} (2 +- 20%), k=2: {orders[2]:.3f} (4 +- 20%); "
        f"commuting max error {commuting_worst:.1e}; {elapsed:.2f}s (< 60s)",
    )
    assert ok


def test_criterion_7_budget_equation():
    start = time.perf_counter()
    worst = 0.0
    for delta in (1e-2, 1e-4, 1e-6):
        for m in (1, 2, 4):
            eps = epsilon_budget(delta, 1.0, m)
            worst = max(worst, abs(budget_forward(eps, 1.0, m) - delta) / delta)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-4 and elapsed < 1
    record_acceptance(7, ok, f"max relative residual {worst:.1e} (<= 1e-4); {elapsed * 1000:.1f}ms (< 1s)")
    assert ok


def test_criterion_8_determinism(tmp_path):
    runs = {
        "simulate": ["simulate", "--seed", "11", "--qubits", "2", "--terms", "3", "--time", "1", "--delta", "1e-4",
                     "--trotter-k", "1"],
        "compare": ["compare", "--seed", "11", "--qubits", "1", "--terms", "2", "--deltas", "1e-2,1e-3,1e-4",
                    "--jobs", "2", "--plot", "{dir}/plot"],
    }
    same = []
    for name, argv in runs.items():
        outputs = []
        for rep in range(2):
            d = tmp_path / f"{name}{rep}"
            d.mkdir()
            out = d / "report.json"
            args = [a.replace("{dir}", str(d)) for a in argv]
            proc = subprocess.run([sys.executable, "-m", "hamsim.cli", *args, "--out", str(out)],
                                  capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            outputs.append(sorted((p.name, p.read_bytes()) for p in d.iterdir()))
        same.append(outputs[0] == outputs[1])
    ok = all(same)
    record_acceptance(8, ok, f"byte-identical reports for {sum(same)} of {len(same)} repeated invocations")
    assert ok
