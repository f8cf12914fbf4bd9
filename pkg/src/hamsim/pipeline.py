"""End-to-end simulation of ``exp(-i H t)`` for ``H = sum_i H_i`` from the factors' evolutions.

Stages, per run:

1. per-factor error budget ``eps`` from the target error ``delta``;
2. ``U_i = exp(-i H_i)`` -> encoding of ``H_i`` (log of unitary) -> uniform LCU,
   giving an encoding of ``H/m``;
3. Jacobi-Anger evolution of that encoding for time ``t``, i.e. ``exp(-i H t/m)``;
4. ``m``-fold product of the factor, reconstructing ``exp(-i H t)``.

The product-formula baseline is run next to it by :func:`compare`.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from . import matkernel as mk
from . import trotter
from .blockenc import EXPLICIT, TRACKED, BlockEncoding, embed_unitary, lcu_sum, product, to_tracked
from .errors import ArgumentOutOfRange, NoConvergence, NormViolation, OrderUnsupported
from .hamlib import NORM_CAP, NORM_SLACK, HamiltonianSum
from .jacobi_anger import evolve_block
from .unitary_log import log_of_unitary

BUDGET_MAX_ITER = 200
LOG_SHARE = 0.5  # fraction of eps given to the log-of-unitary stage; the rest goes to the series


def epsilon_budget(delta: float, t: float, m: int, rtol: float = 1e-12) -> float:
    """Solve ``eps = delta^2 / (16 (t + ln(1/eps))^2 m^3)`` by fixed-point iteration."""
    if not 0 < delta < 1:
        raise ArgumentOutOfRange("delta must lie in (0, 1)")
    if not t > 0:
        raise ArgumentOutOfRange("t must be positive")
    if m < 1:
        raise ArgumentOutOfRange("m must be at least 1")
    eps = delta**2 / (16.0 * (t + 1.0) ** 2 * m**3)
    for _ in range(BUDGET_MAX_ITER):
        nxt = delta**2 / (16.0 * (t + math.log(1.0 / eps)) ** 2 * m**3)
        if abs(nxt - eps) <= rtol * nxt:
            return nxt
        eps = nxt
    raise NoConvergence("epsilon budget iteration did not converge")


def budget_forward(eps: float, t: float, m: int) -> float:
    """``4 (t + ln(1/eps)) sqrt(m eps) m``, the error a budget ``eps`` buys."""
    return 4.0 * (t + math.log(1.0 / eps)) * math.sqrt(m * eps) * m


@dataclass
class SimulationPlan:
    ham: HamiltonianSum
    t: float
    delta: float
    mode: str = TRACKED
    epsilon: float = 0.0
    degrees: tuple[int, int] = (0, 0)  # (arcsin, Jacobi-Anger)

    @classmethod
    def create(cls, ham: HamiltonianSum, t: float, delta: float, mode: str = TRACKED) -> "SimulationPlan":
        eps = epsilon_budget(delta, t, ham.m) if t > 0 else 0.0
        return cls(ham, t, delta, mode, eps)


def _check_ham(ham: HamiltonianSum) -> None:
    worst = float(np.max(ham.norms, initial=0.0))
    if worst > NORM_CAP + NORM_SLACK:
        raise NormViolation(f"term norm {worst:.6g} exceeds {NORM_CAP}")


def build_h_encoding(ham: HamiltonianSum, epsilon: float, mode: str = TRACKED) -> BlockEncoding:
    """Encoding of ``H/m`` (``alpha = pi/2``) assembled from ``exp(-i H_i)``.

    Each ``H_i`` is recovered by :func:`log_of_unitary` to accuracy ``epsilon``
    and the results are averaged by a uniform LCU.
    """
    _check_ham(ham)
    logs = []
    for name, h in zip(ham.names, ham.terms):
        u = mk.expm_evolution(h, 1.0)
        logs.append(log_of_unitary(u, epsilon, mode=mode, label=name))
    be = lcu_sum(logs, [1.0] * ham.m)
    meta = dict(be.meta)
    meta["arcsin_degrees"] = [lg.meta["arcsin_degree"] for lg in logs]
    return BlockEncoding(be.block, be.alpha, be.ancillas, be.epsilon, be.unitary, be.cost, meta)


@dataclass
class TrotterResult:
    r: int
    k: int
    measured_error: float
    matrix_exp_count: int
    bound: float | None
    r_source: str  # "bound" or "measured"
    wall_time: float | None = None


@dataclass
class SimulationReport:
    t: float
    delta: float
    m: int
    n_qubits: int
    mode: str
    eps_budget: float
    measured_error: float
    certified_error: float
    subnormalization: float
    ja_degree: int
    arcsin_degrees: list[int]
    series_time: float
    ancillas: int
    walk_apps: int
    walk_apps_total: int
    query_counts: dict[str, dict[str, int]]
    u_calls: dict[str, int]
    cost_weights: list[float]
    budget_error_estimate: float | None
    asymptotic_cost_estimate: float | None
    within_tolerance: bool
    log_base: str = "natural"
    notes: list[str] = field(default_factory=list)
    wall_time: float | None = None
    trotter: TrotterResult | None = None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SimulationReport":
        data = dict(data)
        if data.get("trotter") is not None:
            data["trotter"] = TrotterResult(**data["trotter"])
        return cls(**data)


def _asymptotic_cost(ham: HamiltonianSum, t: float, delta: float, eps: float) -> float | None:
    """Leading-order query-count expression with unit constants, for trend comparison only."""
    m = ham.m
    try:
        t_sum = sum(d * n + math.log(1.0 / eps) for d, n in zip(ham.sparsity, ham.norms))
        inner = 16.0 * (t + math.log(1.0 / eps)) ** 2 * m**3 / delta**2
        return m**2 * t_sum * math.log(inner) * (t + math.log(math.log(1.0 / delta**2)))
    except ValueError:
        return None


def simulate(
    ham: HamiltonianSum, t: float, delta: float, mode: str = TRACKED
) -> tuple[BlockEncoding, SimulationReport]:
    """Simulate ``exp(-i H t)`` to target error ``delta``.

    Returns the final encoding (``alpha`` = product of series
    subnormalisations) and its report. ``measured_error`` is the spectral-norm
    distance of ``alpha * block`` to the exact evolution.
    """
    _check_ham(ham)
    if not 0 < delta < 1:
        raise ArgumentOutOfRange("delta must lie in (0, 1)")
    if t < 0:
        raise ArgumentOutOfRange("t must be non-negative")
    started = time.perf_counter()
    m = ham.m
    exact = mk.expm_evolution(ham.total, t)
    notes = [
        "subnormalization is reported, not removed by amplitude amplification",
    ]

    if t == 0:
        ident = embed_unitary(np.eye(ham.dim))
        final = ident if mode == EXPLICIT else to_tracked(ident)
        report = SimulationReport(
            t=t, delta=delta, m=m, n_qubits=ham.n_qubits, mode=mode, eps_budget=0.0,
            measured_error=mk.spectral_norm(final.operator() - exact), certified_error=0.0,
            subnormalization=1.0, ja_degree=0, arcsin_degrees=[0] * m, series_time=0.0,
            ancillas=0, walk_apps=0, walk_apps_total=0, query_counts={}, u_calls={},
            cost_weights=[0.0] * m, budget_error_estimate=0.0, asymptotic_cost_estimate=None,
            within_tolerance=True, notes=notes + ["t = 0: identity, no series applied"],
        )
        report.wall_time = time.perf_counter() - started
        return final, report

    eps = epsilon_budget(delta, t, m)
    be_h = build_h_encoding(ham, LOG_SHARE * eps, mode)
    # be_h encodes H/m, so evolving it for time t yields exp(-i H t / m)
    factor = evolve_block(be_h, t, (1.0 - LOG_SHARE) * eps)
    final = factor
    for _ in range(m - 1):
        final = product(final, factor)

    measured = mk.spectral_norm(final.operator() - exact)
    cost = Counter(final.cost)
    walk_apps = cost.get("walk:ja", 0)
    walk_total = sum(v for k, v in cost.items() if k.startswith("walk"))
    u_calls = {k[2:-1]: v for k, v in cost.items() if k.startswith("U[")}
    query_counts = {f"factor_{i + 1}": dict(factor.cost) for i in range(m)}
    weights = [float(d * n + math.log(1.0 / eps)) for d, n in zip(ham.sparsity, ham.norms)]
    report = SimulationReport(
        t=t,
        delta=delta,
        m=m,
        n_qubits=ham.n_qubits,
        mode=mode,
        eps_budget=eps,
        measured_error=measured,
        certified_error=final.epsilon,
        subnormalization=final.alpha,
        ja_degree=int(factor.meta["degree"]),
        arcsin_degrees=list(be_h.meta["arcsin_degrees"]),
        series_time=float(factor.meta["series_time"]),
        ancillas=final.ancillas,
        walk_apps=int(walk_apps),
        walk_apps_total=int(walk_total),
        query_counts=query_counts,
        u_calls=u_calls,
        cost_weights=weights,
        budget_error_estimate=budget_forward(eps, t, m),
        asymptotic_cost_estimate=_asymptotic_cost(ham, t, delta, eps),
        within_tolerance=measured <= delta,
        notes=notes,
    )
    report.wall_time = time.perf_counter() - started
    return final, report


def run_trotter(ham: HamiltonianSum, t: float, delta: float, k: int = 1) -> TrotterResult:
    """Product-formula baseline at the segment count needed for ``delta``.

    For ``k = 1`` the segment count comes from the nested-commutator bound; for
    higher orders (no ``alpha^(2k)`` available) it is the smallest ``r`` whose
    measured error is at most ``delta``.
    """
    started = time.perf_counter()
    exact = mk.expm_evolution(ham.total, t)

    def measured(r: int) -> float:
        return mk.spectral_norm(trotter.segmented_evolution(ham.terms, t, r, k) - exact)

    try:
        r, bound = trotter.required_segments(delta, k, t, ham.terms)
        source = "bound"
        err = measured(r)
    except OrderUnsupported:
        bound = None
        source = "measured"
        hi = 1
        while measured(hi) > delta:
            hi *= 2
        lo = hi // 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if measured(mid) > delta:
                lo = mid
            else:
                hi = mid
        r = hi
        err = measured(r)
    return TrotterResult(
        r=r,
        k=k,
        measured_error=err,
        matrix_exp_count=trotter.exponential_count(ham.m, k, r),
        bound=bound,
        r_source=source,
        wall_time=time.perf_counter() - started,
    )


def fit_line(x: Sequence[float], y: Sequence[float]) -> dict[str, float]:
    """Least-squares ``y = slope * x + intercept`` with coefficient of determination."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}


COLUMNS = (
    "delta",
    "eps_budget",
    "ja_degree",
    "arcsin_degree",
    "walk_apps",
    "trotter_r",
    "trotter_expm_count",
    "measured_error_qsvt",
    "measured_error_trotter",
    "subnormalization",
    "wall_time_s",
)


@dataclass
class ComparisonRow:
    delta: float
    eps_budget: float
    ja_degree: int
    arcsin_degree: int
    walk_apps: int
    trotter_r: int
    trotter_expm_count: int
    measured_error_qsvt: float
    measured_error_trotter: float
    subnormalization: float
    wall_time_s: float | None = None


@dataclass
class ComparisonTable:
    t: float
    k_trotter: int
    rows: list[ComparisonRow]
    fits: dict[str, Any] = field(default_factory=dict)
    degenerate_baseline: bool = False

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ComparisonTable":
        data = dict(data)
        data["rows"] = [ComparisonRow(**r) for r in data["rows"]]
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(getattr(row, c)) for c in COLUMNS])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, t: float = float("nan"), k_trotter: int = 1) -> "ComparisonTable":
        rows = []
        for rec in csv.DictReader(io.StringIO(text)):
            vals = {}
            for c in COLUMNS:
                raw = rec[c]
                if raw == "":
                    vals[c] = None
                elif c in ("ja_degree", "arcsin_degree", "walk_apps", "trotter_r", "trotter_expm_count"):
                    vals[c] = int(raw)
                else:
                    vals[c] = float(raw)
            rows.append(ComparisonRow(**vals))
        return cls(t=t, k_trotter=k_trotter, rows=rows)


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def scaling_fits(rows: Sequence[ComparisonRow], degenerate: bool) -> dict[str, Any]:
    """Regression slopes of cost against ``log(1/delta)`` for both methods."""
    if len(rows) < 2:
        return {}
    inv = np.array([1.0 / r.delta for r in rows])
    fits: dict[str, Any] = {
        "qsvt_power": fit_line(np.log(inv), np.log([r.walk_apps for r in rows])),
        "qsvt_vs_log": fit_line(np.log(inv), [r.walk_apps for r in rows]),
    }
    if not degenerate:
        fits["trotter_power"] = fit_line(np.log(inv), np.log([r.trotter_expm_count for r in rows]))
    return fits


def _compare_point(args: tuple[HamiltonianSum, float, float, int, str]) -> ComparisonRow:
    ham, t, delta, k, mode = args
    _, rep = simulate(ham, t, delta, mode)
    tr = run_trotter(ham, t, delta, k)
    return ComparisonRow(
        delta=delta,
        eps_budget=rep.eps_budget,
        ja_degree=rep.ja_degree,
        arcsin_degree=max(rep.arcsin_degrees),
        walk_apps=rep.walk_apps,
        trotter_r=tr.r,
        trotter_expm_count=tr.matrix_exp_count,
        measured_error_qsvt=rep.measured_error,
        measured_error_trotter=tr.measured_error,
        subnormalization=rep.subnormalization,
        wall_time_s=(rep.wall_time or 0.0) + (tr.wall_time or 0.0),
    )


def compare(
    ham: HamiltonianSum,
    t: float,
    deltas: Sequence[float],
    k_trotter: int = 1,
    mode: str = TRACKED,
    jobs: int = 1,
) -> ComparisonTable:
    """Run both methods at each ``delta`` and fit their cost scaling.

    Points are independent; with ``jobs > 1`` they run in worker processes and
    are merged in descending-``delta`` order.
    """
    deltas = sorted(set(float(d) for d in deltas), reverse=True)
    tasks = [(ham, t, d, k_trotter, mode) for d in deltas]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_compare_point, tasks))
    else:
        rows = [_compare_point(task) for task in tasks]
    rows.sort(key=lambda r: -r.delta)
    degenerate = all(r.trotter_r == 1 for r in rows)
    table = ComparisonTable(t=t, k_trotter=k_trotter, rows=rows, degenerate_baseline=degenerate)
    table.fits = scaling_fits(rows, degenerate)
    return table


@dataclass
class SweepRow:
    t: float
    row: ComparisonRow

    def flat(self) -> dict[str, Any]:
        return {"t": self.t, **asdict(self.row)}


def sweep(
    ham: HamiltonianSum,
    times: Sequence[float],
    deltas: Sequence[float],
    k_trotter: int = 1,
    mode: str = TRACKED,
    jobs: int = 1,
) -> list[SweepRow]:
    """Both methods on every ``(t, delta)`` grid point, ordered by ``t`` then descending ``delta``.

    Grid points run in up to ``jobs`` worker processes; only the caller
    assembles (and later writes) the merged result.
    """
    grid = [
        (float(t), float(d))
        for t in sorted(set(float(x) for x in times))
        for d in sorted(set(float(x) for x in deltas), reverse=True)
    ]
    tasks = [(ham, t, d, k_trotter, mode) for t, d in grid]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_compare_point, tasks))
    else:
        rows = [_compare_point(task) for task in tasks]
    out = [SweepRow(t, row) for (t, _), row in zip(grid, rows)]
    out.sort(key=lambda s: (s.t, -s.row.delta))
    return out
