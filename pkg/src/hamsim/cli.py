"""Command-line front end: ``hamsim {simulate,trotter,compare,sweep,selftest}``.

Exit status: 0 on success, 2 when an input violates a precondition (a JSON
error object is written to stderr), 64 for usage errors, 74 for I/O errors
and 70 when an iterative routine fails to converge.

Reports are deterministic for a fixed argument vector: floats are written
with ``repr`` (shortest round-tripping form), keys are sorted and wall-clock
timings are left out unless ``--record-time`` is given.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from . import matkernel as mk
from .blockenc import EXPLICIT, MODES, TRACKED, dilate, lcu_sum, product, tensor
from .errors import EmptyTable, HamsimError, NoConvergence, PreconditionError
from .hamlib import HamiltonianSum, load_hamiltonian, random_decomposed_hamiltonian
from .jacobi_anger import bessel_j_all, evolution_series
from .pipeline import (
    COLUMNS,
    ComparisonTable,
    _fmt,
    budget_forward,
    compare,
    epsilon_budget,
    run_trotter,
    scaling_fits,
    simulate,
    sweep,
)
from .trotter import segmented_evolution
from .unitary_log import log_of_unitary

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_SOFTWARE = 70
EXIT_USAGE = 64
EXIT_IO = 74


class UsageError(Exception):
    pass


class IoError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise UsageError(message)


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _plain(obj: Any) -> Any:
    """Convert numpy scalars/arrays and tuples into JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _load_ham(args: argparse.Namespace) -> HamiltonianSum:
    if args.ham:
        try:
            return load_hamiltonian(args.ham)
        except OSError as exc:
            raise IoError(f"cannot read {args.ham}: {exc}") from exc
    return random_decomposed_hamiltonian(args.qubits, args.terms, args.norm_cap, args.seed)


def _add_common(p: argparse.ArgumentParser) -> None:
    src = p.add_argument_group("Hamiltonian (a spec file, or a seeded random instance)")
    src.add_argument("--ham", help="HamiltonianSpec JSON file")
    src.add_argument("--qubits", type=int, default=2, help="random instance: qubits per term")
    src.add_argument("--terms", type=int, default=3, help="random instance: number of terms m")
    src.add_argument("--norm-cap", type=float, default=0.4, help="random instance: norm of each term")
    src.add_argument("--seed", type=int, default=0)
    p.add_argument("--time", type=float, default=1.0)
    p.add_argument("--out", help="output path ('-' or omitted: stdout)")
    p.add_argument(
        "--record-time", action="store_true", help="include wall-clock timings (output is then not reproducible)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hamsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hamsim {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("simulate", help="block-encoding pipeline at one (t, delta)")
    _add_common(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--mode", choices=MODES, default=TRACKED)
    p.add_argument("--trotter-k", type=int, default=None, help="also run the order-2k product formula")

    p = sub.add_parser("trotter", help="product-formula baseline at one (t, delta)")
    _add_common(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--trotter-k", type=int, default=1)

    p = sub.add_parser("compare", help="both methods over a list of deltas, with scaling fits")
    _add_common(p)
    p.add_argument("--deltas", type=_float_list, required=True)
    p.add_argument("--trotter-k", type=int, default=1)
    p.add_argument("--mode", choices=MODES, default=TRACKED)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=("auto", "json", "csv"), default="auto")
    p.add_argument("--plot", help="prefix for plot data files (.qsvt.dat, .trotter.dat, .fit)")

    p = sub.add_parser("sweep", help="both methods over a (time x delta) grid")
    _add_common(p)
    p.add_argument("--times", type=_float_list, required=True)
    p.add_argument("--deltas", type=_float_list, required=True)
    p.add_argument("--trotter-k", type=int, default=1)
    p.add_argument("--mode", choices=MODES, default=TRACKED)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=("auto", "json", "csv"), default="auto")

    p = sub.add_parser("selftest", help="run the built-in invariant checks")
    p.add_argument("--seed", type=int, default=0)
    return parser


def _fmt_format(args: argparse.Namespace) -> str:
    if args.format != "auto":
        return args.format
    return "csv" if args.out and args.out.endswith(".csv") else "json"


def _cmd_simulate(args: argparse.Namespace) -> None:
    ham = _load_ham(args)
    _, report = simulate(ham, args.time, args.delta, args.mode)
    if args.trotter_k is not None:
        report.trotter = run_trotter(ham, args.time, args.delta, args.trotter_k)
    if not args.record_time:
        report.wall_time = None
        if report.trotter is not None:
            report.trotter.wall_time = None
    _write(args.out, dumps(report.to_dict()))


def _cmd_trotter(args: argparse.Namespace) -> None:
    ham = _load_ham(args)
    res = run_trotter(ham, args.time, args.delta, args.trotter_k)
    if not args.record_time:
        res.wall_time = None
    data = asdict(res)
    data.update(t=args.time, delta=args.delta, m=ham.m, n_qubits=ham.n_qubits)
    _write(args.out, dumps(data))


def emit_plot_data(table: ComparisonTable, path: str | Path) -> list[Path]:
    """Write ``<path>.qsvt.dat``, ``<path>.trotter.dat`` and ``<path>.fit``.

    Data files hold two whitespace-separated columns, ``log10(1/delta)`` and the
    method's cost (walk applications, matrix exponentials). The ``.fit`` file
    lists slope, intercept and R^2 of each regression, recomputed from the rows.
    Nothing is written for an empty table.
    """
    if not table.rows:
        raise EmptyTable("cannot emit plot data for an empty table")
    base = Path(path)
    outputs = {
        base.with_name(base.name + ".qsvt.dat"): [(r.delta, r.walk_apps) for r in table.rows],
        base.with_name(base.name + ".trotter.dat"): [(r.delta, r.trotter_expm_count) for r in table.rows],
    }
    fits = scaling_fits(table.rows, table.degenerate_baseline)
    fit_lines = [f"# regression of log(cost) or cost on log(1/delta); t = {table.t!r}"]
    for name in sorted(fits):
        f = fits[name]
        fit_lines.append(f"{name} slope {f['slope']!r} intercept {f['intercept']!r} r2 {f['r2']!r}")
    if table.degenerate_baseline:
        fit_lines.append("trotter_power skipped: r = 1 at every delta")
    texts = {
        p: "# log10(1/delta) cost\n" + "".join(f"{math.log10(1.0 / d)!r} {c}\n" for d, c in rows)
        for p, rows in outputs.items()
    }
    texts[base.with_name(base.name + ".fit")] = "\n".join(fit_lines) + "\n"
    try:
        for p, text in texts.items():
            p.write_text(text)
    except OSError as exc:
        raise IoError(f"cannot write plot data under {base}: {exc}") from exc
    return list(texts)


def _cmd_compare(args: argparse.Namespace) -> None:
    ham = _load_ham(args)
    table = compare(ham, args.time, args.deltas, args.trotter_k, args.mode, max(1, args.jobs))
    if not args.record_time:
        for row in table.rows:
            row.wall_time_s = None
    text = table.to_csv() if _fmt_format(args) == "csv" else dumps(table.to_dict())
    _write(args.out, text)
    if args.plot:
        emit_plot_data(table, args.plot)


def _cmd_sweep(args: argparse.Namespace) -> None:
    ham = _load_ham(args)
    rows = sweep(ham, args.times, args.deltas, args.trotter_k, args.mode, max(1, args.jobs))
    flat = [r.flat() for r in rows]
    if not args.record_time:
        for rec in flat:
            rec["wall_time_s"] = None
    if _fmt_format(args) == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        cols = ("t",) + COLUMNS
        writer.writerow(cols)
        for rec in flat:
            writer.writerow([_fmt(rec[c]) for c in cols])
        text = buf.getvalue()
    else:
        text = dumps({"k_trotter": args.trotter_k, "mode": args.mode, "rows": flat})
    _write(args.out, text)


# --- selftest ---------------------------------------------------------------


def _selftest_checks(seed: int) -> list[tuple[str, Callable[[], bool]]]:
    rng = np.random.Generator(np.random.Philox(seed))
    a = mk.random_hermitian(4, rng)
    a = a / (2 * mk.spectral_norm(a))
    b = mk.random_hermitian(4, rng)
    b = b / (2 * mk.spectral_norm(b))
    h = mk.random_hermitian(2, rng)
    h = 0.5 * h / mk.spectral_norm(h)

    def eig_roundtrip() -> bool:
        eig = mk.eig_hermitian(a, method="jacobi")
        return mk.spectral_norm(eig.reconstruct() - a) < 1e-12

    def lcu_matches() -> bool:
        be = lcu_sum([dilate(a), dilate(b)], [0.3, -0.7j])
        return mk.spectral_norm(be.operator() - (0.3 * a - 0.7j * b)) < 1e-10

    def product_matches() -> bool:
        be = product(dilate(a), dilate(b))
        return mk.spectral_norm(be.operator() - a @ b) < 1e-10

    def tensor_matches() -> bool:
        be = tensor([dilate(h), dilate(a)])
        return mk.spectral_norm(be.operator() - np.kron(h, a)) < 1e-10

    def bessel_normalisation() -> bool:
        j = bessel_j_all(60, 3.7)
        return abs(j[0] + 2 * np.sum(j[2::2]) - 1.0) < 1e-10

    def ja_certified() -> bool:
        series = evolution_series(2.0, 1e-8)
        x = np.linspace(-1, 1, 1001)
        return float(np.max(np.abs(series(x) - np.exp(-2.0j * x)))) <= series.remainder_bound + 1e-14

    def log_roundtrip() -> bool:
        be = log_of_unitary(mk.expm_evolution(h, 1.0), 1e-7, mode=EXPLICIT)
        return mk.spectral_norm(be.operator() - h) <= 1e-7

    def trotter_commuting_exact() -> bool:
        d = np.diag(rng.uniform(-0.5, 0.5, 4))
        e = np.diag(rng.uniform(-0.5, 0.5, 4))
        exact = mk.expm_evolution(d + e, 1.3)
        return mk.spectral_norm(segmented_evolution([d, e], 1.3, 3, 2) - exact) < 1e-10

    def budget_forward_check() -> bool:
        eps = epsilon_budget(1e-3, 1.0, 3)
        return abs(budget_forward(eps, 1.0, 3) - 1e-3) <= 1e-4 * 1e-3

    def end_to_end() -> bool:
        ham = random_decomposed_hamiltonian(1, 2, 0.4, seed)
        _, rep = simulate(ham, 1.0, 1e-4, TRACKED)
        return rep.measured_error <= 1e-4

    return [
        ("eigendecomposition round trip", eig_roundtrip),
        ("lcu_sum block", lcu_matches),
        ("product block", product_matches),
        ("tensor block", tensor_matches),
        ("Bessel normalisation", bessel_normalisation),
        ("Jacobi-Anger remainder certificate", ja_certified),
        ("log of unitary round trip", log_roundtrip),
        ("commuting product formula exact", trotter_commuting_exact),
        ("epsilon budget forward check", budget_forward_check),
        ("end-to-end error within delta", end_to_end),
    ]


def _cmd_selftest(args: argparse.Namespace) -> int:
    passed = failed = 0
    for name, check in _selftest_checks(args.seed):
        try:
            ok = bool(check())
        except HamsimError as exc:
            ok = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        passed += ok
        failed += not ok
    print(f"{passed} passed, {failed} failed")
    return EXIT_OK if failed == 0 else 1


COMMANDS = {
    "simulate": _cmd_simulate,
    "trotter": _cmd_trotter,
    "compare": _cmd_compare,
    "sweep": _cmd_sweep,
    "selftest": _cmd_selftest,
}


def _error_json(kind: str, exc: BaseException) -> None:
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}, sort_keys=True) + "\n")


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"hamsim: error: {exc}\n")
        return EXIT_USAGE
    try:
        status = COMMANDS[args.command](args)
    except PreconditionError as exc:
        _error_json("precondition", exc)
        return EXIT_PRECONDITION
    except NoConvergence as exc:
        _error_json("no-convergence", exc)
        return EXIT_SOFTWARE
    except IoError as exc:
        _error_json("io", exc)
        return EXIT_IO
    return EXIT_OK if status is None else status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
