"""Command-line front end.

Each subcommand produces a human summary and a delimited table. Without
``--out`` only the summary is printed. ``--out PATH`` writes the table to
PATH; ``--out -`` writes the table to stdout and moves the summary to stderr.

Exit codes: 0 success, 1 input or usage error, 2 numeric or budget error.
"""

from __future__ import annotations

import argparse
import io
import sys
import warnings

from .bands import DEFAULT_FLAT_TOL, DEFAULT_GRID, KGrid, bands_csv, compute_bands
from .errors import BudgetError, GraphError, NumericError
from .graph import load_graph
from .sweep import DEFAULT_SAMPLES, sweep
from .traces import (
    DEFAULT_COEFF_TOL,
    coefficients_csv,
    fft_cross_check,
    flat_spectrum_verdict,
    parseval_check,
    required_resolution,
    trace_fourier,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _g6(x: float, scale: float = 1.0) -> str:
    if abs(x) < 1e-12 * max(1.0, abs(scale)):
        x = 0.0
    return format(x + 0.0, ".6g")


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="magflat", description="Flat-band analysis of magnetic Schrodinger operators on periodic graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--graph", required=True, help="graph file (JSON)")
        sp.add_argument("--out", default=None, help="write the table to PATH, or '-' for stdout")

    sp = sub.add_parser("bands", help="band structure on a k-grid")
    common(sp)
    sp.add_argument("--grid", type=_positive_int, default=DEFAULT_GRID)
    sp.add_argument("--flat-tol", type=_positive_float, default=DEFAULT_FLAT_TOL)

    sp = sub.add_parser("flat-check", help="exact flat-spectrum verdict from trace coefficients")
    common(sp)
    sp.add_argument("--n-max", type=_positive_int, default=None)
    sp.add_argument("--tol", type=_positive_float, default=DEFAULT_COEFF_TOL)
    sp.add_argument("--grid", type=_positive_int, default=None)

    sp = sub.add_parser("trace-coeffs", help="Fourier coefficients of Tr H^n(k)")
    common(sp)
    sp.add_argument("--n-max", type=_positive_int, default=None)

    sp = sub.add_parser("sweep", help="coupling-constant sweep of t*alpha")
    common(sp)
    sp.add_argument("--t-min", type=float, default=0.0)
    sp.add_argument("--t-max", type=float, default=1.0)
    sp.add_argument("--samples", type=_positive_int, default=DEFAULT_SAMPLES)
    sp.add_argument("--tol", type=_positive_float, default=DEFAULT_COEFF_TOL)

    sp = sub.add_parser("verify", help="FFT cross-check and Parseval residuals")
    common(sp)
    sp.add_argument("--n-max", type=_positive_int, default=None)
    sp.add_argument("--tol", type=_positive_float, default=DEFAULT_COEFF_TOL)
    sp.add_argument("--grid", type=_positive_int, default=None)
    return p


def _parseval_table(rows) -> str:
    buf = io.StringIO()
    buf.write("n,grid_mean_sq,coeff_sq_sum,zero_sq,residual,flat_identity\n")
    for r in rows:
        vals = [r.grid_mean_sq, r.coeff_sq_sum, r.zero_sq, r.residual]
        buf.write(",".join([str(r.n), *(format(v, ".17g") for v in vals), str(r.flat_identity).lower()]) + "\n")
    return buf.getvalue()


def cmd_bands(args):
    g = load_graph(args.graph)
    bs = compute_bands(g, KGrid(args.grid, g.dimension), flat_tol=args.flat_tol)
    scale = max(1.0, float(abs(bs.samples).max()))
    lines = []
    for j, ((lo, hi), flat) in enumerate(zip(bs.bands, bs.flat_flags), start=1):
        lines.append(f"band {j}: [{_g6(lo, scale)},{_g6(hi, scale)}]" + (" FLAT" if flat else ""))
    if bs.flat_eigenvalues:
        lines.append("flat eigenvalues: " + ", ".join(_g6(x, scale) for x in bs.flat_eigenvalues))
    lines.append("spectrum: " + " U ".join(f"[{_g6(a, scale)},{_g6(b, scale)}]" for a, b in bs.spectrum()))
    return 0, "\n".join(lines) + "\n", bands_csv(bs)


def cmd_flat_check(args):
    g = load_graph(args.graph)
    n_max = args.n_max or g.nu
    if n_max < g.nu:
        raise UsageError(f"--n-max must be at least nu={g.nu}")
    series = trace_fourier(g, n_max)
    v = flat_spectrum_verdict(series, g.nu, args.tol)
    rows = parseval_check(g, series, args.grid or required_resolution(series))
    lines = [v.label]
    if v.certificate:
        n, gamma, c = v.certificate
        lines.append(f"certificate: n={n} gamma={list(gamma)} h={_complex6(c)}")
    lines.append("n  grid_mean_sq  coeff_sq_sum  zero_sq  residual")
    for r in rows:
        lines.append(f"{r.n}  {r.grid_mean_sq:.6g}  {r.coeff_sq_sum:.6g}  {r.zero_sq:.6g}  {r.residual:.3g}")
    return 0, "\n".join(lines) + "\n", _parseval_table(rows)


def _complex6(c: complex) -> str:
    if abs(c.imag) <= 1e-12 * max(1.0, abs(c)):
        return _g6(c.real)
    return f"{_g6(c.real)}{c.imag:+.6g}j"


def cmd_trace_coeffs(args):
    g = load_graph(args.graph)
    series = trace_fourier(g, args.n_max or g.nu)
    lines = []
    for n in range(1, series.n_max + 1):
        items = [f"{list(gm)}: {_complex6(series.coefficients[n][gm])}" for gm in series.support(n)]
        lines.append(f"n={n}: " + ("; ".join(items) if items else "(none)"))
    return 0, "\n".join(lines) + "\n", coefficients_csv(series)


def cmd_sweep(args):
    if not args.t_max > args.t_min:
        raise UsageError("--t-max must exceed --t-min")
    if args.samples < 16:
        raise UsageError("--samples must be at least 16")
    g = load_graph(args.graph)
    report = sweep(g, args.t_min, args.t_max, args.samples, tol=args.tol)
    return 0, report.summary(), report.csv()


def cmd_verify(args):
    g = load_graph(args.graph)
    n_max = args.n_max or g.nu
    series = trace_fourier(g, n_max)
    grid = args.grid or required_resolution(series)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rows = parseval_check(g, series, grid)
    errs = fft_cross_check(g, series, grid)
    buf = io.StringIO()
    buf.write("n,fft_rel_err,parseval_rel_residual,ok\n")
    lines = [f"grid resolution {grid} (exact from {required_resolution(series)})"]
    all_ok = not caught
    for r, e in zip(rows, errs):
        rel = r.residual / max(1.0, r.coeff_sq_sum)
        ok = e <= args.tol and rel <= args.tol
        all_ok &= ok
        buf.write(f"{r.n},{e:.17g},{rel:.17g},{str(ok).lower()}\n")
        lines.append(f"n={r.n}: fft {e:.3g}, parseval {rel:.3g} {'ok' if ok else 'FAIL'}")
    for w in caught:
        lines.append(f"warning: {w.message}")
    lines.append("PASS" if all_ok else "FAIL")
    return (0 if all_ok else 2), "\n".join(lines) + "\n", buf.getvalue()


COMMANDS = {
    "bands": cmd_bands,
    "flat-check": cmd_flat_check,
    "trace-coeffs": cmd_trace_coeffs,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        code, summary, table = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (GraphError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except (NumericError, BudgetError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 2
    if args.out is None:
        sys.stdout.write(summary)
    elif args.out == "-":
        sys.stdout.write(table)
        sys.stderr.write(summary)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(table)
        sys.stdout.write(summary)
    return code


if __name__ == "__main__":
    sys.exit(main())
