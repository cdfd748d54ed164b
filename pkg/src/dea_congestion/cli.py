"""Command-line front end: dataset files, direction grids and report tables.

Dataset files are CSV with a label column followed by ``in:``/``out:``
prefixed columns::

    dmu,in:Staff,in:Budget,out:Papers
    A,10,3.5,12

Exit status is 0 on success, 1 for bad input, 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .classic import bcc_output, classify_congestion, wyts_pte
from .config import DEFAULT_TOLERANCES, StepConfig, Tolerances
from .dataset import Dataset, DatasetError
from .directional import (BOTH, FDM, METHODS, ULBM, Direction, DirectionalResult,
                          DirectionError, sweep)
from .lp import SolverError

log = logging.getLogger("dea_congestion")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2
FORMATS = ("csv", "tsv", "md")

# the nine input directions of the published CAS sweep, diagonal outputs
TABLE3_OMEGAS = ((0.3, 1.7), (0.5, 1.5), (0.7, 1.3), (0.9, 1.1), (1.0, 1.0),
                 (1.1, 0.9), (1.3, 0.7), (1.5, 0.5), (1.7, 0.3))


class DatasetFileError(DatasetError):
    pass


class GridSpecError(ValueError):
    pass


def bundled_cas_path() -> Path:
    return Path(str(resources.files("dea_congestion") / "data" / "cas2010.csv"))


# --------------------------------------------------------------------------
# input


def load_dataset(path) -> Dataset:
    """Read a ``DatasetFile``; every rejection names what was wrong and where."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetFileError(f"{path}: cannot read ({exc.strerror})") from None
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if not rows:
        raise DatasetFileError(f"{path}: file is empty")
    header = [h.strip() for h in rows[0]]
    cols = header[1:]
    in_idx = [i + 1 for i, h in enumerate(cols) if h.startswith("in:")]
    out_idx = [i + 1 for i, h in enumerate(cols) if h.startswith("out:")]
    bad = [h for h in cols if not (h.startswith("in:") or h.startswith("out:"))]
    if bad:
        raise DatasetFileError(f"{path}: column(s) {', '.join(map(repr, bad))} lack an 'in:' or 'out:' prefix")
    if not in_idx:
        raise DatasetFileError(f"{path}: no inputs (no 'in:' columns)")
    if not out_idx:
        raise DatasetFileError(f"{path}: no outputs (no 'out:' columns)")
    if len(rows) < 2:
        raise DatasetFileError(f"{path}: no DMU rows")

    labels, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DatasetFileError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        label = row[0].strip()
        if label in labels:
            raise DatasetFileError(f"{path}:{lineno}: duplicate DMU label {label!r}")
        labels.append(label)
        vals = []
        for i in range(1, len(header)):
            cell = row[i].strip()
            try:
                v = float(cell)
            except ValueError:
                raise DatasetFileError(
                    f"{path}:{lineno}: non-numeric value {cell!r} in column {header[i]!r}") from None
            if not math.isfinite(v):
                raise DatasetFileError(f"{path}:{lineno}: non-finite value in column {header[i]!r}")
            if v < 0:
                raise DatasetFileError(
                    f"{path}:{lineno}: negative value {cell} at DMU {label!r}, column {header[i]!r}")
            vals.append(v)
        values.append(vals)

    arr = np.array(values)
    X = arr[:, [i - 1 for i in in_idx]].T
    Y = arr[:, [i - 1 for i in out_idx]].T
    try:
        return Dataset(X, Y, tuple(labels),
                       tuple(header[i][3:] for i in in_idx), tuple(header[i][4:] for i in out_idx))
    except DatasetError as exc:
        raise DatasetFileError(f"{path}: {exc}") from None


def _parse_vector(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise GridSpecError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def parse_direction_grid(spec: str, m: int, s: int) -> list[Direction]:
    """Parse ``"diag; omega=1.7,0.3|delta=1,1,1,1; ..."`` into directions.

    A leading ``@`` reads the grid from a file, where newlines also separate
    entries. An omitted ``delta`` (or ``omega``) part means all ones.
    """
    spec = spec.strip()
    if spec.startswith("@"):
        try:
            spec = Path(spec[1:]).read_text(encoding="utf-8")
        except OSError as exc:
            raise GridSpecError(f"cannot read grid file {spec[1:]!r}: {exc.strerror}") from None
    entries = [e.strip() for e in spec.replace("\n", ";").split(";")]
    entries = [e for e in entries if e and not e.startswith("#")]
    if not entries:
        raise GridSpecError("direction grid is empty")
    grid = []
    for entry in entries:
        if entry.lower() == "diag":
            grid.append(Direction.diagonal(m, s))
            continue
        parts = {}
        for part in entry.split("|"):
            key, sep, val = part.partition("=")
            key = key.strip().lower()
            if not sep or key not in ("omega", "delta"):
                raise GridSpecError(f"bad grid entry {entry!r}: expected 'omega=...|delta=...' or 'diag'")
            if key in parts:
                raise GridSpecError(f"bad grid entry {entry!r}: {key} given twice")
            parts[key] = _parse_vector(val, key)
        omega = parts.get("omega", [1.0] * m)
        delta = parts.get("delta", [1.0] * s)
        if len(omega) != m:
            raise GridSpecError(f"omega has {len(omega)} components but the dataset has {m} inputs")
        if len(delta) != s:
            raise GridSpecError(f"delta has {len(delta)} components but the dataset has {s} outputs")
        try:
            grid.append(Direction(omega, delta))
        except DirectionError as exc:
            raise GridSpecError(f"bad grid entry {entry!r}: {exc}") from None
    return grid


def table3_grid(s: int) -> list[Direction]:
    return [Direction(w, np.ones(s)) for w in TABLE3_OMEGAS]


def select_dmus(d: Dataset, selector: str) -> list[int]:
    """``all``, a label, a 1-based position, or a comma list of those."""
    if selector.strip().lower() == "all":
        return list(range(d.n))
    out = []
    for item in selector.split(","):
        item = item.strip()
        if item in d.labels:
            out.append(d.labels.index(item))
        elif item.isdigit() and 1 <= int(item) <= d.n:
            out.append(int(item) - 1)
        else:
            raise GridSpecError(f"no DMU {item!r} (use a label, 1..{d.n}, or 'all')")
    return out


# --------------------------------------------------------------------------
# tables


@dataclass
class RunConfig:
    tol: Tolerances = DEFAULT_TOLERANCES
    steps: StepConfig = field(default_factory=StepConfig)
    fmt: str = "csv"
    method: str = BOTH
    full_precision: bool = False
    with_fgl: bool = False
    with_ctt: bool = False


@dataclass
class Table:
    headers: list[str]
    rows: list[list[str]]
    failed: bool = False


def _num(v: float, places: int, full: bool) -> str:
    if v == math.inf:
        return "+inf"
    if v == -math.inf:
        return "-inf"
    if full:
        return repr(float(v))
    out = f"{v:.{places}f}"
    # avoid "-0.00"
    return out[1:] if out.startswith("-") and float(out) == 0 else out


def cmd_efficiency(d: Dataset, cfg: RunConfig) -> Table:
    rows = []
    for k in range(d.n):
        theta = bcc_output(d, k, cfg.tol).theta
        pi = wyts_pte(d, k, cfg.tol)
        rows.append([d.labels[k]] + [_num(v, 4, cfg.full_precision) for v in (theta, pi, pi / theta)])
    return Table(["dmu", "theta", "pi", "phi"], rows)


def cmd_congestion(d: Dataset, cfg: RunConfig) -> Table:
    f = lambda v: _num(v, 4, cfg.full_precision)
    headers = ["dmu", "theta", "pi", "phi", "congestion", "rho_bar"]
    if cfg.with_fgl:
        headers += ["fgl_beta", "fgl_ratio"]
    if cfg.with_ctt:
        headers += [f"ctt:{name}" for name in d.input_names]
    rows = []
    for k in range(d.n):
        r = classify_congestion(d, k, with_fgl=cfg.with_fgl, with_ctt=cfg.with_ctt, tol=cfg.tol)
        row = [d.labels[k], f(r.theta), f(r.pi), f(r.phi), r.classification,
               "-" if r.rho_bar is None else f(r.rho_bar)]
        if cfg.with_fgl:
            row += [f(r.fgl[0]), f(r.fgl[1])]
        if cfg.with_ctt:
            row += [f(v) for v in r.ctt]
        rows.append(row)
    return Table(headers, rows)


def _directional_row(d: Dataset, r: DirectionalResult, method: str, full: bool) -> list[str]:
    f = lambda v: _num(v, 2, full)
    omega = [_num(w, 2, full) for w in r.direction.omega]
    if r.error is not None:
        return [d.labels[r.dmu]] + omega + ["-"] * 6 + [f"error: {r.error}"]
    if method == ULBM:
        xi = psi = "-"
    else:
        xi = "n/a (DLSS)" if r.dlss else f(r.right)
        psi = "n/a (DSSS)" if r.dsss else f(r.left)
    if method == FDM:
        lo = hi = "-"
    else:
        lo, hi = f(r.rho_lower), f(r.rho_upper)
    right = "n/a (DLSS)" if r.dlss else ("Yes" if r.right_congested else "No")
    left = "n/a (DSSS)" if r.dsss else ("Yes" if r.left_congested else "No")
    note = "projected" if r.projected else ""
    return [d.labels[r.dmu]] + omega + [xi, psi, lo, hi, right, left, note]


def cmd_directional(d: Dataset, dmus: Sequence[int], grid: Sequence[Direction], cfg: RunConfig) -> Table:
    headers = (["dmu"] + [f"omega:{name}" for name in d.input_names]
               + ["xi", "psi", "rho_lower", "rho_upper", "right", "left", "note"])
    rows, failed = [], False
    for k in dmus:
        for r in sweep(d, k, grid, cfg.method, cfg.steps, cfg.tol):
            failed |= r.error is not None
            rows.append(_directional_row(d, r, cfg.method, cfg.full_precision))
    return Table(headers, rows, failed)


def render(table: Table, fmt: str) -> str:
    if fmt == "md":
        lines = ["| " + " | ".join(table.headers) + " |",
                 "|" + "|".join("---" for _ in table.headers) + "|"]
        lines += ["| " + " | ".join(row) + " |" for row in table.rows]
        return "\n".join(lines) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter="\t" if fmt == "tsv" else ",", lineterminator="\n")
    writer.writerow(table.headers)
    writer.writerows(table.rows)
    return buf.getvalue()


# --------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", default=None,
                        help="dataset CSV (default: the bundled CAS 2010 data)")
    common.add_argument("--format", choices=FORMATS, default="csv")
    common.add_argument("--tol", type=float, default=None,
                        help="classification tolerance (default 1e-6)")
    common.add_argument("--full-precision", action="store_true")

    p = _Parser(prog="dea-congestion", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    sub.add_parser("efficiency", parents=[common], help="BCC and PTE scores with the congestion degree")
    cong = sub.add_parser("congestion", parents=[common], help="strong/weak congestion per DMU")
    cong.add_argument("--with-fgl", action="store_true")
    cong.add_argument("--with-ctt", action="store_true")
    for verb, dmu_default, grid_default, help_ in (
            ("directional", None, "diag", "right/left directional congestion"),
            ("sweep", "all", None, "directional analysis over the nine-direction input grid")):
        sp = sub.add_parser(verb, parents=[common], help=help_)
        sp.add_argument("--dmu", required=dmu_default is None, default=dmu_default,
                        help="label, 1-based index, comma list, or 'all'")
        sp.add_argument("--grid", default=grid_default,
                        help="'diag' or 'omega=a,b|delta=c,d' entries separated by ';', or @file")
        sp.add_argument("--method", choices=METHODS, default=BOTH)
        sp.add_argument("--t0", type=float, default=None, help="initial finite-difference step")
    return p


def _config(args) -> RunConfig:
    tol = DEFAULT_TOLERANCES if args.tol is None else Tolerances(classify=args.tol)
    steps = StepConfig() if getattr(args, "t0", None) is None else StepConfig(t_initial=args.t0)
    return RunConfig(tol=tol, steps=steps, fmt=args.format,
                     method=getattr(args, "method", BOTH), full_precision=args.full_precision,
                     with_fgl=getattr(args, "with_fgl", False), with_ctt=getattr(args, "with_ctt", False))


def _setup_logging():
    level = os.environ.get("DEA_LOG", "").strip().upper()
    if not level:
        return
    if level.isdigit():
        level = int(level)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        d = load_dataset(args.data or bundled_cas_path())
        if args.verb == "efficiency":
            table = cmd_efficiency(d, cfg)
        elif args.verb == "congestion":
            table = cmd_congestion(d, cfg)
        else:
            dmus = select_dmus(d, args.dmu)
            grid = table3_grid(d.s) if args.grid is None else parse_direction_grid(args.grid, d.m, d.s)
            table = cmd_directional(d, dmus, grid, cfg)
    except (DatasetError, GridSpecError, DirectionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    sys.stdout.write(render(table, cfg.fmt))
    return EXIT_NUMERIC if table.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
