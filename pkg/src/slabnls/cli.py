"""Command line front end: ``slab run|sweep|tables``.

Outputs are plain CSV with 17 significant digits so that reruns can be
compared byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import (FIELDS, RunConfig, apply_overrides, dump_config, parse_value, preset,
                     read_config_text)
from .experiment import Trajectory, simulate
from .grid import ConfigurationError

logger = logging.getLogger("slabnls")

MAX_SWEEP_RUNS = 100
NUM = "%.17g"


def fmt(value):
    if value is None:
        return ""
    if isinstance(value, (complex, np.complexfloating)):
        raise TypeError("complex values are written as separate re/im columns")
    return NUM % float(value)


# -- outputs ---------------------------------------------------------------------

def write_metrics(path, traj: Trajectory):
    m = traj.metrics
    sides = list(m.k0_by_side)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "r", "E1"] + [f"k0_{s}" for s in sides] + ["solver_iters"])
        for n, t in enumerate(m.times):
            w.writerow([fmt(t), fmt(m.r[n]), fmt(m.E1[n])]
                       + [fmt(m.k0_by_side[s][n]) for s in sides] + [m.iterations[n]])


def write_field(path, traj: Trajectory, values):
    grid = traj.grid
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if grid.dim == 1:
            w.writerow(["x", "re", "im", "abs"])
            for x, v in zip(grid.x, values):
                w.writerow([fmt(x), fmt(v.real), fmt(v.imag), fmt(abs(v))])
        else:
            w.writerow(["x", "y", "re", "im", "abs"])
            X, Y = grid.mesh()
            for x, y, v in zip(X.ravel(), Y.ravel(), values.ravel()):
                w.writerow([fmt(x), fmt(y), fmt(v.real), fmt(v.imag), fmt(abs(v))])


def write_probes(path, traj: Trajectory):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["probe", "t", "abs", "ref_abs", "error"])
        for label, series in traj.probes.items():
            for t, v in series:
                ref = traj.reference.probe(label, t) if traj.reference is not None else None
                w.writerow([label, fmt(t), fmt(abs(v)),
                            fmt(abs(ref)) if ref is not None else "",
                            fmt(abs(v - ref)) if ref is not None else ""])


def snapshot_name(t):
    return f"field_{t:.6f}.csv"


def run_to_dir(cfg: RunConfig, out_dir) -> Trajectory:
    """Simulate ``cfg`` and write every output file into ``out_dir``."""
    cfg = cfg.resolve().validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "run_manifest").write_text(dump_config(cfg.replace(output_dir=str(out))))
    failed_marker = out / "FAILED"
    if failed_marker.exists():
        failed_marker.unlink()
    traj = simulate(cfg)
    write_metrics(out / "metrics.csv", traj)
    for t, values in sorted(traj.snapshots.items()):
        write_field(out / snapshot_name(t), traj, values)
    if traj.probes:
        write_probes(out / "probes.csv", traj)
    if traj.failed:
        failed_marker.touch()
    m = traj.metrics
    logger.info("t=%.6g r=%.6g E1=%.6g %s (%.1f s)", m.times[-1], m.r[-1], m.E1[-1],
                " ".join(f"k0_{s}={v[-1]:.4g}" for s, v in m.k0_by_side.items()),
                traj.elapsed)
    return traj


# -- sweeps ----------------------------------------------------------------------

def parse_axis(text):
    """``key=v1,v2,...`` to ``(key, [typed values])``; an empty list is allowed."""
    if "=" not in text:
        raise ConfigurationError(f"sweep axis must look like key=v1,v2 (got {text!r})")
    key, values = text.split("=", 1)
    key = key.strip().replace("-", "_")
    if key not in FIELDS:
        raise ConfigurationError(f"unknown configuration key: {key}")
    items = [v.strip() for v in values.split(",") if v.strip()]
    return key, [parse_value(FIELDS[key], v) for v in items]


def _cell_dir(root, assignment):
    name = "_".join(f"{k}-{v}" for k, v in assignment)
    return Path(root) / "runs" / name


def _sweep_worker(args):
    cfg, out_dir = args
    logging.getLogger().setLevel(logging.WARNING)
    try:
        traj = run_to_dir(cfg, out_dir)
    except Exception as exc:   # any failure becomes a FAILED cell
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "FAILED").touch()
        return None, f"{type(exc).__name__}: {exc}"
    if traj.failed:
        return None, traj.failed
    return (traj.metrics.E1[-1], traj.metrics.r[-1]), None


def worker_count(n_jobs):
    cap = os.environ.get("SLAB_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise ConfigurationError(f"SLAB_THREADS must be an integer (got {cap!r})") from None
    return max(1, min(limit, n_jobs))


def sweep(base: RunConfig, axes, out_dir, allow_large=False, table_name="table"):
    """Run the cross product of ``axes`` and write ``<table_name>.csv``.

    The first axis gives the table rows; the remaining axes form the
    columns, once for E1 and once for r. Returns the table as a list of rows.
    """
    sizes = [len(v) for _, v in axes]
    n_runs = int(np.prod(sizes)) if axes else 0
    if n_runs > MAX_SWEEP_RUNS and not allow_large:
        raise ConfigurationError(
            f"sweep has {n_runs} runs (limit {MAX_SWEEP_RUNS}); pass --allow-large to proceed")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = []
    if n_runs:
        for combo in itertools.product(*[v for _, v in axes]):
            assignment = tuple(zip([k for k, _ in axes], combo))
            cfg = apply_overrides(base, dict(assignment))
            jobs.append((assignment, cfg.resolve().validate(), _cell_dir(out, assignment)))
    results = {}
    if jobs:
        n_workers = worker_count(len(jobs))
        payload = [(cfg, d) for _, cfg, d in jobs]
        if n_workers == 1:
            outcomes = [_sweep_worker(p) for p in payload]
        else:
            with ProcessPoolExecutor(max_workers=n_workers) as pool:
                outcomes = list(pool.map(_sweep_worker, payload))
        for (assignment, _, _), (value, error) in zip(jobs, outcomes):
            results[assignment] = value
            if error:
                logger.warning("run %s failed: %s", dict(assignment), error)

    table = _layout(axes, results)
    with open(out / f"{table_name}.csv", "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(table)
    return table


def _layout(axes, results):
    if not axes:
        return [[]]
    row_key, row_values = axes[0]
    col_axes = axes[1:]
    col_combos = list(itertools.product(*[v for _, v in col_axes]))
    header = [row_key]
    for metric in ("E1", "r"):
        for combo in col_combos:
            tag = ",".join(f"{k}={v}" for (k, _), v in zip(col_axes, combo))
            header.append(f"{metric}[{tag}]" if tag else metric)
    rows = [header]
    for rv in row_values:
        row = [str(rv)]
        for idx in (0, 1):
            for combo in col_combos:
                key = ((row_key, rv),) + tuple(zip([k for k, _ in col_axes], combo))
                value = results.get(key)
                row.append("FAILED" if value is None else fmt(value[idx]))
        rows.append(row)
    return rows


TABLES = {
    "1": ("table1", {}, [("p", [1.0, 2.0, 3.0, 4.0, 5.0]), ("dx", [0.1, 0.05]),
                         ("transform", ["fourier", "gabor"])]),
    "2": ("table2", {"fixed": True}, [("k0", [2.0, 3.5, 5.0]), ("dx", [0.1, 0.05])]),
    "3": ("table3", {"p": 4.0}, [("window_beta", [0.5, 1.0, 2.0, 3.0, 4.0]),
                                 ("dx", [0.1, 0.05])]),
}


def tables(which, out_dir, base=None):
    base = preset("example1") if base is None else base
    made = {}
    for key in which:
        name, fixed, axes = TABLES[key]
        cfg = apply_overrides(base, fixed) if fixed else base
        made[name] = sweep(cfg, axes, Path(out_dir) / name, table_name=name)
    return made


# -- argument parsing ------------------------------------------------------------

FLAG_KEYS = {
    "dx": "dx", "dt": "dt", "p": "p", "transform": "transform",
    "window_beta": "window_beta", "window_fixed": "window_b", "abc": "abc",
    "k0": "k0", "t_final": "t_final", "out": "output_dir",
}


def _add_run_flags(ap):
    ap.add_argument("--preset", choices=["example1", "example2", "example3", "custom"])
    ap.add_argument("--config", help="key=value configuration file")
    ap.add_argument("--dx", type=float)
    ap.add_argument("--dt", type=float)
    ap.add_argument("--p", type=float)
    ap.add_argument("--transform", choices=["fourier", "gabor"])
    win = ap.add_mutually_exclusive_group()
    win.add_argument("--window-beta", type=float, help="window b = beta * k0")
    win.add_argument("--window-fixed", type=float, help="fixed window length b")
    ap.add_argument("--abc", choices=["abc10", "abc11", "fj", "dirichlet"])
    ap.add_argument("--k0", type=float)
    ap.add_argument("--fixed", action="store_true", help="disable adaptive k0 selection")
    ap.add_argument("--t-final", type=float)
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override any configuration key")
    ap.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    ap = argparse.ArgumentParser(prog="slab", description=(
        "NLS on truncated domains with split local absorbing boundaries."))
    sub = ap.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="single simulation")
    _add_run_flags(run_p)
    sw = sub.add_parser("sweep", help="cross product of parameter values")
    _add_run_flags(sw)
    sw.add_argument("--axis", action="append", default=[], metavar="KEY=V1,V2",
                    help="swept key; the first axis gives the table rows")
    sw.add_argument("--allow-large", action="store_true",
                    help=f"permit more than {MAX_SWEEP_RUNS} runs")
    tb = sub.add_parser("tables", help="regenerate the soliton tables")
    tb.add_argument("which", nargs="*", default=["1", "2", "3"], choices=["1", "2", "3"])
    tb.add_argument("--out", default="slab_tables")
    tb.add_argument("-v", "--verbose", action="store_true")
    return ap


def config_from_args(args) -> RunConfig:
    overrides = {}
    for flag, key in FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "fixed", False):
        overrides["fixed"] = True
    for item in args.set:
        if "=" not in item:
            raise ConfigurationError(f"--set expects KEY=VALUE (got {item!r})")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v
    if args.config:
        values = read_config_text(Path(args.config).read_text())
        if args.preset:
            values["preset"] = args.preset
        cfg = apply_overrides(preset(values.get("preset", "custom")), values)
    else:
        cfg = preset(args.preset or "custom")
    # flags win over the file
    return apply_overrides(cfg, overrides).validate()


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logger.setLevel(logging.INFO)
    try:
        if args.command == "tables":
            tables(args.which, args.out)
            return 0
        cfg = config_from_args(args)
        if args.command == "run":
            traj = run_to_dir(cfg, cfg.output_dir)
            return 1 if traj.failed else 0
        axes = [parse_axis(a) for a in args.axis]
        sweep(cfg, axes, cfg.output_dir, allow_large=args.allow_large)
        return 0
    except ConfigurationError as exc:
        print(f"slab: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
