"""``strictlab simulate|hysteresis|bounds|oracle --manifest <path> --out <dir>``.

Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 state-count cap.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from . import __version__, bounds, manifest, oracle
from .manifest import Experiment, ManifestError
from .observables import FIELDS
from .sampler import RunSpec, hysteresis_run, run_many

log = logging.getLogger("strictlab")

EXIT_OK, EXIT_INPUT, EXIT_IO, EXIT_CAP = 0, 1, 2, 3

SUMMARY_COLUMNS = [
    "beta", "f_lt", "f_lt_err", "f_mid", "f_mid_err", "f_gt", "f_gt_err", "m_abs", "m_abs_err",
    "f_stagger", "f_stagger_err", "energy_per_site", "tau_int_max", "phase",
    "spin_acceptance", "bond_acceptance",
]
SERIES_COLUMNS = ["beta", "sweep", *FIELDS]
BOUND_COLUMNS = list(bounds.BoundReport.__dataclass_fields__)
COMPARISON_COLUMNS = ["beta", "observable", "exact", "estimate", "std_error", "z", "flagged"]


class OutputError(OSError):
    pass


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) or hasattr(value, "dtype"):
        return f"{float(value):.17g}"
    return str(value)


def header(exp: Experiment, command: str) -> str:
    return (f"# strictlab {__version__} {command}\n"
            f"# manifest_sha256 = {exp.digest}\n# seed = {exp.seed}\n")


def write_text(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def write_csv(path, exp, command, columns, rows):
    buf = io.StringIO()
    buf.write(header(exp, command))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row[c]) for c in columns])
    write_text(path, buf.getvalue())


def _plot(exp, fn, *args, **kwargs):
    if not exp.plots:
        return
    try:
        fn(*args, **kwargs)
    except OSError as exc:
        raise OutputError(str(exc)) from exc


def _sampler_for(exp: Experiment, beta: float):
    cfg = exp.sampler
    if cfg.r_mode == "grid" and exp.grid_points is not None:
        cfg = replace(cfg, grid=oracle.default_grid(exp.params, beta, exp.grid_points))
    return cfg


def _oracle_grid(exp: Experiment, beta: float) -> tuple:
    if exp.grid_points is not None:
        return oracle.default_grid(exp.params, beta, exp.grid_points)
    if exp.sampler.grid:
        return tuple(exp.sampler.grid)
    return oracle.default_grid(exp.params, beta, 4)


def _require_betas(exp, key="betas"):
    if not exp.betas:
        raise ManifestError("at least one beta is required", key=key)


def cmd_simulate(exp: Experiment, out: str, threads: int) -> int:
    _require_betas(exp)
    specs = [RunSpec(b, exp.params, exp.lattice, _sampler_for(exp, b)) for b in exp.betas]
    results = run_many(specs, threads)
    series, summary = [], []
    stride = exp.sampler.measure_stride
    for res in results:
        for i, row in enumerate(res.records):
            rec = dict(zip(FIELDS, row))
            rec.update(beta=res.beta, sweep=(i + 1) * stride)
            series.append(rec)
        summary.append(res.summary())
    write_csv(os.path.join(out, "series.csv"), exp, "simulate", SERIES_COLUMNS, series)
    write_csv(os.path.join(out, "summary.csv"), exp, "simulate", SUMMARY_COLUMNS, summary)
    from .plotting import plot_summary
    _plot(exp, plot_summary, summary, os.path.join(out, "summary.png"))
    return EXIT_OK


def cmd_hysteresis(exp: Experiment, out: str, threads: int) -> int:
    schedule = exp.schedule or exp.betas
    if not schedule:
        raise ManifestError("a 'schedule' (or 'betas') list is required", key="schedule")
    spec = RunSpec(schedule[0], exp.params, exp.lattice, _sampler_for(exp, schedule[0]))
    points = hysteresis_run(spec, schedule)
    series = []
    for step, pt in enumerate(points):
        for i, row in enumerate(pt.records):
            rec = dict(zip(FIELDS, row))
            rec.update(step=step, beta=pt.beta, direction=pt.direction,
                       sweep=(i + 1) * exp.sampler.measure_stride)
            series.append(rec)
    summary = [pt.stats for pt in points]
    write_csv(os.path.join(out, "series.csv"), exp, "hysteresis",
              ["step", "direction", *SERIES_COLUMNS], series)
    write_csv(os.path.join(out, "summary.csv"), exp, "hysteresis",
              ["beta", "direction", *SUMMARY_COLUMNS[1:]], summary)
    from .plotting import plot_hysteresis
    _plot(exp, plot_hysteresis, summary, os.path.join(out, "hysteresis.png"))
    return EXIT_OK


def cmd_bounds(exp: Experiment, out: str, threads: int) -> int:
    _require_betas(exp)
    reports = [bounds.evaluate(exp.params, b).as_dict() for b in exp.betas]
    write_csv(os.path.join(out, "bounds.csv"), exp, "bounds", BOUND_COLUMNS, reports)
    crossover = None
    try:
        crossover = bounds.solve_crossover(exp.params)
    except bounds.NoCrossover:
        pass
    text = header(exp, "bounds")
    text += f"crossover_beta = {fmt(crossover) if crossover is not None else 'none in range'}\n"
    bstar = None
    if exp.preset is not None and exp.preset[0] > 1:
        R, delta = exp.preset
        report = bounds.verify_regime(R, delta, exp.betas)
        bstar = report.beta_star
        text += report.to_text()
    else:
        text += "verdict: not applicable (regime checks need the (R, delta) preset with R > 1)\n"
    write_text(os.path.join(out, "regime.txt"), text)
    from .plotting import plot_bounds
    _plot(exp, plot_bounds, reports, os.path.join(out, "bounds.png"), beta_star=bstar, crossover=crossover)
    return EXIT_OK


def cmd_oracle(exp: Experiment, out: str, threads: int) -> int:
    _require_betas(exp)
    if exp.lattice.L != 2:
        raise ManifestError("the oracle runs on the 2 x 2 torus; set L = 2", key="L")
    models = [oracle.GridModel(exp.lattice, _oracle_grid(exp, b), exp.params, b) for b in exp.betas]
    for m in models:
        m.check_cap()

    def one(m):
        return oracle.exact_expectations(m), oracle.chessboard_check(m), oracle.sampler_vs_oracle(m, exp.sampler)

    if threads > 1 and len(models) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, models))
    else:
        results = [one(m) for m in models]

    record = header(exp, "oracle")
    comparison, chess = [], []
    for m, (exact, cb, rows) in zip(models, results):
        record += f"\n[beta = {fmt(m.beta)}]\n"
        record += f"grid = {', '.join(fmt(g) for g in m.grid)}\n"
        record += f"state_count = {m.state_count}\n"
        for k, v in exact.items():
            record += f"{k} = {fmt(v)}\n"
        record += f"discrepancies = {sum(r['flagged'] for r in rows)}\n"
        comparison.extend(rows)
        chess.append(cb)
    write_text(os.path.join(out, "oracle.txt"), record)
    write_csv(os.path.join(out, "comparison.csv"), exp, "oracle", COMPARISON_COLUMNS, comparison)
    write_csv(os.path.join(out, "chessboard.csv"), exp, "oracle", list(chess[0]), chess)
    from .plotting import plot_oracle
    _plot(exp, plot_oracle, comparison, os.path.join(out, "oracle.png"))
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "hysteresis": cmd_hysteresis,
    "bounds": cmd_bounds,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="strictlab", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--manifest", required=True, help="key = value experiment file")
    parser.add_argument("--out", help="output directory (default: manifest 'out' key)")
    parser.add_argument("--seed", type=int, help="override the manifest seed")
    parser.add_argument("--threads", type=int, help="concurrent replicas (env STRICTLAB_THREADS)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _threads(arg) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("STRICTLAB_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ManifestError(f"STRICTLAB_THREADS must be an integer, got {env!r}") from None
    return 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        exp = manifest.load(args.manifest, seed=args.seed)
        threads = _threads(args.threads)
        if threads < 1:
            raise ManifestError("thread count must be >= 1")
    except OSError as exc:
        log.error("cannot read manifest: %s", exc)
        return EXIT_IO
    except ManifestError as exc:
        log.error("invalid manifest %s: %s", args.manifest, exc)
        return EXIT_INPUT

    out = args.out or exp.out
    if not out:
        log.error("no output directory: pass --out or set 'out' in the manifest")
        return EXIT_INPUT
    try:
        os.makedirs(out, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise OutputError(f"{out} is not writable")
    except OSError as exc:
        log.error("output directory: %s", exc)
        return EXIT_IO

    try:
        return COMMANDS[args.command](exp, out, threads)
    except ManifestError as exc:
        log.error("invalid manifest %s: %s", args.manifest, exc)
        return EXIT_INPUT
    except oracle.StateCapExceeded as exc:
        log.error("%s", exc)
        print(f"state_count = {exc.count}", file=sys.stderr)
        return EXIT_CAP
    except OutputError as exc:
        log.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
