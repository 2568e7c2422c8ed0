"""Batch command-line interface.

Exit codes: 0 on success, 2 on usage errors (bad flags or parameter
values), 1 on computation errors and malformed input files. Output files
are written only after the computation has finished, via a temporary file
in the target directory.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__, frontier, source, states, tomography
from .measures import MeasureError, correlation_report

REPORT_COLUMNS = ("S", "D_left", "D_right", "D_sym", "I_c", "A")
X_COLUMNS = ("rho11", "rho22", "rho33", "rho44", "rho14", "rho23")


class UsageError(Exception):
    pass


class ComputationError(Exception):
    pass


# --- formatting ------------------------------------------------------------

def fmt(x: float) -> str:
    """12 significant digits, independent of locale."""
    return "%.12g" % (x + 0.0)  # maps -0.0 to 0.0


def _round12(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(fmt(x)) if math.isfinite(x) else None
    if isinstance(obj, dict):
        return {str(k): _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round12(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps12(obj) -> str:
    return json.dumps(_round12(obj), indent=2) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# --- output handling -------------------------------------------------------

def check_writable(path: str | None) -> None:
    if path is None:
        return
    target = os.path.abspath(path)
    parent = os.path.dirname(target)
    if os.path.isdir(target):
        raise UsageError(f"--out {path} is a directory")
    if not os.path.isdir(parent):
        raise UsageError(f"--out {path}: directory {parent} does not exist")
    if os.path.exists(target) and not os.access(target, os.W_OK):
        raise UsageError(f"--out {path} is not writable")
    if not os.access(parent, os.W_OK):
        raise UsageError(f"--out {path}: directory {parent} is not writable")


def emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".qcorr-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _out_format(args) -> str:
    if getattr(args, "format", None):
        return args.format
    if args.out and args.out.lower().endswith(".csv"):
        return "csv"
    return "json"


def resolve_jobs(jobs: int | None) -> int:
    if jobs is None:
        raw = os.environ.get("QCORR_JOBS", "1")
        try:
            jobs = int(raw)
        except ValueError:
            raise UsageError(f"QCORR_JOBS={raw!r} is not an integer") from None
    if jobs < 1:
        raise UsageError(f"jobs must be >= 1, got {jobs}")
    return jobs


def read_state(path: str) -> np.ndarray:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ComputationError(f"cannot read state file {path}: {exc.strerror}") from None
    try:
        return states.state_from_json(text)
    except states.StateError as exc:
        raise ComputationError(f"malformed state file {path}: {exc}") from None


# --- argument helpers ------------------------------------------------------

def _family_params(family: str, args) -> dict[str, float]:
    names = frontier.FAMILIES[family][1]
    params = {}
    for n in names:
        v = getattr(args, n, None)
        if v is None:
            raise UsageError(f"family {family} needs --{n}")
        params[n] = v
    for other in ("eps", "p", "a", "r", "q"):
        if other not in names and getattr(args, other, None) is not None:
            raise UsageError(f"family {family} does not take --{other}")
    return params


def parse_axis(spec: str) -> tuple[str, list[float]]:
    """``name=start:stop:count`` (inclusive linspace) or ``name=v1,v2,...``."""
    name, sep, values = spec.partition("=")
    if not sep or not name:
        raise UsageError(f"grid axis {spec!r} must look like name=start:stop:count or name=v1,v2")
    try:
        if ":" in values:
            start, stop, count = values.split(":")
            count = int(count)
            if count < 1:
                raise ValueError
            pts = np.linspace(float(start), float(stop), count).tolist()
        else:
            pts = [float(v) for v in values.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse grid axis {spec!r}") from None
    if not all(math.isfinite(v) for v in pts):
        raise UsageError(f"grid axis {spec!r} has non-finite values")
    return name, pts


def family_grid(family: str, axes: list[str]) -> list[dict[str, float]]:
    names = frontier.FAMILIES[family][1]
    parsed = dict(parse_axis(a) for a in axes)
    if set(parsed) != set(names):
        raise UsageError(f"family {family} needs one --grid axis for each of {names}, got {sorted(parsed)}")
    grid = [dict(zip(names, combo)) for combo in itertools.product(*(parsed[n] for n in names))]
    for point in grid:
        try:
            frontier.family_state(family, point)
        except frontier.FrontierError as exc:
            raise UsageError(f"grid point {point}: {exc}") from None
    return grid


def _sigmas(args) -> dict[str, float]:
    out = {}
    for item in args.sigma or []:
        name, sep, value = item.partition("=")
        try:
            out[name] = float(value)
        except ValueError:
            raise UsageError(f"--sigma {item!r} must look like name=value") from None
        if not sep:
            raise UsageError(f"--sigma {item!r} must look like name=value")
    return out


# --- record -> rows --------------------------------------------------------

def sweep_rows(records) -> tuple[list[str], list[list]]:
    names = list(records[0].params) if records else []
    header = ["family", *names, *REPORT_COLUMNS]
    rows = []
    for rec in records:
        rep = rec.report
        rows.append([rec.family, *(float(rec.params[n]) for n in names),
                     *(float(getattr(rep, c)) for c in REPORT_COLUMNS)])
    return header, rows


def _envelope_records(bins):
    out = []
    for b in bins:
        rep = correlation_report(states.xstate(b.params)) if b.present else None
        out.append((b, rep))
    return out


def envelope_rows(pairs) -> tuple[list[str], list[list]]:
    header = ["family", "bin", "S_lo", "S_hi", *X_COLUMNS, *REPORT_COLUMNS, "source", "monotone_fill"]
    rows = []
    for b, rep in pairs:
        row = ["xstate", b.index, float(b.lo), float(b.hi)]
        if rep is None:
            row += [""] * (len(X_COLUMNS) + len(REPORT_COLUMNS)) + ["", ""]
        else:
            row += [float(getattr(b.params, c)) for c in X_COLUMNS]
            row += [float(getattr(rep, c)) for c in REPORT_COLUMNS]
            row += [b.source, int(b.monotone_fill)]
        rows.append(row)
    return header, rows


def envelope_dicts(pairs) -> list[dict]:
    out = []
    for b, rep in pairs:
        d = {"bin": b.index, "S_lo": b.lo, "S_hi": b.hi, "S_target": b.target, "present": b.present}
        if rep is not None:
            d.update({"params": {c: getattr(b.params, c) for c in X_COLUMNS},
                      "report": rep.to_dict(), "source": b.source, "monotone_fill": b.monotone_fill})
        out.append(d)
    return out


def amid_rows(bins) -> tuple[list[str], list[list]]:
    header = ["bin", "D_lo", "D_hi", "min_A", "max_A", "lower_points", "upper_points",
              "argmax_eps", "argmax_p"]
    rows = []
    for b in bins:
        rows.append([b.index, float(b.lo), float(b.hi),
                     float(b.min_A) if b.lower_points else "", float(b.max_A) if b.upper_points else "",
                     b.lower_points, b.upper_points,
                     float(b.argmax["eps"]) if b.argmax else "", float(b.argmax["p"]) if b.argmax else ""])
    return header, rows


def _table_output(args, header, rows, objects) -> str:
    if _out_format(args) == "csv":
        return _csv_text(header, rows)
    return dumps12(objects)


# --- subcommands -----------------------------------------------------------
# Each command validates its flags (raising UsageError), then returns a
# zero-argument callable doing the expensive work and returning the text.

def cmd_measure(args):
    rho = read_state(args.state)
    return lambda: dumps12(correlation_report(rho).to_dict())


def cmd_family(args):
    params = _family_params(args.name, args)
    try:
        rho = frontier.family_state(args.name, params)
    except frontier.FrontierError as exc:
        raise UsageError(str(exc)) from None
    return lambda: states.state_to_json(rho) + "\n"


def cmd_sweep(args):
    jobs = resolve_jobs(args.jobs)
    if args.plane == "family":
        if not args.family:
            raise UsageError("--plane family needs --family")
        grid = family_grid(args.family, args.grid or [])

        def run():
            records = frontier.sweep_family(args.family, grid, jobs)
            header, rows = sweep_rows(records)
            return _table_output(args, header, rows, [r.to_dict() for r in records])
        return run
    if args.family or args.grid:
        raise UsageError("--family/--grid apply only to --plane family")
    try:
        axis = "entropy" if args.plane == "mncms" else "discord"
        config = frontier.EnvelopeConfig(axis, args.bins, args.samples, args.seed)
    except frontier.FrontierError as exc:
        raise UsageError(str(exc)) from None
    if args.plane == "mncms":
        def run():
            pairs = _envelope_records(frontier.mncms_envelope(config, jobs))
            header, rows = envelope_rows(pairs)
            return _table_output(args, header, rows, envelope_dicts(pairs))
        return run

    def run():
        bins = frontier.amid_plane_bounds(config, jobs)
        header, rows = amid_rows(bins)
        return _table_output(args, header, rows, [dict(zip(header, r)) for r in rows])
    return run


def cmd_scatter(args):
    jobs = resolve_jobs(args.jobs)
    if args.n < 1:
        raise UsageError("--n must be positive")

    def run():
        records = frontier.scatter_random(args.n, args.seed, jobs)
        header, rows = sweep_rows(records)
        return _table_output(args, header, rows, [r.to_dict() for r in records])
    return run


def cmd_source(args):
    config = source.SourceConfig(args.eps, args.p, args.gamma, args.C, args.recipe)
    try:
        config.validate()
    except source.SourceError as exc:
        raise UsageError(str(exc)) from None
    return lambda: states.state_to_json(source.engineer(config)) + "\n"


def cmd_tomo_sim(args):
    if not args.n > 0:
        raise UsageError("--n must be positive")
    rho = read_state(args.state)
    return lambda: tomography.simulate_counts(rho, args.n, args.seed).to_json() + "\n"


def cmd_tomo_fit(args):
    try:
        with open(args.data, encoding="utf-8") as fh:
            data = tomography.TomographyDataset.from_json(fh.read())
    except OSError as exc:
        raise ComputationError(f"cannot read dataset {args.data}: {exc.strerror}") from None
    except tomography.TomographyError as exc:
        raise ComputationError(f"malformed dataset {args.data}: {exc}") from None
    reference = read_state(args.reference) if args.reference else None

    def run():
        result = tomography.mle_reconstruct(data, reference=reference)
        out = tomography.reconstruction_to_dict(result)
        out["report"] = correlation_report(result.rho_physical).to_dict()
        return dumps12(out)
    return run


def cmd_spread(args):
    params = _family_params(args.family, args)
    sigmas = _sigmas(args)
    if set(sigmas) - set(params):
        raise UsageError(f"--sigma names {sorted(set(sigmas) - set(params))} are not parameters of {args.family}")
    if any(s < 0 or not math.isfinite(s) for s in sigmas.values()):
        raise UsageError("--sigma values must be finite and non-negative")
    if args.n < 1:
        raise UsageError("--n must be positive")
    try:
        frontier.family_state(args.family, params)
    except frontier.FrontierError as exc:
        raise UsageError(str(exc)) from None

    def run():
        res = frontier.monte_carlo_spread(args.family, params, sigmas, args.n, args.seed)
        return dumps12({"family": args.family, "params": params, "sigmas": sigmas, "n": args.n,
                        "seed": args.seed,
                        **{k: {"mean": m, "std": s} for k, (m, s) in res.items()}})
    return run


# --- parser ----------------------------------------------------------------

def _add_params(p, names=("eps", "p", "a", "r", "q")):
    for n in names:
        p.add_argument(f"--{n}", type=float, help=f"family parameter {n}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcorr", description="Quantum correlations of two-qubit states.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        p.add_argument("--out", help="output path (stdout when omitted)")
        return p

    p = add("measure", cmd_measure, "Correlation report of a state file.")
    p.add_argument("--state", required=True, help="state JSON file")

    p = add("family", cmd_family, "Write a member of a state family as state JSON.")
    p.add_argument("name", choices=sorted(frontier.FAMILIES))
    _add_params(p)

    p = add("sweep", cmd_sweep, "Family sweeps and frontier envelopes.")
    p.add_argument("--plane", choices=("family", "mncms", "amid"), required=True)
    p.add_argument("--family", choices=sorted(frontier.FAMILIES))
    p.add_argument("--grid", action="append", metavar="NAME=START:STOP:COUNT",
                   help="parameter axis; repeat once per family parameter")
    p.add_argument("--bins", type=int, default=40)
    p.add_argument("--samples", type=int, default=50, help="random X-states (or scan density) per bin")
    p.add_argument("--seed", type=int, default=0, help="seed for the random search starts")
    p.add_argument("--jobs", type=int, help="worker processes (default $QCORR_JOBS or 1)")
    p.add_argument("--format", choices=("csv", "json"), help="default: csv for *.csv, else json")

    p = add("scatter", cmd_scatter, "Correlation reports of Hilbert-Schmidt random states.")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, help="worker processes (default $QCORR_JOBS or 1)")
    p.add_argument("--format", choices=("csv", "json"))

    p = add("source", cmd_source, "State produced by a preparation recipe.")
    p.add_argument("--recipe", choices=source.RECIPES, required=True)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=0.0, help="path phase (radians)")
    p.add_argument("--C", type=float, default=0.0, help="quartz dephasing strength")

    p = add("tomo-sim", cmd_tomo_sim, "Simulate 36-setting tomography counts.")
    p.add_argument("--state", required=True)
    p.add_argument("--n", type=float, required=True, help="mean counts per setting")
    p.add_argument("--seed", type=int, required=True)

    p = add("tomo-fit", cmd_tomo_fit, "Maximum-likelihood reconstruction from counts.")
    p.add_argument("--data", required=True, help="dataset JSON from tomo-sim")
    p.add_argument("--reference", help="state JSON to compute fidelity against")

    p = add("spread", cmd_spread, "Monte Carlo error bars under parameter noise.")
    p.add_argument("--family", choices=sorted(frontier.FAMILIES), required=True)
    _add_params(p)
    p.add_argument("--sigma", action="append", metavar="NAME=VALUE")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--seed", type=int, required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on bad flags
    try:
        check_writable(args.out)
        run = args.func(args)
    except UsageError as exc:
        parser.exit(2, f"qcorr {args.command}: error: {exc}\n")
    except ComputationError as exc:
        print(f"qcorr {args.command}: error: {exc}", file=sys.stderr)
        return 1
    try:
        text = run()
    except (ComputationError, MeasureError, states.StateError, frontier.FrontierError,
            source.SourceError, tomography.TomographyError, ArithmeticError, ValueError) as exc:
        print(f"qcorr {args.command}: error: {exc}", file=sys.stderr)
        return 1
    emit(text, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
