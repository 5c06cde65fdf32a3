"""Command-line interface: ``gammaprime {constants,analyze,posterior,simulate}``.

Exit codes: 0 success, 1 some input rows failed, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import __version__
from .contab import from_counts, haldane_correct
from .effects import llc_constants, log_or, summarize_published, summarize_table
from .exceptions import OutOfRangeError
from .hypotest import t_test, z_test
from .mcstudy import (
    FixedEffect,
    MixtureEffect,
    NormalEffect,
    SimulationConfig,
    run_power,
    run_selection,
    run_type1,
)
from .contab import woolf_se
from .numerics import normal_quantile
from .posterior import make_default_prior, posterior_from_estimate, read_prior_csv, summary_to_se

EXIT_OK, EXIT_ROWS, EXIT_USAGE = 0, 1, 2
SCALE_NAMES = {"logor": "log_or", "gammaprime": "gamma_prime"}
DATASETS = {"table4": "table4_dietary.csv"}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class SummaryRecord:
    label: str
    or_point: float
    ci_low: float
    ci_high: float
    ci_level: float = 0.95

    def __post_init__(self):
        if not 0 < self.ci_low <= self.or_point <= self.ci_high:
            raise ValueError(
                f"{self.label}: need ci_low <= or <= ci_high, got {self.ci_low}, {self.or_point}, {self.ci_high}"
            )


def fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.10g}"
    return "" if x is None else str(x)


def _data_lines(fh):
    for lineno, line in enumerate(fh, start=1):
        if line.strip() and not line.lstrip().startswith("#"):
            yield lineno, line


def _open_input(path: str):
    return sys.stdin if path == "-" else open(path, newline="")


def emit(rows: list[dict], columns: list[str], style: str, out=None):
    out = out or sys.stdout
    if style == "json":
        json.dump([{c: r.get(c) for c in columns} for r in rows], out, indent=2, default=float)
        out.write("\n")
    elif style == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r.get(c)) for c in columns])
    else:
        cells = [columns] + [[fmt(r.get(c)) for c in columns] for r in rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
        for k, row in enumerate(cells):
            out.write("  ".join(s.rjust(wd) for s, wd in zip(row, widths)).rstrip() + "\n")
            if k == 0:
                out.write("  ".join("-" * wd for wd in widths) + "\n")


# -- constants ---------------------------------------------------------------

def cmd_constants(args) -> int:
    c = llc_constants()
    rows = [
        {"name": "psi_star", "value": c.psi_star},
        {"name": "max_log_or", "value": c.max_log_or},
        {"name": "llc", "value": c.llc},
        {"name": "max_or", "value": c.max_or},
    ]
    if args.format == "text":
        for r in rows:
            print(f"{r['name']:<11} {r['value']:.10f}")
    else:
        emit(rows, ["name", "value"], args.format)
    return EXIT_OK


# -- analyze -----------------------------------------------------------------

ANALYZE_COLUMNS = [
    "line", "n11", "n12", "n21", "n22", "corrected", "log_or", "se_log_or",
    "gamma_prime", "se_gamma_prime", "z", "p_z", "t", "p_t", "z_uncorrected", "error",
]


def analyze_row(cells, correct: bool) -> dict:
    raw = from_counts(*cells)
    table = haldane_correct(raw) if correct else raw
    s = summarize_table(table)
    z = z_test(table)
    row = {
        "n11": table.n11, "n12": table.n12, "n21": table.n21, "n22": table.n22,
        "corrected": table.corrected,
        "log_or": s.log_or, "se_log_or": s.se_log_or,
        "gamma_prime": s.gamma_prime, "se_gamma_prime": s.se_gamma_prime,
        "z": z.statistic, "p_z": z.p_two_sided,
    }
    try:
        t = t_test(table)
        row["t"], row["p_t"] = t.statistic, t.p_two_sided
    except OutOfRangeError:
        row["t"] = row["p_t"] = None
    if correct and min(raw.cells) > 0:
        row["z_uncorrected"] = log_or(raw) / woolf_se(raw)
    return row


def cmd_analyze(args) -> int:
    rows, failed = [], 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with _open_input(args.input) as fh:
            first = True
            for lineno, line in _data_lines(fh):
                parts = [p.strip() for p in line.strip().split(",")]
                if first and [p.lower() for p in parts] == ["n11", "n12", "n21", "n22"]:
                    first = False
                    continue
                first = False
                try:
                    if len(parts) != 4:
                        raise ValueError(f"expected 4 columns, got {len(parts)}")
                    try:
                        cells = [float(p) for p in parts]
                    except ValueError:
                        raise ValueError(f"cannot parse counts {parts}") from None
                    row = analyze_row(cells, not args.no_correct)
                except (ValueError, ArithmeticError) as exc:
                    failed += 1
                    print(f"line {lineno}: {exc}", file=sys.stderr)
                    row = {"error": str(exc)}
                row["line"] = lineno
                rows.append(row)
    emit(rows, ANALYZE_COLUMNS, args.format)
    return EXIT_ROWS if failed else EXIT_OK


# -- posterior ---------------------------------------------------------------

POSTERIOR_COLUMNS = [
    "label", "or", "log_or", "se_log_or", "gamma_prime", "ci_low", "ci_high",
    "pi0", "scale", "statistic", "posterior_mean", "hpd_low", "hpd_high", "credibility", "error",
]


def read_summaries(source) -> list:
    """Parse ``label,or,ci_low,ci_high,ci_level`` rows; bad rows come back as exceptions."""
    out = []
    header = None
    for lineno, line in _data_lines(source):
        parts = next(csv.reader([line]))
        if header is None:
            header = [p.strip().lower() for p in parts]
            if header != ["label", "or", "ci_low", "ci_high", "ci_level"]:
                raise UsageError("summary file header must be label,or,ci_low,ci_high,ci_level")
            continue
        try:
            if len(parts) != 5:
                raise ValueError(f"line {lineno}: expected 5 columns")
            out.append(SummaryRecord(parts[0], *(float(p) for p in parts[1:])))
        except ValueError as exc:
            out.append(ValueError(f"line {lineno}: {exc}"))
    return out


def _pi0_values(values) -> list[float]:
    out = []
    for v in values or ["0.5"]:
        for piece in str(v).split(","):
            x = float(piece)
            if not 0.0 <= x <= 1.0:
                raise UsageError(f"--pi0 must lie in [0, 1], got {x}")
            out.append(x)
    return out


def cmd_posterior(args) -> int:
    scale = SCALE_NAMES[args.scale]
    if not 0 < args.cred < 1:
        raise UsageError("--cred must lie in (0, 1)")
    level = args.ci_level

    records = []
    if args.table:
        cells = [float(x) for x in args.table.split(",")]
        if len(cells) != 4:
            raise UsageError("--table needs n11,n12,n21,n22")
        raw = from_counts(*cells)
        t = raw if args.no_correct else haldane_correct(raw)
        records.append(("table", math.exp(log_or(t)), log_or(t), woolf_se(t)))
    elif args.or_point is not None:
        if args.ci_low is None or args.ci_high is None:
            raise UsageError("--or needs --ci-low and --ci-high")
        records.append(SummaryRecord("summary", args.or_point, args.ci_low, args.ci_high, level))
    else:
        if args.dataset:
            ref = resources.files("gammaprime") / "data" / DATASETS[args.dataset]
            with ref.open() as fh:
                records.extend(read_summaries(fh))
        elif args.input:
            with _open_input(args.input) as fh:
                records.extend(read_summaries(fh))
        else:
            raise UsageError("give an input file, --dataset, --table, or --or/--ci-low/--ci-high")

    if args.prior_file:
        priors = [(None, read_prior_csv(args.prior_file))]
    else:
        priors = [(pi0, make_default_prior(pi0, args.tau, args.trunc, args.bins)) for pi0 in _pi0_values(args.pi0)]

    rows, failed = [], 0
    zq = normal_quantile((1 + args.cred) / 2)
    for rec in records:
        if isinstance(rec, Exception):
            failed += 1
            print(str(rec), file=sys.stderr)
            rows.append({"error": str(rec)})
            continue
        try:
            if isinstance(rec, SummaryRecord):
                label, orv = rec.label, rec.or_point
                psi = math.log(orv)
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    se = summary_to_se(rec.or_point, rec.ci_low, rec.ci_high, rec.ci_level)
            else:
                label, orv, psi, se = rec
            s = summarize_published(orv, se)
            for pi0, prior in priors:
                res = posterior_from_estimate(psi, se, prior, scale=scale, credibility=args.cred)
                point, spread = (s.gamma_prime, s.se_gamma_prime) if scale == "gamma_prime" else (psi, se)
                rows.append({
                    "label": label, "or": orv, "log_or": psi, "se_log_or": se,
                    "gamma_prime": s.gamma_prime,
                    "ci_low": point - zq * spread, "ci_high": point + zq * spread,
                    "pi0": pi0 if pi0 is not None else prior.null_mass,
                    "scale": scale, "statistic": res.observed_statistic,
                    "posterior_mean": res.mean, "hpd_low": res.hpd_low, "hpd_high": res.hpd_high,
                    "credibility": args.cred,
                })
        except ValueError as exc:
            failed += 1
            print(f"{getattr(rec, 'label', 'record')}: {exc}", file=sys.stderr)
            rows.append({"label": getattr(rec, "label", None), "error": str(exc)})
    emit(rows, POSTERIOR_COLUMNS, args.format)
    return EXIT_ROWS if failed else EXIT_OK


# -- simulate ----------------------------------------------------------------

SIM_DEFAULTS = {
    "type1": {"n_cases": "25,50,100,250,500,1000,5000", "reps": 100_000},
    "power": {"n_cases": "25,50,100,250,500,1000,5000", "reps": 100_000},
    "selection": {"n_cases": "500", "reps": 500, "n_tests": 10_000},
}
FULL_SCALE = {"type1": {"reps": 1_000_000}, "power": {"reps": 1_000_000},
              "selection": {"reps": 10_000}}


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines (``#`` comments) into a flag dictionary."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value.strip('"').strip("'")
    return out


def _int_list(text) -> list[int]:
    try:
        vals = [int(float(x)) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad integer list {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise UsageError("--n-cases values must be positive")
    return vals


def build_sim_config(args) -> SimulationConfig:
    study = args.study
    opts = dict(SIM_DEFAULTS[study])
    if args.full_scale:
        opts.update(FULL_SCALE[study])
    if args.config:
        opts.update(read_config_file(args.config))
    for key in ("n_cases", "reps", "seed", "alpha", "or_value", "tau", "pi0", "trunc", "bins",
                "n_tests", "threads", "scale"):
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    if "or" in opts:
        opts.setdefault("or_value", opts.pop("or"))

    reps = int(float(opts["reps"]))
    if reps < 1:
        raise UsageError("--reps must be at least 1")
    alpha = float(opts.get("alpha", 0.05))
    if not 0 < alpha <= 1:
        raise UsageError("--alpha must lie in (0, 1]")

    if study == "type1":
        effect = FixedEffect(0.0)
    elif study == "power":
        if opts.get("or_value") is not None and opts.get("tau") is not None:
            raise UsageError("give either --or or --tau, not both")
        if opts.get("or_value") is not None:
            orv = float(opts["or_value"])
            if orv <= 0:
                raise UsageError("--or must be positive")
            effect = FixedEffect(math.log(orv))
        elif opts.get("tau") is not None:
            tau = float(opts["tau"])
            if tau <= 0:
                raise UsageError("--tau must be positive")
            effect = NormalEffect(tau)
        else:
            raise UsageError("power needs --or or --tau")
    else:
        effect = MixtureEffect(
            pi0=float(opts.get("pi0", 0.8)), tau=float(opts.get("tau", 0.42)),
            truncation=float(opts.get("trunc", 4.8)), bins=int(opts.get("bins", 100)),
        )
        if not 0 <= effect.pi0 <= 1 or effect.tau <= 0 or effect.truncation <= 0 or effect.bins < 2:
            raise UsageError("invalid prior settings")
    scale = opts.get("scale", "logor")
    try:
        return SimulationConfig(
            n_cases=_int_list(opts["n_cases"]),
            replicates=reps,
            seed=int(opts.get("seed", 1)),
            effect=effect,
            alpha=alpha,
            n_tests=int(float(opts.get("n_tests", 1))),
            scale=SCALE_NAMES.get(scale, scale),
            threads=int(opts["threads"]) if opts.get("threads") is not None else None,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_simulate(args) -> int:
    config = build_sim_config(args)
    runner = {"type1": run_type1, "power": run_power, "selection": run_selection}[args.study]
    report = runner(config)
    if args.out:
        Path(f"{args.out}.csv").write_text(report.to_csv())
        Path(f"{args.out}.txt").write_text(report.to_text())
    text = {"csv": report.to_csv, "json": report.to_json, "text": report.to_text}[args.format]()
    sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _prior_flags(p, pi0_help):
    p.add_argument("--pi0", action="append", help=pi0_help)
    p.add_argument("--tau", type=float, default=None, help="prior SD of log(OR) (default 0.42)")
    p.add_argument("--trunc", type=float, default=None, help="prior truncation (default 4.8)")
    p.add_argument("--bins", type=int, default=None, help="number of prior bins (default 100)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gammaprime", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    fmt_kw = dict(choices=["text", "csv", "json"], default="text")

    p = sub.add_parser("constants", help="print the Laplace-limit constants")
    p.add_argument("--format", **fmt_kw)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("analyze", help="effect sizes and tests for 2x2 tables in a CSV")
    p.add_argument("input", help="CSV with columns n11,n12,n21,n22 ('-' for stdin)")
    p.add_argument("--no-correct", action="store_true", help="skip the +1/2 cell correction")
    p.add_argument("--format", **fmt_kw)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("posterior", help="posterior mean and HPD interval for reported or tabulated effects")
    p.add_argument("input", nargs="?", help="CSV with columns label,or,ci_low,ci_high,ci_level")
    p.add_argument("--dataset", choices=sorted(DATASETS), help="use a bundled dataset")
    p.add_argument("--table", help="single table n11,n12,n21,n22")
    p.add_argument("--or", dest="or_point", type=float, help="reported odds ratio")
    p.add_argument("--ci-low", type=float)
    p.add_argument("--ci-high", type=float)
    p.add_argument("--ci-level", type=float, default=0.95)
    _prior_flags(p, "prior null probability; repeat or comma-separate for several (default 0.5)")
    p.add_argument("--prior-file", help="CSV prior with header midpoint,probability")
    p.add_argument("--scale", choices=sorted(SCALE_NAMES), default="gammaprime")
    p.add_argument("--cred", type=float, default=0.95, help="credibility level")
    p.add_argument("--no-correct", action="store_true")
    p.add_argument("--format", **fmt_kw)
    p.set_defaults(func=cmd_posterior)

    p = sub.add_parser("simulate", help="Monte Carlo size, power and selection studies")
    p.add_argument("study", choices=["type1", "power", "selection"])
    p.add_argument("--n-cases", help="comma-separated numbers of cases")
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--or", dest="or_value", type=float, help="fixed odds ratio (power)")
    _prior_flags(p, "null probability of the selection prior (default 0.8)")
    p.add_argument("--n-tests", type=int, help="tests per replicate (selection)")
    p.add_argument("--scale", choices=sorted(SCALE_NAMES), help="posterior route for selection")
    p.add_argument("--threads", type=int, help="worker threads (capped by GAMMAPRIME_THREADS)")
    p.add_argument("--config", help="key = value file with the same settings")
    p.add_argument("--full-scale", action="store_true", help="use the original replicate counts")
    p.add_argument("--out", help="also write OUT.csv and OUT.txt")
    p.add_argument("--format", **fmt_kw)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "posterior" and args.pi0 is not None and args.prior_file:
        parser.error("--pi0 and --prior-file are mutually exclusive")
    if args.command == "posterior":
        args.tau = 0.42 if args.tau is None else args.tau
        args.trunc = 4.8 if args.trunc is None else args.trunc
        args.bins = 100 if args.bins is None else args.bins
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"gammaprime: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"gammaprime: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
