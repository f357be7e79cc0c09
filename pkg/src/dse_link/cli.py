"""Command-line front end: one-shot estimation, scenario simulation, and
rematch sample-size planning."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import secrets
import sys
from dataclasses import dataclass
from importlib.resources import files

from .estimators import (
    ContingencyCounts,
    EstimationError,
    dse,
    ding_fienberg,
    naive_corrected,
    CaptureProbabilities,
    ErrorRates,
)
from .rematch import Infeasible, RematchSample, ht_nu, plan_sample_size
from .simulation import ScenarioConfig, SimulationSummary, run_scenario
from .variance import naive_variance_estimate

SCENARIO_COLUMNS = ("p1", "p2", "fnr", "fpr", "f")
SCENARIO_OPTIONAL = ("iterations", "seed")
RESULT_COLUMNS = (
    "p1",
    "p2",
    "fnr",
    "fpr",
    "f",
    "erb_dse",
    "erb_uncorrected",
    "erb_corrected",
    "erse_dse",
    "erse_uncorrected",
    "erse_corrected",
    "arse_corrected",
    "exclusions",
)


class ScenarioFileError(ValueError):
    """Malformed scenario file; the message carries the offending row."""


@dataclass(frozen=True)
class ResultRow:
    """One output-table row: scenario key plus metrics in percent."""

    p1: float
    p2: float
    fnr: float
    fpr: float
    f: float
    erb_dse: float | None
    erb_uncorrected: float | None
    erb_corrected: float | None
    erse_dse: float | None
    erse_uncorrected: float | None
    erse_corrected: float | None
    arse_corrected: float | None
    exclusions: int


def bundled_scenario_path() -> str:
    """Path of the bundled 12-row benchmark grid."""
    return str(files("dse_link").joinpath("data/table1.csv"))


def load_scenario_file(
    path: str,
    default_iterations: int,
    default_seed: int,
    population: int,
) -> list[ScenarioConfig]:
    """Parse a scenario CSV with header p1,p2,fnr,fpr,f[,iterations,seed].

    Per-row iterations/seed override the global defaults. Errors name the
    offending physical row.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle, restkey="_extra")
        header = reader.fieldnames
        if header is None:
            raise ScenarioFileError("scenario file is empty")
        missing = [c for c in SCENARIO_COLUMNS if c not in header]
        unknown = [c for c in header if c not in SCENARIO_COLUMNS + SCENARIO_OPTIONAL]
        if missing or unknown:
            raise ScenarioFileError(
                f"row 1: bad header {header}; required columns "
                f"{','.join(SCENARIO_COLUMNS)}, optional "
                f"{','.join(SCENARIO_OPTIONAL)}"
            )
        configs = []
        for row in reader:
            line = reader.line_num
            if "_extra" in row:
                raise ScenarioFileError(f"row {line}: too many fields")
            if any(row[c] is None or row[c] == "" for c in SCENARIO_COLUMNS):
                raise ScenarioFileError(
                    f"row {line}: every required column needs a value"
                )
            try:
                iterations = (
                    int(row["iterations"])
                    if row.get("iterations")
                    else default_iterations
                )
                seed = int(row["seed"]) if row.get("seed") else default_seed
                configs.append(
                    ScenarioConfig(
                        p1plus=float(row["p1"]),
                        pplus1=float(row["p2"]),
                        fnr=float(row["fnr"]),
                        fpr=float(row["fpr"]),
                        f=float(row["f"]),
                        seed=seed,
                        N=population,
                        iterations=iterations,
                    )
                )
            except ValueError as exc:
                raise ScenarioFileError(f"row {line}: {exc}") from exc
    if not configs:
        raise ScenarioFileError("scenario file has no scenario rows")
    return configs


def load_rematch_codes(path: str) -> list[int]:
    """Parse a single-column CSV of outcome codes {+1, -1, 0}."""
    codes = []
    with open(path, encoding="utf-8") as handle:
        for line_num, line in enumerate(handle, start=1):
            token = line.strip()
            if not token:
                continue
            try:
                code = int(token)
            except ValueError as exc:
                raise ValueError(f"{path}: row {line_num}: not a code: {token!r}") from exc
            if code not in (-1, 0, 1):
                raise ValueError(
                    f"{path}: row {line_num}: code must be one of +1, -1, 0"
                )
            codes.append(code)
    return codes


def summary_to_row(summary: SimulationSummary) -> ResultRow:
    cfg = summary.config
    return ResultRow(
        p1=cfg.p1plus,
        p2=cfg.pplus1,
        fnr=cfg.fnr,
        fpr=cfg.fpr,
        f=cfg.f,
        erb_dse=summary.dse.erb_pct,
        erb_uncorrected=summary.uncorrected.erb_pct,
        erb_corrected=summary.corrected.erb_pct,
        erse_dse=summary.dse.erse_pct,
        erse_uncorrected=summary.uncorrected.erse_pct,
        erse_corrected=summary.corrected.erse_pct,
        arse_corrected=summary.arse_pct,
        exclusions=summary.exclusions,
    )


def render_csv(rows: list[ResultRow], seed: int, precision: int = 2) -> str:
    """Serialize the results table; metric columns use ``precision``
    decimals, key columns keep their exact shortest representation."""
    out = io.StringIO()
    out.write(f"# seed={seed}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for row in rows:
        writer.writerow(
            [str(row.p1), str(row.p2), str(row.fnr), str(row.fpr), str(row.f)]
            + [
                "NA" if v is None else f"{v:.{precision}f}"
                for v in (
                    row.erb_dse,
                    row.erb_uncorrected,
                    row.erb_corrected,
                    row.erse_dse,
                    row.erse_uncorrected,
                    row.erse_corrected,
                    row.arse_corrected,
                )
            ]
            + [str(row.exclusions)]
        )
    return out.getvalue()


def render_markdown(rows: list[ResultRow], seed: int) -> str:
    lines = [f"seed = {seed}", ""]
    lines.append("| " + " | ".join(RESULT_COLUMNS) + " |")
    lines.append("|" + "|".join([" --- "] * len(RESULT_COLUMNS)) + "|")
    for row in rows:
        cells = [str(row.p1), str(row.p2), str(row.fnr), str(row.fpr), str(row.f)]
        cells += [
            "NA" if v is None else f"{v:.2f}"
            for v in (
                row.erb_dse,
                row.erb_uncorrected,
                row.erb_corrected,
                row.erse_dse,
                row.erse_uncorrected,
                row.erse_corrected,
                row.arse_corrected,
            )
        ]
        cells.append(str(row.exclusions))
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def parse_results_csv(text: str) -> tuple[int | None, list[dict]]:
    """Parse a results CSV back into (seed, rows); inverse of render_csv."""
    seed = None
    lines = []
    for line in text.splitlines():
        if line.startswith("#"):
            if line.startswith("# seed="):
                seed = int(line.split("=", 1)[1])
            continue
        lines.append(line)
    reader = csv.DictReader(lines)
    rows = []
    for record in reader:
        parsed = {}
        for key, value in record.items():
            if key == "exclusions":
                parsed[key] = int(value)
            elif value == "NA":
                parsed[key] = None
            else:
                parsed[key] = float(value)
        rows.append(parsed)
    return seed, rows


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", newline="\n", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp, path)


def cmd_estimate(args) -> int:
    try:
        counts = ContingencyCounts(args.n1, args.n2, args.m)
        report = {"dse": dse(counts, floor=args.floor).n_hat}
        if args.rematch:
            codes = load_rematch_codes(args.rematch)
            sample = RematchSample(codes, n1plus=args.n1)
            nu = ht_nu(sample)
            corrected = naive_corrected(counts, nu.nu_hat)
            variance = naive_variance_estimate(corrected.n_hat, counts, nu)
            report["nu_hat"] = nu.nu_hat
            report["sigma2_eps"] = nu.sigma2_eps
            report["corrected"] = corrected.n_hat
            report["corrected_variance"] = variance
            report["corrected_rse_pct"] = 100.0 * variance**0.5 / corrected.n_hat
        if args.alpha is not None or args.beta is not None:
            if args.alpha is None or args.beta is None:
                raise ValueError("--alpha and --beta must be given together")
            report["ding_fienberg"] = ding_fienberg(counts, args.alpha, args.beta).n_hat
    except (EstimationError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        for key, value in report.items():
            print(f"{key}: {value:.6f}")
    return 0


def cmd_simulate(args) -> int:
    seed = args.seed if args.seed is not None else secrets.randbits(64)
    path = args.scenario if args.scenario is not None else bundled_scenario_path()
    try:
        configs = load_scenario_file(path, args.iterations, seed, args.population)
    except (ScenarioFileError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    rows = []
    for config in configs:
        summary = run_scenario(config, threads=args.threads)
        rows.append(summary_to_row(summary))
        if args.verbose:
            alt = summary.arse_root_mean_var_pct
            print(
                f"scenario p1={config.p1plus} p2={config.pplus1} "
                f"fnr={config.fnr} fpr={config.fpr} f={config.f}: "
                f"completed={summary.iterations_completed} "
                f"arse_root_mean_var="
                f"{'NA' if alt is None else format(alt, '.4f')}%",
                file=sys.stderr,
            )

    if args.format == "csv":
        text = render_csv(rows, seed, precision=args.precision)
    else:
        text = render_markdown(rows, seed)
    if args.output:
        try:
            _atomic_write(args.output, text)
        except OSError as exc:
            print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return 0


def cmd_plan(args) -> int:
    try:
        n_r = plan_sample_size(
            n1plus=args.n1,
            anticipated=ErrorRates(fnr=args.fnr, fpr=args.fpr),
            capture=CaptureProbabilities(p1plus=args.p1, pplus1=args.p2),
            n_guess=args.N,
            target_rse=args.target_rse,
        )
    except Infeasible as exc:
        print(f"error: Infeasible: {exc}", file=sys.stderr)
        if exc.min_achievable_rse is not None:
            print(
                f"minimum achievable rse: {exc.min_achievable_rse:.6f}",
                file=sys.stderr,
            )
        return 1
    except (EstimationError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"n_r: {n_r}")
    print(f"f: {n_r / args.n1:.6f}")
    return 0


def _default_threads() -> int:
    env = os.environ.get("DSE_LINK_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dselink",
        description=(
            "Two-list population size estimation with linkage-error "
            "correction, plus a Monte Carlo scenario runner."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser(
        "estimate", help="estimate population size from one observed table"
    )
    est.add_argument("--n1", type=int, required=True, help="source-1 record count")
    est.add_argument("--n2", type=int, required=True, help="source-2 record count")
    est.add_argument("--m", type=int, required=True, help="linked (matched) record count")
    est.add_argument(
        "--floor", action="store_true", help="apply the greatest-integer function"
    )
    est.add_argument(
        "--rematch",
        metavar="CSV",
        help="single-column CSV of rematch outcome codes {+1,-1,0} drawn from source 1",
    )
    est.add_argument(
        "--alpha", type=float, help="correct-link probability for ding_fienberg"
    )
    est.add_argument(
        "--beta", type=float, help="false-link probability for ding_fienberg"
    )
    est.add_argument("--json", action="store_true", help="machine-readable output")
    est.set_defaults(func=cmd_estimate)

    sim = sub.add_parser("simulate", help="run simulation scenarios from a CSV grid")
    sim.add_argument(
        "scenario",
        nargs="?",
        default=None,
        help="scenario CSV (header p1,p2,fnr,fpr,f[,iterations,seed]); "
        "defaults to the bundled table1.csv benchmark grid",
    )
    sim.add_argument("--iterations", type=int, default=10000)
    sim.add_argument(
        "--seed",
        type=int,
        default=None,
        help="master seed; omitted selects a random one, printed in the output header",
    )
    sim.add_argument(
        "--threads",
        type=int,
        default=_default_threads(),
        help="worker threads (env DSE_LINK_THREADS as fallback); results do not depend on it",
    )
    sim.add_argument("--format", choices=("csv", "markdown"), default="csv")
    sim.add_argument("--output", metavar="PATH", help="write the table here instead of stdout")
    sim.add_argument(
        "--precision", type=int, default=2, help="decimal places for CSV metric columns"
    )
    sim.add_argument("--population", type=int, default=1000, help="true population size N")
    sim.add_argument("--verbose", action="store_true")
    sim.set_defaults(func=cmd_simulate)

    plan = sub.add_parser("plan", help="plan a rematch-study sample size")
    plan.add_argument("--n1", type=int, required=True, help="source-1 record count")
    plan.add_argument("--p1", type=float, required=True, help="source-1 capture probability")
    plan.add_argument("--p2", type=float, required=True, help="source-2 capture probability")
    plan.add_argument("--N", type=float, required=True, help="anticipated population size")
    plan.add_argument("--fnr", type=float, required=True, help="anticipated missed-link rate")
    plan.add_argument("--fpr", type=float, required=True, help="anticipated spurious-link rate")
    plan.add_argument("--target-rse", type=float, required=True, dest="target_rse")
    plan.set_defaults(func=cmd_plan)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", 1) is not None and getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 1
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
