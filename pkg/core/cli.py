"""
Command-line entry point for the regret benchmark.

Run with:  python -m core <command>

Commands:
  run <config>      run every configured algorithm, write results.csv + summary.csv
  sweep <config>    DS-scaling sweep on GameOfSkill-v2, write ds_sweep.csv
  verify            brute-force property suites (--scope, --corrupt, --cases, --seed)

Exit codes: 0 success, 1 runtime or suite failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Sequence

from core.audit import RunLogger
from core.harness import BOUND_LABEL, ds_sweep, run_experiment, sqrt_reference
from core.models import ConfigError, ExperimentResult, RunEvent, SweepRow, TrialError, UcrlbError, VerifyScope
from core.registry import default_registry
from core.settings import PRESETS, load_experiments, load_sweep
from verify.suites import SuiteResult, run_suites

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2

RESULTS_HEADER = ["algo", "env", "trial", "t", "cum_regret", "episodes"]
SUMMARY_HEADER = ["algo", "env", "t", "mean_regret", "std_regret", "bound_ref"]
SWEEP_HEADER = ["algo", "ds", "s", "d", "norm_regret"]


# -- ANSI helpers -----------------------------------------------------------

_RESET = "\033[0m"
_DIM   = "\033[2m"
_RED   = "\033[91m"
_GREEN = "\033[92m"
_YELLOW= "\033[93m"
_CYAN  = "\033[96m"
_ORANGE= "\033[38;5;214m"


def _c(text: str, color: str) -> str:
    return f"{color}{text}{_RESET}"


def _print(text: str = "", err: bool = False) -> None:
    """Safe print that handles encoding errors gracefully."""
    stream = sys.stderr if err else sys.stdout
    try:
        print(text, file=stream)
    except UnicodeEncodeError:
        print(text.encode("ascii", errors="replace").decode("ascii"), file=stream)


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


# -- CSV writers ------------------------------------------------------------

def write_results_csv(path: Path, results: Sequence[ExperimentResult]) -> None:
    rows = []
    for res in results:
        for tr in res.traces:
            for t, regret, episodes in zip(tr.checkpoints, tr.cumulative_regret, tr.episodes_at):
                rows.append((tr.algo, tr.env, tr.trial, t, _fmt(regret), episodes))
    rows.sort(key=lambda r: (r[0], r[2], r[3]))
    _write_csv(path, RESULTS_HEADER, rows)


def write_summary_csv(path: Path, results: Sequence[ExperimentResult]) -> None:
    rows = []
    for res in results:
        algo = res.config.algo.kind.value
        env = res.traces[0].env if res.traces else res.config.env.label
        for row in res.summary:
            rows.append((algo, env, row.t, _fmt(row.mean_regret), _fmt(row.std_regret), _fmt(row.bound_ref)))
    rows.sort(key=lambda r: (r[0], r[2]))
    _write_csv(path, SUMMARY_HEADER, rows)


def write_sweep_csv(path: Path, rows: Sequence[SweepRow], reference: bool = False) -> None:
    header = SWEEP_HEADER + (["reference"] if reference else [])
    by_algo: dict[str, list[SweepRow]] = {}
    for r in rows:
        by_algo.setdefault(r.algo, []).append(r)
    out = []
    for algo in sorted(by_algo):
        group = sorted(by_algo[algo], key=lambda r: r.ds)
        refs = sqrt_reference(group) if reference else [None] * len(group)
        for r, ref in zip(group, refs):
            line = [r.algo, _fmt(r.ds), r.num_states, _fmt(r.diameter), _fmt(r.norm_regret)]
            if reference:
                line.append(_fmt(ref))
            out.append(line)
    _write_csv(path, header, out)


def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


# -- display helpers --------------------------------------------------------

def show_result(res: ExperimentResult) -> None:
    cfg = res.config
    last = res.summary[-1]
    episodes = [tr.episode_count for tr in res.traces]
    _print(f"  {_c(cfg.algo.kind.value, _CYAN):24s} {cfg.env.label:24s} "
           f"regret(T={last.t}) = {last.mean_regret:12.2f} +/- {last.std_regret:10.2f}   "
           f"episodes <= {max(episodes)}")
    if last.bound_ref is not None:
        _print(_c(f"      bound {last.bound_ref:.3e}  ({BOUND_LABEL})", _DIM))


def show_suites(results: Sequence[SuiteResult]) -> None:
    _print()
    _print(_c("=== VERIFY =====================================", _ORANGE))
    for res in results:
        icon = _c("[OK]", _GREEN) if res.passed else _c("[FAIL]", _RED)
        tag = _c(" (corrupted)", _YELLOW) if res.corrupt else ""
        _print(f"  {icon:18s} {res.name:14s} cases={res.cases:<6d} "
               f"failures={res.failure_count:<6d} {res.duration_ms} ms{tag}")
    _print(_c("================================================", _ORANGE))
    _print()


def show_trial_error(exc: TrialError) -> None:
    _print(_c(f"  [FAIL] {exc}", _RED), err=True)
    for key, value in exc.diagnostics.items():
        _print(f"        {_c(key + ':', _DIM)} {value}", err=True)


# -- commands ---------------------------------------------------------------

def cmd_run(args: argparse.Namespace) -> int:
    configs = load_experiments(args.config, args.preset)
    out = Path(args.out)
    logger = RunLogger(out)
    _print(_c(f"=== RUN  {args.config}  ->  {out}", _ORANGE))
    results = []
    for cfg in configs:
        res = run_experiment(cfg, logger=logger, workers=args.workers)
        show_result(res)
        results.append(res)
    write_results_csv(out / "results.csv", results)
    write_summary_csv(out / "summary.csv", results)
    _print(_c(f"  wrote results.csv, summary.csv, {logger.path.name} "
              f"({logger.count(RunEvent.TRIAL_FINISHED)} trials)", _GREEN))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    configs, ds_values = load_sweep(args.config, args.preset)
    out = Path(args.out)
    logger = RunLogger(out)
    _print(_c(f"=== SWEEP  {args.config}  ds={ds_values}  ->  {out}", _ORANGE))
    rows: list[SweepRow] = []
    for cfg in configs:
        for row in ds_sweep(cfg, ds_values, logger=logger, workers=args.workers):
            _print(f"  {_c(row.algo, _CYAN):24s} ds={row.ds:<8g} S={row.num_states:<3d} "
                   f"D={row.diameter:<10.2f} q={row.success_prob:.4f}  norm={row.norm_regret:.4f}")
            rows.append(row)
    write_sweep_csv(out / "ds_sweep.csv", rows, reference=args.reference)
    _print(_c("  wrote ds_sweep.csv", _GREEN))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    out = Path(args.out)
    logger = RunLogger(out)
    results = run_suites(args.scope, corrupt=args.corrupt, cases=args.cases, seed=args.seed, logger=logger)
    show_suites(results)
    failed = [r for r in results if not r.passed]
    if failed:
        dump_dir = out / "verify_failures"
        dump_dir.mkdir(parents=True, exist_ok=True)
        for res in failed:
            with open(dump_dir / f"{res.name}.json", "w", encoding="utf-8") as f:
                json.dump(res.to_dict(), f, indent=2)
        _print(_c(f"  counterexamples written to {dump_dir}", _YELLOW))
        return EXIT_FAILURE
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def algorithms_epilog() -> str:
    """algo.kind values accepted in a config, one per line."""
    lines = ["algorithms (algo.kind):"]
    for entry in default_registry().describe():
        lines.append(f"  {entry['name']:10s} {entry['description']}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m core", description="Tabular RL regret benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", default="out", help="output directory (default: out)")

    def experiment(p: argparse.ArgumentParser) -> None:
        p.add_argument("config", help="YAML experiment config")
        p.add_argument("--preset", choices=sorted(PRESETS), default=None, help="named horizon/trial override")
        p.add_argument("--workers", type=int, default=None, help="trial processes (default: UCRLB_THREADS or CPU count)")
        common(p)

    run = sub.add_parser(
        "run",
        help="run experiments",
        epilog=algorithms_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    experiment(run)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="DS-scaling sweep")
    experiment(sweep)
    sweep.add_argument("--reference", action="store_true", help="add a fitted c*sqrt(DS) column")
    sweep.set_defaults(func=cmd_sweep)

    verify = sub.add_parser("verify", help="run property suites")
    verify.add_argument("--scope", required=True, choices=[s.value for s in VerifyScope])
    verify.add_argument("--corrupt", action="store_true", help="negative control: suites must fail")
    verify.add_argument("--cases", type=int, default=None, help="cases per suite (default: suite size)")
    verify.add_argument("--seed", type=int, default=0)
    common(verify)
    verify.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except ConfigError as exc:
        _print(_c(f"  [CONFIG] {exc}", _RED), err=True)
        return EXIT_USAGE
    except TrialError as exc:
        show_trial_error(exc)
        return EXIT_FAILURE
    except UcrlbError as exc:
        _print(_c(f"  [ERROR] {exc}", _RED), err=True)
        return EXIT_FAILURE
