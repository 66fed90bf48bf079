#!/usr/bin/env python3
"""
Command-line entry for sweeps, single experiments and the validation suite.

    python cli.py run --config default_experiment.json --out results/run.csv
    python cli.py sweep --param k --values 20,60,100 --drops 20 --seed 7 --schemes RIS,FDR,HDR --out results/k.csv
    python cli.py validate --seed 7
    python cli.py summarize --results results/k.json
"""

import argparse
import logging
import os
import sys
from dataclasses import replace
from typing import List, Optional

# Add the project root to the Python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from channel.geometry import dbm_to_watts
from config import DEFAULT_SEED, DESK_SCALE, LOG_LEVEL, WORKERS
from harness.experiment_orchestrator import ExperimentOrchestrator, ExperimentSpec, SweepParam
from harness.validation_suite import validate
from models.system_config import Scheme, SystemConfig
from utils.exceptions import ConfigError
from utils.experiment_loader import load_experiment
from utils.result_logger import ResultLogger

EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_CONFIG_ERROR = 2

logger = logging.getLogger(__name__)


def parse_values(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise ConfigError(f"Sweep values must be a comma-separated list of numbers, got {text!r}")


def parse_schemes(text: str) -> List[Scheme]:
    return [Scheme.parse(name) for name in text.split(",") if name.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Throughput optimization of surface- and relay-assisted MIMO links")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("--config", required=True, help="flat JSON config")
    run.add_argument("--out", required=True, help="output CSV")
    run.add_argument("--summary", action="store_true", help="print mean/median per scheme and sweep value")
    run.add_argument("--json-out", default=None, help="also save the rows, errors included, as JSON")
    run.add_argument("--workers", type=int, default=WORKERS)

    sweep = commands.add_parser("sweep", help="sweep one parameter over channel drops")
    sweep.add_argument("--param", required=True, choices=["k", "d1", "dr", "ps"])
    sweep.add_argument("--values", default=None, help="comma-separated values (ps in dBm)")
    sweep.add_argument("--drops", type=int, default=DESK_SCALE["drops"])
    sweep.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sweep.add_argument("--schemes", default="RIS,FDR,HDR,DIRECT")
    sweep.add_argument("--out", required=True, help="output CSV")
    sweep.add_argument("--ps-dbm", type=float, default=None, help="source power for the whole sweep, in dBm")
    sweep.add_argument("--dr", type=float, default=None, help="node offset d_r for the whole sweep, in meters")
    sweep.add_argument("--restarts", type=int, default=1)
    sweep.add_argument("--summary", action="store_true")
    sweep.add_argument("--json-out", default=None, help="also save the rows, errors included, as JSON")
    sweep.add_argument("--workers", type=int, default=WORKERS)

    check = commands.add_parser("validate", help="run the numerical self-checks")
    check.add_argument("--seed", type=int, default=DEFAULT_SEED)
    check.add_argument("--json", action="store_true", help="print the report as JSON")
    check.add_argument("--out", default=None, help="also write the report to this file")

    summarize = commands.add_parser("summarize", help="aggregate rows saved with --json-out")
    summarize.add_argument("--results", required=True, help="JSON rows file")
    return parser


def sweep_spec(args: argparse.Namespace) -> ExperimentSpec:
    param = SweepParam.parse(args.param)
    if args.values:
        values = parse_values(args.values)
    elif param == SweepParam.K:
        values = [float(k) for k in DESK_SCALE["k_values"]]
    else:
        raise ConfigError(f"--values is required for --param {args.param}")

    cfg = SystemConfig()
    if args.ps_dbm is not None:
        cfg = replace(cfg, P_s=dbm_to_watts(args.ps_dbm))
    if args.dr is not None:
        cfg = replace(cfg, geometry=replace(cfg.geometry, d_r=args.dr))
    return ExperimentSpec(base_config=cfg, schemes=parse_schemes(args.schemes), sweep_param=param,
                          sweep_values=values, drops=args.drops, master_seed=args.seed, restarts=args.restarts)


def run_and_write(spec: ExperimentSpec, out: str, workers: int, summary: bool,
                  json_out: Optional[str] = None) -> int:
    orchestrator = ExperimentOrchestrator(spec, workers)
    rows = orchestrator.run()
    orchestrator.results.write_csv(out)
    failed = len(orchestrator.results.get_failed_rows())
    print(f"✅ {len(rows)} rows written to {out}")
    if json_out:
        orchestrator.results.save_results(json_out)
        print(f"💾 Rows saved to {json_out}")
    if failed:
        print(f"⚠️  {failed} rows did not complete (recorded as non-converged)")
    if summary:
        print(orchestrator.results.generate_summary_report())
    return EXIT_OK


def run_validate(args: argparse.Namespace) -> int:
    report = validate(args.seed)
    text = report.to_json(indent=2) + "\n" if args.json else report.to_text()
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", newline="") as f:
            f.write(text)
    return EXIT_OK if report.passed else EXIT_VALIDATION_FAILED


def run_summarize(args: argparse.Namespace) -> int:
    results = ResultLogger()
    if not results.load_results(args.results):
        raise ConfigError(f"Could not read result rows from {args.results}")
    for scheme, count in sorted(results.row_count_by_scheme().items()):
        print(f"📊 {scheme}: {count} rows")
    print(results.generate_summary_report())
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return run_and_write(load_experiment(args.config), args.out, args.workers, args.summary, args.json_out)
        if args.command == "sweep":
            return run_and_write(sweep_spec(args), args.out, args.workers, args.summary, args.json_out)
        if args.command == "summarize":
            return run_summarize(args)
        return run_validate(args)
    except ConfigError as e:
        print(f"❌ Config error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
