"""Command-line entry points: single runs, suites, and result inspection."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .core import ConfigError
from .driver import (
    emit_front,
    load_experiment_config,
    load_record,
    load_suite_config,
    read_objective_csv,
    run_dmi,
    run_label,
    run_suite,
    save_record,
)
from .metrics import hypervolume
from .stats import compare


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_experiment_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.no_interpolation:
        config = replace(config, interpolation_enabled=False)
    record = run_dmi(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{config.problem}_{run_label(config)}_s{config.seed}"
    record_path = save_record(record, out / f"{stem}.json")
    emit_front(record, out / f"{stem}_front.csv")
    covered, total = record.coverage
    print(
        f"{stem}: evaluations={record.evaluations} "
        f"final_hv={record.final_hypervolume!r} "
        f"coverage={covered}/{total} record={record_path}"
    )
    return 0


def _cmd_suite(args: argparse.Namespace) -> int:
    suite = load_suite_config(args.config)
    planned = len(suite.problems) * len(suite.instances) * len(suite.seeds)
    records = run_suite(suite, args.out)
    summary = Path(args.out) / "summary.csv"
    print(f"{len(records)} of {planned} runs succeeded; summary at {summary}")
    if len(records) < planned:
        print(
            f"{planned - len(records)} runs failed; see {summary} for messages",
            file=sys.stderr,
        )
        return 1
    return 0


def _cmd_hv(args: argparse.Namespace) -> int:
    front = read_objective_csv(args.front)
    reference = [float(v) for v in args.ref]
    if front.shape[1] != len(reference):
        raise ValueError(
            f"front has {front.shape[1]} objectives but {len(reference)} "
            f"reference components were given"
        )
    print(repr(hypervolume(front, reference)))
    return 0


def _read_sample(path: str) -> list[float]:
    values = read_objective_csv(path)
    if values.shape[1] != 1:
        raise ValueError(f"{path} must hold a single numeric column")
    return [float(v) for v in values[:, 0]]


def _cmd_stats(args: argparse.Namespace) -> int:
    a = _read_sample(args.a)
    b = _read_sample(args.b)
    report = compare(a, b)
    print(f"p_value={report.p_value!r}")
    print(f"a12={report.a12!r}")
    print(f"magnitude={report.magnitude.value}")
    return 0


def _cmd_front(args: argparse.Namespace) -> int:
    record = load_record(args.record)
    path = emit_front(record, args.out)
    print(f"front written to {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emobatch",
        description=(
            "Batched model-guided multi-objective optimization for expensive "
            "problems."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute one configured run")
    run.add_argument("--config", required=True, help="JSON run configuration")
    run.add_argument("--seed", type=int, default=None, help="override the seed")
    run.add_argument(
        "--no-interpolation",
        action="store_true",
        help="disable the tangent-step candidate generation",
    )
    run.add_argument("--out", required=True, help="output directory")
    run.set_defaults(handler=_cmd_run)

    suite = sub.add_parser("suite", help="run a problems x instances x seeds sweep")
    suite.add_argument("--config", required=True, help="JSON suite configuration")
    suite.add_argument("--out", required=True, help="output directory")
    suite.set_defaults(handler=_cmd_suite)

    hv = sub.add_parser("hv", help="hypervolume of a front CSV")
    hv.add_argument("--front", required=True, help="CSV of objective vectors")
    hv.add_argument(
        "--ref",
        action="append",
        required=True,
        help="one reference component per objective (repeat per objective)",
    )
    hv.set_defaults(handler=_cmd_hv)

    stats = sub.add_parser("stats", help="compare two paired samples")
    stats.add_argument("--a", required=True, help="single-column CSV of sample A")
    stats.add_argument("--b", required=True, help="single-column CSV of sample B")
    stats.set_defaults(handler=_cmd_stats)

    front = sub.add_parser("front", help="export the front of a saved record")
    front.add_argument("--record", required=True, help="run record JSON file")
    front.add_argument("--out", required=True, help="target CSV path")
    front.set_defaults(handler=_cmd_front)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # any runtime failure: one diagnostic line, code 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
