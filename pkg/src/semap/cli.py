"""Command-line entry point: validate workflow files, run simulations, and
compare failure reports.

Exit codes: 0 success, 1 workflow ended in the failure terminal, 2 usage or
configuration error — never anything else. SEMAP_LOG (error|info|debug)
controls stderr verbosity only; stdout stays machine-readable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .analysis import CATEGORIES, classify, compare_reports, emit_csv, parse_csv, report
from .config import load_workflow
from .errors import SemapError, WorkflowValidationError
from .lifecycle import exhaustion_terminal
from .orchestration import Enforcement, Transport, run_workflow
from .scenario import load_scenario

EXIT_OK = 0
EXIT_WORKFLOW_FAILED = 1
EXIT_USAGE = 2

logger = logging.getLogger("semap")


def _setup_logging() -> None:
    level_name = os.environ.get("SEMAP_LOG", "error").lower()
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        level_name, logging.ERROR
    )
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        load_workflow(args.workflow)
    except WorkflowValidationError as exc:
        for error in exc.errors:
            print(f"{error.code}: {error.message}", file=sys.stderr)
        return EXIT_USAGE
    print("OK")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    try:
        defn = load_workflow(args.workflow)
        scenario = load_scenario(args.scenario, defn)
    except WorkflowValidationError as exc:
        for error in exc.errors:
            print(f"{error.code}: {error.message}", file=sys.stderr)
        return EXIT_USAGE

    enforcement = Enforcement(args.enforcement) if args.enforcement else defn.enforcement
    transport = Transport(args.transport)
    workflow_id = (
        f"{Path(args.workflow).stem}:{Path(args.scenario).stem}"
        f":seed{args.seed}:{enforcement.value}"
    )
    result = run_workflow(
        defn,
        dict(scenario.agents),
        seed=args.seed,
        enforcement=enforcement,
        transport=transport,
        verifier_overrides=scenario.verifier_overrides,
        ground_truth=scenario.ground_truth,
        initial_artifacts=scenario.initial_artifacts,
        workflow_id=workflow_id,
    )

    records = classify(result.trace)
    failure_report = report(records, defn.max_rounds)
    summary = {
        "final_state": result.final_state,
        "rounds_used": result.rounds_used,
        "verdict": result.verdict,
        "per_category_totals": {
            category.value: failure_report.category_total(category)
            for category in CATEGORIES
        },
        "total_failures": failure_report.total,
    }

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "trace.jsonl").write_bytes(result.trace.to_jsonl())
    (out_dir / "failures.csv").write_bytes(emit_csv(failure_report))
    (out_dir / "summary.json").write_bytes(
        (json.dumps(summary, sort_keys=True, indent=2) + "\n").encode("utf-8")
    )
    logger.info("final state %s after %d round(s)", result.final_state, result.rounds_used)

    failed = result.final_state == exhaustion_terminal(defn.lifecycle)
    return EXIT_WORKFLOW_FAILED if failed else EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    reports = []
    for directory in (args.strict_dir, args.permissive_dir):
        csv_path = Path(directory) / "failures.csv"
        try:
            reports.append(parse_csv(csv_path.read_bytes()))
        except (OSError, SemapError) as exc:
            print(f"cannot read {csv_path}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    strict, permissive = reports
    try:
        deltas = compare_reports(strict, permissive)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE

    rows = [("category", "permissive", "strict", "delta_pct")]
    for category in CATEGORIES:
        rows.append((
            category.value,
            str(permissive.category_total(category)),
            str(strict.category_total(category)),
            f"{deltas[category.value]:.1f}",
        ))
    rows.append(("total", str(permissive.total), str(strict.total), f"{deltas['total']:.1f}"))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    for row in rows:
        print("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semap",
        description="Validate, simulate, and analyze contract-checked multi-agent workflows.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    validate = sub.add_parser("validate", help="validate a workflow file")
    validate.add_argument("workflow", help="path to a workflow JSON file")
    validate.set_defaults(handler=cmd_validate)

    run = sub.add_parser("run", help="run a scenario against a workflow")
    run.add_argument("--workflow", required=True)
    run.add_argument("--scenario", required=True)
    run.add_argument("--enforcement", choices=[e.value for e in Enforcement], default=None)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument(
        "--transport", choices=[t.value for t in Transport], default=Transport.IN_PROCESS.value
    )
    run.add_argument("--out", required=True, help="output directory")
    run.set_defaults(handler=cmd_run)

    rep = sub.add_parser("report", help="compare strict vs permissive failure reports")
    rep.add_argument("strict_dir")
    rep.add_argument("permissive_dir")
    rep.set_defaults(handler=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except WorkflowValidationError as exc:
        for error in exc.errors:
            print(f"{error.code}: {error.message}", file=sys.stderr)
        return EXIT_USAGE
    except SemapError as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
