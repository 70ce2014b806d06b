"""Command-line front end.

Exit codes: 0 when every contract holds, 2 on a contract violation, 1 on a
usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .sources import write_matrix_csv
from .quantize import materialize
from .tasks import TASKS, ConfigError, ExperimentConfig, default_config, dumps_report, run_task


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lattice-pdo", description="Pseudo-difference operator calculus on Z^n")
    sub = parser.add_subparsers(dest="task", required=True, parser_class=_Parser)
    for task in TASKS:
        p = sub.add_parser(task, help=f"run the {task} pipeline")
        p.add_argument("--config", type=Path, help="JSON experiment config (defaults to the built-in example)")
        p.add_argument("--out", type=Path, default=Path("reports"), help="output directory")
        p.add_argument("--seed", type=int, default=None, help="random seed (overrides the config)")
        p.add_argument("--csv", action="store_true", help="also write kernel and symbol CSV files")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            try:
                raw = json.loads(args.config.read_text())
            except (OSError, json.JSONDecodeError) as err:
                raise ConfigError(f"cannot read config {args.config}: {err}") from None
        else:
            raw = default_config(args.task)
        cfg = ExperimentConfig.from_dict(raw, task=args.task, seed=args.seed)
        outcome = run_task(cfg)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1

    args.out.mkdir(parents=True, exist_ok=True)
    report_path = args.out / f"{args.task}.json"
    report_path.write_text(dumps_report(outcome.report), encoding="utf-8")
    if args.csv:
        for K, sigma in outcome.matrices.items():
            write_matrix_csv(materialize(sigma), args.out / f"{args.task}_K{K}_kernel.csv")
            N = sigma.box.size
            write_matrix_csv(np.reshape(sigma.values, (N, N)), args.out / f"{args.task}_K{K}_symbol.csv")
    for line in outcome.violations:
        print(f"VIOLATION: {line}", file=sys.stderr)
    print(f"{args.task}: {outcome.report['verdict']} -> {report_path}")
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
