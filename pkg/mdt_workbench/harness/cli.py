"""
MDT Workbench - Command Line Interface

One subcommand per pipeline stage plus ``run-all``. Every subcommand
accepts ``--config``, ``--seed`` and ``--workers``. Exit status 0 on
success, 1 on usage or validation errors, 2 on runtime failures.
"""

import argparse
import sys
from pathlib import Path
from typing import NoReturn

from mdt_workbench.config import RuntimeSettings, load_experiment_config
from mdt_workbench.harness.experiment import run_experiment
from mdt_workbench.harness.report import format_text_report
from mdt_workbench.harness.stages import STAGES, StageContext, run_stage
from mdt_workbench.layer.error_handler import handle_errors
from mdt_workbench.layer.logger import set_global_level
from mdt_workbench.layer.status import ExitStatus
from mdt_workbench.models.experiment import ExperimentConfig

STAGE_HELP = {
    "gen-corpus": "synthesize the train/test corpus and its manifest",
    "features": "log-mel, noise and mask-estimation features for every utterance",
    "train-hmm": "train the word GMM-HMM set on multi-condition data",
    "oracle-masks": "classical oracle masks (static + delta)",
    "align": "oracle state transcriptions by forced alignment",
    "train-estimators": "train the per-(state, band) SVM bank",
    "decode": "decode the test set with every configured method",
    "evaluate": "score hypotheses per SNR, method and noise kind",
    "report": "write report.txt, report.csv, curves.dat and report.json",
}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with the validation status."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(ExitStatus.VALIDATION_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="experiment config (default: bundled desk.cfg)")
    common.add_argument("--seed", type=int, default=None, help="override the master seed")
    common.add_argument("--workers", type=int, default=None, help="worker processes")
    common.add_argument("--force", action="store_true", help="rerun even if artifacts are up to date")
    common.add_argument(
        "--log-level", type=str.upper, default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
    )

    parser = _Parser(prog="mdt-workbench", description="Missing-data ASR workbench")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in STAGES:
        commands.add_parser(name, parents=[common], help=STAGE_HELP[name])
    commands.add_parser("run-all", parents=[common], help="run every stage and print the report")
    return parser


def _config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_experiment_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _workers(args: argparse.Namespace, cfg: ExperimentConfig, settings: RuntimeSettings) -> int:
    workers = args.workers or settings.workers or cfg.experiment.workers
    return max(1, workers)


@handle_errors
def cmd_stage(args: argparse.Namespace, settings: RuntimeSettings) -> ExitStatus:
    cfg = _config(args)
    ctx = StageContext(cfg, _workers(args, cfg, settings))
    outcome = run_stage(args.command, ctx, args.force)
    state = "done" if outcome.ran else "up to date"
    print(f"{args.command}: {state} ({ctx.store.root})")
    return ExitStatus.OK


@handle_errors
def cmd_run_all(args: argparse.Namespace, settings: RuntimeSettings) -> ExitStatus:
    cfg = _config(args)
    report = run_experiment(cfg, _workers(args, cfg, settings), args.force)
    sys.stdout.write(format_text_report(report, cfg.experiment.per_noise_tables))
    return ExitStatus.OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    settings = RuntimeSettings()
    set_global_level(args.log_level or settings.log_level)
    if args.command == "run-all":
        return int(cmd_run_all(args, settings))
    return int(cmd_stage(args, settings))


if __name__ == "__main__":
    sys.exit(main())
