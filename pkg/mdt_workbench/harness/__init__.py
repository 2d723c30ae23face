"""Experiment orchestration: artifact stamps, pipeline stages, reports and the CLI."""

from mdt_workbench.harness.experiment import run_experiment
from mdt_workbench.harness.report import emit_report, format_text_report
from mdt_workbench.harness.stages import STAGES, StageContext, run_stage
