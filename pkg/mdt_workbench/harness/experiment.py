"""
MDT Workbench - Experiment Runner

Runs every required stage in order, skipping those whose stamps are
current, and returns the experiment report.
"""

import platform

from mdt_workbench.harness.stages import StageContext, load_summary, required_stages, run_stage
from mdt_workbench.layer.logger import get_logger
from mdt_workbench.models.experiment import ExperimentConfig, ExperimentReport

logger = get_logger(__name__)


def run_experiment(
    cfg: ExperimentConfig, workers: int | None = None, force: bool = False
) -> ExperimentReport:
    """Generate/load corpus, train, decode, score and report.

    Args:
        cfg: Experiment configuration
        workers: Worker processes (default: ``cfg.experiment.workers``);
            results do not depend on this value
        force: Rerun every stage even when its stamp is current

    Returns:
        The report, with per-stage runtime metadata

    Raises:
        StageError: A stage failed; artifacts of earlier stages are kept
    """
    ctx = StageContext(cfg, workers or cfg.experiment.workers)
    stages = required_stages(cfg)
    logger.info(
        "Experiment started",
        output_dir=str(ctx.store.root),
        seed=cfg.seed,
        stages=stages,
        workers=ctx.workers,
    )
    ctx.runtime.update(
        {"seed": cfg.seed, "workers": ctx.workers, "python": platform.python_version(), "stages": {}}
    )
    with logger.timed("Experiment finished") as finished:
        for name in stages:
            outcome = run_stage(name, ctx, force)
            ctx.runtime["stages"][name] = {"ran": outcome.ran, "elapsed_s": round(outcome.elapsed_s, 3)}
        finished["stages_run"] = [name for name, info in ctx.runtime["stages"].items() if info["ran"]]
    runtime = {**ctx.runtime, "elapsed_s": finished["elapsed_s"]}
    return load_summary(ctx.store).model_copy(update={"runtime": runtime})
