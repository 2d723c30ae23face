"""
MDT Workbench - Report Writer

Renders an ExperimentReport as a fixed-width accuracy table
(report.txt), one CSV row per (SNR, method, metric) (report.csv), plot
data (curves.dat) and the full report with runtime metadata
(report.json). Everything except report.json is byte-deterministic.
"""

import csv
import io
import math
from pathlib import Path

from mdt_workbench.layer.logger import get_logger
from mdt_workbench.models.experiment import ALL_NOISE, ExperimentReport, Method
from mdt_workbench.models.validators import format_snr, snr_label

logger = get_logger(__name__)

CLEAN_PLOT_X = 25.0
METRICS = ("accuracy", "isolated_reliable", "reliable_fraction")
DELTA_ROW = "delta acc."
POOLED_ROW = "pooled base."
_LABEL_WIDTH = 14
_CELL_WIDTH = 8


def _row(label: str, cells: list[str]) -> str:
    return f"{label:<{_LABEL_WIDTH}}" + "".join(f"{cell:>{_CELL_WIDTH}}" for cell in cells)


def _fmt_tenths(value: int) -> str:
    return f"{value / 10:.1f}"


def accuracy_table(report: ExperimentReport, snrs: list[float], noise_kind: str = ALL_NOISE) -> list[str]:
    """Method rows x SNR columns, plus the delta row when both oracle methods ran."""
    lines = [_row("SNR (dB)", [snr_label(s) for s in snrs])]
    for method in report.methods:
        cells = [_fmt_tenths(report.accuracy_tenths(method, s, noise_kind)) for s in snrs]
        lines.append(_row(method.row_label, cells))
    if report.has_delta_row:
        lines.append(_row(DELTA_ROW, [_fmt_tenths(report.delta_tenths(s, noise_kind)) for s in snrs]))
    return lines


def format_text_report(report: ExperimentReport, per_noise_tables: bool = True) -> str:
    """Plain-text report; contains nothing that varies between identical runs."""
    hyp = report.hypothesis
    lines = [
        f"Word accuracy (%), all noise kinds, seed {report.seed}",
        "",
        *accuracy_table(report, report.snrs),
        "",
        "Isolated reliable cells per utterance",
        _row("SNR (dB)", [snr_label(s) for s in report.snrs]),
    ]
    for method in report.methods:
        cells = [f"{report.result(method, s).isolated_reliable:.1f}" for s in report.snrs]
        lines.append(_row(method.row_label, cells))

    lines += ["", "Reliable fraction"]
    for method in report.methods:
        cells = [f"{report.result(method, s).reliable_fraction:.3f}" for s in report.snrs]
        lines.append(_row(method.row_label, cells))

    estimated = [m for m in report.methods if m is not Method.CLASSICAL_ORACLE]
    if estimated:
        lines += ["", "Static mask agreement with oracle labels"]
        for method in estimated:
            cells = [f"{report.result(method, s).label_agreement:.3f}" for s in report.snrs]
            lines.append(_row(method.row_label, cells))
        pooled = [report.result(estimated[0], s).pooled_agreement for s in report.snrs]
        known = [p for p in pooled if p is not None]
        if len(known) == len(pooled):
            lines.append(_row(POOLED_ROW, [f"{p:.3f}" for p in known]))
    if Method.STATE_DEPENDENT_ORACLE in report.methods:
        method = Method.STATE_DEPENDENT_ORACLE
        lines += ["", "Utterances without an oracle alignment (classical decode path used)"]
        lines.append(_row(method.row_label, [str(report.result(method, s).oracle_fallbacks) for s in report.snrs]))

    lines += [
        "",
        f"Mask hypotheses: 2^{hyp.n_bands} = {hyp.possible_masks} possible masks per frame, "
        f"S_total = {hyp.n_states} state masks per frame",
        f"State-conditioned mask evaluations: T x S_total = {hyp.frames} x {hyp.n_states} = {hyp.mask_evaluations}",
    ]
    if report.bank is not None:
        bank = report.bank
        lines.append(
            f"Estimator bank: {bank.slots} slots ({bank.trained} trained, "
            f"{bank.constant} constant, {bank.fallback} fallback)"
        )

    noisy_snrs = [s for s in report.snrs if not math.isinf(s)]
    if per_noise_tables and noisy_snrs:
        for kind in report.noise_kinds:
            lines += ["", f"Word accuracy (%), noise: {kind}", *accuracy_table(report, noisy_snrs, kind)]
    return "\n".join(lines) + "\n"


def format_csv(report: ExperimentReport) -> str:
    """Rows (snr, method, metric, value) for the all-noise cells."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["snr", "method", "metric", "value"])
    for snr in report.snrs:
        for method in report.methods:
            result = report.result(method, snr)
            values = {
                "accuracy": _fmt_tenths(report.accuracy_tenths(method, snr)),
                "isolated_reliable": f"{result.isolated_reliable:.4f}",
                "reliable_fraction": f"{result.reliable_fraction:.4f}",
            }
            for metric in METRICS:
                writer.writerow([format_snr(snr), method.value, metric, values[metric]])
    return buffer.getvalue()


def format_curves(report: ExperimentReport) -> str:
    """One block per method of ``snr accuracy`` pairs; clean is plotted at x = 25.

    Blocks are separated by two blank lines so plotting tools can index them.
    """
    blocks = []
    for method in report.methods:
        lines = [f"# {method.value} ({method.row_label})", "# snr_db accuracy"]
        for snr in report.snrs:
            x = CLEAN_PLOT_X if math.isinf(snr) else snr
            lines.append(f"{x:g} {_fmt_tenths(report.accuracy_tenths(method, snr))}")
        blocks.append("\n".join(lines))
    header = f"# word accuracy vs SNR, seed {report.seed}; clean at {CLEAN_PLOT_X:g}\n"
    return header + "\n\n\n".join(blocks) + "\n"


def emit_report(report: ExperimentReport, out_dir: Path, per_noise_tables: bool = True) -> list[Path]:
    """Write report.txt, report.csv, curves.dat and report.json under ``out_dir``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {
        "report.txt": format_text_report(report, per_noise_tables),
        "report.csv": format_csv(report),
        "curves.dat": format_curves(report),
        "report.json": report.model_dump_json(indent=2) + "\n",
    }
    written = []
    for name, text in files.items():
        path = out_dir / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    if report.has_delta_row:
        deltas = {snr_label(s): report.delta_tenths(s) / 10 for s in report.snrs}
        logger.info("Report written", out_dir=str(out_dir), delta_acc=deltas)
    else:
        logger.info("Report written", out_dir=str(out_dir), methods=[m.value for m in report.methods])
    return written

