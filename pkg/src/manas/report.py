"""Render experiment results as markdown or CSV documents, and parse them back.

A CSV report is a sequence of blocks: a one-cell title row, a header row,
data rows, then a blank line. Every number is rendered to two decimals.
"""

from __future__ import annotations

import csv
import io
from typing import Sequence

from .harness import DISPLAY_NAMES, ExperimentResult, SweepTable

FORMATS = ("markdown", "csv")

PER_CLASS_TITLE = "Precision, recall and F1 per class"
AVERAGES_TITLE = "Macro and weighted averages"
ERRORS_TITLE = "Error rates and losses"
SWEEP_TITLE = "Test accuracy (%) by train/test split"
NEURAL_TITLE = "Neural model accuracy and loss"

PER_CLASS_COLUMNS = ("Algorithms", "Status", "Precision", "Recall", "F1-Score")
AVERAGES_COLUMNS = ("Algorithms", "Macro & Weighted average", "Precision", "Recall", "F1-Score")
ERRORS_COLUMNS = ("Algorithm", "FP", "FN", "NPV", "FDR", "MAE", "MSE", "RMSE", "LL")
NEURAL_COLUMNS = ("Models", "Train Accuracy", "Train Loss", "Test Accuracy", "Test Loss", "All Accuracy")
FIGURE_COLUMNS = ("Algorithm", "Accuracy", "Sensitivity", "Specificity")


def fmt(x: float) -> str:
    return f"{x:.2f}"


def split_label(fraction: float) -> str:
    return f"Train = {fraction:.2f} Test = {1.0 - fraction:.2f}"


def sweep_columns(sweep: SweepTable) -> tuple[str, ...]:
    return ("Train/Test Size", *(DISPLAY_NAMES[a] for a in sweep.algorithms))


def all_accuracy(r: ExperimentResult) -> float:
    """Accuracy over train and test examples together, in percent."""
    n = r.n_train + r.n_test
    return 100.0 * (r.train_accuracy * r.n_train + r.accuracy * r.n_test) / n


def _sections(results: Sequence[ExperimentResult], sweep: SweepTable | None):
    per_class, averages, errors = [], [], []
    for r in results:
        name = r.display_name
        for status in (0, 1):
            m = r.class_report[status]
            per_class.append([name if status == 0 else "", str(status),
                              fmt(m.precision), fmt(m.recall), fmt(m.f1)])
        for i, (label, a) in enumerate((("Macro avg.", r.aggregate.macro),
                                        ("Weighted avg.", r.aggregate.weighted))):
            averages.append([name if i == 0 else "", label, fmt(a.precision), fmt(a.recall), fmt(a.f1)])
        e = r.errors
        errors.append([name, *(fmt(v) for v in (e.fpr, e.fnr, e.npv, e.fdr, e.mae, e.mse, e.rmse, e.log_loss))])
    out = [(PER_CLASS_TITLE, PER_CLASS_COLUMNS, per_class),
           (AVERAGES_TITLE, AVERAGES_COLUMNS, averages),
           (ERRORS_TITLE, ERRORS_COLUMNS, errors)]
    if sweep is not None:
        rows = [[split_label(f), *(fmt(v) for v in cells)] for f, cells in sweep.rows()]
        out.append((SWEEP_TITLE, sweep_columns(sweep), rows))
    neural = [r for r in results if r.history is not None]
    if neural:
        rows = [[r.display_name, fmt(r.train_accuracy), fmt(r.train_loss), fmt(r.accuracy),
                 fmt(r.test_loss), fmt(all_accuracy(r))] for r in neural]
        out.append((NEURAL_TITLE, NEURAL_COLUMNS, rows))
    return out


def _markdown_table(header, rows) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(row) + " |" for row in rows]
    return "\n".join(lines)


def render_report(results: Sequence[ExperimentResult], fmt: str = "markdown",
                  sweep: SweepTable | None = None) -> str:
    """Render per-class, average and error sections for ``results``.

    A split-sweep section is added when ``sweep`` is given and a neural
    section when any result carries a training history. ``results`` may be
    empty only when a sweep is supplied.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown report format {fmt!r}")
    if not results and sweep is None:
        raise ValueError("nothing to render")
    sections = _sections(results, sweep)
    if not results:
        sections = [s for s in sections if s[0] == SWEEP_TITLE]
    if fmt == "markdown":
        parts = [f"## {title}\n\n{_markdown_table(header, rows)}\n" for title, header, rows in sections]
        return "\n".join(parts)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for title, header, rows in sections:
        w.writerow([title])
        w.writerow(header)
        w.writerows(rows)
        w.writerow([])
    return buf.getvalue()


def parse_report_csv(text: str) -> dict[str, tuple[list[str], list[list[str]]]]:
    """Inverse of the CSV renderer: ``{title: (header, rows)}``."""
    sections: dict[str, tuple[list[str], list[list[str]]]] = {}
    block: list[list[str]] = []
    for row in list(csv.reader(io.StringIO(text))) + [[]]:
        if row:
            block.append(row)
            continue
        if block:
            if len(block) < 2 or len(block[0]) != 1:
                raise ValueError(f"malformed report block starting {block[0]!r}")
            sections[block[0][0]] = (block[1], block[2:])
            block = []
    return sections


def parse_report_markdown(text: str) -> dict[str, tuple[list[str], list[list[str]]]]:
    """Read back the pipe tables of a markdown report, keyed by heading."""
    sections: dict[str, tuple[list[str], list[list[str]]]] = {}
    title = None
    table: list[list[str]] = []

    def flush():
        if title is not None and table:
            sections[title] = (table[0], table[2:])

    for line in text.splitlines():
        if line.startswith("## "):
            flush()
            title, table = line[3:].strip(), []
        elif line.startswith("|"):
            table.append([c.strip() for c in line.strip().strip("|").split("|")])
    flush()
    return sections


def render_figures_csv(results: Sequence[ExperimentResult]) -> str:
    """Plot-ready accuracy, sensitivity and specificity per algorithm."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIGURE_COLUMNS)
    for r in results:
        w.writerow([r.display_name, fmt(100.0 * r.accuracy), fmt(r.errors.sensitivity),
                    fmt(r.errors.specificity)])
    return buf.getvalue()


def render_wordfreq_csv(ranked: Sequence[tuple[str, int]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "token", "count"])
    for i, (tok, n) in enumerate(ranked, 1):
        w.writerow([i, tok, n])
    return buf.getvalue()
