"""Text file formats written by the CLI: metrics, traces, Q-tables, reports."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .agents import N_ACTIONS, N_STATES
from .engine import ComparisonReport, EpisodeStats
from .labels import TrafficClass
from .metrics import METRIC_FIELDS, RunMetrics, moving_average

TRACE_HEADER = "episode,accuracy,moving_avg,cum_reward"
COMPLIANCE_HEADER = "episode,ecs_governed,ma_governed,ecs_ungoverned,ma_ungoverned"


class FileFormatError(ValueError):
    pass


def real(x: float) -> str:
    text = f"{x:.6f}"
    return "0.000000" if text == "-0.000000" else text


def write_text(path: str | Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# -- metrics summary ---------------------------------------------------------


def format_metrics(m: RunMetrics) -> str:
    c = m.confusion
    lines = [
        f"events={m.events}",
        f"tp={c.tp}",
        f"fp={c.fp}",
        f"tn={c.tn}",
        f"fn={c.fn}",
        f"detection_rate={real(m.detection_rate)}",
        f"false_positive_rate={real(m.false_positive_rate)}",
        f"ecs={real(m.ecs)}",
        f"auc={real(m.auc)}",
    ]
    return "\n".join(lines) + "\n"


def parse_metrics(text: str) -> dict[str, float]:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise FileFormatError(f"line {lineno}: expected key=value")
        out[key] = float(value)
    return out


# -- training trace ----------------------------------------------------------


def format_trace(episodes: Sequence[EpisodeStats], ma_window: int) -> str:
    acc = [ep.accuracy for ep in episodes]
    ma = moving_average(acc, ma_window)
    lines = [TRACE_HEADER]
    for ep, a, m in zip(episodes, acc, ma):
        lines.append(f"{ep.episode},{real(a)},{real(m)},{ep.cumulative_reward}")
    return "\n".join(lines) + "\n"


def format_compliance(governed: Sequence[float], ungoverned: Sequence[float], ma_window: int) -> str:
    if len(governed) != len(ungoverned):
        raise ValueError("compliance series differ in length")
    ma_g = moving_average(governed, ma_window)
    ma_u = moving_average(ungoverned, ma_window)
    lines = [COMPLIANCE_HEADER]
    for i, row in enumerate(zip(governed, ma_g, ungoverned, ma_u)):
        lines.append(f"{i}," + ",".join(real(v) for v in row))
    return "\n".join(lines) + "\n"


def read_columns(path: str | Path, header: str) -> dict[str, list[float]]:
    """Read a numeric CSV with a fixed header into named columns."""
    names = header.split(",")
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != header:
        raise FileFormatError(f"{path}: line 1: expected header {header!r}")
    cols: dict[str, list[float]] = {n: [] for n in names}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(names):
            raise FileFormatError(f"{path}: line {lineno}: expected {len(names)} fields, got {len(parts)}")
        try:
            for n, p in zip(names, parts):
                cols[n].append(float(p))
        except ValueError:
            raise FileFormatError(f"{path}: line {lineno}: non-numeric field") from None
    return cols


# -- Q-table -----------------------------------------------------------------


def format_qtable(q: np.ndarray) -> str:
    # repr keeps every bit so a reloaded table decides exactly like the original
    return "".join(f"{cls.token},{float(q[cls, 0])!r},{float(q[cls, 1])!r}\n" for cls in TrafficClass)


def parse_qtable(text: str) -> np.ndarray:
    lines = [line for line in text.splitlines() if line.strip()]
    if len(lines) != N_STATES:
        raise FileFormatError(f"Q-table needs {N_STATES} lines, got {len(lines)}")
    q = np.full((N_STATES, N_ACTIONS), np.nan)
    for lineno, line in enumerate(lines, start=1):
        parts = line.split(",")
        if len(parts) != 3:
            raise FileFormatError(f"Q-table line {lineno}: expected class,q_allow,q_block")
        try:
            cls = TrafficClass.parse(parts[0].strip())
            values = [float(parts[1]), float(parts[2])]
        except ValueError as exc:
            raise FileFormatError(f"Q-table line {lineno}: {exc}") from None
        if not all(math.isfinite(v) for v in values):
            raise FileFormatError(f"Q-table line {lineno}: non-finite value")
        if not np.isnan(q[cls, 0]):
            raise FileFormatError(f"Q-table line {lineno}: duplicate class {cls.token}")
        q[cls] = values
    return q


def read_qtable(path: str | Path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return parse_qtable(fh.read())


# -- comparison report -------------------------------------------------------

_ROWS = (
    ("Detection Rate (%)", "detection_rate"),
    ("False Positive Rate (%)", "false_positive_rate"),
    ("Ethical Compliance (%)", "ecs"),
    ("AUC", "auc"),
)


def _pct(x: float) -> str:
    return f"{100.0 * x:.1f}"


def _cell(name: str, value: float) -> str:
    return f"{value:.2f}" if name == "auc" else _pct(value)


def format_report(report: ComparisonReport) -> str:
    t1 = report.table1
    arms = [("Agentic (greedy)", "agentic"), ("Baseline", "baseline")]
    if report.explore is not None:
        arms.insert(1, (f"Agentic (eps={report.explore_epsilon:g})", "explore"))

    out = [f"Table 1: single run (seed {t1.seed}, greedy evaluation, {t1.agentic.metrics.events} events)"]
    out.append(f"{'Metric':<26}{'Traditional System':>20}{'Agentic AI':>14}")
    for label, name in _ROWS:
        b = getattr(t1.baseline.metrics, name)
        a = getattr(t1.agentic.metrics, name)
        out.append(f"{label:<26}{_cell(name, b):>20}{_cell(name, a):>14}")

    out.append("")
    out.append(f"Table 2: mean ± std over {len(report.seeds)} seeds ({report.seeds[0]}..{report.seeds[-1]})")
    out.append(f"{'Metric':<26}" + "".join(f"{title:>22}" for title, _ in arms))
    for label, name in _ROWS:
        cells = []
        for _, arm in arms:
            agg = getattr(report, arm)
            if name == "auc":
                cells.append(f"{agg.mean[name]:.2f} ± {agg.std[name]:.2f}")
            else:
                cells.append(f"{_pct(agg.mean[name])} ± {_pct(agg.std[name])}")
        out.append(f"{label:<26}" + "".join(f"{c:>22}" for c in cells))

    out.append("")
    out.append("Per-seed results")
    head = f"{'seed':>4}  {'arm':<10}" + "".join(f"{n:>21}" for n in METRIC_FIELDS)
    out.append(head + f"{'tp':>7}{'fp':>7}{'tn':>7}{'fn':>7}")
    for res in report.per_seed:
        for arm in ("agentic", "explore", "baseline"):
            ev = getattr(res, arm)
            if ev is None:
                continue
            m = ev.metrics
            c = m.confusion
            vals = "".join(f"{real(getattr(m, n)):>21}" for n in METRIC_FIELDS)
            out.append(f"{res.seed:>4}  {arm:<10}{vals}{c.tp:>7}{c.fp:>7}{c.tn:>7}{c.fn:>7}")
    return "\n".join(out) + "\n"
