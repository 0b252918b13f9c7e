"""Detection, false-positive and compliance metrics, ROC/AUC and seed aggregation."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from itertools import groupby
from typing import Iterable, Sequence

from .labels import Outcome


class UndefinedMetricError(ValueError):
    """A rate whose denominator is zero was requested."""


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def attacks(self) -> int:
        return self.tp + self.fn

    @property
    def legitimate(self) -> int:
        return self.fp + self.tn


@dataclass(frozen=True)
class RunMetrics:
    detection_rate: float
    false_positive_rate: float
    ecs: float
    confusion: ConfusionCounts
    auc: float
    events: int


METRIC_FIELDS = ("detection_rate", "false_positive_rate", "ecs", "auc")


@dataclass(frozen=True)
class SeedAggregate:
    mean: dict[str, float]
    std: dict[str, float]
    n_seeds: int


def detection_rate(c: ConfusionCounts) -> float:
    if c.attacks < 1:
        raise UndefinedMetricError("detection rate undefined: no attack events")
    return c.tp / c.attacks


def false_positive_rate(c: ConfusionCounts) -> float:
    if c.legitimate < 1:
        raise UndefinedMetricError("false positive rate undefined: no legitimate events")
    return c.fp / c.legitimate


def ecs(fpr: float) -> float:
    """Ethical compliance score, one minus the false positive rate."""
    if not 0.0 <= fpr <= 1.0:
        raise ValueError(f"fpr must lie in [0, 1], got {fpr}")
    return 1.0 - fpr


def confusion(records: Iterable) -> ConfusionCounts:
    """Tally the ``outcome`` field of decision records."""
    counts = {o: 0 for o in Outcome}
    for rec in records:
        counts[rec.outcome] += 1
    return ConfusionCounts(counts[Outcome.TP], counts[Outcome.FP], counts[Outcome.TN], counts[Outcome.FN])


def roc_auc(scored: Sequence[tuple[float, bool]]) -> tuple[list[tuple[float, float]], float]:
    """ROC curve and trapezoidal AUC for ``(score, is_attack)`` pairs.

    Higher score means more attack-like. Equal scores share one threshold
    step, so the area equals the Mann-Whitney statistic with ties counted as
    one half. The area is accumulated in integer units and divided once.
    """
    n_pos = sum(1 for _, is_attack in scored if is_attack)
    n_neg = len(scored) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("ROC needs at least one attack and one legitimate event")

    ordered = sorted(scored, key=lambda item: item[0], reverse=True)
    curve = [(0.0, 0.0)]
    tp = fp = 0
    twice_area = 0
    for _, group in groupby(ordered, key=lambda item: item[0]):
        d_tp = d_fp = 0
        for _, is_attack in group:
            if is_attack:
                d_tp += 1
            else:
                d_fp += 1
        twice_area += d_fp * (2 * tp + d_tp)
        tp += d_tp
        fp += d_fp
        curve.append((fp / n_neg, tp / n_pos))
    return curve, twice_area / (2 * n_pos * n_neg)


def moving_average(series: Sequence[float], window: int) -> list[float]:
    """Trailing mean with an expanding head; output length equals input length."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    out = []
    for i in range(len(series)):
        chunk = series[max(0, i - window + 1) : i + 1]
        mean = math.fsum(chunk) / len(chunk)
        # clamp away rounding so the mean never leaves the chunk's range
        out.append(min(max(mean, min(chunk)), max(chunk)))
    return out


def run_metrics(counts: ConfusionCounts, scored: Sequence[tuple[float, bool]]) -> RunMetrics:
    dr = detection_rate(counts)
    fpr = false_positive_rate(counts)
    _, auc = roc_auc(scored)
    return RunMetrics(dr, fpr, ecs(fpr), counts, auc, counts.total)


def aggregate_seeds(per_seed: Sequence[RunMetrics]) -> SeedAggregate:
    if len(per_seed) < 2:
        raise ValueError("aggregation needs at least two runs")
    mean = {}
    std = {}
    for name in METRIC_FIELDS:
        values = [getattr(m, name) for m in per_seed]
        mean[name] = statistics.mean(values)
        std[name] = statistics.stdev(values)
    return SeedAggregate(mean, std, len(per_seed))
