"""Append-only decision log with a byte-exact CSV format, overrides and replay.

Every processed event produces one :class:`DecisionRecord`. The log checks
each record against the reward and outcome tables as it is appended, so a
log that exists is a consistent log. ``replay`` recomputes run metrics from
records alone and is the audit path for exported files.
"""

from __future__ import annotations

import csv
import io
import re
from collections import Counter
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Iterator, TextIO

from . import metrics
from .agents import reward as reward_for
from .labels import Action, Outcome, Phase, TrafficClass, Verdict, classify

CSV_COLUMNS = (
    "run_id",
    "seed",
    "phase",
    "episode",
    "step",
    "event_id",
    "true_class",
    "source",
    "destination",
    "observed_state",
    "proposed_action",
    "governance_verdict",
    "human_override",
    "final_action",
    "reward",
    "outcome",
    "q_allow",
    "q_block",
)
CSV_HEADER = ",".join(CSV_COLUMNS)


class LogFormatError(ValueError):
    """A CSV line could not be parsed into a record."""


class LogConsistencyError(ValueError):
    """A record contradicts the reward/outcome tables or the log ordering."""


class OverrideError(ValueError):
    """An override targets an event that was already processed."""


@dataclass(frozen=True, slots=True)
class DecisionRecord:
    run_id: str
    seed: int
    phase: Phase
    episode: int
    step: int
    event_id: int
    true_class: TrafficClass
    source: str
    destination: str
    observed_state: TrafficClass
    proposed_action: Action
    governance_verdict: Verdict
    human_override: Action | None
    final_action: Action
    reward: int
    outcome: Outcome
    q_allow: float
    q_block: float

    @property
    def margin(self) -> float:
        return self.q_block - self.q_allow


def round6(x: float) -> float:
    """Round to the CSV's six decimals; also folds negative zero."""
    return round(float(x), 6) + 0.0


def check_record(rec: DecisionRecord) -> None:
    """Raise :class:`LogConsistencyError` if ``rec`` breaks a record invariant."""
    where = f"event_id {rec.event_id}"
    expected_outcome = classify(rec.true_class, rec.final_action)
    if rec.outcome is not expected_outcome:
        raise LogConsistencyError(
            f"{where}: outcome {rec.outcome.token} inconsistent with "
            f"{rec.true_class.token}/{rec.final_action.token} (expected {expected_outcome.token})"
        )
    expected_reward = reward_for(rec.true_class, rec.final_action)
    if rec.reward != expected_reward:
        raise LogConsistencyError(f"{where}: reward {rec.reward} inconsistent, expected {expected_reward}")
    if rec.human_override is not None:
        if rec.final_action is not rec.human_override:
            raise LogConsistencyError(f"{where}: final_action differs from human_override")
        if rec.governance_verdict is not Verdict.NOT_APPLICABLE:
            raise LogConsistencyError(f"{where}: overridden record must carry verdict n/a")
    elif rec.governance_verdict is Verdict.VETOED:
        if rec.proposed_action is not Action.BLOCK or rec.final_action is not Action.ALLOW:
            raise LogConsistencyError(f"{where}: veto must turn a proposed block into allow")
    elif rec.final_action is not rec.proposed_action:
        raise LogConsistencyError(f"{where}: final_action differs from proposed_action without veto or override")


class DecisionLog:
    """Ordered, append-only sequence of validated records."""

    def __init__(self, records: Iterable[DecisionRecord] = ()):
        self._records: list[DecisionRecord] = []
        self._last_id: dict[tuple[str, Phase], int] = {}
        for rec in records:
            self.append(rec)

    def append(self, record: DecisionRecord) -> "DecisionLog":
        check_record(record)
        key = (record.run_id, record.phase)
        last = self._last_id.get(key)
        if last is not None and record.event_id <= last:
            raise LogConsistencyError(
                f"event_id {record.event_id}: not increasing within run {record.run_id!r} "
                f"phase {record.phase.token} (previous {last})"
            )
        self._last_id[key] = record.event_id
        self._records.append(record)
        return self

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[DecisionRecord]:
        return iter(self._records)

    def __getitem__(self, index):
        return self._records[index]

    def __eq__(self, other) -> bool:
        if not isinstance(other, DecisionLog):
            return NotImplemented
        return self._records == other._records

    def __repr__(self) -> str:
        return f"DecisionLog({len(self._records)} records)"


class Oversight:
    """One run's log plus the forward-only override book."""

    def __init__(self, log: DecisionLog | None = None, overrides: dict[int, Action] | None = None):
        self.log = log if log is not None else DecisionLog()
        self._overrides: dict[int, Action] = {}
        self._processed: int | None = None
        for event_id, action in (overrides or {}).items():
            self.register_override(event_id, action)

    def register_override(self, event_id: int, action: Action) -> None:
        if self._processed is not None and event_id <= self._processed:
            raise OverrideError(f"event {event_id} already processed; the log cannot be rewritten")
        self._overrides[event_id] = Action(action)

    def override_for(self, event_id: int) -> Action | None:
        return self._overrides.get(event_id)

    def append(self, record: DecisionRecord) -> None:
        self.log.append(record)
        self._processed = record.event_id


# -- CSV ---------------------------------------------------------------------

_INT = re.compile(r"-?[0-9]+")
_REAL = re.compile(r"-?[0-9]+\.[0-9]{6}")


def _fmt_real(x: float) -> str:
    text = f"{x:.6f}"
    return "0.000000" if text == "-0.000000" else text


def _row(rec: DecisionRecord) -> list[str]:
    return [
        rec.run_id,
        str(rec.seed),
        rec.phase.token,
        str(rec.episode),
        str(rec.step),
        str(rec.event_id),
        rec.true_class.token,
        rec.source,
        rec.destination,
        rec.observed_state.token,
        rec.proposed_action.token,
        rec.governance_verdict.token,
        "" if rec.human_override is None else rec.human_override.token,
        rec.final_action.token,
        str(rec.reward),
        rec.outcome.token,
        _fmt_real(rec.q_allow),
        _fmt_real(rec.q_block),
    ]


def export_csv(log: Iterable[DecisionRecord], destination: TextIO) -> None:
    """Write the header and one row per record, LF-terminated.

    ``destination`` should be opened with ``newline=""`` and UTF-8 encoding.
    """
    writer = csv.writer(destination, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in log:
        writer.writerow(_row(rec))


def export_text(log: Iterable[DecisionRecord]) -> str:
    buf = io.StringIO(newline="")
    export_csv(log, buf)
    return buf.getvalue()


def write_csv(log: Iterable[DecisionRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        export_csv(log, fh)


def _parse_int(text: str) -> int:
    if not _INT.fullmatch(text):
        raise ValueError(f"not an integer: {text!r}")
    return int(text)


def _parse_real(text: str) -> float:
    if not _REAL.fullmatch(text):
        raise ValueError(f"not a six-decimal real: {text!r}")
    return float(text)


def _parse_node(text: str) -> str:
    if not text:
        raise ValueError("empty node id")
    return text


_PARSERS = {
    "run_id": _parse_node,
    "seed": _parse_int,
    "phase": Phase.parse,
    "episode": _parse_int,
    "step": _parse_int,
    "event_id": _parse_int,
    "true_class": TrafficClass.parse,
    "source": _parse_node,
    "destination": _parse_node,
    "observed_state": TrafficClass.parse,
    "proposed_action": Action.parse,
    "governance_verdict": Verdict.parse,
    "human_override": lambda t: None if t == "" else Action.parse(t),
    "final_action": Action.parse,
    "reward": _parse_int,
    "outcome": Outcome.parse,
    "q_allow": _parse_real,
    "q_block": _parse_real,
}
assert tuple(_PARSERS) == CSV_COLUMNS == tuple(f.name for f in fields(DecisionRecord))


def import_csv(source: TextIO) -> DecisionLog:
    """Parse a log written by :func:`export_csv`; errors name the line."""
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise LogFormatError("line 1: missing header") from None
    if tuple(header) != CSV_COLUMNS:
        raise LogFormatError(f"line 1: malformed header {','.join(header)!r}")

    log = DecisionLog()
    for row in reader:
        line = reader.line_num
        if len(row) != len(CSV_COLUMNS):
            raise LogFormatError(f"line {line}: expected {len(CSV_COLUMNS)} fields, got {len(row)}")
        values = {}
        for name, text in zip(CSV_COLUMNS, row):
            try:
                values[name] = _PARSERS[name](text)
            except ValueError as exc:
                raise LogFormatError(f"line {line}: field {name}: {exc}") from None
        try:
            log.append(DecisionRecord(**values))
        except LogConsistencyError as exc:
            raise LogConsistencyError(f"line {line}: {exc}") from None
    return log


def import_text(text: str) -> DecisionLog:
    return import_csv(io.StringIO(text, newline=""))


def read_csv(path: str | Path) -> DecisionLog:
    with open(path, encoding="utf-8", newline="") as fh:
        return import_csv(fh)


def load_overrides(source: TextIO) -> dict[int, Action]:
    """Read ``event_id,action`` lines; blank lines and ``#`` comments are skipped."""
    out: dict[int, Action] = {}
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        try:
            if len(parts) != 2:
                raise ValueError(f"expected 'event_id,action', got {line!r}")
            event_id = _parse_int(parts[0])
            if event_id < 0:
                raise ValueError(f"negative event id {event_id}")
            if event_id in out:
                raise ValueError(f"duplicate override for event {event_id}")
            out[event_id] = Action.parse(parts[1])
        except ValueError as exc:
            raise LogFormatError(f"line {lineno}: {exc}") from None
    return out


# -- audit -------------------------------------------------------------------


def replay(log: Iterable[DecisionRecord]) -> metrics.RunMetrics:
    """Recompute evaluation metrics from the log's eval records alone."""
    records = [rec for rec in log if rec.phase is Phase.EVAL]
    if not records:
        raise metrics.UndefinedMetricError("log has no eval records to replay")
    run_ids = {rec.run_id for rec in records}
    if len(run_ids) > 1:
        raise LogConsistencyError(f"eval records span several runs: {sorted(run_ids)}")
    for rec in records:
        check_record(rec)
    counts = metrics.confusion(records)
    scored = [(rec.margin, rec.true_class.is_attack) for rec in records]
    return metrics.run_metrics(counts, scored)


@dataclass(frozen=True)
class AuditSummary:
    records: int
    outcomes: dict[str, int]
    interventions: int
    overrides: int
    per_class: dict[str, dict[str, int]]
    # Share of decisions that were not unjustified blocks of legitimate
    # traffic; an alternate reading of compliance, distinct from 1 - FPR.
    adherence: float


def audit_summary(log: Iterable[DecisionRecord]) -> AuditSummary:
    records = list(log)
    outcomes = Counter(rec.outcome.token for rec in records)
    per_class = {cls.token: {a.token: 0 for a in Action} for cls in TrafficClass}
    for rec in records:
        per_class[rec.true_class.token][rec.final_action.token] += 1
    n = len(records)
    fp = outcomes.get(Outcome.FP.token, 0)
    return AuditSummary(
        records=n,
        outcomes={o.token: outcomes.get(o.token, 0) for o in Outcome},
        interventions=sum(rec.governance_verdict is Verdict.VETOED for rec in records),
        overrides=sum(rec.human_override is not None for rec in records),
        per_class=per_class,
        adherence=(n - fp) / n if n else 0.0,
    )
