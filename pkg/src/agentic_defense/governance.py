"""Veto layer that keeps the realized false-positive rate under a cap.

The layer watches the most recent ``window`` legitimate events whose true
label has come back (one step after the decision) and converts a proposed
Block into Allow while the blocked share of that window sits at or above
``fpr_cap``. It never turns an Allow into a Block.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .labels import Action, TrafficClass, Verdict


@dataclass(frozen=True)
class GovernancePolicy:
    fpr_cap: float = 0.30
    window: int = 100
    warmup: int = 20
    enabled: bool = True
    # Phase switches; governance runs in both phases unless turned off here.
    in_train: bool = True
    in_eval: bool = True

    def __post_init__(self):
        if not 0.0 <= self.fpr_cap <= 1.0:
            raise ValueError(f"fpr_cap must lie in [0, 1], got {self.fpr_cap}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if self.warmup < 0:
            raise ValueError(f"warmup must be >= 0, got {self.warmup}")


@dataclass
class GovernanceState:
    window: int = 100
    recent_legit_outcomes: deque = field(default_factory=deque)
    interventions: int = 0

    def __post_init__(self):
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        self.recent_legit_outcomes = deque(self.recent_legit_outcomes, maxlen=self.window)

    @classmethod
    def for_policy(cls, policy: GovernancePolicy) -> "GovernanceState":
        return cls(window=policy.window)

    def __len__(self) -> int:
        return len(self.recent_legit_outcomes)


@dataclass(frozen=True)
class GovernanceVerdict:
    decision: Verdict
    final_action: Action
    windowed_fpr: float


def windowed_fpr(state: GovernanceState) -> float:
    queue = state.recent_legit_outcomes
    return sum(queue) / len(queue) if queue else 0.0


def evaluate(policy: GovernancePolicy, state: GovernanceState, proposed: Action) -> GovernanceVerdict:
    """Approve or veto ``proposed``; a veto bumps ``state.interventions``."""
    fpr = windowed_fpr(state)
    if (
        Action(proposed) is Action.BLOCK
        # a warmup longer than the window could never be reached
        and len(state.recent_legit_outcomes) >= min(policy.warmup, policy.window)
        and fpr >= policy.fpr_cap
    ):
        state.interventions += 1
        return GovernanceVerdict(Verdict.VETOED, Action.ALLOW, fpr)
    return GovernanceVerdict(Verdict.APPROVED, Action(proposed), fpr)


def record_outcome(state: GovernanceState, true_class: TrafficClass, final_action: Action) -> GovernanceState:
    """Feed back a labeled outcome; only legitimate events enter the window."""
    if TrafficClass(true_class).is_attack:
        return state
    # bounded deque evicts the oldest entry
    state.recent_legit_outcomes.append(final_action == Action.BLOCK)
    return state
