"""Tabular Q-learning defender and the calibrated rule-based baseline.

The Q-table is a plain ``(4, 2)`` float array indexed by
``[TrafficClass, Action]``. Table operations are pure functions; the agent
classes bundle a table with its rng for use by the engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .labels import Action, TrafficClass
from .traffic import TrafficEvent

N_STATES = len(TrafficClass)
N_ACTIONS = len(Action)


@dataclass(frozen=True)
class QHyperParams:
    alpha: float = 0.1
    gamma: float = 0.95
    epsilon_train: float = 0.1
    epsilon_eval: float = 0.0
    episodes: int = 500

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        for name in ("epsilon_train", "epsilon_eval"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.episodes < 1:
            raise ValueError(f"episodes must be >= 1, got {self.episodes}")


@dataclass(frozen=True)
class BaselineParams:
    p_detect: float = 0.70
    p_false: float = 0.15

    def __post_init__(self):
        for name in ("p_detect", "p_false"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


def new_qtable() -> np.ndarray:
    return np.zeros((N_STATES, N_ACTIONS), dtype=np.float64)


def check_qtable(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (N_STATES, N_ACTIONS):
        raise ValueError(f"Q-table must have shape {(N_STATES, N_ACTIONS)}, got {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ValueError("Q-table contains non-finite entries")
    return q


def observe(event: TrafficEvent) -> TrafficClass:
    # The state is the traffic type itself; there is no observation noise.
    return event.traffic_class


def _greedy(q: np.ndarray, state: int) -> Action:
    return Action.BLOCK if q[state, 1] > q[state, 0] else Action.ALLOW


def select_action(
    q: np.ndarray,
    state: TrafficClass,
    epsilon: float,
    rng: np.random.Generator | None = None,
) -> Action:
    """Epsilon-greedy choice; ties between the two values go to Allow.

    With ``epsilon == 0`` no random numbers are drawn and ``rng`` may be None.
    """
    if epsilon > 0.0 and rng.random() < epsilon:
        return Action.BLOCK if rng.random() < 0.5 else Action.ALLOW
    return _greedy(q, state)


_REWARDS = {
    (False, Action.ALLOW): 1,
    (False, Action.BLOCK): -1,
    (True, Action.BLOCK): 1,
    (True, Action.ALLOW): -2,
}


def reward(true_class: TrafficClass, action: Action) -> int:
    return _REWARDS[(TrafficClass(true_class).is_attack, Action(action))]


def q_update(
    q: np.ndarray,
    s: TrafficClass,
    a: Action,
    r: float,
    s_next: TrafficClass,
    params: QHyperParams,
) -> np.ndarray:
    """One-step Q-learning backup on a copy of ``q``."""
    out = q.copy()
    target = r + params.gamma * max(q[s_next, 0], q[s_next, 1])
    out[s, a] = q[s, a] + params.alpha * (target - q[s, a])
    return out


def q_margin(q: np.ndarray, state: TrafficClass) -> float:
    return float(q[state, 1] - q[state, 0])


def greedy_policy(q: np.ndarray) -> dict[TrafficClass, Action]:
    return {cls: _greedy(q, cls) for cls in TrafficClass}


def baseline_decide(params: BaselineParams, event: TrafficEvent, rng: np.random.Generator) -> Action:
    p_block = params.p_detect if event.traffic_class.is_attack else params.p_false
    return Action.BLOCK if rng.random() < p_block else Action.ALLOW


class QLearningAgent:
    """Q-table plus exploration rng; ``learning`` toggles the backup."""

    kind = "qlearning"

    def __init__(
        self,
        q: np.ndarray,
        params: QHyperParams,
        rng: np.random.Generator | None,
        epsilon: float,
        learning: bool,
    ):
        self.q = check_qtable(q).copy()
        self.params = params
        self.rng = rng
        self.epsilon = epsilon
        self.learning = learning

    def values(self, state: TrafficClass) -> tuple[float, float]:
        return float(self.q[state, 0]), float(self.q[state, 1])

    def propose(self, event: TrafficEvent, state: TrafficClass) -> Action:
        return select_action(self.q, state, self.epsilon, self.rng)

    def learn(self, s: TrafficClass, a: Action, r: int, s_next: TrafficClass | None) -> None:
        if not self.learning or s_next is None:
            return
        self.q = q_update(self.q, s, a, r, s_next, self.params)
        if not math.isfinite(self.q[s, a]):
            raise FloatingPointError(f"Q[{s.token}, {a.token}] became non-finite")


class BaselineAgent:
    """Rule-based defender that blocks with fixed class-conditional odds."""

    kind = "baseline"

    def __init__(self, params: BaselineParams, rng: np.random.Generator):
        self.params = params
        self.rng = rng

    def values(self, state: TrafficClass) -> tuple[float, float]:
        return 0.0, 0.0

    def propose(self, event: TrafficEvent, state: TrafficClass) -> Action:
        return baseline_decide(self.params, event, self.rng)

    def learn(self, s, a, r, s_next) -> None:
        pass
