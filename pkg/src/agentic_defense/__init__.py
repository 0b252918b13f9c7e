"""Seeded simulation of a Q-learning network defender with a governance
veto layer and an auditable decision log."""

from .agents import BaselineParams, QHyperParams, greedy_policy, new_qtable
from .engine import RunConfig, compare, evaluate, train
from .governance import GovernancePolicy
from .labels import Action, Outcome, Phase, TrafficClass, Verdict
from .metrics import RunMetrics
from .oversight import DecisionLog, DecisionRecord, import_csv, export_csv, replay
from .traffic import TrafficMix

__all__ = [
    "Action",
    "BaselineParams",
    "DecisionLog",
    "DecisionRecord",
    "GovernancePolicy",
    "Outcome",
    "Phase",
    "QHyperParams",
    "RunConfig",
    "RunMetrics",
    "TrafficClass",
    "TrafficMix",
    "Verdict",
    "compare",
    "evaluate",
    "export_csv",
    "greedy_policy",
    "import_csv",
    "new_qtable",
    "replay",
    "train",
]
