"""Enumerations shared by every layer, with their lowercase CSV tokens."""

from __future__ import annotations

from enum import Enum, IntEnum


class _Tokenized:
    """Mixin giving enum members a lowercase token and a strict parser."""

    @property
    def token(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: str):
        for member in cls:  # type: ignore[attr-defined]
            if member.token == text:
                return member
        raise ValueError(f"unknown {cls.__name__} token {text!r}")


class TrafficClass(_Tokenized, IntEnum):
    NORMAL = 0
    PHISHING = 1
    RANSOMWARE = 2
    DDOS = 3

    @property
    def is_attack(self) -> bool:
        return self is not TrafficClass.NORMAL


ATTACK_CLASSES = (TrafficClass.PHISHING, TrafficClass.RANSOMWARE, TrafficClass.DDOS)


class Action(_Tokenized, IntEnum):
    ALLOW = 0
    BLOCK = 1


class Outcome(_Tokenized, Enum):
    TP = "tp"
    FP = "fp"
    TN = "tn"
    FN = "fn"


class Verdict(Enum):
    APPROVED = "approved"
    VETOED = "vetoed"
    NOT_APPLICABLE = "n/a"

    @property
    def token(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "Verdict":
        try:
            return cls(text)
        except ValueError:
            raise ValueError(f"unknown Verdict token {text!r}") from None


class Phase(_Tokenized, Enum):
    TRAIN = "train"
    EVAL = "eval"


def classify(true_class: TrafficClass, action: Action) -> Outcome:
    """Confusion cell for one decision; attack is the positive class."""
    if true_class.is_attack:
        return Outcome.TP if action is Action.BLOCK else Outcome.FN
    return Outcome.FP if action is Action.BLOCK else Outcome.TN
