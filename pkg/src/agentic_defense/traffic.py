"""Labeled traffic generation with a configurable legitimate/malicious mix."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .labels import TrafficClass
from .topology import NetworkGraph, attack_path, default_topology


@dataclass(frozen=True)
class TrafficMix:
    p_normal: float = 0.70
    p_phishing: float = 0.10
    p_ransomware: float = 0.10
    p_ddos: float = 0.10

    def __post_init__(self):
        probs = self.probabilities()
        for name, p in zip(("p_normal", "p_phishing", "p_ransomware", "p_ddos"), probs):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        total = math.fsum(probs)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"traffic probabilities sum to {total!r}, expected 1")

    def probabilities(self) -> tuple[float, float, float, float]:
        """Ordered by ``TrafficClass`` value."""
        return (self.p_normal, self.p_phishing, self.p_ransomware, self.p_ddos)


@dataclass(frozen=True, slots=True)
class TrafficEvent:
    event_id: int
    step: int
    traffic_class: TrafficClass
    source: str
    destination: str


def _thresholds(mix: TrafficMix) -> list[tuple[float, TrafficClass]]:
    out = []
    acc = 0.0
    for cls, p in zip(TrafficClass, mix.probabilities()):
        acc += p
        if p > 0.0:
            out.append((acc, cls))
    return out


def _draw(u: float, thresholds: list[tuple[float, TrafficClass]]) -> TrafficClass:
    for edge, cls in thresholds:
        if u < edge:
            return cls
    # u landed in the rounding gap just below 1.0
    return thresholds[-1][1]


def sample_class(rng: np.random.Generator, mix: TrafficMix) -> TrafficClass:
    return _draw(rng.random(), _thresholds(mix))


class TrafficGenerator:
    """I.i.d. event stream over a fixed graph; owns its rng and id counter."""

    def __init__(
        self,
        rng: np.random.Generator,
        graph: NetworkGraph | None = None,
        mix: TrafficMix | None = None,
    ):
        self.rng = rng
        self.graph = graph if graph is not None else default_topology()
        self.mix = mix if mix is not None else TrafficMix()
        self._thresholds = _thresholds(self.mix)
        self._endpoints = {
            cls: (self.graph.first_of(t.source), self.graph.first_of(t.destination))
            for cls in TrafficClass
            for t in (attack_path(cls),)
        }
        self._next_id = 0

    def next_event(self, step: int, traffic_class: TrafficClass | None = None) -> TrafficEvent:
        """Draw the next event; ``traffic_class`` forces the class without drawing."""
        if traffic_class is None:
            traffic_class = _draw(self.rng.random(), self._thresholds)
        else:
            traffic_class = TrafficClass(traffic_class)
        source, destination = self._endpoints[traffic_class]
        event = TrafficEvent(self._next_id, step, traffic_class, source, destination)
        self._next_id += 1
        return event
