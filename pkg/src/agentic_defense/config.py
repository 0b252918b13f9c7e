"""Flat ``key=value`` run configuration.

One setting per line, ``#`` starts a comment. Unknown or repeated keys and
badly typed values are rejected with a :class:`ConfigError` naming the key.
Missing keys take the defaults below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .agents import BaselineParams, QHyperParams
from .engine import RunConfig
from .governance import GovernancePolicy
from .traffic import TrafficMix


class ConfigError(ValueError):
    def __init__(self, key: str, message: str, line: int | None = None):
        self.key = key
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{key}: {message}{where}")


def _float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("must be finite")
    return value


def _int(text: str) -> int:
    return int(text, 10)


def _bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError("expected true or false")


def _prob(v: float) -> str | None:
    return None if 0.0 <= v <= 1.0 else "must lie in [0, 1]"


def _positive(v: int) -> str | None:
    return None if v >= 1 else "must be >= 1"


def _non_negative(v: int) -> str | None:
    return None if v >= 0 else "must be >= 0"


def _alpha(v: float) -> str | None:
    return None if 0.0 < v <= 1.0 else "must lie in (0, 1]"


def _nonempty(v: str) -> str | None:
    return None if v else "must not be empty"


_Key = tuple[Callable[[str], object], object, Callable[[object], "str | None"]]

KEYS: dict[str, _Key] = {
    "traffic.p_normal": (_float, 0.70, _prob),
    "traffic.p_phishing": (_float, 0.10, _prob),
    "traffic.p_ransomware": (_float, 0.10, _prob),
    "traffic.p_ddos": (_float, 0.10, _prob),
    "agent.alpha": (_float, 0.1, _alpha),
    "agent.gamma": (_float, 0.95, _prob),
    "agent.epsilon_train": (_float, 0.1, _prob),
    "agent.epsilon_eval": (_float, 0.0, _prob),
    "agent.episodes": (_int, 500, _positive),
    "baseline.p_detect": (_float, 0.70, _prob),
    "baseline.p_false": (_float, 0.15, _prob),
    "governance.fpr_cap": (_float, 0.30, _prob),
    "governance.window": (_int, 100, _positive),
    "governance.warmup": (_int, 20, _non_negative),
    "governance.enabled": (_bool, True, lambda v: None),
    "governance.in_train": (_bool, True, lambda v: None),
    "governance.in_eval": (_bool, True, lambda v: None),
    "run.seed": (_int, 0, _non_negative),
    # alias of agent.episodes; setting both to different values is an error
    "run.episodes": (_int, None, _positive),
    "run.steps_per_episode": (_int, 100, _positive),
    "run.eval_events": (_int, 10_000, _positive),
    "output.dir": (str, "out", _nonempty),
    "metrics.ma_window": (_int, 10, _positive),
}


@dataclass(frozen=True)
class Settings:
    run: RunConfig
    output_dir: str
    ma_window: int


def parse_config(text: str) -> Settings:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, "expected key=value", lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in KEYS:
            raise ConfigError(key, "unknown key", lineno)
        if key in values:
            raise ConfigError(key, "set more than once", lineno)
        parser, _, check = KEYS[key]
        try:
            parsed = parser(value)
        except ValueError as exc:
            raise ConfigError(key, f"invalid value {value!r}: {exc}", lineno) from None
        problem = check(parsed)
        if problem:
            raise ConfigError(key, f"{problem}, got {value!r}", lineno)
        values[key] = parsed
    return _build(values)


def load_config(path: str | Path) -> Settings:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _build(values: dict[str, object]) -> Settings:
    def get(key):
        return values.get(key, KEYS[key][1])

    episodes = get("agent.episodes")
    if "run.episodes" in values:
        if "agent.episodes" in values and values["agent.episodes"] != values["run.episodes"]:
            raise ConfigError("run.episodes", "conflicts with agent.episodes")
        episodes = values["run.episodes"]

    try:
        mix = TrafficMix(
            get("traffic.p_normal"), get("traffic.p_phishing"), get("traffic.p_ransomware"), get("traffic.p_ddos")
        )
    except ValueError as exc:
        raise ConfigError("traffic", str(exc)) from None

    run = RunConfig(
        seed=get("run.seed"),
        steps_per_episode=get("run.steps_per_episode"),
        eval_events=get("run.eval_events"),
        mix=mix,
        q_params=QHyperParams(
            alpha=get("agent.alpha"),
            gamma=get("agent.gamma"),
            epsilon_train=get("agent.epsilon_train"),
            epsilon_eval=get("agent.epsilon_eval"),
            episodes=episodes,
        ),
        baseline=BaselineParams(get("baseline.p_detect"), get("baseline.p_false")),
        governance=GovernancePolicy(
            fpr_cap=get("governance.fpr_cap"),
            window=get("governance.window"),
            warmup=get("governance.warmup"),
            enabled=get("governance.enabled"),
            in_train=get("governance.in_train"),
            in_eval=get("governance.in_eval"),
        ),
    )
    return Settings(run=run, output_dir=get("output.dir"), ma_window=get("metrics.ma_window"))
