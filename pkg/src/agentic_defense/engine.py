"""Episode loop: generate -> observe -> propose -> govern -> log -> reward -> learn.

``train`` runs the Q-learning defender over a continuing event stream cut
into fixed-length episodes. ``evaluate`` runs a trained table (or the
baseline) with learning off on a separate, unseen stream. ``compare`` does
both for a list of seeds and aggregates the results.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from . import governance as gov
from . import metrics, rng
from .agents import (
    BaselineAgent,
    BaselineParams,
    QHyperParams,
    QLearningAgent,
    check_qtable,
    greedy_policy,
    new_qtable,
    observe,
    reward,
)
from .labels import Action, Outcome, Phase, TrafficClass, Verdict, classify
from .oversight import DecisionLog, DecisionRecord, Oversight, round6
from .topology import NetworkGraph, default_topology, validate
from .traffic import TrafficEvent, TrafficGenerator, TrafficMix


AgentKind = Literal["qlearning", "baseline"]


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    steps_per_episode: int = 100
    eval_events: int = 10_000
    mix: TrafficMix = field(default_factory=TrafficMix)
    q_params: QHyperParams = field(default_factory=QHyperParams)
    baseline: BaselineParams = field(default_factory=BaselineParams)
    governance: gov.GovernancePolicy = field(default_factory=gov.GovernancePolicy)
    phase: Phase = Phase.TRAIN
    agent_kind: AgentKind = "qlearning"

    def __post_init__(self):
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if self.steps_per_episode < 1:
            raise ValueError(f"steps_per_episode must be >= 1, got {self.steps_per_episode}")
        if self.eval_events < 1:
            raise ValueError(f"eval_events must be >= 1, got {self.eval_events}")
        if self.agent_kind not in ("qlearning", "baseline"):
            raise ValueError(f"unknown agent kind {self.agent_kind!r}")

    @property
    def episodes(self) -> int:
        return self.q_params.episodes

    def governed(self, phase: Phase) -> bool:
        policy = self.governance
        if not policy.enabled or self.agent_kind == "baseline":
            return False
        return policy.in_train if phase is Phase.TRAIN else policy.in_eval

    def run_id(self) -> str:
        return f"{self.agent_kind}-s{self.seed}"


@dataclass(frozen=True)
class EpisodeStats:
    episode: int
    correct: int
    total: int
    cumulative_reward: int
    legitimate: int
    false_positives: int
    # greedy action per TrafficClass after the episode's last update
    policy: tuple[Action, ...]

    @property
    def accuracy(self) -> float:
        return self.correct / self.total

    @property
    def ecs(self) -> float:
        """1 - FPR over this episode's legitimate events (1.0 if there were none)."""
        if self.legitimate == 0:
            return 1.0
        return metrics.ecs(self.false_positives / self.legitimate)


@dataclass
class TrainingTrace:
    episodes: list[EpisodeStats]
    q: np.ndarray
    log: DecisionLog
    interventions: int = 0

    def accuracies(self) -> list[float]:
        return [ep.accuracy for ep in self.episodes]

    def ecs_series(self) -> list[float]:
        return [ep.ecs for ep in self.episodes]


@dataclass
class EvalResult:
    metrics: metrics.RunMetrics
    log: DecisionLog
    interventions: int = 0


@dataclass(frozen=True)
class StepResult:
    final_action: Action
    reward: int
    outcome: Outcome
    record: DecisionRecord


class Session:
    """Wires one agent, optional governance and the oversight log for one run phase."""

    def __init__(
        self,
        config: RunConfig,
        agent,
        phase: Phase,
        oversight: Oversight,
        governance_state: gov.GovernanceState | None = None,
    ):
        self.config = config
        self.agent = agent
        self.phase = phase
        self.oversight = oversight
        self.governance_state = governance_state
        self.run_id = config.run_id()

    def step(self, event: TrafficEvent, episode: int = 0, s_next: TrafficClass | None = None) -> StepResult:
        state = observe(event)
        q_allow, q_block = self.agent.values(state)
        override = self.oversight.override_for(event.event_id)

        if override is not None:
            proposed = final = override
            verdict = Verdict.NOT_APPLICABLE
        else:
            proposed = self.agent.propose(event, state)
            if self.governance_state is not None:
                decision = gov.evaluate(self.config.governance, self.governance_state, proposed)
                verdict, final = decision.decision, decision.final_action
            else:
                verdict, final = Verdict.NOT_APPLICABLE, proposed

        r = reward(event.traffic_class, final)
        outcome = classify(event.traffic_class, final)
        record = DecisionRecord(
            run_id=self.run_id,
            seed=self.config.seed,
            phase=self.phase,
            episode=episode,
            step=event.step,
            event_id=event.event_id,
            true_class=event.traffic_class,
            source=event.source,
            destination=event.destination,
            observed_state=state,
            proposed_action=proposed,
            governance_verdict=verdict,
            human_override=override,
            final_action=final,
            reward=r,
            outcome=outcome,
            q_allow=round6(q_allow),
            q_block=round6(q_block),
        )
        self.oversight.append(record)
        if self.governance_state is not None:
            gov.record_outcome(self.governance_state, event.traffic_class, final)
        # the executed action is the one that earned the reward
        self.agent.learn(state, final, r, s_next)
        return StepResult(final, r, outcome, record)


def _check_graph(graph: NetworkGraph) -> NetworkGraph:
    problems = validate(graph)
    if problems:
        raise ValueError(f"invalid topology: {', '.join(problems)}")
    return graph


def _governance_state(config: RunConfig, phase: Phase) -> gov.GovernanceState | None:
    return gov.GovernanceState.for_policy(config.governance) if config.governed(phase) else None


def train(
    config: RunConfig,
    *,
    overrides: dict[int, Action] | None = None,
    graph: NetworkGraph | None = None,
    q0: np.ndarray | None = None,
) -> TrainingTrace:
    """Run ``episodes x steps_per_episode`` learning steps on the train stream."""
    if config.agent_kind != "qlearning":
        raise ValueError("train requires agent_kind 'qlearning'")
    graph = _check_graph(graph or default_topology())
    params = config.q_params
    gen = TrafficGenerator(rng.stream(config.seed, rng.TRAIN_TRAFFIC), graph, config.mix)
    agent = QLearningAgent(
        new_qtable() if q0 is None else q0,
        params,
        rng.stream(config.seed, rng.TRAIN_EXPLORE),
        epsilon=params.epsilon_train,
        learning=True,
    )
    oversight = Oversight(overrides=overrides)
    gstate = _governance_state(config, Phase.TRAIN)
    session = Session(config, agent, Phase.TRAIN, oversight, gstate)

    steps = config.steps_per_episode
    stats: list[EpisodeStats] = []
    event = gen.next_event(0)
    for episode in range(params.episodes):
        correct = cum_reward = legit = fps = 0
        for step in range(steps):
            # continuing stream: the bootstrap state is the next event's class
            upcoming = gen.next_event((step + 1) % steps)
            res = session.step(event, episode, upcoming.traffic_class)
            cum_reward += res.reward
            if res.outcome in (Outcome.TP, Outcome.TN):
                correct += 1
            if not event.traffic_class.is_attack:
                legit += 1
                fps += res.outcome is Outcome.FP
            event = upcoming
        policy = greedy_policy(agent.q)
        stats.append(
            EpisodeStats(episode, correct, steps, cum_reward, legit, fps, tuple(policy[c] for c in TrafficClass))
        )
    interventions = gstate.interventions if gstate is not None else 0
    return TrainingTrace(stats, agent.q, oversight.log, interventions)


def evaluate(
    config: RunConfig,
    q: np.ndarray | None = None,
    *,
    epsilon: float | None = None,
    overrides: dict[int, Action] | None = None,
    graph: NetworkGraph | None = None,
) -> EvalResult:
    """Run ``eval_events`` decisions with learning off on the unseen eval stream.

    Metrics are tallied live from the loop; ``oversight.replay`` recomputes
    them from the log independently.
    """
    graph = _check_graph(graph or default_topology())
    gen = TrafficGenerator(rng.stream(config.seed, rng.EVAL_TRAFFIC), graph, config.mix)
    if config.agent_kind == "qlearning":
        if q is None:
            raise ValueError("evaluating the Q-learning agent requires a Q-table")
        eps = config.q_params.epsilon_eval if epsilon is None else epsilon
        agent = QLearningAgent(
            check_qtable(q), config.q_params, rng.stream(config.seed, rng.EVAL_EXPLORE), epsilon=eps, learning=False
        )
    else:
        agent = BaselineAgent(config.baseline, rng.stream(config.seed, rng.BASELINE))

    oversight = Oversight(overrides=overrides)
    gstate = _governance_state(config, Phase.EVAL)
    session = Session(config, agent, Phase.EVAL, oversight, gstate)

    tally = {o: 0 for o in Outcome}
    scored = []
    for i in range(config.eval_events):
        event = gen.next_event(i)
        res = session.step(event)
        tally[res.outcome] += 1
        scored.append((res.record.margin, event.traffic_class.is_attack))
    counts = metrics.ConfusionCounts(tally[Outcome.TP], tally[Outcome.FP], tally[Outcome.TN], tally[Outcome.FN])
    return EvalResult(
        metrics.run_metrics(counts, scored),
        oversight.log,
        gstate.interventions if gstate is not None else 0,
    )


@dataclass
class SeedResult:
    seed: int
    agentic: EvalResult
    baseline: EvalResult
    explore: EvalResult | None
    q: np.ndarray
    train_interventions: int
    episodes: list[EpisodeStats]


@dataclass
class ComparisonReport:
    seeds: list[int]
    per_seed: list[SeedResult]
    agentic: metrics.SeedAggregate
    baseline: metrics.SeedAggregate
    explore: metrics.SeedAggregate | None
    explore_epsilon: float

    @property
    def table1(self) -> SeedResult:
        return self.per_seed[0]


def run_seed(config: RunConfig, seed: int) -> SeedResult:
    """Train and evaluate the agentic arm and evaluate the baseline arm for one seed.

    Both arms read the same eval traffic stream (common random numbers).
    """
    cfg = replace(config, seed=seed, agent_kind="qlearning")
    trace = train(cfg)
    agentic = evaluate(cfg, trace.q, epsilon=0.0)
    eps = cfg.q_params.epsilon_eval
    explore = evaluate(cfg, trace.q, epsilon=eps) if eps > 0.0 else None
    baseline = evaluate(replace(cfg, agent_kind="baseline"))
    return SeedResult(seed, agentic, baseline, explore, trace.q, trace.interventions, trace.episodes)


def compare(config: RunConfig, n_seeds: int, jobs: int = 1) -> ComparisonReport:
    """Seeds ``config.seed .. config.seed + n_seeds - 1``, assembled in seed order."""
    if n_seeds < 2:
        raise ValueError(f"n_seeds must be >= 2, got {n_seeds}")
    seeds = [config.seed + i for i in range(n_seeds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_seed, [config] * n_seeds, seeds))
    else:
        results = [run_seed(config, s) for s in seeds]
    explore = None
    if results[0].explore is not None:
        explore = metrics.aggregate_seeds([r.explore.metrics for r in results])
    return ComparisonReport(
        seeds=seeds,
        per_seed=results,
        agentic=metrics.aggregate_seeds([r.agentic.metrics for r in results]),
        baseline=metrics.aggregate_seeds([r.baseline.metrics for r in results]),
        explore=explore,
        explore_epsilon=config.q_params.epsilon_eval,
    )
