"""End-to-end acceptance checks, one test (or group) per criterion.

The first docstring line of each test is echoed into the "acceptance
criteria" section of the pytest terminal summary.
"""

import re
import resource
import statistics
import sys
import time
from dataclasses import replace

import numpy as np
import pytest

from agentic_defense import governance as gov
from agentic_defense.agents import greedy_policy
from agentic_defense.cli import main as cli_main
from agentic_defense.engine import RunConfig, compare, evaluate, train
from agentic_defense.labels import Phase, TrafficClass, Verdict
from agentic_defense.metrics import moving_average, roc_auc
from agentic_defense.oversight import export_text, import_text, replay

from oracles import optimal_policy, pairwise_auc, pairwise_auc_np

MODULE_START = time.perf_counter()
DEFAULT = RunConfig()
OPTIMAL = tuple(optimal_policy()[c] for c in TrafficClass)


@pytest.fixture(scope="module")
def timed_default():
    start = time.perf_counter()
    trace = train(DEFAULT)
    ev = evaluate(DEFAULT, trace.q)
    return trace, ev, time.perf_counter() - start


@pytest.fixture(scope="module")
def default_trace(timed_default):
    return timed_default[0]


@pytest.fixture(scope="module")
def default_eval(timed_default):
    return timed_default[1]


@pytest.fixture(scope="module")
def baseline_eval():
    return evaluate(replace(DEFAULT, agent_kind="baseline"))


@pytest.fixture(scope="module")
def report():
    return compare(DEFAULT, 10, jobs=2)


@pytest.fixture(scope="module")
def ungoverned_trace():
    return train(replace(DEFAULT, governance=replace(DEFAULT.governance, enabled=False)))


@pytest.fixture(scope="module")
def always_block_eval():
    block_all = np.array([[0.0, 1.0]] * 4)
    return evaluate(DEFAULT, block_all)


# -- 1 ---------------------------------------------------------------------


def test_criterion_01_single_seed_agentic(timed_default):
    """1: default train + greedy eval on 10,000 events gives DR 100%, FPR 0%, ECS 100% in < 10 s"""
    _, ev, elapsed = timed_default
    m = ev.metrics
    assert m.events == 10_000
    assert m.detection_rate == 1.0
    assert m.false_positive_rate == 0.0
    assert m.ecs == 1.0
    assert elapsed < 10.0


# -- 2 ---------------------------------------------------------------------


def test_criterion_02_single_seed_baseline(baseline_eval):
    """2: baseline DR in [68.6, 71.4]%, FPR in [13.9, 16.1]%, ECS = 100 - FPR"""
    m = baseline_eval.metrics
    assert 0.686 <= m.detection_rate <= 0.714
    assert 0.139 <= m.false_positive_rate <= 0.161
    assert m.ecs == 1.0 - m.false_positive_rate


# -- 3 ---------------------------------------------------------------------


def test_criterion_03_multi_seed_baseline(report):
    """3: 10-seed baseline DR mean in [68, 72]% with std in (0, 3]; FPR mean in [13.5, 16.5]%"""
    b = report.baseline
    assert b.n_seeds == 10
    assert 0.68 <= b.mean["detection_rate"] <= 0.72
    assert 0.0 < b.std["detection_rate"] <= 0.03
    assert 0.135 <= b.mean["false_positive_rate"] <= 0.165


# -- 4 ---------------------------------------------------------------------


def test_criterion_04_multi_seed_agentic(report):
    """4: 10 greedy seeds give DR 100.0 +- 0.0 and FPR 0.0 +- 0.0"""
    a = report.agentic
    assert a.n_seeds == 10
    assert (a.mean["detection_rate"], a.std["detection_rate"]) == (1.0, 0.0)
    assert (a.mean["false_positive_rate"], a.std["false_positive_rate"]) == (0.0, 0.0)


# -- 5 ---------------------------------------------------------------------


def test_criterion_05_learning_curve(default_trace):
    """5a: final-100-episode accuracy >= 0.99 - eps_train/2 and > first-10 mean"""
    acc = default_trace.accuracies()
    final = moving_average(acc, 100)[-1]
    eps = DEFAULT.q_params.epsilon_train
    assert final == pytest.approx(statistics.mean(acc[-100:]), abs=1e-12)
    assert final >= 0.99 - eps / 2
    assert final > statistics.mean(acc[:10])


def test_criterion_05_convergence_all_seeds(report):
    """5b: greedy policy equals the optimal policy from episode 100 on, every one of 10 seeds"""
    for res in report.per_seed:
        assert all(ep.policy == OPTIMAL for ep in res.episodes[99:]), res.seed


# -- 6 ---------------------------------------------------------------------


def test_criterion_06_compliance_moving_average(default_trace):
    """6a: governed per-episode ECS moving average >= 0.70 at every episode after warmup"""
    assert DEFAULT.governed(Phase.TRAIN)
    ma = moving_average(default_trace.ecs_series(), 10)
    # the governance warmup (20 legitimate outcomes) completes inside episode 0
    assert min(ma[1:]) >= 0.70


def test_criterion_06_compliance_final_100(default_trace):
    """6b: governed final-100-episode ECS >= 0.99 (expected to fail under eps_train = 0.1 exploration)"""
    final = statistics.mean(default_trace.ecs_series()[-100:])
    assert final >= 0.99, f"final-100 ECS {final:.4f}: exploration blocks ~eps/2 of normal traffic"


def test_criterion_06_ungoverned_arm(default_trace, ungoverned_trace):
    """6c: the governance-disabled arm runs on identical seeds and traffic"""
    assert len(ungoverned_trace.episodes) == len(default_trace.episodes)
    gov_classes = [r.true_class for r in default_trace.log]
    ungov_classes = [r.true_class for r in ungoverned_trace.log]
    assert gov_classes == ungov_classes
    assert all(r.governance_verdict is Verdict.NOT_APPLICABLE for r in ungoverned_trace.log)
    assert len(ungoverned_trace.ecs_series()) == 500


# -- 7 ---------------------------------------------------------------------


def test_criterion_07_confusion(default_eval):
    """7: greedy eval confusion has fp = fn = 0 and tp + tn = event count"""
    c = default_eval.metrics.confusion
    assert c.fp == 0 and c.fn == 0
    assert c.tp + c.tn == default_eval.metrics.events == len(default_eval.log)


# -- 8 ---------------------------------------------------------------------


def test_criterion_08_auc_greedy(default_eval):
    """8a: AUC from Q-margins on the greedy eval log is exactly 1.00, matching the pairwise oracle"""
    scored = [(r.margin, r.true_class.is_attack) for r in default_eval.log]
    _, auc = roc_auc(scored)
    assert auc == 1.0
    assert default_eval.metrics.auc == 1.0
    assert pairwise_auc_np(scored) == 1.0


def test_criterion_08_auc_oracle():
    """8b: roc_auc matches the brute-force pairwise rank oracle to 1e-12 on 1,000 random score sets"""
    rng = np.random.default_rng(20261015)
    worst = 0.0
    for i in range(1000):
        n = int(rng.integers(2, 80))
        labels = rng.random(n) < rng.uniform(0.1, 0.9)
        labels[0], labels[1] = True, False
        scores = rng.normal(size=n) + labels * rng.uniform(0, 2)
        if i % 2:
            scores = np.round(scores, 1)  # force ties
        scored = list(zip(scores.tolist(), labels.tolist()))
        worst = max(worst, abs(roc_auc(scored)[1] - pairwise_auc(scored)))
    assert worst <= 1e-12


# -- 9 ---------------------------------------------------------------------


def test_criterion_09_governance_cap(always_block_eval):
    """9: always-Block agent keeps windowed FPR <= cap + 1/window after warmup; interventions > 0"""
    policy = DEFAULT.governance
    assert always_block_eval.interventions > 0
    state = gov.GovernanceState.for_policy(policy)
    legit_seen = 0
    worst = 0.0
    for rec in always_block_eval.log:
        if rec.governance_verdict is Verdict.VETOED:
            # the logged verdict must agree with the reconstructed state
            assert gov.windowed_fpr(state) >= policy.fpr_cap
        gov.record_outcome(state, rec.true_class, rec.final_action)
        if not rec.true_class.is_attack:
            legit_seen += 1
        # unchecked warmup blocks must first leave the window
        if legit_seen >= policy.warmup + policy.window:
            worst = max(worst, gov.windowed_fpr(state))
    assert legit_seen >= policy.warmup + policy.window
    assert worst <= policy.fpr_cap + 1.0 / policy.window


# -- 10 --------------------------------------------------------------------


def test_criterion_10_optimal_policy_oracle(default_trace, report):
    """10: brute-force per-state optimum equals the trained greedy policy on every seed"""
    oracle = optimal_policy()
    assert greedy_policy(default_trace.q) == oracle
    for res in report.per_seed:
        assert greedy_policy(res.q) == oracle, res.seed


# -- 11 --------------------------------------------------------------------


def _all_logs(default_trace, default_eval, baseline_eval, report, ungoverned_trace, always_block_eval):
    yield "train", default_trace.log, None
    yield "train-ungoverned", ungoverned_trace.log, None
    yield "eval", default_eval.log, default_eval.metrics
    yield "baseline", baseline_eval.log, baseline_eval.metrics
    yield "always-block", always_block_eval.log, always_block_eval.metrics
    for res in report.per_seed:
        yield f"seed{res.seed}-agentic", res.agentic.log, res.agentic.metrics
        yield f"seed{res.seed}-baseline", res.baseline.log, res.baseline.metrics


def test_criterion_11_round_trip_and_replay(
    default_trace, default_eval, baseline_eval, report, ungoverned_trace, always_block_eval
):
    """11a: import(export(log)) = log and replay(log) = live metrics for every run above"""
    runs = _all_logs(default_trace, default_eval, baseline_eval, report, ungoverned_trace, always_block_eval)
    for name, log, live in runs:
        text = export_text(log)
        back = import_text(text)
        assert back == log, name
        assert export_text(back) == text, name
        if live is not None:
            assert replay(back) == live, name


def test_criterion_11_byte_identical_reruns(tmp_path, default_trace, default_eval):
    """11b: identical (config, seed) reruns give byte-identical CSV and SVG outputs"""
    again = train(DEFAULT)
    assert export_text(again.log) == export_text(default_trace.log)
    assert export_text(evaluate(DEFAULT, again.q).log) == export_text(default_eval.log)

    cfg = tmp_path / "run.cfg"
    cfg.write_text("run.seed=0\n")
    outputs = {}
    for rep in ("a", "b"):
        out = tmp_path / rep
        assert cli_main(["train", "--config", str(cfg), "--out", str(out)]) == 0
        assert cli_main(["evaluate", "--config", str(cfg), "--qtable", str(out / "qtable.csv"), "--out", str(out)]) == 0
        for figure, source in (("learning", "trace.csv"), ("compliance", "compliance.csv"),
                               ("confusion", "eval_log.csv"), ("roc", "eval_log.csv")):
            assert cli_main(["plot", "--figure", figure, "--input", str(out / source), "--out", str(out)]) == 0
        outputs[rep] = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
    assert outputs["a"].keys() == outputs["b"].keys()
    assert any(name.endswith(".svg") for name in outputs["a"])
    for name, data in outputs["a"].items():
        assert data == outputs["b"][name], name


# -- 12 --------------------------------------------------------------------


def test_criterion_12_resources():
    """12: criteria 1-11 finish in under 5 minutes with < 1 GB peak memory and no GPU"""
    elapsed = time.perf_counter() - MODULE_START
    own = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
    children = resource.getrusage(resource.RUSAGE_CHILDREN).ru_maxrss / 1024
    print(f"acceptance run: {elapsed:.1f} s, peak RSS {own:.0f} MB (workers {children:.0f} MB)")
    assert elapsed < 300.0
    assert max(own, children) < 1024.0
    gpu_modules = [m for m in sys.modules if re.match(r"(torch|tensorflow|jax|cupy)(\.|$)", m)]
    assert gpu_modules == []
