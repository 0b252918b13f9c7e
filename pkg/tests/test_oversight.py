import io
from dataclasses import replace
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agentic_defense.agents import QHyperParams
from agentic_defense.engine import RunConfig, evaluate, train
from agentic_defense.labels import Action, Outcome, Phase, TrafficClass, Verdict, classify
from agentic_defense.metrics import UndefinedMetricError
from agentic_defense.oversight import (
    CSV_HEADER,
    DecisionLog,
    DecisionRecord,
    LogConsistencyError,
    LogFormatError,
    Oversight,
    OverrideError,
    audit_summary,
    export_text,
    import_text,
    load_overrides,
    replay,
)

from oracles import REWARD_TABLE

GOLDEN = Path(__file__).parent / "golden"
SMALL = RunConfig(seed=3, steps_per_episode=6, eval_events=24, q_params=QHyperParams(episodes=2))


def make_record(event_id=0, true_class=TrafficClass.PHISHING, final=Action.BLOCK, **kw):
    fields = dict(
        run_id="r",
        seed=0,
        phase=Phase.EVAL,
        episode=0,
        step=event_id,
        event_id=event_id,
        true_class=true_class,
        source="external",
        destination="iot",
        observed_state=true_class,
        proposed_action=final,
        governance_verdict=Verdict.APPROVED,
        human_override=None,
        final_action=final,
        reward=REWARD_TABLE[(true_class, final)],
        outcome=classify(true_class, final),
        q_allow=-2.0,
        q_block=1.0,
    )
    fields.update(kw)
    return DecisionRecord(**fields)


class TestAppend:
    def test_valid_record_grows_log(self):
        log = DecisionLog()
        log.append(make_record())
        assert len(log) == 1

    def test_outcome_inconsistent_with_class_rejected(self):
        with pytest.raises(LogConsistencyError):
            DecisionLog().append(make_record(true_class=TrafficClass.NORMAL, outcome=Outcome.TP, reward=-1))

    def test_reward_inconsistent_rejected(self):
        with pytest.raises(LogConsistencyError, match="event_id 0"):
            DecisionLog().append(make_record(reward=-2))

    def test_override_must_match_final_action(self):
        with pytest.raises(LogConsistencyError):
            DecisionLog().append(
                make_record(human_override=Action.ALLOW, governance_verdict=Verdict.NOT_APPLICABLE)
            )

    def test_event_ids_must_increase(self):
        log = DecisionLog([make_record(0), make_record(1)])
        with pytest.raises(LogConsistencyError):
            log.append(make_record(1))

    def test_prior_records_untouched(self):
        first = make_record(0)
        log = DecisionLog([first])
        log.append(make_record(1, true_class=TrafficClass.NORMAL, final=Action.ALLOW))
        assert log[0] is first


class TestCsv:
    def test_empty_log_is_header_only(self):
        assert export_text(DecisionLog()) == CSV_HEADER + "\n"

    def test_one_record_has_18_fields(self):
        lines = export_text(DecisionLog([make_record()])).splitlines()
        assert len(lines) == 2
        assert len(lines[1].split(",")) == 18

    def test_missing_override_is_empty_field(self):
        row = export_text(DecisionLog([make_record()])).splitlines()[1].split(",")
        assert row[12] == ""

    def test_reals_have_six_decimals(self):
        row = export_text(DecisionLog([make_record(q_allow=1 / 3, q_block=-0.0)])).splitlines()[1]
        assert row.endswith(",0.333333,0.000000")

    def test_round_trip_is_byte_identical(self):
        text = (GOLDEN / "eval_small.csv").read_text(encoding="utf-8")
        log = import_text(text)
        assert export_text(log) == text
        assert import_text(export_text(log)) == log

    def test_import_rejects_short_row_with_line_number(self):
        text = export_text(DecisionLog([make_record(0), make_record(1)]))
        lines = text.splitlines()
        lines[2] = ",".join(lines[2].split(",")[:17])
        with pytest.raises(LogFormatError, match="line 3"):
            import_text("\n".join(lines) + "\n")

    def test_import_rejects_unknown_class(self):
        text = export_text(DecisionLog([make_record()])).replace("phishing", "malware")
        with pytest.raises(LogFormatError, match="line 2.*malware"):
            import_text(text)

    def test_import_rejects_bad_header(self):
        with pytest.raises(LogFormatError, match="line 1"):
            import_text("run,seed\n")
        with pytest.raises(LogFormatError, match="line 1"):
            import_text("")

    def test_import_rejects_tampered_reward(self):
        text = export_text(DecisionLog([make_record(0), make_record(7)]))
        lines = text.splitlines()
        fields = lines[2].split(",")
        fields[14] = "-2"
        lines[2] = ",".join(fields)
        with pytest.raises(LogConsistencyError, match="line 3.*event_id 7"):
            import_text("\n".join(lines) + "\n")

    def test_import_rejects_truncated_file(self):
        text = (GOLDEN / "eval_small.csv").read_text(encoding="utf-8")
        cut = text[: len(text) - 30]
        with pytest.raises(LogFormatError, match=r"line \d+"):
            import_text(cut)

    def test_golden_files_reproduce(self):
        trace = train(SMALL)
        assert export_text(trace.log) == (GOLDEN / "train_small.csv").read_text(encoding="utf-8")
        ev = evaluate(SMALL, trace.q, overrides={5: Action.ALLOW})
        assert export_text(ev.log) == (GOLDEN / "eval_small.csv").read_text(encoding="utf-8")


def consistent_records():
    @st.composite
    def build(draw):
        cls = draw(st.sampled_from(list(TrafficClass)))
        proposed = draw(st.sampled_from(list(Action)))
        mode = draw(st.sampled_from(["plain", "approved", "veto", "override"]))
        final, verdict, override = proposed, Verdict.NOT_APPLICABLE, None
        if mode == "approved":
            verdict = Verdict.APPROVED
        elif mode == "veto":
            proposed, final, verdict = Action.BLOCK, Action.ALLOW, Verdict.VETOED
        elif mode == "override":
            override = final = draw(st.sampled_from(list(Action)))
            proposed = final
        q = st.floats(-1e4, 1e4).map(lambda x: round(x, 6) + 0.0)
        return dict(
            seed=draw(st.integers(0, 10**6)),
            phase=draw(st.sampled_from(list(Phase))),
            episode=draw(st.integers(0, 1000)),
            true_class=cls,
            observed_state=cls,
            source=draw(st.sampled_from(["router", "server1", "iot", "external"])),
            destination=draw(st.sampled_from(["router", "database", "iot"])),
            proposed_action=proposed,
            governance_verdict=verdict,
            human_override=override,
            final_action=final,
            reward=REWARD_TABLE[(cls, final)],
            outcome=classify(cls, final),
            q_allow=draw(q),
            q_block=draw(q),
        )

    return st.lists(build(), max_size=30)


@settings(max_examples=60, deadline=None)
@given(consistent_records())
def test_round_trip_property(rows):
    log = DecisionLog(
        DecisionRecord(run_id="run-1", step=i, event_id=i, **row) for i, row in enumerate(rows)
    )
    text = export_text(log)
    back = import_text(text)
    assert back == log
    assert export_text(back) == text


class TestOverrides:
    def test_override_allow_on_attack(self):
        cfg = replace(SMALL, eval_events=40)
        trace = train(cfg)
        base = evaluate(cfg, trace.q)
        attack_id = next(r.event_id for r in base.log if r.true_class.is_attack)
        ev = evaluate(cfg, trace.q, overrides={attack_id: Action.ALLOW})
        rec = ev.log[attack_id]
        assert rec.human_override is Action.ALLOW
        assert (rec.outcome, rec.reward) == (Outcome.FN, -2)
        assert rec.governance_verdict is Verdict.NOT_APPLICABLE

    def test_override_matching_agent_changes_nothing_but_the_marker(self):
        trace = train(SMALL)
        base = evaluate(SMALL, trace.q)
        same = evaluate(SMALL, trace.q, overrides={4: base.log[4].final_action})
        assert same.metrics == base.metrics

    def test_past_event_rejected(self):
        o = Oversight()
        o.append(make_record(0))
        o.append(make_record(1))
        with pytest.raises(OverrideError):
            o.register_override(1, Action.ALLOW)
        o.register_override(2, Action.ALLOW)
        assert o.override_for(2) is Action.ALLOW

    def test_load_override_file(self):
        text = "# analyst decisions\n5,allow\n\n9, block\n"
        assert load_overrides(io.StringIO(text)) == {5: Action.ALLOW, 9: Action.BLOCK}
        with pytest.raises(LogFormatError, match="line 1"):
            load_overrides(io.StringIO("5,drop\n"))


class TestReplay:
    def test_replay_equals_live_metrics(self):
        trace = train(SMALL)
        ev = evaluate(replace(SMALL, eval_events=300), trace.q)
        assert replay(ev.log) == ev.metrics
        assert replay(import_text(export_text(ev.log))) == ev.metrics

    def test_tn_only_log_has_undefined_dr(self):
        log = DecisionLog(
            [make_record(i, true_class=TrafficClass.NORMAL, final=Action.ALLOW) for i in range(3)]
        )
        with pytest.raises(UndefinedMetricError):
            replay(log)

    def test_empty_eval_log_errors(self):
        with pytest.raises(UndefinedMetricError):
            replay(DecisionLog())
        with pytest.raises(UndefinedMetricError):
            replay(DecisionLog([make_record(phase=Phase.TRAIN)]))


class TestAuditSummary:
    def test_counts_vetoes(self):
        rows = [
            make_record(
                i,
                true_class=TrafficClass.NORMAL,
                final=Action.ALLOW,
                proposed_action=Action.BLOCK,
                governance_verdict=Verdict.VETOED,
            )
            for i in range(3)
        ]
        summary = audit_summary(DecisionLog(rows + [make_record(3)]))
        assert summary.interventions == 3
        assert summary.outcomes == {"tp": 1, "fp": 0, "tn": 3, "fn": 0}

    def test_per_class_counts_sum_to_length(self):
        log = import_text((GOLDEN / "eval_small.csv").read_text(encoding="utf-8"))
        summary = audit_summary(log)
        assert sum(sum(v.values()) for v in summary.per_class.values()) == len(log)
        assert summary.overrides == 1

    def test_empty_log_is_all_zero(self):
        s = audit_summary(DecisionLog())
        assert s.records == 0 and s.interventions == 0 and s.overrides == 0
        assert set(s.outcomes.values()) == {0}
        assert all(set(v.values()) == {0} for v in s.per_class.values())
        assert s.adherence == 0.0
