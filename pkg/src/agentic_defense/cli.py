"""Command-line entry point.

    agentic-defense baseline --config run.cfg
    agentic-defense train    --config run.cfg
    agentic-defense evaluate --config run.cfg --qtable out/qtable.csv
    agentic-defense compare  --config run.cfg --seeds 10
    agentic-defense replay   out/eval_log.csv
    agentic-defense plot     --figure roc --input out/eval_log.csv

Failures print one ``error: <kind>: <message>`` line to stderr and exit
non-zero (2 for configuration/usage problems, 1 otherwise).
"""

from __future__ import annotations

import argparse
import resource
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import engine, oversight, reporting, svg
from .config import ConfigError, Settings, load_config, parse_config
from .labels import Phase
from .metrics import UndefinedMetricError, confusion, roc_auc


class CliError(Exception):
    def __init__(self, kind: str, message: str, status: int = 1):
        super().__init__(message)
        self.kind = kind
        self.status = status


def _settings(args) -> Settings:
    if args.config is None:
        settings = parse_config("")
    else:
        try:
            settings = load_config(args.config)
        except OSError as exc:
            raise CliError("config", f"cannot read {args.config}: {exc.strerror}", 2) from None
        except ConfigError as exc:
            raise CliError("config", str(exc), 2) from None
    if getattr(args, "seed", None) is not None:
        if args.seed < 0:
            raise CliError("config", "--seed must be non-negative", 2)
        settings = replace(settings, run=replace(settings.run, seed=args.seed))
    return settings


def _outdir(args, settings: Settings) -> Path:
    out = Path(args.out if args.out is not None else settings.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise CliError("io", f"output directory {out} is not writable: {exc.strerror}") from None
    return out


def _overrides(args) -> dict | None:
    if getattr(args, "overrides", None) is None:
        return None
    try:
        with open(args.overrides, encoding="utf-8") as fh:
            return oversight.load_overrides(fh)
    except OSError as exc:
        raise CliError("io", f"cannot read {args.overrides}: {exc.strerror}") from None
    except oversight.LogFormatError as exc:
        raise CliError("overrides", f"{args.overrides}: {exc}") from None


def _write_eval(out: Path, stem: str, result: engine.EvalResult) -> None:
    oversight.write_csv(result.log, out / f"{stem}_log.csv")
    reporting.write_text(out / f"{stem}_metrics.txt", reporting.format_metrics(result.metrics))


def cmd_baseline(args) -> list[Path]:
    settings = _settings(args)
    out = _outdir(args, settings)
    cfg = replace(settings.run, agent_kind="baseline", phase=Phase.EVAL)
    result = engine.evaluate(cfg, overrides=_overrides(args))
    _write_eval(out, "baseline", result)
    print(reporting.format_metrics(result.metrics), end="")
    return [out / "baseline_log.csv", out / "baseline_metrics.txt"]


def cmd_train(args) -> list[Path]:
    settings = _settings(args)
    out = _outdir(args, settings)
    cfg = replace(settings.run, agent_kind="qlearning", phase=Phase.TRAIN)
    trace = engine.train(cfg, overrides=_overrides(args))
    oversight.write_csv(trace.log, out / "train_log.csv")
    reporting.write_text(out / "trace.csv", reporting.format_trace(trace.episodes, settings.ma_window))
    reporting.write_text(out / "qtable.csv", reporting.format_qtable(trace.q))

    # the opposite governance arm on the same seed, for the compliance comparison
    other_cfg = replace(cfg, governance=replace(cfg.governance, enabled=not cfg.governance.enabled))
    other = engine.train(other_cfg)
    governed, ungoverned = (trace, other) if cfg.governance.enabled else (other, trace)
    reporting.write_text(
        out / "compliance.csv",
        reporting.format_compliance(governed.ecs_series(), ungoverned.ecs_series(), settings.ma_window),
    )
    print(f"episodes={len(trace.episodes)} final_accuracy={reporting.real(trace.episodes[-1].accuracy)} "
          f"interventions={trace.interventions}")
    return [out / n for n in ("train_log.csv", "trace.csv", "qtable.csv", "compliance.csv")]


def cmd_evaluate(args) -> list[Path]:
    settings = _settings(args)
    out = _outdir(args, settings)
    try:
        q = reporting.read_qtable(args.qtable)
    except OSError as exc:
        raise CliError("io", f"cannot read {args.qtable}: {exc.strerror}") from None
    except reporting.FileFormatError as exc:
        raise CliError("qtable", f"{args.qtable}: {exc}") from None
    cfg = replace(settings.run, agent_kind="qlearning", phase=Phase.EVAL)
    result = engine.evaluate(cfg, q, overrides=_overrides(args))
    _write_eval(out, "eval", result)
    print(reporting.format_metrics(result.metrics), end="")
    return [out / "eval_log.csv", out / "eval_metrics.txt"]


def cmd_compare(args) -> list[Path]:
    settings = _settings(args)
    out = _outdir(args, settings)
    if args.seeds < 2:
        raise CliError("usage", "--seeds must be >= 2", 2)
    report = engine.compare(settings.run, args.seeds, jobs=args.jobs)
    written = []
    for res in report.per_seed:
        seed_dir = out / f"seed_{res.seed}"
        seed_dir.mkdir(exist_ok=True)
        for arm in ("agentic", "explore", "baseline"):
            ev = getattr(res, arm)
            if ev is not None:
                _write_eval(seed_dir, arm, ev)
                written.append(seed_dir / f"{arm}_log.csv")
    text = reporting.format_report(report)
    reporting.write_text(out / "report.txt", text)
    print(text, end="")
    return [out / "report.txt", *written]


def cmd_replay(args) -> list[Path]:
    try:
        log = oversight.read_csv(args.csv_file)
    except OSError as exc:
        raise CliError("io", f"cannot read {args.csv_file}: {exc.strerror}") from None
    except oversight.LogFormatError as exc:
        raise CliError("parse", str(exc)) from None
    except oversight.LogConsistencyError as exc:
        raise CliError("consistency", str(exc)) from None
    try:
        metrics = oversight.replay(log)
    except oversight.LogConsistencyError as exc:
        raise CliError("consistency", str(exc)) from None
    print(reporting.format_metrics(metrics), end="")
    return []


FIGURES = ("learning", "compliance", "confusion", "roc")


def _plot_series(figure: str, path: str) -> tuple[str, str]:
    if figure == "learning":
        cols = reporting.read_columns(path, reporting.TRACE_HEADER)
        xs = cols["episode"]
        data = "episode,accuracy,moving_avg\n" + "".join(
            f"{int(x)},{reporting.real(a)},{reporting.real(m)}\n"
            for x, a, m in zip(xs, cols["accuracy"], cols["moving_avg"])
        )
        chart = svg.line_chart(
            [("accuracy", xs, cols["accuracy"]), ("moving average", xs, cols["moving_avg"])],
            "Detection accuracy over training episodes", "Episode", "Accuracy",
        )
        return data, chart
    if figure == "compliance":
        cols = reporting.read_columns(path, reporting.COMPLIANCE_HEADER)
        xs = cols["episode"]
        data = "episode,ma_governed,ma_ungoverned\n" + "".join(
            f"{int(x)},{reporting.real(g)},{reporting.real(u)}\n"
            for x, g, u in zip(xs, cols["ma_governed"], cols["ma_ungoverned"])
        )
        chart = svg.line_chart(
            [("with governance", xs, cols["ma_governed"]), ("without governance", xs, cols["ma_ungoverned"])],
            "Ethical compliance score over episodes (moving average)", "Episode", "ECS",
        )
        return data, chart

    log = oversight.read_csv(path)
    records = [rec for rec in log if rec.phase is Phase.EVAL]
    if not records:
        raise CliError("input", f"{path}: no eval records")
    if figure == "confusion":
        c = confusion(records)
        data = f"actual\\predicted,block,allow\nattack,{c.tp},{c.fn}\nnormal,{c.fp},{c.tn}\n"
        return data, svg.confusion_chart(c.tp, c.fp, c.tn, c.fn, "Confusion matrix (evaluation)")
    curve, auc = roc_auc([(rec.margin, rec.true_class.is_attack) for rec in records])
    data = f"# auc={reporting.real(auc)}\nfpr,tpr\n" + "".join(
        f"{reporting.real(x)},{reporting.real(y)}\n" for x, y in curve
    )
    return data, svg.roc_chart(curve, auc, "ROC curve (Q-margin score)")


def cmd_plot(args) -> list[Path]:
    settings = _settings(args)
    out = _outdir(args, settings)
    try:
        data, chart = _plot_series(args.figure, args.input)
    except OSError as exc:
        raise CliError("io", f"cannot read {args.input}: {exc.strerror}") from None
    except (reporting.FileFormatError, oversight.LogFormatError, oversight.LogConsistencyError) as exc:
        raise CliError("input", str(exc)) from None
    reporting.write_text(out / f"{args.figure}.dat", data)
    reporting.write_text(out / f"{args.figure}.svg", chart)
    return [out / f"{args.figure}.dat", out / f"{args.figure}.svg"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"error: usage: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="agentic-defense", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="flat key=value config file")
        p.add_argument("--seed", type=int, help="overrides run.seed")
        p.add_argument("--out", help="output directory (overrides output.dir)")

    p = sub.add_parser("baseline", help="evaluate the rule-based baseline")
    common(p)
    p.add_argument("--overrides", help="file of event_id,action lines")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("train", help="train the Q-learning agent")
    common(p)
    p.add_argument("--overrides", help="file of event_id,action lines")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a saved Q-table on unseen traffic")
    common(p)
    p.add_argument("--qtable", required=True, help="Q-table file written by train")
    p.add_argument("--overrides", help="file of event_id,action lines")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="multi-seed comparison of both arms")
    common(p)
    p.add_argument("--seeds", type=int, default=10, help="number of seeds (default 10)")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("replay", help="recompute metrics from an exported decision log")
    p.add_argument("csv_file")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("plot", help="emit SVG and data series for a figure")
    common(p, config_required=False)
    p.add_argument("--figure", required=True, choices=FIGURES)
    p.add_argument("--input", required=True, help="trace, compliance or eval log file")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.perf_counter()
    try:
        args.func(args)
    except CliError as exc:
        print(f"error: {exc.kind}: {exc}", file=sys.stderr)
        return exc.status
    except UndefinedMetricError as exc:
        print(f"error: metric: {exc}", file=sys.stderr)
        return 1
    except oversight.OverrideError as exc:
        print(f"error: overrides: {exc}", file=sys.stderr)
        return 1
    elapsed = time.perf_counter() - started
    peak_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
    print(f"{args.command}: {elapsed:.2f} s wall-clock, peak RSS {peak_mb:.0f} MB", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
