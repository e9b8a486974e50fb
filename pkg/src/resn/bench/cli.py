"""Command line front end: ``run``, ``summarize``, and ``compare``.

``run`` executes an experiment file end to end and writes the report files;
``summarize`` and ``compare`` re-read a ``runs.csv``.  Times are stored in
seconds and rendered in minutes.
"""

from __future__ import annotations

import argparse
import sys

from .config import load_config
from .harness import (
    _METRIC_FIELDS,
    _TIME_FIELDS,
    emit_report,
    load_runs_csv,
    pairwise_tests,
    run_experiment,
    summarize,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resn-bench",
        description="Run and analyze architecture-search benchmark experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute an experiment described by a config file")
    run_p.add_argument("--config", required=True, help="path to the experiment config file")

    sum_p = sub.add_parser("summarize", help="summary statistics from a runs.csv")
    sum_p.add_argument("--runs", required=True, help="path to runs.csv")

    cmp_p = sub.add_parser("compare", help="pairwise rank-sum tests from a runs.csv")
    cmp_p.add_argument("--runs", required=True, help="path to runs.csv")
    cmp_p.add_argument("--metric", required=True, choices=list(_METRIC_FIELDS))
    return parser


def _all_summaries(records):
    return {metric: summarize(records, metric) for metric in _METRIC_FIELDS + _TIME_FIELDS}


def _print_summaries(records) -> None:
    print("metric,method,mean,median,max,min,sd")
    for metric in _METRIC_FIELDS + _TIME_FIELDS:
        label = metric
        scale = 1.0
        if metric.endswith("_seconds"):
            label = metric.replace("_seconds", "_minutes")
            scale = 1.0 / 60.0
        for method, stats in sorted(summarize(records, metric).items()):
            print(
                f"{label},{method},{stats.mean * scale:.6g},{stats.median * scale:.6g},"
                f"{stats.max * scale:.6g},{stats.min * scale:.6g},{stats.sd * scale:.6g}"
            )


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    records = run_experiment(cfg, verbose=True)
    summaries = _all_summaries(records)
    tests = pairwise_tests(records)
    written = emit_report(records, summaries, tests, cfg.output_dir, cfg.config_hash())
    _print_summaries(records)
    print(f"wrote {len(written)} files under {cfg.output_dir}")
    return 0


def _cmd_summarize(args) -> int:
    _print_summaries(load_runs_csv(args.runs))
    return 0


def _cmd_compare(args) -> int:
    records = load_runs_csv(args.runs)
    print("metric,method_a,method_b,p_value")
    for test in pairwise_tests(records, metrics=(args.metric,)):
        print(f"{test.metric},{test.method_a},{test.method_b},{test.p_value:.6g}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "summarize": _cmd_summarize, "compare": _cmd_compare}
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
