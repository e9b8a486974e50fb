"""Benchmark harness: experiment configs, runners, statistics, and reports."""

from .config import (
    CsvProblem,
    ExperimentConfig,
    SineProblem,
    build_dataset,
    load_config,
)
from .harness import (
    PairwiseTest,
    RunRecord,
    emit_report,
    execute_run,
    load_runs_csv,
    pairwise_tests,
    run_experiment,
    summarize,
    worker_count,
)
from .stats import SummaryStats, summarize_values, wilcoxon_rank_sum

__all__ = [
    "CsvProblem",
    "ExperimentConfig",
    "PairwiseTest",
    "RunRecord",
    "SineProblem",
    "SummaryStats",
    "build_dataset",
    "emit_report",
    "execute_run",
    "load_config",
    "load_runs_csv",
    "pairwise_tests",
    "run_experiment",
    "summarize",
    "summarize_values",
    "wilcoxon_rank_sum",
    "worker_count",
]
