"""Benchmark execution: repeated seeded runs, records, and report files.

One run = one (method, repetition) pair; its seed is ``base_seed + repetition``
so methods face identical problem draws.  Records append to ``runs.csv`` as
they finish (a crash loses at most the in-flight run); the final report pass
rewrites all files deterministically.
"""

from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from ..data import window
from ..evolve import (
    GenerationStats,
    run_random_search,
    run_resn,
    train_champion,
)
from ..mrs import MRSConfig, default_threshold
from ..rnn import Architecture, predict_series, save_weights
from ..train import mae, mape, mse
from .config import ExperimentConfig, build_dataset
from .stats import SummaryStats, summarize_values, wilcoxon_rank_sum

THREADS_ENV = "RESN_THREADS"

_METRIC_FIELDS = ("mae", "mse", "mape")
_TIME_FIELDS = ("optimization_seconds", "training_seconds", "total_seconds")

_RUNS_COLUMNS = (
    "method",
    "repetition",
    "mae",
    "mse",
    "mape",
    "optimization_seconds",
    "training_seconds",
    "total_seconds",
    "evaluations",
    "champion",
)


@dataclass
class RunRecord:
    """Outcome of one optimization run plus its champion evaluation."""

    method: str
    repetition: int
    mae: float
    mse: float
    mape: float  # nan when a test target is exactly zero
    optimization_seconds: float
    training_seconds: float
    total_seconds: float
    evaluations: int
    champion: Architecture
    champion_weights: np.ndarray = field(default_factory=lambda: np.empty(0))
    generations: tuple[GenerationStats, ...] = ()


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def _resolve_mrs(cfg: ExperimentConfig, dataset) -> MRSConfig:
    threshold = cfg.mrs_threshold
    if threshold is None:
        threshold = default_threshold(dataset)
    return MRSConfig(
        threshold=threshold,
        num_samples=cfg.mrs_num_samples,
        weight_mean=cfg.mrs_weight_mean,
        weight_sd=cfg.mrs_weight_sd,
    )


def execute_run(cfg: ExperimentConfig, method: str, repetition: int) -> RunRecord:
    """Run one method once and evaluate its trained champion on the test split."""
    started = time.perf_counter()
    dataset = build_dataset(cfg.problem)
    seed = cfg.base_seed + repetition
    generations: tuple[GenerationStats, ...] = ()

    if method in ("resn", "gdet"):
        ea = replace(cfg.ea, seed=seed, fitness_kind="mrs" if method == "resn" else "gdet")
        result = run_resn(
            cfg.space,
            ea,
            dataset,
            mrs_cfg=_resolve_mrs(cfg, dataset),
            adam_cfg=cfg.final_adam,
            gdet_adam=cfg.short_adam,
            init_from_best_sample=cfg.init_from_best_sample,
        )
        champion = result.best.arch
        report = result.report
        optimization_seconds = result.optimization_seconds
        evaluations = result.evaluations
        generations = result.log
    elif method == "random":
        opt_start = time.perf_counter()
        best = run_random_search(
            cfg.space,
            budget=cfg.ea.max_evaluations,
            dataset=dataset,
            fitness_kind="gdet",
            gdet_adam=cfg.short_adam,
            seed=seed,
        )
        optimization_seconds = time.perf_counter() - opt_start
        champion = best.arch
        report = train_champion(champion, dataset, cfg.final_adam, seed)
        evaluations = cfg.ea.max_evaluations
    else:
        raise ValueError(f"unknown method {method!r}")

    test_set = window(dataset, champion.look_back, "test")
    preds = predict_series(champion, report.final_weights, test_set)
    record = RunRecord(
        method=method,
        repetition=repetition,
        mae=mae(test_set.targets, preds),
        mse=mse(test_set.targets, preds),
        mape=mape(test_set.targets, preds) if np.all(test_set.targets != 0) else float("nan"),
        optimization_seconds=optimization_seconds,
        training_seconds=report.wall_time,
        total_seconds=time.perf_counter() - started,
        evaluations=evaluations,
        champion=champion,
        champion_weights=report.final_weights,
        generations=generations,
    )
    return record


def run_experiment(cfg: ExperimentConfig, verbose: bool = False) -> list[RunRecord]:
    """Every configured (method, repetition) pair, records in canonical order.

    With more than one worker (``RESN_THREADS`` or the CPU count) runs execute
    in parallel processes; results are collected and written in submission
    order, so the output never depends on scheduling.
    """
    jobs = [(method, rep) for method in cfg.methods for rep in range(cfg.repetitions)]
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    runs_path = out_dir / "runs.csv"
    records: list[RunRecord] = []

    with open(runs_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(_header_line(cfg.config_hash()))
        writer = csv.writer(fh)
        writer.writerow(_RUNS_COLUMNS)
        fh.flush()

        def note(record: RunRecord):
            records.append(record)
            writer.writerow(_record_row(record))
            fh.flush()
            if verbose:
                print(
                    f"[{record.method} #{record.repetition}] champion {record.champion.describe()!r} "
                    f"test mae {record.mae:.4f} ({record.total_seconds:.1f}s)"
                )

        workers = min(worker_count(), len(jobs))
        if workers <= 1:
            for method, rep in jobs:
                note(execute_run(cfg, method, rep))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(execute_run, cfg, method, rep) for method, rep in jobs]
                for future in futures:
                    note(future.result())
    return records


def summarize(records: list[RunRecord], metric: str) -> dict[str, SummaryStats]:
    """Per-method summary of one metric or time field, order independent."""
    if metric not in _METRIC_FIELDS + _TIME_FIELDS:
        raise ValueError(f"unknown metric {metric!r}")
    groups: dict[str, list[float]] = {}
    for record in records:
        groups.setdefault(record.method, []).append(getattr(record, metric))
    if not groups:
        raise ValueError("no records to summarize")
    return {method: summarize_values(values) for method, values in groups.items()}


@dataclass(frozen=True)
class PairwiseTest:
    metric: str
    method_a: str
    method_b: str
    p_value: float


def pairwise_tests(records: list[RunRecord], metrics=_METRIC_FIELDS) -> list[PairwiseTest]:
    """Two-sided rank-sum p-values for every method pair and metric."""
    methods = sorted({r.method for r in records})
    tests = []
    for metric in metrics:
        for i, a in enumerate(methods):
            for b in methods[i + 1 :]:
                va = [getattr(r, metric) for r in records if r.method == a]
                vb = [getattr(r, metric) for r in records if r.method == b]
                if np.any(np.isnan(va)) or np.any(np.isnan(vb)):
                    p = float("nan")
                else:
                    p = wilcoxon_rank_sum(va, vb)
                tests.append(PairwiseTest(metric, a, b, p))
    return tests


def _header_line(cfg_hash: str) -> str:
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return f"# config={cfg_hash} generated={stamp}\n"


def _record_row(record: RunRecord) -> list:
    return [
        record.method,
        record.repetition,
        repr(record.mae),
        repr(record.mse),
        repr(record.mape),
        repr(record.optimization_seconds),
        repr(record.training_seconds),
        repr(record.total_seconds),
        record.evaluations,
        record.champion.describe(),
    ]


def emit_report(
    records: list[RunRecord],
    summaries: dict[str, dict[str, SummaryStats]],
    tests: list[PairwiseTest],
    out_dir,
    cfg_hash: str,
) -> list[Path]:
    """Write runs.csv, summary.csv, tests.csv and champion weight files.

    Output is deterministic for the same records apart from the timestamp in
    the comment header.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    runs_path = out_dir / "runs.csv"
    ordered = sorted(records, key=lambda r: (r.method, r.repetition))
    with open(runs_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(_header_line(cfg_hash))
        writer = csv.writer(fh)
        writer.writerow(_RUNS_COLUMNS)
        for record in ordered:
            writer.writerow(_record_row(record))
    written.append(runs_path)

    summary_path = out_dir / "summary.csv"
    stat_names = ("mean", "median", "max", "min", "sd")
    with open(summary_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(_header_line(cfg_hash))
        writer = csv.writer(fh)
        columns = ["method"]
        for metric in _METRIC_FIELDS + _TIME_FIELDS:
            columns.extend(f"{metric}_{stat}" for stat in stat_names)
        writer.writerow(columns)
        methods = sorted({r.method for r in records})
        for method in methods:
            row = [method]
            for metric in _METRIC_FIELDS + _TIME_FIELDS:
                stats = summaries[metric][method]
                row.extend(repr(getattr(stats, stat)) for stat in stat_names)
            writer.writerow(row)
    written.append(summary_path)

    tests_path = out_dir / "tests.csv"
    with open(tests_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(_header_line(cfg_hash))
        writer = csv.writer(fh)
        writer.writerow(["metric", "method_a", "method_b", "p_value"])
        for test in tests:
            writer.writerow([test.metric, test.method_a, test.method_b, repr(test.p_value)])
    written.append(tests_path)

    for record in ordered:
        if record.champion_weights.size:
            champ_path = out_dir / f"champion_{record.method}_{record.repetition}.txt"
            save_weights(champ_path, record.champion, record.champion_weights)
            written.append(champ_path)
    return written


def load_runs_csv(path) -> list[RunRecord]:
    """Parse a runs.csv back into records (champion weights are not stored)."""
    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(rows)
    missing = set(_RUNS_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"{path}: missing columns {sorted(missing)}")
    for row in reader:
        records.append(
            RunRecord(
                method=row["method"],
                repetition=int(row["repetition"]),
                mae=float(row["mae"]),
                mse=float(row["mse"]),
                mape=float(row["mape"]),
                optimization_seconds=float(row["optimization_seconds"]),
                training_seconds=float(row["training_seconds"]),
                total_seconds=float(row["total_seconds"]),
                evaluations=int(row["evaluations"]),
                champion=Architecture.from_description(row["champion"]),
            )
        )
    if not records:
        raise ValueError(f"{path}: no run records found")
    return records
