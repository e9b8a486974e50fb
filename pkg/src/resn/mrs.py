"""Training-free architecture scoring by random weight sampling.

An architecture is scored by drawing random weight vectors, measuring the MAE
each one achieves on the training pairs, fitting a normal distribution to
those errors, and reporting the probability mass below an error threshold.
Because MAE is nonnegative, the fitted normal is truncated at zero before the
threshold mass is read off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .data import TimeSeriesDataset, WindowedSet
from .randomness import rng_from
from .rnn import Architecture, predict_batch, weight_count


@dataclass(frozen=True)
class MRSConfig:
    """Sampling parameters: sample count, error threshold, weight distribution."""

    threshold: float
    num_samples: int = 100
    weight_mean: float = 0.0
    weight_sd: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_samples < 2:
            raise ValueError(f"num_samples must be >= 2, got {self.num_samples}")
        if self.threshold <= 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")
        if self.weight_sd <= 0:
            raise ValueError(f"weight_sd must be positive, got {self.weight_sd}")


@dataclass(frozen=True)
class MRSResult:
    """Sampled errors plus the fitted summary and threshold probability."""

    maes: np.ndarray
    mean_mae: float
    sd_mae: float
    p_t: float


def sample_weights(arch: Architecture, cfg: MRSConfig, sample_index: int) -> np.ndarray:
    """The weight vector of sample ``sample_index`` (1-based).

    Entries are i.i.d. normal(weight_mean, weight_sd^2) from a stream keyed by
    ``(cfg.seed, sample_index)``; this keying is part of the API contract so
    any single sample can be re-materialized independently.
    """
    rng = rng_from(cfg.seed, sample_index)
    return rng.normal(cfg.weight_mean, cfg.weight_sd, size=weight_count(arch))


def sample_maes(arch: Architecture, train: WindowedSet, cfg: MRSConfig) -> np.ndarray:
    """MAE on the training pairs for each sampled weight vector, in sample order."""
    if len(train) == 0:
        raise ValueError("training set must be nonempty")
    rows = np.stack([sample_weights(arch, cfg, s) for s in range(1, cfg.num_samples + 1)])
    preds = predict_batch(arch, rows, train.inputs)
    return np.mean(np.abs(preds - train.targets[None, :]), axis=1)


def normal_cdf(x: float) -> float:
    """Standard normal CDF."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def estimate_pt(maes: np.ndarray, threshold: float) -> float:
    """Probability that a sampled error falls below ``threshold``.

    Fits a normal to the errors (sample mean, n-1 standard deviation) and
    evaluates its left-truncated-at-zero CDF at the threshold.  A degenerate
    fit (zero spread) collapses to a point mass at the mean.
    """
    maes = np.asarray(maes, dtype=float)
    if maes.size < 2:
        raise ValueError(f"need at least 2 error samples, got {maes.size}")
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    mean = float(np.mean(maes))
    sd = float(np.std(maes, ddof=1))
    if sd == 0.0:
        return 1.0 if mean <= threshold else 0.0
    below_zero = normal_cdf((0.0 - mean) / sd)
    denom = 1.0 - below_zero
    if denom <= 0.0:
        # whole fitted mass sits below zero; truncation concentrates it at 0+
        return 1.0
    p = (normal_cdf((threshold - mean) / sd) - below_zero) / denom
    return min(1.0, max(0.0, p))


def fitness(arch: Architecture, train: WindowedSet, cfg: MRSConfig) -> float:
    """Threshold probability for this architecture; deterministic given ``cfg.seed``."""
    return estimate_pt(sample_maes(arch, train, cfg), cfg.threshold)


def assess(arch: Architecture, train: WindowedSet, cfg: MRSConfig) -> MRSResult:
    """Full sampling record: errors, fitted moments, and threshold probability."""
    maes = sample_maes(arch, train, cfg)
    return MRSResult(
        maes=maes,
        mean_mae=float(np.mean(maes)),
        sd_mae=float(np.std(maes, ddof=1)),
        p_t=estimate_pt(maes, cfg.threshold),
    )


def best_sample_weights(arch: Architecture, train: WindowedSet, cfg: MRSConfig) -> np.ndarray:
    """Re-materialize the weight vector of the lowest-error sample."""
    maes = sample_maes(arch, train, cfg)
    return sample_weights(arch, cfg, int(np.argmin(maes)) + 1)


def default_threshold(dataset: TimeSeriesDataset) -> float:
    """MAE of the naive last-value predictor on the training segment.

    Self-scaling across problems: one step of the normalized series is
    predicted by the previous value.
    """
    train = dataset.normalized[: dataset.split_index]
    if train.size < 2:
        raise ValueError("training segment too short for the naive baseline")
    t = float(np.mean(np.abs(np.diff(train))))
    # a flat training segment gives 0; keep the threshold valid
    return t if t > 0 else np.finfo(float).eps


def with_seed(cfg: MRSConfig, seed: int) -> MRSConfig:
    """Copy of ``cfg`` with a different stream seed."""
    return replace(cfg, seed=seed)
