"""Univariate time series: generation, CSV ingestion, scaling, and windowing."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .randomness import rng_from


@dataclass(frozen=True)
class TimeSeriesDataset:
    """A series with min-max scaling constants and a train/test split.

    ``normalized[i] = (raw[i] - norm_min) / (norm_max - norm_min)``; a constant
    series (``norm_max == norm_min``) normalizes to all zeros.  ``split_index``
    is the first index of the test segment.
    """

    raw: np.ndarray
    normalized: np.ndarray
    norm_min: float
    norm_max: float
    split_index: int

    def __len__(self) -> int:
        return self.raw.size

    def denormalize(self, values) -> np.ndarray:
        """Map values from normalized units back to the raw scale."""
        return np.asarray(values, dtype=float) * (self.norm_max - self.norm_min) + self.norm_min


@dataclass(frozen=True)
class WindowedSet:
    """Supervised pairs: each input is ``look_back`` consecutive values, the
    target is the value that immediately follows."""

    inputs: np.ndarray  # shape (num_pairs, look_back)
    targets: np.ndarray  # shape (num_pairs,)
    look_back: int

    def __len__(self) -> int:
        return self.targets.size


def _make_dataset(raw: np.ndarray, split_fraction: float) -> TimeSeriesDataset:
    raw = np.ascontiguousarray(raw, dtype=float)
    if raw.ndim != 1:
        raise ValueError("series must be one-dimensional")
    n = raw.size
    if n < 2:
        raise ValueError(f"series needs at least 2 points, got {n}")
    if not 0.0 < split_fraction < 1.0:
        raise ValueError(f"split_fraction must be in (0, 1), got {split_fraction}")
    split_index = min(max(int(round(n * split_fraction)), 1), n - 1)
    lo = float(raw.min())
    hi = float(raw.max())
    if hi > lo:
        normalized = (raw - lo) / (hi - lo)
    else:
        normalized = np.zeros_like(raw)
    return TimeSeriesDataset(raw, normalized, lo, hi, split_index)


def generate_sine(
    num_points: int,
    period: float,
    amplitude: float = 1.0,
    phase: float = 0.0,
    noise_sd: float = 0.0,
    seed: int = 0,
    split_fraction: float = 0.8,
) -> TimeSeriesDataset:
    """Sine wave sampled at integer steps, plus optional Gaussian noise.

    ``raw[i] = amplitude * sin(2*pi*i/period + phase) + noise`` with noise drawn
    from ``N(0, noise_sd**2)`` on a stream keyed by ``seed``.
    """
    if num_points < 2:
        raise ValueError(f"num_points must be >= 2, got {num_points}")
    if period <= 0:
        raise ValueError(f"period must be positive, got {period}")
    if amplitude <= 0:
        raise ValueError(f"amplitude must be positive, got {amplitude}")
    if noise_sd < 0:
        raise ValueError(f"noise_sd must be nonnegative, got {noise_sd}")
    i = np.arange(num_points, dtype=float)
    raw = amplitude * np.sin(2.0 * np.pi * i / period + phase)
    if noise_sd > 0:
        raw = raw + rng_from(seed).normal(0.0, noise_sd, size=num_points)
    return _make_dataset(raw, split_fraction)


def load_csv(path, column, split_fraction: float = 0.8) -> TimeSeriesDataset:
    """Read one numeric column from a delimited text file.

    The first line must be a header; the delimiter (comma or semicolon) is
    detected from it.  ``column`` selects by header name or 0-based index.
    Parse failures report the 1-based file line number, header included.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise ValueError(f"{path}: missing header row")
        delimiter = ";" if header_line.count(";") > header_line.count(",") else ","
        header = next(csv.reader([header_line], delimiter=delimiter))
        if isinstance(column, int):
            if not 0 <= column < len(header):
                raise ValueError(f"column index {column} out of range for {len(header)} columns")
            col_idx = column
        else:
            try:
                col_idx = header.index(str(column))
            except ValueError:
                raise ValueError(f"column {column!r} not found in header {header}") from None
        values = []
        for line_no, row in enumerate(csv.reader(fh, delimiter=delimiter), start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if col_idx >= len(row):
                raise ValueError(f"row {line_no}: expected {len(header)} cells, found {len(row)}")
            cell = row[col_idx].strip()
            try:
                values.append(float(cell))
            except ValueError:
                raise ValueError(f"row {line_no}: could not parse {cell!r} as a number") from None
    if len(values) < 2:
        raise ValueError(f"{path}: need at least 2 data rows, found {len(values)}")
    return _make_dataset(np.asarray(values), split_fraction)


def window(dataset: TimeSeriesDataset, look_back: int, segment: str = "train") -> WindowedSet:
    """Slice the normalized series into ``(window, next value)`` pairs.

    ``train`` windows use indices ``[0, split_index)``; ``test`` windows reach
    back ``look_back`` values before the split so the first test target is
    ``normalized[split_index]``; ``full`` windows span the whole series.
    """
    if look_back < 1:
        raise ValueError(f"look_back must be positive, got {look_back}")
    series = dataset.normalized
    split = dataset.split_index
    if segment == "train":
        values = series[:split]
    elif segment == "test":
        if look_back > split:
            raise ValueError(
                f"look_back {look_back} reaches beyond the series start (split_index {split})"
            )
        values = series[split - look_back :]
    elif segment == "full":
        values = series
    else:
        raise ValueError(f"segment must be 'train', 'test' or 'full', got {segment!r}")
    if look_back >= values.size:
        raise ValueError(
            f"look_back {look_back} must be smaller than the {segment} segment length {values.size}"
        )
    windows = np.lib.stride_tricks.sliding_window_view(values, look_back)
    return WindowedSet(
        inputs=np.ascontiguousarray(windows[:-1]),
        targets=values[look_back:].copy(),
        look_back=look_back,
    )
