"""RESN: evolutionary RNN architecture search scored by random-weight error
sampling, with gradient training of the selected champion.

Submodules
----------
data    series generation, CSV ingestion, scaling, windowing
rnn     architecture genotypes and the stacked-LSTM forward kernel
mrs     training-free fitness: sampled-error statistics and threshold mass
train   BPTT gradients, Adam, and error metrics
evolve  the (mu + lambda) search loop and the random-search baseline
bench   experiment harness, rank-sum tests, report files, CLI
"""

from . import bench, data, evolve, mrs, rnn, train
from .data import TimeSeriesDataset, WindowedSet, generate_sine, load_csv, window
from .evolve import EAConfig, Individual, RESNResult, run_random_search, run_resn
from .mrs import MRSConfig, MRSResult
from .rnn import Architecture, SearchSpace, forward, predict_series, weight_count
from .train import AdamConfig, TrainReport, mae, mape, mse, train_adam

__version__ = "0.1.0"

__all__ = [
    "AdamConfig",
    "Architecture",
    "EAConfig",
    "Individual",
    "MRSConfig",
    "MRSResult",
    "RESNResult",
    "SearchSpace",
    "TimeSeriesDataset",
    "TrainReport",
    "WindowedSet",
    "bench",
    "data",
    "evolve",
    "forward",
    "generate_sine",
    "load_csv",
    "mae",
    "mape",
    "mrs",
    "mse",
    "predict_series",
    "rnn",
    "run_random_search",
    "run_resn",
    "train",
    "train_adam",
    "weight_count",
    "window",
]
