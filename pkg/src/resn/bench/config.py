"""Experiment configuration: dataclasses plus a sectioned key-value file format.

The file format is INI-style: one section per component, ``key = value`` lines,
``#`` comments.  Every key is validated against the schema below; unknown
sections or keys are errors so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field, fields

from ..data import TimeSeriesDataset, generate_sine, load_csv
from ..evolve import EAConfig, MutationRates, SelfAdjust, StepSizes
from ..rnn import SearchSpace
from ..train import AdamConfig

METHODS = ("resn", "gdet", "random")


@dataclass(frozen=True)
class SineProblem:
    num_points: int = 500
    period: float = 50.0
    amplitude: float = 1.0
    phase: float = 0.0
    noise_sd: float = 0.0
    seed: int = 0
    split_fraction: float = 0.8


@dataclass(frozen=True)
class CsvProblem:
    path: str
    column: str | int = 0
    split_fraction: float = 0.8


def build_dataset(problem) -> TimeSeriesDataset:
    if isinstance(problem, SineProblem):
        return generate_sine(
            problem.num_points,
            problem.period,
            problem.amplitude,
            problem.phase,
            problem.noise_sd,
            problem.seed,
            problem.split_fraction,
        )
    return load_csv(problem.path, problem.column, problem.split_fraction)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one benchmark run needs: problem, search setup, methods."""

    problem: SineProblem | CsvProblem = field(default_factory=SineProblem)
    space: SearchSpace = field(
        default_factory=lambda: SearchSpace(
            max_layers=3, min_neurons=1, max_neurons=32, min_look_back=2, max_look_back=16
        )
    )
    ea: EAConfig = field(default_factory=EAConfig)
    mrs_num_samples: int = 100
    mrs_threshold: float | None = None  # None: naive last-value baseline per dataset
    mrs_weight_mean: float = 0.0
    mrs_weight_sd: float = 1.0
    final_adam: AdamConfig = field(default_factory=lambda: AdamConfig(epochs=1000))
    short_adam: AdamConfig = field(default_factory=lambda: AdamConfig(epochs=100))
    init_from_best_sample: bool = False
    methods: tuple[str, ...] = ("resn",)
    repetitions: int = 1
    base_seed: int = 0
    output_dir: str = "results"

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        if not self.methods:
            raise ValueError("at least one method is required")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
        if self.mrs_threshold is not None and self.mrs_threshold <= 0:
            raise ValueError(f"mrs threshold must be positive, got {self.mrs_threshold}")

    def config_hash(self) -> str:
        """Short digest of the effective configuration (wall clock excluded)."""
        return hashlib.sha256(repr(self).encode()).hexdigest()[:12]


_SCHEMA = {
    "problem": {
        "kind": str,
        "num_points": int,
        "period": float,
        "amplitude": float,
        "phase": float,
        "noise_sd": float,
        "seed": int,
        "split_fraction": float,
        "path": str,
        "column": str,
    },
    "search_space": {
        "max_layers": int,
        "min_neurons": int,
        "max_neurons": int,
        "min_look_back": int,
        "max_look_back": int,
    },
    "ea": {
        "mu": int,
        "lambda": int,
        "max_evaluations": int,
        "rate_perturb_width": float,
        "rate_add_layer": float,
        "rate_remove_layer": float,
        "rate_perturb_look_back": float,
        "step_width": int,
        "step_look_back": int,
        "adjust_window": int,
        "adjust_up": float,
        "adjust_down": float,
    },
    "mrs": {
        "num_samples": int,
        "threshold": str,  # 'auto' or a positive number
        "weight_mean": float,
        "weight_sd": float,
    },
    "train": {
        "learning_rate": float,
        "beta1": float,
        "beta2": float,
        "epsilon": float,
        "final_epochs": int,
        "short_epochs": int,
        "init_from_best_sample": bool,
    },
    "experiment": {
        "methods": str,
        "repetitions": int,
        "base_seed": int,
        "output_dir": str,
    },
}

_BOOL_VALUES = {"true": True, "false": False, "yes": True, "no": False, "1": True, "0": False}


def _convert(section: str, key: str, raw: str, kind):
    try:
        if kind is bool:
            return _BOOL_VALUES[raw.strip().lower()]
        return kind(raw.strip())
    except (ValueError, KeyError):
        raise ValueError(f"[{section}] {key}: cannot read {raw!r} as {kind.__name__}") from None


def _read_sections(path) -> dict[str, dict]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    with open(path, "r", encoding="utf-8") as fh:
        parser.read_file(fh)
    values: dict[str, dict] = {}
    unknown = []
    for section in parser.sections():
        if section not in _SCHEMA:
            unknown.append(f"section [{section}]")
            continue
        values[section] = {}
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                unknown.append(f"[{section}] {key}")
                continue
            values[section][key] = _convert(section, key, raw, _SCHEMA[section][key])
    if unknown:
        raise ValueError(f"unknown configuration entries: {', '.join(unknown)}")
    return values


def _default_field(name: str):
    for f in fields(ExperimentConfig):
        if f.name == name:
            return f.default_factory() if f.default_factory is not None else f.default
    raise KeyError(name)  # pragma: no cover


def load_config(path) -> ExperimentConfig:
    """Parse an experiment file; every setting is optional but must be known."""
    values = _read_sections(path)

    prob_values = dict(values.get("problem", {}))
    kind = prob_values.pop("kind", "sine").lower()
    if kind == "sine":
        prob_values.pop("path", None)
        prob_values.pop("column", None)
        problem = SineProblem(**prob_values)
    elif kind == "csv":
        if "path" in prob_values:
            column = prob_values.get("column", "0")
            prob_values["column"] = int(column) if str(column).lstrip("-").isdigit() else column
            allowed = {"path", "column", "split_fraction"}
            extra = set(prob_values) - allowed
            if extra:
                raise ValueError(f"[problem] keys {sorted(extra)} do not apply to kind=csv")
            problem = CsvProblem(**prob_values)
        else:
            raise ValueError("[problem] kind=csv requires a path")
    else:
        raise ValueError(f"[problem] kind must be 'sine' or 'csv', got {kind!r}")

    space_values = values.get("search_space", {})
    space = SearchSpace(**space_values) if space_values else _default_field("space")

    ea_values = dict(values.get("ea", {}))
    rates = MutationRates(
        perturb_width=ea_values.pop("rate_perturb_width", MutationRates().perturb_width),
        add_layer=ea_values.pop("rate_add_layer", MutationRates().add_layer),
        remove_layer=ea_values.pop("rate_remove_layer", MutationRates().remove_layer),
        perturb_look_back=ea_values.pop("rate_perturb_look_back", MutationRates().perturb_look_back),
    )
    steps = StepSizes(
        width=ea_values.pop("step_width", StepSizes().width),
        look_back=ea_values.pop("step_look_back", StepSizes().look_back),
    )
    adjust = SelfAdjust(
        window=ea_values.pop("adjust_window", SelfAdjust().window),
        up_factor=ea_values.pop("adjust_up", SelfAdjust().up_factor),
        down_factor=ea_values.pop("adjust_down", SelfAdjust().down_factor),
    )
    if "lambda" in ea_values:
        ea_values["lambda_"] = ea_values.pop("lambda")
    ea = EAConfig(mutation_rates=rates, step_sizes=steps, self_adjust=adjust, **ea_values)

    mrs_values = values.get("mrs", {})
    threshold_raw = mrs_values.get("threshold", "auto")
    if str(threshold_raw).strip().lower() == "auto":
        threshold = None
    else:
        threshold = _convert("mrs", "threshold", str(threshold_raw), float)

    train_values = values.get("train", {})
    adam_kwargs = {
        k: train_values[k] for k in ("learning_rate", "beta1", "beta2", "epsilon") if k in train_values
    }
    final_adam = AdamConfig(epochs=train_values.get("final_epochs", 1000), **adam_kwargs)
    short_adam = AdamConfig(epochs=train_values.get("short_epochs", 100), **adam_kwargs)

    exp_values = values.get("experiment", {})
    methods_raw = exp_values.get("methods", "resn")
    methods = tuple(m.strip().lower() for m in methods_raw.split(",") if m.strip())

    return ExperimentConfig(
        problem=problem,
        space=space,
        ea=ea,
        mrs_num_samples=mrs_values.get("num_samples", 100),
        mrs_threshold=threshold,
        mrs_weight_mean=mrs_values.get("weight_mean", 0.0),
        mrs_weight_sd=mrs_values.get("weight_sd", 1.0),
        final_adam=final_adam,
        short_adam=short_adam,
        init_from_best_sample=train_values.get("init_from_best_sample", False),
        methods=methods,
        repetitions=exp_values.get("repetitions", 1),
        base_seed=exp_values.get("base_seed", 0),
        output_dir=exp_values.get("output_dir", "results"),
    )
