"""(mu + lambda) evolutionary search over RNN architectures.

Fitness is either the training-free threshold probability from :mod:`resn.mrs`
(kind ``"mrs"``) or the negated test MAE after a short gradient-training run
(kind ``"gdet"``).  Selection is binary tournament, replacement is elitist,
and integer mutation step sizes self-adjust with a 1/5-success rule.
"""

from __future__ import annotations

import csv
import math
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import mrs as mrs_mod
from .data import TimeSeriesDataset, window
from .randomness import derive_seed, rng_from
from .rnn import Architecture, SearchSpace, predict_series, weight_count
from .train import AdamConfig, TrainReport, initial_weights, train_adam

MRS_FITNESS = "mrs"
GDET_FITNESS = "gdet"

# rng branch tags under the run seed
_B_INIT = 1
_B_EVAL = 2
_B_SAMPLE = 3
_B_FINAL = 4


@dataclass
class Individual:
    """One candidate architecture plus its cached evaluation."""

    arch: Architecture
    eval_seed: int
    birth_index: int
    fitness: float | None = None
    eval_cost_seconds: float = 0.0

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None


@dataclass(frozen=True)
class MutationRates:
    perturb_width: float = 0.7
    add_layer: float = 0.15
    remove_layer: float = 0.15
    perturb_look_back: float = 0.5

    def __post_init__(self):
        for name, p in vars(self).items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"mutation rate {name} must be in [0, 1], got {p}")


@dataclass(frozen=True)
class StepSizes:
    width: int = 4
    look_back: int = 2

    def __post_init__(self):
        if self.width < 1 or self.look_back < 1:
            raise ValueError("step sizes must be >= 1")


@dataclass(frozen=True)
class SelfAdjust:
    window: int = 10
    up_factor: float = 1.5
    down_factor: float = 0.5
    target_success: float = 0.2

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.up_factor <= 1.0:
            raise ValueError("up_factor must be > 1")
        if not 0.0 < self.down_factor < 1.0:
            raise ValueError("down_factor must be in (0, 1)")


@dataclass(frozen=True)
class EAConfig:
    mu: int = 10
    lambda_: int = 10
    max_evaluations: int = 100
    mutation_rates: MutationRates = field(default_factory=MutationRates)
    step_sizes: StepSizes = field(default_factory=StepSizes)
    self_adjust: SelfAdjust = field(default_factory=SelfAdjust)
    fitness_kind: str = MRS_FITNESS
    seed: int = 0

    def __post_init__(self):
        if self.mu < 1 or self.lambda_ < 1:
            raise ValueError("mu and lambda_ must be >= 1")
        if self.max_evaluations < self.mu:
            raise ValueError(
                f"max_evaluations {self.max_evaluations} cannot cover the initial "
                f"population of mu={self.mu}"
            )
        if self.fitness_kind not in (MRS_FITNESS, GDET_FITNESS):
            raise ValueError(f"fitness_kind must be 'mrs' or 'gdet', got {self.fitness_kind!r}")


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    evaluations: int
    best_fitness: float
    mean_fitness: float
    step_width: int
    step_look_back: int
    elapsed_seconds: float


@dataclass
class Evaluator:
    """Scores individuals against one dataset and counts evaluations.

    MRS fitness samples random weights on the training windows; GDET fitness
    trains briefly with Adam and negates the test-segment MAE.  Individuals
    keep their score, so re-evaluation never happens and the counter moves
    once per individual.
    """

    dataset: TimeSeriesDataset
    fitness_kind: str
    mrs_cfg: mrs_mod.MRSConfig | None = None
    gdet_adam: AdamConfig = field(default_factory=lambda: AdamConfig(epochs=100))
    evaluations: int = 0

    def evaluate(self, population: list[Individual]) -> list[Individual]:
        for ind in population:
            if ind.evaluated:
                continue
            start = time.perf_counter()
            if self.fitness_kind == MRS_FITNESS:
                ind.fitness = self._mrs_fitness(ind)
            else:
                ind.fitness = self._gdet_fitness(ind)
            ind.eval_cost_seconds = time.perf_counter() - start
            self.evaluations += 1
        return population

    def _mrs_fitness(self, ind: Individual) -> float:
        if self.mrs_cfg is None:
            raise ValueError("MRS fitness requires an MRSConfig")
        train_set = window(self.dataset, ind.arch.look_back, "train")
        return mrs_mod.fitness(ind.arch, train_set, mrs_mod.with_seed(self.mrs_cfg, ind.eval_seed))

    def _gdet_fitness(self, ind: Individual) -> float:
        train_set = window(self.dataset, ind.arch.look_back, "train")
        test_set = window(self.dataset, ind.arch.look_back, "test")
        init = initial_weights(ind.arch, ind.eval_seed)
        report = train_adam(ind.arch, init, train_set, self.gdet_adam)
        preds = predict_series(ind.arch, report.final_weights, test_set)
        return -float(np.mean(np.abs(preds - test_set.targets)))


def evaluate(population: list[Individual], evaluator: Evaluator) -> list[Individual]:
    """Score every unevaluated individual in place."""
    return evaluator.evaluate(population)


def _uniform_arch(space: SearchSpace, rng: np.random.Generator) -> Architecture:
    n_layers = int(rng.integers(1, space.max_layers + 1))
    widths = tuple(
        int(w) for w in rng.integers(space.min_neurons, space.max_neurons + 1, size=n_layers)
    )
    look_back = int(rng.integers(space.min_look_back, space.max_look_back + 1))
    return Architecture(widths, look_back)


def initialize(space: SearchSpace, cfg: EAConfig) -> list[Individual]:
    """mu architectures drawn uniformly from the search space."""
    rng = rng_from(cfg.seed, _B_INIT)
    return [
        Individual(
            arch=_uniform_arch(space, rng),
            eval_seed=derive_seed(cfg.seed, _B_EVAL, i),
            birth_index=i,
        )
        for i in range(cfg.mu)
    ]


def _prefers(a: Individual, b: Individual) -> bool:
    """True when ``a`` strictly beats ``b``: higher fitness, then fewer weights."""
    if a.fitness != b.fitness:
        return a.fitness > b.fitness
    return weight_count(a.arch) < weight_count(b.arch)


def select_parents(population: list[Individual], k: int, rng: np.random.Generator) -> list[Individual]:
    """Binary tournament with replacement; ties prefer the smaller network."""
    if not population:
        raise ValueError("population must be nonempty")
    if any(not ind.evaluated for ind in population):
        raise ValueError("selection requires every individual to be evaluated")
    chosen = []
    for _ in range(k):
        i, j = rng.integers(0, len(population), size=2)
        a, b = population[int(i)], population[int(j)]
        if _prefers(a, b):
            winner = a
        elif _prefers(b, a):
            winner = b
        else:
            winner = a if rng.random() < 0.5 else b
        chosen.append(winner)
    return chosen


def _perturb_int(value: int, step: int, lo: int, hi: int, rng: np.random.Generator) -> int:
    """Add a nonzero uniform offset in [-step, step], clamped to [lo, hi]."""
    magnitude = int(rng.integers(1, step + 1))
    offset = magnitude if rng.random() < 0.5 else -magnitude
    return min(max(value + offset, lo), hi)


def _forced_change(
    widths: list[int], look_back: int, space: SearchSpace, rng: np.random.Generator
) -> tuple[list[int], int]:
    """Guarantee a genotype change when the probabilistic operators left none."""
    if space.min_neurons < space.max_neurons:
        idx = int(rng.integers(0, len(widths)))
        direction = 1 if rng.random() < 0.5 else -1
        candidate = min(max(widths[idx] + direction, space.min_neurons), space.max_neurons)
        if candidate == widths[idx]:
            candidate = min(max(widths[idx] - direction, space.min_neurons), space.max_neurons)
        widths[idx] = candidate
    elif space.min_look_back < space.max_look_back:
        direction = 1 if rng.random() < 0.5 else -1
        candidate = min(max(look_back + direction, space.min_look_back), space.max_look_back)
        if candidate == look_back:
            candidate = min(max(look_back - direction, space.min_look_back), space.max_look_back)
        look_back = candidate
    elif space.max_layers > 1:
        if len(widths) < space.max_layers:
            widths.insert(int(rng.integers(0, len(widths) + 1)), space.min_neurons)
        else:
            del widths[int(rng.integers(0, len(widths)))]
    # a single-point space admits no change at all
    return widths, look_back


def mutate(
    parent: Individual,
    space: SearchSpace,
    cfg: EAConfig,
    rng: np.random.Generator,
    *,
    birth_index: int,
    step_sizes: StepSizes | None = None,
) -> Individual:
    """Offspring with at least one genotype change whenever the space allows one.

    Operators fire independently, in fixed order: width perturbation,
    add-layer, remove-layer, look-back perturbation.
    """
    steps = step_sizes if step_sizes is not None else cfg.step_sizes
    rates = cfg.mutation_rates
    widths = list(parent.arch.hidden_layers)
    look_back = parent.arch.look_back

    if rng.random() < rates.perturb_width:
        idx = int(rng.integers(0, len(widths)))
        widths[idx] = _perturb_int(widths[idx], steps.width, space.min_neurons, space.max_neurons, rng)
    if rng.random() < rates.add_layer and len(widths) < space.max_layers:
        pos = int(rng.integers(0, len(widths) + 1))
        widths.insert(pos, int(rng.integers(space.min_neurons, space.max_neurons + 1)))
    if rng.random() < rates.remove_layer and len(widths) > 1:
        del widths[int(rng.integers(0, len(widths)))]
    if rng.random() < rates.perturb_look_back:
        look_back = _perturb_int(
            look_back, steps.look_back, space.min_look_back, space.max_look_back, rng
        )

    if tuple(widths) == parent.arch.hidden_layers and look_back == parent.arch.look_back:
        widths, look_back = _forced_change(widths, look_back, space, rng)

    return Individual(
        arch=Architecture(tuple(widths), look_back),
        eval_seed=derive_seed(cfg.seed, _B_EVAL, birth_index),
        birth_index=birth_index,
    )


def replace_population(parents: list[Individual], offspring: list[Individual]) -> list[Individual]:
    """The mu best of parents plus offspring; ties prefer smaller networks,
    then parents."""
    union = [(ind, 0) for ind in parents] + [(ind, 1) for ind in offspring]
    for ind, _ in union:
        if not ind.evaluated:
            raise ValueError("replacement requires every individual to be evaluated")
    union.sort(key=lambda pair: (-pair[0].fitness, weight_count(pair[0].arch), pair[1]))
    return [ind for ind, _ in union[: len(parents)]]


def self_adjust(history: list[bool], steps: StepSizes, cfg: SelfAdjust) -> StepSizes:
    """1/5-success rule on the integer step sizes.

    ``history`` holds one flag per recent offspring: did it enter the survivor
    set?  More than a 1/5 success rate widens the steps, less shrinks them
    (round half up, floor 1).
    """
    if len(history) != cfg.window:
        raise ValueError(f"history must cover the full window of {cfg.window} flags")
    successes = sum(1 for flag in history if flag)
    rate = successes / cfg.window
    if rate > cfg.target_success:
        factor = cfg.up_factor
    elif rate < cfg.target_success:
        factor = cfg.down_factor
    else:
        return steps
    return StepSizes(
        width=max(1, math.floor(steps.width * factor + 0.5)),
        look_back=max(1, math.floor(steps.look_back * factor + 0.5)),
    )


def best_of(population: list[Individual]) -> Individual:
    """Highest fitness; ties prefer the smaller network, then the older individual."""
    return min(
        population,
        key=lambda ind: (-ind.fitness, weight_count(ind.arch), ind.birth_index),
    )


def train_champion(
    arch: Architecture,
    dataset: TimeSeriesDataset,
    adam_cfg: AdamConfig,
    run_seed: int,
    *,
    init: np.ndarray | None = None,
) -> TrainReport:
    """Final gradient training of a champion architecture on the train segment."""
    train_set = window(dataset, arch.look_back, "train")
    if init is None:
        init = initial_weights(arch, derive_seed(run_seed, _B_FINAL))
    return train_adam(arch, init, train_set, adam_cfg)


@dataclass(frozen=True)
class RESNResult:
    best: Individual
    report: TrainReport
    log: tuple[GenerationStats, ...]
    evaluations: int
    optimization_seconds: float


def run_resn(
    space: SearchSpace,
    cfg: EAConfig,
    dataset: TimeSeriesDataset,
    mrs_cfg: mrs_mod.MRSConfig | None = None,
    adam_cfg: AdamConfig | None = None,
    gdet_adam: AdamConfig | None = None,
    init_from_best_sample: bool = False,
) -> RESNResult:
    """Full search: evolve architectures, then gradient-train the best one.

    The generation loop runs while the evaluation counter is below
    ``cfg.max_evaluations``; a budget of exactly ``mu`` therefore trains the
    best of the initial population without any generations.
    """
    if cfg.fitness_kind == MRS_FITNESS and mrs_cfg is None:
        mrs_cfg = mrs_mod.MRSConfig(threshold=mrs_mod.default_threshold(dataset))
    if adam_cfg is None:
        adam_cfg = AdamConfig(epochs=1000)
    if gdet_adam is None:
        gdet_adam = AdamConfig(epochs=100)
    evaluator = Evaluator(
        dataset=dataset, fitness_kind=cfg.fitness_kind, mrs_cfg=mrs_cfg, gdet_adam=gdet_adam
    )
    rng = rng_from(cfg.seed, _B_SAMPLE)
    start = time.perf_counter()

    population = evaluate(initialize(space, cfg), evaluator)
    steps = cfg.step_sizes
    success_flags: deque[bool] = deque(maxlen=cfg.self_adjust.window)
    log = [_snapshot(0, evaluator.evaluations, population, steps, start)]

    generation = 0
    next_birth = cfg.mu
    while evaluator.evaluations < cfg.max_evaluations:
        generation += 1
        parents = select_parents(population, cfg.lambda_, rng)
        offspring = []
        for parent in parents:
            offspring.append(
                mutate(parent, space, cfg, rng, birth_index=next_birth, step_sizes=steps)
            )
            next_birth += 1
        evaluate(offspring, evaluator)
        population = replace_population(population, offspring)
        survivor_ids = {id(ind) for ind in population}
        success_flags.extend(id(child) in survivor_ids for child in offspring)
        if len(success_flags) == cfg.self_adjust.window:
            steps = self_adjust(list(success_flags), steps, cfg.self_adjust)
        log.append(_snapshot(generation, evaluator.evaluations, population, steps, start))

    optimization_seconds = time.perf_counter() - start
    champion = best_of(population)
    init = None
    if init_from_best_sample and cfg.fitness_kind == MRS_FITNESS:
        train_set = window(dataset, champion.arch.look_back, "train")
        init = mrs_mod.best_sample_weights(
            champion.arch, train_set, mrs_mod.with_seed(mrs_cfg, champion.eval_seed)
        )
    report = train_champion(champion.arch, dataset, adam_cfg, cfg.seed, init=init)
    return RESNResult(
        best=champion,
        report=report,
        log=tuple(log),
        evaluations=evaluator.evaluations,
        optimization_seconds=optimization_seconds,
    )


def _snapshot(generation, evaluations, population, steps, start) -> GenerationStats:
    fitnesses = [ind.fitness for ind in population]
    return GenerationStats(
        generation=generation,
        evaluations=evaluations,
        best_fitness=max(fitnesses),
        mean_fitness=float(np.mean(fitnesses)),
        step_width=steps.width,
        step_look_back=steps.look_back,
        elapsed_seconds=time.perf_counter() - start,
    )


def run_random_search(
    space: SearchSpace,
    budget: int,
    dataset: TimeSeriesDataset,
    fitness_kind: str = GDET_FITNESS,
    mrs_cfg: mrs_mod.MRSConfig | None = None,
    gdet_adam: AdamConfig | None = None,
    seed: int = 0,
) -> Individual:
    """Evaluate ``budget`` uniform draws and return the best.

    Draw ``i`` comes from its own stream keyed by ``(seed, i)``, so a larger
    budget extends a smaller one: the first draws coincide and the best
    fitness is nondecreasing in the budget.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    if fitness_kind == MRS_FITNESS and mrs_cfg is None:
        mrs_cfg = mrs_mod.MRSConfig(threshold=mrs_mod.default_threshold(dataset))
    evaluator = Evaluator(
        dataset=dataset,
        fitness_kind=fitness_kind,
        mrs_cfg=mrs_cfg,
        gdet_adam=gdet_adam if gdet_adam is not None else AdamConfig(epochs=100),
    )
    best = None
    for i in range(budget):
        ind = Individual(
            arch=_uniform_arch(space, rng_from(seed, _B_SAMPLE, i)),
            eval_seed=derive_seed(seed, _B_EVAL, i),
            birth_index=i,
        )
        evaluate([ind], evaluator)
        if best is None or _prefers(ind, best):
            best = ind
    return best


def write_generation_log(log, path) -> None:
    """Per-generation rows as CSV, one line per logged generation."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "generation",
                "evaluations",
                "best_fitness",
                "mean_fitness",
                "step_width",
                "step_look_back",
                "elapsed_seconds",
            ]
        )
        for row in log:
            writer.writerow(
                [
                    row.generation,
                    row.evaluations,
                    repr(row.best_fitness),
                    repr(row.mean_fitness),
                    row.step_width,
                    row.step_look_back,
                    repr(row.elapsed_seconds),
                ]
            )
