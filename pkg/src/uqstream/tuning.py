"""Hyperparameter search, threshold derivation and parameter sweeps.

The search is a plain seeded random draw over a finite grid, scored by the
final cumulative test MSE of a full online run (lower is better). Threshold
candidates come from the uncertainty scores that the always-accept baselines
recorded: evenly spaced percentiles of each list, averaged pairwise.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import metrics
from .online import RunConfig, run_online
from .seeding import derive_seed
from .strategies import StrategyConfig

SWEEP_PARAMETERS = ("p", "t", "buffer_size")


@dataclass(frozen=True)
class SearchSpace:
    """Grid of training hyperparameters, optionally joined by strategy knobs.

    Leaving p_values/t_values at None gives the two-stage flow: tune the
    model first, then sweep the strategy parameter separately. Setting them
    folds the strategy knob into the same random search.
    """

    hidden_layers: tuple[int, ...] = (1, 2, 3, 4)
    units: tuple[int, ...] = (4, 8, 16, 32, 64)
    learning_rates: tuple[float, ...] = (1e-2, 1e-3, 1e-4, 1e-5)
    batch_sizes: tuple[int, ...] = (1, 2, 4, 8, 16)
    patiences: tuple[int, ...] = (3, 5, 9)
    p_values: tuple[float, ...] | None = None
    t_values: tuple[float, ...] | None = None

    def size(self) -> int:
        total = (len(self.hidden_layers) * len(self.units) * len(self.learning_rates)
                 * len(self.batch_sizes) * len(self.patiences))
        if self.p_values:
            total *= len(self.p_values)
        if self.t_values:
            total *= len(self.t_values)
        return total


@dataclass(frozen=True)
class Candidate:
    hidden_layers: int
    units: int
    learning_rate: float
    batch_size: int
    patience: int
    p: float | None = None
    t: float | None = None

    @property
    def hidden_sizes(self) -> tuple[int, ...]:
        return (self.units,) * self.hidden_layers


def _draw(space: SearchSpace, rng) -> Candidate:
    pick = lambda options: options[int(rng.integers(len(options)))]
    return Candidate(
        hidden_layers=pick(space.hidden_layers),
        units=pick(space.units),
        learning_rate=pick(space.learning_rates),
        batch_size=pick(space.batch_sizes),
        patience=pick(space.patiences),
        p=pick(space.p_values) if space.p_values else None,
        t=pick(space.t_values) if space.t_values else None,
    )


def random_search(space: SearchSpace, iterations: int, objective,
                  seed: int) -> list[tuple[Candidate, float]]:
    """Evaluate `iterations` distinct random candidates, best score first.

    Duplicate draws are re-drawn, so the candidate set is unique. objective
    maps a Candidate to a float score (lower is better); its failures
    propagate unchanged.
    """
    if iterations < 1:
        raise ValueError("iterations must be positive")
    if iterations > space.size():
        raise ValueError(
            f"cannot draw {iterations} distinct candidates from a grid of {space.size()}")
    rng = np.random.default_rng(derive_seed(seed, "search"))
    seen: set[Candidate] = set()
    results = []
    while len(results) < iterations:
        candidate = _draw(space, rng)
        if candidate in seen:
            continue
        seen.add(candidate)
        results.append((candidate, float(objective(candidate))))
    results.sort(key=lambda pair: pair[1])
    return results


def build_online_objective(base_cfg: RunConfig, split):
    """Objective closing over a data split: final cumulative MSE of a run."""

    def objective(candidate: Candidate) -> float:
        strategy = base_cfg.strategy
        if candidate.p is not None:
            strategy = replace(strategy, p=candidate.p)
        if candidate.t is not None:
            strategy = replace(strategy, t=candidate.t)
        cfg = replace(
            base_cfg,
            arch=replace(base_cfg.arch, hidden_layer_sizes=candidate.hidden_sizes),
            train=replace(base_cfg.train,
                          learning_rate=candidate.learning_rate,
                          batch_size=candidate.batch_size,
                          patience=candidate.patience),
            strategy=strategy,
        )
        trace = run_online(split.train, split.test, split.validation, cfg)
        return trace[-1].cumulative_mse

    return objective


def threshold_candidates(fifo_scores, firo_scores, count: int = 9) -> list[float]:
    """Candidate gate values from the two always-accept baselines.

    Takes `count` evenly spaced percentiles (10th..90th for the default 9)
    of each baseline's recorded uncertainty scores, with linear
    interpolation, and averages the two lists elementwise. The result is
    ascending by construction.
    """
    fifo_scores = np.asarray(list(fifo_scores), dtype=np.float64)
    firo_scores = np.asarray(list(firo_scores), dtype=np.float64)
    if fifo_scores.size == 0 or firo_scores.size == 0:
        raise ValueError("both baseline score lists must be non-empty")
    if count < 1:
        raise ValueError("count must be positive")
    qs = [100.0 * (i + 1) / (count + 1) for i in range(count)]
    merged = 0.5 * (np.percentile(fifo_scores, qs) + np.percentile(firo_scores, qs))
    return [float(v) for v in merged]


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[float, ...]
    repeats: int = 3

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(f"unknown sweep parameter: {self.parameter!r}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if self.repeats < 1:
            raise ValueError("repeats must be positive")


@dataclass(frozen=True)
class SweepCell:
    parameter: str
    value: float
    run_seed: int
    summary: metrics.EvalSummary | None
    trace: tuple | None
    error: str | None


def _cell_config(spec: SweepSpec, base_cfg: RunConfig, value) -> RunConfig:
    if spec.parameter == "p":
        if base_cfg.strategy.kind != "riro":
            raise ValueError("sweeping p requires the riro strategy")
        return replace(base_cfg, strategy=replace(base_cfg.strategy, p=float(value)))
    if spec.parameter == "t":
        if base_cfg.strategy.kind not in ("threshold", "threshold_greedy"):
            raise ValueError("sweeping t requires a threshold strategy")
        return replace(base_cfg, strategy=replace(base_cfg.strategy, t=float(value)))
    return replace(base_cfg, buffer_capacity=int(value))


def _run_cell(spec: SweepSpec, base_cfg: RunConfig, split, value,
              run_seed: int) -> SweepCell:
    try:
        cfg = replace(_cell_config(spec, base_cfg, value), run_seed=run_seed)
        trace = run_online(split.train, split.test, split.validation, cfg)
        return SweepCell(spec.parameter, float(value), run_seed,
                         metrics.summarize(trace), tuple(trace), None)
    except Exception as exc:
        return SweepCell(spec.parameter, float(value), run_seed, None, None, str(exc))


def sweep(spec: SweepSpec, base_cfg: RunConfig, split,
          jobs: int = 1) -> list[SweepCell]:
    """Run every (value, repeat) cell; failures stay inside their cell.

    Repeat j of every value shares run seed derive_seed(base, "sweep", j), so
    comparisons across values hold the seed fixed. With jobs > 1 the cells
    run in a process pool; every cell is independently seeded, so the result
    does not depend on the degree of parallelism.
    """
    tasks = [(value, derive_seed(base_cfg.run_seed, "sweep", j))
             for value in spec.values for j in range(spec.repeats)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_cell, spec, base_cfg, split, value, seed)
                       for value, seed in tasks]
            return [f.result() for f in futures]
    return [_run_cell(spec, base_cfg, split, value, seed) for value, seed in tasks]
