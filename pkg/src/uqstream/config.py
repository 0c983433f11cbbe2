"""Run configuration files: JSON documents with strictly validated keys.

The top level mirrors the run configuration one to one (run_seed,
buffer_capacity, eval_every, plus the arch/estimator/strategy/train
sections) and adds a dataset section describing what to stream. Optional
sweep/tune sections parameterize those subcommands. Unknown keys anywhere
are errors, as are missing required keys; messages name the offending key
path. A manifest produced by a previous run (recognized by its embedded
"config" key) can be loaded in place of a config and reproduces that run.
"""

import json
import math
from dataclasses import dataclass, field, replace

from . import data, nn
from .online import RunConfig
from .strategies import StrategyConfig
from .uncertainty import EstimatorConfig

DATASET_KINDS = ("sine", "auv", "csv")
CSV_SCHEMAS = {"auv": data.AUV_SCHEMA, "sine": data.SINE_SCHEMA}


class ConfigError(ValueError):
    """A malformed or inconsistent configuration document."""


@dataclass(frozen=True)
class DatasetSpec:
    kind: str
    n: int = 1667
    noise_std: float = 0.01
    x_range: tuple[float, float] = (0.0, 2.0 * math.pi)
    path: str | None = None
    csv_schema: str = "auv"
    seed: int | None = None  # None: derived from the run seed
    normalize: bool = True

    def dims(self) -> tuple[int, int]:
        if self.kind == "sine":
            return 1, 1
        if self.kind == "auv":
            return 6, 3
        schema = CSV_SCHEMAS[self.csv_schema]
        return len(schema.inputs), len(schema.targets)


@dataclass(frozen=True)
class SweepSettings:
    repeats: int = 3
    values: tuple[float, ...] | None = None


@dataclass(frozen=True)
class TuneSettings:
    iterations: int = 60
    joint: bool = False


@dataclass(frozen=True)
class AppConfig:
    dataset: DatasetSpec
    run: RunConfig
    sweep: SweepSettings = field(default_factory=SweepSettings)
    tune: TuneSettings = field(default_factory=TuneSettings)


def _check_keys(section: dict, allowed, path: str):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown config key: {path}{key}")


def _section(doc: dict, name: str, required=True) -> dict:
    if name not in doc:
        if required:
            raise ConfigError(f"missing config section: {name}")
        return {}
    value = doc[name]
    if not isinstance(value, dict):
        raise ConfigError(f"config section {name} must be an object")
    return value


def _typed(section: dict, key: str, kinds, path: str, default):
    if key not in section:
        if default is _REQUIRED:
            raise ConfigError(f"missing config key: {path}{key}")
        return default
    value = section[key]
    if isinstance(value, bool) and bool not in kinds:
        raise ConfigError(f"config key {path}{key} has the wrong type")
    if not isinstance(value, tuple(kinds)):
        raise ConfigError(f"config key {path}{key} has the wrong type")
    return value


_REQUIRED = object()


def _parse_dataset(section: dict) -> DatasetSpec:
    _check_keys(section, {"kind", "n", "noise_std", "x_range", "path",
                          "csv_schema", "seed", "normalize"}, "dataset.")
    kind = _typed(section, "kind", (str,), "dataset.", _REQUIRED)
    if kind not in DATASET_KINDS:
        raise ConfigError(f"dataset.kind must be one of {DATASET_KINDS}, not {kind!r}")
    x_range = section.get("x_range", [0.0, 2.0 * math.pi])
    if (not isinstance(x_range, (list, tuple)) or len(x_range) != 2
            or not all(isinstance(v, (int, float)) for v in x_range)):
        raise ConfigError("dataset.x_range must be a [low, high] pair")
    seed = _typed(section, "seed", (int, type(None)), "dataset.", None)
    spec = DatasetSpec(
        kind=kind,
        n=_typed(section, "n", (int,), "dataset.", 1667),
        noise_std=float(_typed(section, "noise_std", (int, float), "dataset.", 0.01)),
        x_range=(float(x_range[0]), float(x_range[1])),
        path=_typed(section, "path", (str, type(None)), "dataset.", None),
        csv_schema=_typed(section, "csv_schema", (str,), "dataset.", "auv"),
        seed=seed,
        normalize=_typed(section, "normalize", (bool,), "dataset.", True),
    )
    if spec.kind == "csv" and not spec.path:
        raise ConfigError("dataset.path is required when dataset.kind is 'csv'")
    if spec.csv_schema not in CSV_SCHEMAS:
        raise ConfigError(f"dataset.csv_schema must be one of {tuple(CSV_SCHEMAS)}")
    if spec.n < 1:
        raise ConfigError("dataset.n must be positive")
    if spec.noise_std < 0:
        raise ConfigError("dataset.noise_std must be nonnegative")
    return spec


def parse_config(doc: dict) -> AppConfig:
    """Validate a configuration document and assemble the typed config."""
    if not isinstance(doc, dict):
        raise ConfigError("the configuration root must be an object")
    _check_keys(doc, {"run_seed", "buffer_capacity", "eval_every", "dataset",
                      "arch", "estimator", "strategy", "train", "sweep", "tune"}, "")
    dataset = _parse_dataset(_section(doc, "dataset"))
    input_dim, output_dim = dataset.dims()

    arch_sec = _section(doc, "arch")
    _check_keys(arch_sec, {"hidden_layer_sizes", "final_layer_kind", "dropout_rate"}, "arch.")
    hidden = _typed(arch_sec, "hidden_layer_sizes", (list,), "arch.", _REQUIRED)
    if not all(isinstance(h, int) for h in hidden):
        raise ConfigError("arch.hidden_layer_sizes must be a list of integers")
    try:
        arch = nn.NetworkArchitecture(
            input_dim=input_dim,
            output_dim=output_dim,
            hidden_layer_sizes=tuple(hidden),
            final_layer_kind=_typed(arch_sec, "final_layer_kind", (str,), "arch.",
                                    "deterministic"),
            dropout_rate=float(_typed(arch_sec, "dropout_rate", (int, float), "arch.", 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"arch: {exc}") from exc

    est_sec = _section(doc, "estimator")
    _check_keys(est_sec, {"kind", "draws", "dropout_rate"}, "estimator.")
    try:
        estimator = EstimatorConfig(
            kind=_typed(est_sec, "kind", (str,), "estimator.", _REQUIRED),
            draws=_typed(est_sec, "draws", (int,), "estimator.", 10),
            dropout_rate=float(_typed(est_sec, "dropout_rate", (int, float), "estimator.",
                                      arch.dropout_rate)),
        )
    except ValueError as exc:
        raise ConfigError(f"estimator: {exc}") from exc

    strat_sec = _section(doc, "strategy")
    _check_keys(strat_sec, {"kind", "p", "t"}, "strategy.")
    p = _typed(strat_sec, "p", (int, float, type(None)), "strategy.", None)
    t = _typed(strat_sec, "t", (int, float, type(None)), "strategy.", None)
    try:
        strategy = StrategyConfig(
            kind=_typed(strat_sec, "kind", (str,), "strategy.", _REQUIRED),
            p=None if p is None else float(p),
            t=None if t is None else float(t),
        )
    except ValueError as exc:
        raise ConfigError(f"strategy: {exc}") from exc

    train_sec = _section(doc, "train")
    _check_keys(train_sec, {"max_epochs", "patience", "batch_size", "learning_rate"},
                "train.")
    try:
        train = nn.TrainConfig(
            max_epochs=_typed(train_sec, "max_epochs", (int,), "train.", 100),
            patience=_typed(train_sec, "patience", (int,), "train.", 3),
            batch_size=_typed(train_sec, "batch_size", (int,), "train.", 16),
            learning_rate=float(_typed(train_sec, "learning_rate", (int, float),
                                       "train.", 1e-3)),
            rng_seed=0,  # replaced per refit with a derived stream
        )
    except ValueError as exc:
        raise ConfigError(f"train: {exc}") from exc

    try:
        run = RunConfig(
            arch=arch,
            strategy=strategy,
            estimator=estimator,
            train=train,
            buffer_capacity=_typed(doc, "buffer_capacity", (int,), "", 100),
            eval_every=_typed(doc, "eval_every", (int,), "", 1),
            run_seed=_typed(doc, "run_seed", (int,), "", 0),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    sweep_sec = _section(doc, "sweep", required=False)
    _check_keys(sweep_sec, {"repeats", "values"}, "sweep.")
    values = sweep_sec.get("values")
    if values is not None:
        if (not isinstance(values, list) or not values
                or not all(isinstance(v, (int, float)) for v in values)):
            raise ConfigError("sweep.values must be a non-empty list of numbers")
        values = tuple(float(v) for v in values)
    sweep = SweepSettings(
        repeats=_typed(sweep_sec, "repeats", (int,), "sweep.", 3),
        values=values,
    )
    if sweep.repeats < 1:
        raise ConfigError("sweep.repeats must be positive")

    tune_sec = _section(doc, "tune", required=False)
    _check_keys(tune_sec, {"iterations", "joint"}, "tune.")
    tune = TuneSettings(
        iterations=_typed(tune_sec, "iterations", (int,), "tune.", 60),
        joint=_typed(tune_sec, "joint", (bool,), "tune.", False),
    )
    if tune.iterations < 1:
        raise ConfigError("tune.iterations must be positive")

    return AppConfig(dataset=dataset, run=run, sweep=sweep, tune=tune)


def load_config(path) -> AppConfig:
    """Load a config file, accepting a run manifest in its place."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    if isinstance(doc, dict) and "config" in doc and "code_version" in doc:
        doc = doc["config"]
    return parse_config(doc)


def to_dict(cfg: AppConfig) -> dict:
    """Canonical document form: parse_config(to_dict(cfg)) round-trips."""
    ds = cfg.dataset
    dataset: dict = {"kind": ds.kind, "n": ds.n, "noise_std": ds.noise_std,
                     "seed": ds.seed, "normalize": ds.normalize}
    if ds.kind == "sine":
        dataset["x_range"] = list(ds.x_range)
    if ds.kind == "csv":
        dataset["path"] = ds.path
        dataset["csv_schema"] = ds.csv_schema
    run = cfg.run
    strategy = {"kind": run.strategy.kind}
    if run.strategy.p is not None:
        strategy["p"] = run.strategy.p
    if run.strategy.t is not None:
        strategy["t"] = run.strategy.t
    return {
        "run_seed": run.run_seed,
        "buffer_capacity": run.buffer_capacity,
        "eval_every": run.eval_every,
        "dataset": dataset,
        "arch": {
            "hidden_layer_sizes": list(run.arch.hidden_layer_sizes),
            "final_layer_kind": run.arch.final_layer_kind,
            "dropout_rate": run.arch.dropout_rate,
        },
        "estimator": {
            "kind": run.estimator.kind,
            "draws": run.estimator.draws,
            "dropout_rate": run.estimator.dropout_rate,
        },
        "strategy": strategy,
        "train": {
            "max_epochs": run.train.max_epochs,
            "patience": run.train.patience,
            "batch_size": run.train.batch_size,
            "learning_rate": run.train.learning_rate,
        },
        "sweep": {"repeats": cfg.sweep.repeats,
                  "values": None if cfg.sweep.values is None else list(cfg.sweep.values)},
        "tune": {"iterations": cfg.tune.iterations, "joint": cfg.tune.joint},
    }


def with_run_seed(cfg: AppConfig, run_seed: int) -> AppConfig:
    return replace(cfg, run=replace(cfg.run, run_seed=run_seed))
