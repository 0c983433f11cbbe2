"""Datasets: CSV ingestion, deterministic splits, synthetic generators.

The native format is a CSV whose header names six input columns (surge,
sway and yaw rates plus three thruster commands) and three acceleration
targets. Sample order is treated as temporal order throughout; splits are
even-stride so the held-out sets cover the whole time span instead of its
tail.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .strategies import Sample, as_arrays

AUV_COLUMNS = ("u", "v", "r", "n1", "n2", "n3", "du", "dv", "dr")


@dataclass(frozen=True)
class Schema:
    inputs: tuple[str, ...]
    targets: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "targets", tuple(self.targets))
        cols = self.inputs + self.targets
        if not self.inputs or not self.targets:
            raise ValueError("schema needs at least one input and one target column")
        if len(set(cols)) != len(cols):
            raise ValueError("schema column names must be unique")


AUV_SCHEMA = Schema(AUV_COLUMNS[:6], AUV_COLUMNS[6:])
SINE_SCHEMA = Schema(("x",), ("y",))


@dataclass(frozen=True)
class Normalization:
    """Per-dimension shift/scale fitted on training data only."""

    input_shift: np.ndarray
    input_scale: np.ndarray
    target_shift: np.ndarray
    target_scale: np.ndarray

    def apply_inputs(self, x):
        return (np.asarray(x, dtype=np.float64) - self.input_shift) / self.input_scale

    def apply_targets(self, y):
        return (np.asarray(y, dtype=np.float64) - self.target_shift) / self.target_scale

    def invert_inputs(self, x):
        return np.asarray(x, dtype=np.float64) * self.input_scale + self.input_shift

    def invert_targets(self, y):
        return np.asarray(y, dtype=np.float64) * self.target_scale + self.target_shift


@dataclass(frozen=True)
class Dataset:
    samples: tuple[Sample, ...]
    input_dim: int
    output_dim: int
    normalization: Normalization | None = None

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if not self.samples:
            raise ValueError("empty dataset")
        for s in self.samples:
            if s.x.shape != (self.input_dim,) or s.y.shape != (self.output_dim,):
                raise ValueError("sample dimensions do not match the dataset")

    def __len__(self):
        return len(self.samples)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return as_arrays(self.samples)


@dataclass(frozen=True)
class SplitDataset:
    train: Dataset
    validation: Dataset
    test: Dataset


def _dataset_from_arrays(x, y, normalization=None) -> Dataset:
    samples = tuple(Sample(x[i], y[i], i) for i in range(x.shape[0]))
    return Dataset(samples, x.shape[1], y.shape[1], normalization)


def load_csv(path, schema: Schema = AUV_SCHEMA) -> Dataset:
    """Read a dataset whose header exactly matches the schema's columns."""
    expected = list(schema.inputs + schema.targets)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file")
        if [c.strip() for c in header] != expected:
            raise ValueError(f"{path}: header {header} does not match expected columns {expected}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected):
                raise ValueError(f"{path}: line {lineno} has {len(row)} fields, expected {len(expected)}")
            values = []
            for col, cell in zip(expected, row):
                try:
                    value = float(cell)
                except ValueError:
                    raise ValueError(f"{path}: line {lineno}, column {col!r}: not a number: {cell!r}") from None
                if not np.isfinite(value):
                    raise ValueError(f"{path}: line {lineno}, column {col!r}: non-finite value")
                values.append(value)
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: empty dataset")
    table = np.asarray(rows, dtype=np.float64)
    k = len(schema.inputs)
    return _dataset_from_arrays(table[:, :k], table[:, k:])


def write_csv(ds: Dataset, path, schema: Schema) -> None:
    if len(schema.inputs) != ds.input_dim or len(schema.targets) != ds.output_dim:
        raise ValueError("schema does not match the dataset's dimensions")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(schema.inputs + schema.targets)
        for s in ds.samples:
            writer.writerow([repr(float(v)) for v in s.x] + [repr(float(v)) for v in s.y])


def split(ds: Dataset, seed: int = 0) -> SplitDataset:
    """60/20/20 split with even strides over temporal order.

    Every 5th sample (offset 0) becomes test data; every 4th of the remainder
    becomes validation; the rest trains. All three subsets therefore span the
    whole time range, and each is reindexed to contiguous arrival order. The
    seed is accepted for interface stability but the procedure draws nothing.
    """
    del seed
    n = len(ds)
    idx = np.arange(n)
    test_rows = idx[::5]
    rest = np.setdiff1d(idx, test_rows)
    val_rows = rest[::4]
    train_rows = np.setdiff1d(rest, val_rows)
    if min(len(test_rows), len(val_rows), len(train_rows)) == 0:
        raise ValueError(f"dataset of {n} samples is too small to split")

    def subset(rows):
        samples = tuple(
            Sample(ds.samples[r].x, ds.samples[r].y, i) for i, r in enumerate(rows)
        )
        return Dataset(samples, ds.input_dim, ds.output_dim, ds.normalization)

    return SplitDataset(subset(train_rows), subset(val_rows), subset(test_rows))


def fit_normalization(ds: Dataset) -> Normalization:
    """Zero-mean unit-std transform per dimension; constant dims get scale 1."""
    x, y = ds.arrays()

    def stats(m):
        shift = m.mean(axis=0)
        scale = m.std(axis=0)
        scale = np.where(scale == 0.0, 1.0, scale)
        return shift, scale

    xs, xc = stats(x)
    ys, yc = stats(y)
    return Normalization(xs, xc, ys, yc)


def apply_normalization(ds: Dataset, norm: Normalization) -> Dataset:
    x, y = ds.arrays()
    return _dataset_from_arrays(norm.apply_inputs(x), norm.apply_targets(y), norm)


def normalize(sp: SplitDataset) -> SplitDataset:
    """Standardize all three subsets with statistics fitted on train only."""
    norm = fit_normalization(sp.train)
    return SplitDataset(
        apply_normalization(sp.train, norm),
        apply_normalization(sp.validation, norm),
        apply_normalization(sp.test, norm),
    )


def synth_sine(n: int, x_range=(0.0, 2.0 * np.pi), noise_std: float = 0.05,
               seed: int = 0) -> Dataset:
    """Noisy sine served in increasing x, the forgetting toy of the suite."""
    lo, hi = float(x_range[0]), float(x_range[1])
    if n < 1 or not lo < hi or noise_std < 0.0:
        raise ValueError("need n >= 1, an increasing x_range and noise_std >= 0")
    rng = np.random.default_rng(seed)
    x = np.linspace(lo, hi, n)[:, None]
    y = np.sin(x) + noise_std * rng.standard_normal((n, 1))
    return _dataset_from_arrays(x, y)


@dataclass(frozen=True)
class PlanarAuvParams:
    """Coefficients of the planar vehicle surrogate.

    Damping coefficients must be negative so speeds stay bounded; with the
    defaults all state magnitudes remain below speed_bound for any seed.
    """

    linear_damping: tuple[float, float, float] = (-0.8, -1.1, -0.9)
    quadratic_damping: tuple[float, float, float] = (-1.2, -1.5, -0.8)
    coriolis: tuple[float, float, float] = (0.9, -0.75, 0.25)
    thrust_map: tuple[tuple[float, float, float], ...] = (
        (1.0, 0.15, 0.0),
        (0.1, 0.9, 0.2),
        (0.0, 0.25, 0.8),
    )
    thruster_amplitude: tuple[float, float, float] = (1.0, 0.8, 0.6)
    thruster_periods: tuple[float, float, float] = (6.0, 9.5, 14.5)
    dt: float = 0.1
    speed_bound: float = 3.0

    def __post_init__(self):
        if any(c >= 0 for c in self.linear_damping + self.quadratic_damping):
            raise ValueError("damping coefficients must be negative")
        if self.dt <= 0:
            raise ValueError("dt must be positive")


def auv_derivatives(state, thrusters, params: PlanarAuvParams) -> np.ndarray:
    """Body-frame accelerations for one (state, thruster command) pair."""
    u, v, r = state
    lin = np.asarray(params.linear_damping)
    quad = np.asarray(params.quadratic_damping)
    c = params.coriolis
    vel = np.asarray([u, v, r])
    damping = lin * vel + quad * vel * np.abs(vel)
    coupling = np.asarray([c[0] * v * r, c[1] * u * r, c[2] * u * v])
    thrust = np.asarray(params.thrust_map) @ np.asarray(thrusters)
    return damping + coupling + thrust


def synth_auv(n: int, seed: int = 0, noise_std: float = 0.01,
              params: PlanarAuvParams = PlanarAuvParams()) -> Dataset:
    """Simulated planar vehicle driven by three sinusoidal thrusters.

    The state (surge, sway, yaw rate) integrates forward with Euler steps;
    each sample pairs the current state and thruster commands with the
    resulting accelerations, plus sensor noise on the targets.
    """
    if n < 1 or noise_std < 0.0:
        raise ValueError("need n >= 1 and noise_std >= 0")
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=3)
    amp = np.asarray(params.thruster_amplitude)
    periods = np.asarray(params.thruster_periods)
    state = np.zeros(3)
    x = np.empty((n, 6))
    y = np.empty((n, 3))
    for k in range(n):
        t = k * params.dt
        thrusters = amp * np.sin(2.0 * np.pi * t / periods + phases)
        accel = auv_derivatives(state, thrusters, params)
        x[k, :3] = state
        x[k, 3:] = thrusters
        y[k] = accel
        state = state + params.dt * accel
    y += noise_std * rng.standard_normal((n, 3))
    return _dataset_from_arrays(x, y)
