"""Predictive mean and spread from repeated model evaluations.

Three estimator kinds share one contract: produce a set of predictions for an
input, report their mean, their per-component population stddev, and a scalar
score (the unweighted mean of the stddev components).

    ensemble    N independently initialized networks, deterministic forwards
    mc_dropout  one network, N stochastic forwards with dropout left on
    flipout     one network with a variational output layer, N sampled passes

Stochastic kinds draw from a fresh substream per prediction call, derived
from the estimator seed and a call counter, so whole runs replay exactly.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import nn
from .seeding import derive_seed, spawn_rng
from .strategies import as_arrays

ESTIMATOR_KINDS = ("ensemble", "mc_dropout", "flipout")


@dataclass(frozen=True)
class EstimatorConfig:
    kind: str
    draws: int = 10        # ensemble members, or stochastic passes per call
    dropout_rate: float = 0.2  # consulted by mc_dropout only

    def __post_init__(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise ValueError(f"unknown estimator kind: {self.kind!r}")
        if self.draws < 1:
            raise ValueError("draws must be positive")
        if self.kind == "ensemble" and self.draws < 2:
            raise ValueError("an ensemble needs at least two members")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")


@dataclass(frozen=True)
class UncertaintyEstimate:
    mean: np.ndarray
    std: np.ndarray
    score: float


@dataclass
class Estimator:
    """Model state plus the bookkeeping needed for reproducible sampling.

    predict_calls advances once per stochastic prediction call; it is the only
    mutable run state outside the member parameters.
    """

    arch: nn.NetworkArchitecture
    config: EstimatorConfig
    members: list[nn.Params]
    seed: int
    predict_calls: int = 0


def build_estimator(arch: nn.NetworkArchitecture, cfg: EstimatorConfig,
                    seed: int) -> Estimator:
    """Initialize the member networks for the requested estimator kind.

    mc_dropout requires the architecture's dropout rate to match the config
    (a rate of zero is allowed but yields zero spread). flipout requires the
    variational output layer; the other kinds require a deterministic one.
    """
    if cfg.kind == "flipout":
        if arch.final_layer_kind != "flipout":
            raise ValueError("a flipout estimator needs final_layer_kind='flipout'")
    elif arch.final_layer_kind != "deterministic":
        raise ValueError(f"a {cfg.kind} estimator needs a deterministic output layer")
    if cfg.kind == "mc_dropout" and arch.dropout_rate != cfg.dropout_rate:
        raise ValueError(
            f"mc_dropout rate {cfg.dropout_rate} does not match the "
            f"architecture's dropout_rate {arch.dropout_rate}")
    n_members = cfg.draws if cfg.kind == "ensemble" else 1
    members = [nn.init_network(arch, derive_seed(seed, "member", i))
               for i in range(n_members)]
    return Estimator(arch=arch, config=cfg, members=members, seed=seed)


def fit_estimator(est: Estimator, train_samples, val_samples,
                  cfg: nn.TrainConfig) -> tuple[Estimator, list[nn.TrainReport]]:
    """Train every member on the given samples, warm-starting from its
    current parameters. Each member shuffles with its own substream of the
    config seed so ensemble members stay decorrelated."""
    train_xy = as_arrays(train_samples)
    val_xy = as_arrays(val_samples)
    new_members = []
    reports = []
    for i, params in enumerate(est.members):
        member_cfg = replace(cfg, rng_seed=derive_seed(cfg.rng_seed, "member", i))
        fitted, report = nn.fit(params, est.arch, train_xy, val_xy, member_cfg)
        new_members.append(fitted)
        reports.append(report)
    refit = Estimator(arch=est.arch, config=est.config, members=new_members,
                      seed=est.seed, predict_calls=est.predict_calls)
    return refit, reports


def _prediction_draws(est: Estimator, x: np.ndarray) -> np.ndarray:
    """All member/sample predictions for a 2-D batch: (draws, n, output_dim)."""
    if est.config.kind == "ensemble":
        return np.stack([nn.forward(m, est.arch, x, mode="infer")
                         for m in est.members])
    rng = spawn_rng(est.seed, "predict", est.predict_calls)
    est.predict_calls += 1
    member = est.members[0]
    return np.stack([nn.forward(member, est.arch, x, mode="infer_stochastic", rng=rng)
                     for _ in range(est.config.draws)])


def predict_many(est: Estimator, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched estimate: per-row means, stddevs and scalar scores."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("predict_many expects a 2-D batch")
    draws = _prediction_draws(est, x)
    # anchor on the first draw so identical draws reduce to exact zeros
    delta = draws - draws[0]
    means = draws[0] + delta.mean(axis=0)
    stds = delta.std(axis=0)  # population stddev across draws
    return means, stds, stds.mean(axis=1)


def predict_with_uncertainty(est: Estimator, x) -> UncertaintyEstimate:
    """Estimate for a single input vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("predict_with_uncertainty expects a single vector")
    means, stds, scores = predict_many(est, x[None, :])
    return UncertaintyEstimate(mean=means[0], std=stds[0], score=float(scores[0]))
