"""The streaming loop: score each arrival, decide, store, refit, evaluate.

One iteration per stream sample. The incoming point is scored with the
current estimator, the buffer strategy decides acceptance and eviction, an
accepted point triggers an incremental refit on the buffer contents
(warm-started from the current parameters), and the test metrics are
refreshed every eval_every iterations with the last values carried forward
in between. Skipped points leave the model parameters untouched.
"""

from dataclasses import dataclass, replace

from . import metrics, nn
from .seeding import derive_seed, spawn_rng
from .strategies import (
    Buffer,
    StrategyConfig,
    apply_decision,
    as_arrays,
    decide,
)
from .uncertainty import (
    EstimatorConfig,
    build_estimator,
    fit_estimator,
    predict_many,
    predict_with_uncertainty,
)


class RunFault(RuntimeError):
    """A module error that surfaced while processing the stream."""


@dataclass(frozen=True)
class RunConfig:
    arch: nn.NetworkArchitecture
    strategy: StrategyConfig
    estimator: EstimatorConfig
    train: nn.TrainConfig
    buffer_capacity: int = 100
    eval_every: int = 1
    run_seed: int = 0

    def __post_init__(self):
        if self.buffer_capacity < 1:
            raise ValueError("buffer_capacity must be positive")
        if self.eval_every < 1:
            raise ValueError("eval_every must be positive")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    accepted: bool
    evicted_arrival_index: int | None
    incoming_uncertainty: float
    test_mse: float
    test_mean_r2: float
    cumulative_mse: float
    buffer_fill: int


def _samples(obj, role):
    samples = list(getattr(obj, "samples", obj))
    if not samples:
        raise ValueError(f"{role} set is empty")
    return samples


def dataset_use(trace) -> float:
    """Fraction of stream points the strategy chose to learn."""
    records = list(trace)
    if not records:
        raise ValueError("empty trace")
    return sum(1 for r in records if r.accepted) / len(records)


def run_online(stream, test_set, val_set, cfg: RunConfig,
               on_iteration=None) -> list[TraceRecord]:
    """Run one strategy over a stream and return its full trace.

    stream, test_set and val_set are sample sequences (or Datasets). The
    offline strategy bypasses the loop: one fit on the whole stream, one
    evaluation, one trace record. on_iteration, if given, is called with
    (iteration, estimator, buffer, record) after every online iteration;
    it must not mutate its arguments.
    """
    stream = _samples(stream, "stream")
    test = _samples(test_set, "test")
    val = _samples(val_set, "validation")
    est = build_estimator(cfg.arch, cfg.estimator, cfg.run_seed)
    x_test, y_test = as_arrays(test)

    def evaluate():
        preds, _, _ = predict_many(est, x_test)
        return metrics.mse(preds, y_test), metrics.mean_r2(preds, y_test)

    if cfg.strategy.kind == "offline":
        fit_cfg = replace(cfg.train, rng_seed=derive_seed(cfg.run_seed, "fit", 0))
        est, _ = fit_estimator(est, stream, val, fit_cfg)
        test_mse, test_r2 = evaluate()
        return [TraceRecord(0, True, None, 0.0, test_mse, test_r2, test_mse, 0)]

    buffer = Buffer(cfg.buffer_capacity)
    decide_rng = spawn_rng(cfg.run_seed, "decide")
    trace: list[TraceRecord] = []
    running_total = 0.0
    test_mse = test_r2 = None
    for i, sample in enumerate(stream):
        try:
            score = predict_with_uncertainty(est, sample.x).score
            stored_scores = None
            if cfg.strategy.kind in ("greedy", "threshold_greedy") and buffer.is_full:
                stored_x, _ = as_arrays(buffer.items)
                _, _, stored_scores = predict_many(est, stored_x)
            decision = decide(cfg.strategy, buffer, score, stored_scores, decide_rng)
            evicted = None
            if decision.action == "accept":
                if decision.evict_index is not None:
                    evicted = buffer.items[decision.evict_index].arrival_index
                buffer = apply_decision(buffer, decision, sample)
                fit_cfg = replace(cfg.train, rng_seed=derive_seed(cfg.run_seed, "fit", i))
                est, _ = fit_estimator(est, buffer.items, val, fit_cfg)
            if i % cfg.eval_every == 0 or test_mse is None:
                test_mse, test_r2 = evaluate()
            running_total += test_mse
            record = TraceRecord(
                iteration=i,
                accepted=decision.action == "accept",
                evicted_arrival_index=evicted,
                incoming_uncertainty=score,
                test_mse=test_mse,
                test_mean_r2=test_r2,
                cumulative_mse=running_total,
                buffer_fill=len(buffer),
            )
            trace.append(record)
            if on_iteration is not None:
                on_iteration(i, est, buffer, record)
        except RunFault:
            raise
        except Exception as exc:
            raise RunFault(f"iteration {i}: {exc}") from exc
    return trace
