import numpy as np
import pytest

from uqstream import data, nn
from uqstream.online import RunConfig, RunFault, TraceRecord, dataset_use, run_online
from uqstream.strategies import StrategyConfig
from uqstream.uncertainty import EstimatorConfig


def make_cfg(strategy, capacity=5, eval_every=1, seed=0, draws=3, **arch_kw):
    return RunConfig(
        arch=nn.NetworkArchitecture(1, 1, (6,), **arch_kw),
        strategy=strategy,
        estimator=EstimatorConfig("ensemble", draws=draws),
        train=nn.TrainConfig(max_epochs=4, patience=4, batch_size=4,
                             learning_rate=0.02, rng_seed=0),
        buffer_capacity=capacity,
        eval_every=eval_every,
        run_seed=seed,
    )


@pytest.fixture(scope="module")
def toy_split():
    return data.split(data.synth_sine(60, noise_std=0.02, seed=4))


def test_trace_shape_and_bookkeeping(toy_split):
    cfg = make_cfg(StrategyConfig("fifo"))
    trace = run_online(toy_split.train, toy_split.test, toy_split.validation, cfg)
    n = len(toy_split.train)
    assert len(trace) == n
    assert [r.iteration for r in trace] == list(range(n))
    for r in trace:
        assert 0 <= r.buffer_fill <= cfg.buffer_capacity
        assert r.incoming_uncertainty >= 0.0
        assert np.isfinite(r.test_mse) and r.test_mse >= 0.0
        if r.evicted_arrival_index is not None:
            assert r.accepted
            assert r.evicted_arrival_index < r.iteration
    # fifo accepts everything and saturates the buffer
    assert all(r.accepted for r in trace)
    assert [r.buffer_fill for r in trace[:5]] == [1, 2, 3, 4, 5]
    assert all(r.buffer_fill == 5 for r in trace[5:])
    assert dataset_use(trace) == 1.0
    # evictions start once the buffer is full and walk the oldest arrivals
    evicted = [r.evicted_arrival_index for r in trace if r.evicted_arrival_index is not None]
    assert evicted == list(range(n - 5))


def test_cumulative_mse_is_prefix_sum(toy_split):
    cfg = make_cfg(StrategyConfig("firo"), seed=3)
    trace = run_online(toy_split.train, toy_split.test, toy_split.validation, cfg)
    total = 0.0
    for r in trace:
        total += r.test_mse
        assert r.cumulative_mse == pytest.approx(total, rel=1e-12)


def test_eval_every_carries_values_forward(toy_split):
    cfg = make_cfg(StrategyConfig("fifo"), eval_every=4)
    trace = run_online(toy_split.train, toy_split.test, toy_split.validation, cfg)
    for r in trace:
        anchor = trace[4 * (r.iteration // 4)]
        assert r.test_mse == anchor.test_mse
        assert r.test_mean_r2 == anchor.test_mean_r2
    # carried values still accumulate every iteration
    assert trace[-1].cumulative_mse == pytest.approx(sum(r.test_mse for r in trace))


def test_skipped_points_never_touch_the_model(toy_split):
    cfg = make_cfg(StrategyConfig("threshold", t=1e9))
    trace = run_online(toy_split.train, toy_split.test, toy_split.validation, cfg)
    assert not any(r.accepted for r in trace)
    assert dataset_use(trace) == 0.0
    assert all(r.buffer_fill == 0 for r in trace)
    # with no refits the test error never moves
    assert len({r.test_mse for r in trace}) == 1
    assert len({r.incoming_uncertainty for r in trace}) > 1  # scores still vary


def test_offline_is_a_single_fit(toy_split):
    cfg = make_cfg(StrategyConfig("offline"))
    trace = run_online(toy_split.train, toy_split.test, toy_split.validation, cfg)
    assert len(trace) == 1
    r = trace[0]
    assert r.iteration == 0 and r.accepted and r.evicted_arrival_index is None
    assert r.cumulative_mse == r.test_mse
    assert dataset_use(trace) == 1.0


def test_run_is_deterministic(toy_split):
    cfg = make_cfg(StrategyConfig("riro", p=0.4), seed=11)
    a = run_online(toy_split.train, toy_split.test, toy_split.validation, cfg)
    b = run_online(toy_split.train, toy_split.test, toy_split.validation, cfg)
    assert a == b
    c = run_online(toy_split.train, toy_split.test, toy_split.validation,
                   make_cfg(StrategyConfig("riro", p=0.4), seed=12))
    assert a != c


def test_greedy_strategies_rescore_the_buffer(toy_split):
    cfg = make_cfg(StrategyConfig("greedy"), capacity=3)
    trace = run_online(toy_split.train, toy_split.test, toy_split.validation, cfg)
    assert len(trace) == len(toy_split.train)
    assert trace[2].buffer_fill == 3  # fills unconditionally while not full
    cfg = make_cfg(StrategyConfig("threshold_greedy", t=0.01), capacity=3)
    trace = run_online(toy_split.train, toy_split.test, toy_split.validation, cfg)
    assert len(trace) == len(toy_split.train)


def test_mc_dropout_runs_and_replays(toy_split):
    cfg = RunConfig(
        arch=nn.NetworkArchitecture(1, 1, (6,), dropout_rate=0.2),
        strategy=StrategyConfig("threshold", t=0.05),
        estimator=EstimatorConfig("mc_dropout", draws=5, dropout_rate=0.2),
        train=nn.TrainConfig(max_epochs=3, patience=3, batch_size=4,
                             learning_rate=0.02, rng_seed=0),
        buffer_capacity=4,
        run_seed=2,
    )
    small = list(toy_split.train.samples)[:15]
    a = run_online(small, toy_split.test, toy_split.validation, cfg)
    b = run_online(small, toy_split.test, toy_split.validation, cfg)
    assert a == b


def test_callback_sees_every_iteration(toy_split):
    cfg = make_cfg(StrategyConfig("fifo"))
    seen = []
    trace = run_online(toy_split.train, toy_split.test, toy_split.validation, cfg,
                       on_iteration=lambda i, est, buf, rec: seen.append((i, rec)))
    assert [i for i, _ in seen] == [r.iteration for r in trace]
    assert all(rec is trace[i] for i, rec in seen)


def test_faults_carry_the_iteration_index(toy_split):
    cfg = make_cfg(StrategyConfig("fifo"))
    lone_test = list(toy_split.test.samples)[:1]  # mean_r2 needs two samples
    with pytest.raises(RunFault, match="iteration 0"):
        run_online(toy_split.train, lone_test, toy_split.validation, cfg)


def test_empty_inputs_are_rejected(toy_split):
    cfg = make_cfg(StrategyConfig("fifo"))
    with pytest.raises(ValueError):
        run_online([], toy_split.test, toy_split.validation, cfg)
    with pytest.raises(ValueError):
        dataset_use([])


def test_run_config_validation():
    with pytest.raises(ValueError):
        make_cfg(StrategyConfig("fifo"), capacity=0)
    with pytest.raises(ValueError):
        make_cfg(StrategyConfig("fifo"), eval_every=0)
