import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import manual_percentile
from uqstream import data, nn, tuning
from uqstream.online import RunConfig, run_online
from uqstream.strategies import StrategyConfig
from uqstream.uncertainty import EstimatorConfig


def test_threshold_candidates_hand_case():
    fifo = list(range(11))          # percentile q of 0..10 is q/10
    firo = [2 * v for v in fifo]    # and twice that
    cands = tuning.threshold_candidates(fifo, firo)
    assert len(cands) == 9
    assert cands == pytest.approx([1.5 * q / 10.0 for q in range(10, 100, 10)])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 10), min_size=1, max_size=60),
       st.lists(st.floats(0, 10), min_size=1, max_size=60))
def test_threshold_candidates_match_manual_percentiles(fifo, firo):
    cands = tuning.threshold_candidates(fifo, firo)
    expected = [0.5 * (manual_percentile(fifo, q) + manual_percentile(firo, q))
                for q in range(10, 100, 10)]
    assert cands == pytest.approx(expected, abs=1e-9)
    assert all(a <= b + 1e-12 for a, b in zip(cands, cands[1:]))  # ascending


def test_threshold_candidates_validation():
    with pytest.raises(ValueError):
        tuning.threshold_candidates([], [1.0])
    with pytest.raises(ValueError):
        tuning.threshold_candidates([1.0], [1.0], count=0)
    assert len(tuning.threshold_candidates([1.0, 2.0], [3.0], count=4)) == 4


def test_search_space_size():
    assert tuning.SearchSpace().size() == 4 * 5 * 4 * 5 * 3
    joint = tuning.SearchSpace(p_values=(0.1, 0.2), t_values=None)
    assert joint.size() == 4 * 5 * 4 * 5 * 3 * 2


def test_random_search_draws_distinct_candidates_and_sorts():
    space = tuning.SearchSpace()
    calls = []

    def objective(c):
        calls.append(c)
        return float(c.units) - 0.01 * c.hidden_layers

    results = tuning.random_search(space, 25, objective, seed=5)
    assert len(results) == 25
    assert len(set(c for c, _ in results)) == 25
    assert len(calls) == 25
    scores = [s for _, s in results]
    assert scores == sorted(scores)
    for c, _ in results:
        assert c.hidden_layers in space.hidden_layers
        assert c.units in space.units
        assert c.learning_rate in space.learning_rates
        assert c.batch_size in space.batch_sizes
        assert c.patience in space.patiences
        assert c.p is None and c.t is None
        assert c.hidden_sizes == (c.units,) * c.hidden_layers


def test_random_search_is_seeded():
    space = tuning.SearchSpace()
    a = tuning.random_search(space, 10, lambda c: 0.0, seed=1)
    b = tuning.random_search(space, 10, lambda c: 0.0, seed=1)
    c = tuning.random_search(space, 10, lambda c: 0.0, seed=2)
    assert [x for x, _ in a] == [x for x, _ in b]
    assert [x for x, _ in a] != [x for x, _ in c]


def test_random_search_joint_mode_carries_strategy_knobs():
    space = tuning.SearchSpace(t_values=(0.01, 0.05, 0.1))
    results = tuning.random_search(space, 8, lambda c: c.t, seed=0)
    assert all(c.t in space.t_values for c, _ in results)
    assert results[0][1] <= results[-1][1]


def test_random_search_validation():
    space = tuning.SearchSpace(hidden_layers=(1,), units=(4,), learning_rates=(0.01,),
                               batch_sizes=(1,), patiences=(3,))
    with pytest.raises(ValueError):
        tuning.random_search(space, 2, lambda c: 0.0, seed=0)  # grid has 1 combo
    with pytest.raises(ValueError):
        tuning.random_search(space, 0, lambda c: 0.0, seed=0)


@pytest.fixture(scope="module")
def tiny_setup():
    sp = data.split(data.synth_sine(40, noise_std=0.02, seed=1))
    base = RunConfig(
        arch=nn.NetworkArchitecture(1, 1, (4,)),
        strategy=StrategyConfig("riro", p=0.5),
        estimator=EstimatorConfig("ensemble", draws=2),
        train=nn.TrainConfig(max_epochs=3, patience=3, batch_size=4,
                             learning_rate=0.02, rng_seed=0),
        buffer_capacity=4,
        run_seed=7,
    )
    return sp, base


def test_online_objective_matches_direct_run(tiny_setup):
    sp, base = tiny_setup
    cand = tuning.Candidate(hidden_layers=2, units=4, learning_rate=0.01,
                            batch_size=2, patience=3)
    score = tuning.build_online_objective(base, sp)(cand)
    from dataclasses import replace
    cfg = replace(base,
                  arch=replace(base.arch, hidden_layer_sizes=(4, 4)),
                  train=replace(base.train, learning_rate=0.01, batch_size=2, patience=3))
    trace = run_online(sp.train, sp.test, sp.validation, cfg)
    assert score == trace[-1].cumulative_mse


def test_sweep_covers_every_cell_with_shared_seeds(tiny_setup):
    sp, base = tiny_setup
    spec = tuning.SweepSpec("p", (0.2, 0.8), repeats=2)
    cells = tuning.sweep(spec, base, sp)
    assert len(cells) == 4
    assert [(c.value, c.error) for c in cells] == [(0.2, None), (0.2, None),
                                                  (0.8, None), (0.8, None)]
    # repeat j shares its run seed across values
    assert cells[0].run_seed == cells[2].run_seed
    assert cells[0].run_seed != cells[1].run_seed
    for c in cells:
        assert c.summary is not None and len(c.trace) == len(sp.train)


def test_sweep_buffer_parameter_and_fault_isolation(tiny_setup):
    sp, base = tiny_setup
    spec = tuning.SweepSpec("buffer_size", (2.0, 0.0), repeats=1)
    cells = tuning.sweep(spec, base, sp)
    assert cells[0].error is None
    assert cells[1].error is not None and cells[1].summary is None  # capacity 0 invalid
    assert "positive" in cells[1].error


def test_sweep_parameter_strategy_mismatch(tiny_setup):
    sp, base = tiny_setup
    spec = tuning.SweepSpec("t", (0.1,), repeats=1)
    cells = tuning.sweep(spec, base, sp)  # base strategy is riro, not threshold
    assert all(c.error is not None for c in cells)


def test_sweep_spec_validation():
    with pytest.raises(ValueError):
        tuning.SweepSpec("learning_rate", (0.1,))
    with pytest.raises(ValueError):
        tuning.SweepSpec("p", ())
    with pytest.raises(ValueError):
        tuning.SweepSpec("p", (0.1,), repeats=0)
