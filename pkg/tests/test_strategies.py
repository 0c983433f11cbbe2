import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uqstream.strategies import (
    Buffer,
    Decision,
    Sample,
    StrategyConfig,
    apply_decision,
    as_arrays,
    decide,
)


def make_sample(i, dim=2):
    return Sample(x=np.full(dim, float(i)), y=np.array([float(i)]), arrival_index=i)


def filled_buffer(capacity, n=None):
    n = capacity if n is None else n
    return Buffer(capacity, tuple(make_sample(i) for i in range(n)))


def test_sample_validation():
    with pytest.raises(ValueError):
        Sample(x=np.ones((2, 2)), y=np.ones(1), arrival_index=0)
    with pytest.raises(ValueError):
        Sample(x=np.array([np.inf]), y=np.ones(1), arrival_index=0)
    with pytest.raises(ValueError):
        Sample(x=np.ones(1), y=np.ones(1), arrival_index=-1)


def test_as_arrays_stacks():
    xs, ys = as_arrays([make_sample(0), make_sample(1)])
    assert xs.shape == (2, 2) and ys.shape == (2, 1)
    assert np.array_equal(xs[1], [1.0, 1.0])
    with pytest.raises(ValueError):
        as_arrays([])


def test_buffer_validation():
    with pytest.raises(ValueError):
        Buffer(0)
    with pytest.raises(ValueError):
        Buffer(1, (make_sample(0), make_sample(1)))
    buf = filled_buffer(3, 2)
    assert len(buf) == 2 and not buf.is_full
    assert filled_buffer(3).is_full


def test_strategy_config_validation():
    with pytest.raises(ValueError):
        StrategyConfig("lifo")
    with pytest.raises(ValueError):
        StrategyConfig("riro")  # missing p
    with pytest.raises(ValueError):
        StrategyConfig("riro", p=0.0)
    with pytest.raises(ValueError):
        StrategyConfig("threshold")  # missing t
    with pytest.raises(ValueError):
        StrategyConfig("fifo", p=0.5)
    with pytest.raises(ValueError):
        StrategyConfig("greedy", t=0.1)
    StrategyConfig("riro", p=1.0)
    StrategyConfig("threshold_greedy", t=0.0)


def test_decision_validation():
    with pytest.raises(ValueError):
        Decision("drop")
    with pytest.raises(ValueError):
        Decision("skip", evict_index=0)


def test_offline_has_no_decisions():
    with pytest.raises(ValueError):
        decide(StrategyConfig("offline"), Buffer(2), 0.5)


def test_fifo_evicts_oldest():
    cfg = StrategyConfig("fifo")
    d = decide(cfg, filled_buffer(3, 2), 0.1)
    assert d == Decision("accept", None)
    # oldest sits at position 0 here, but the rule keys on arrival_index
    shuffled = Buffer(3, (make_sample(5), make_sample(2), make_sample(9)))
    assert decide(cfg, shuffled, 0.1) == Decision("accept", 1)


def test_fifo_capacity_two_keeps_recent_arrivals():
    cfg = StrategyConfig("fifo")
    buf = Buffer(2)
    for i in range(3):
        s = make_sample(i)
        buf = apply_decision(buf, decide(cfg, buf, 0.0), s)
    assert sorted(s.arrival_index for s in buf.items) == [1, 2]


def test_firo_evicts_uniformly_at_random():
    cfg = StrategyConfig("firo")
    buf = filled_buffer(4)
    rng = np.random.default_rng(0)
    picks = {decide(cfg, buf, 0.0, rng=rng).evict_index for _ in range(200)}
    assert picks == {0, 1, 2, 3}
    assert decide(cfg, filled_buffer(4, 2), 0.0, rng=rng) == Decision("accept", None)
    with pytest.raises(ValueError):
        decide(cfg, buf, 0.0)  # rng required


def test_riro_acceptance_probability():
    cfg = StrategyConfig("riro", p=0.5)
    rng = np.random.default_rng(1)
    buf = filled_buffer(3, 1)
    accepted = sum(decide(cfg, buf, 0.0, rng=rng).action == "accept" for _ in range(500))
    assert 200 < accepted < 300
    always = StrategyConfig("riro", p=1.0)
    assert all(decide(always, buf, 0.0, rng=rng).action == "accept" for _ in range(50))


def test_riro_coin_independent_of_occupancy():
    cfg = StrategyConfig("riro", p=0.4)
    pattern_empty = [decide(cfg, Buffer(3), 0.0, rng=np.random.default_rng(7)).action
                     for _ in range(1)]
    pattern_full = [decide(cfg, filled_buffer(3), 0.0, rng=np.random.default_rng(7)).action
                    for _ in range(1)]
    assert pattern_empty == pattern_full


def test_greedy_replaces_lowest_scored():
    cfg = StrategyConfig("greedy")
    buf = filled_buffer(3)
    stored = [0.5, 0.2, 0.9]
    assert decide(cfg, buf, 0.4, stored_scores=stored) == Decision("accept", 1)
    assert decide(cfg, buf, 0.1, stored_scores=stored) == Decision("skip")
    assert decide(cfg, buf, 0.2, stored_scores=stored) == Decision("skip")  # strict >
    # ties break toward the lowest index
    assert decide(cfg, buf, 0.4, stored_scores=[0.2, 0.2, 0.9]).evict_index == 0
    assert decide(cfg, filled_buffer(3, 1), 0.0) == Decision("accept", None)
    with pytest.raises(ValueError):
        decide(cfg, buf, 0.4)  # stored scores required when full
    with pytest.raises(ValueError):
        decide(cfg, buf, 0.4, stored_scores=[0.1, 0.2])  # wrong length


def test_threshold_gates_before_capacity():
    cfg = StrategyConfig("threshold", t=0.3)
    rng = np.random.default_rng(2)
    assert decide(cfg, Buffer(3), 0.3, rng=rng) == Decision("skip")
    assert decide(cfg, Buffer(3), 0.2, rng=rng) == Decision("skip")
    assert decide(cfg, Buffer(3), 0.31, rng=rng) == Decision("accept", None)
    d = decide(cfg, filled_buffer(3), 0.5, rng=rng)
    assert d.action == "accept" and 0 <= d.evict_index < 3


def test_threshold_greedy_combines_gate_and_greedy_eviction():
    cfg = StrategyConfig("threshold_greedy", t=0.3)
    buf = filled_buffer(3)
    stored = [0.5, 0.2, 0.9]
    assert decide(cfg, buf, 0.25, stored_scores=stored) == Decision("skip")
    assert decide(cfg, buf, 0.35, stored_scores=stored) == Decision("accept", 1)
    assert decide(cfg, filled_buffer(3, 2), 0.35) == Decision("accept", None)


def test_decide_rejects_non_finite_score():
    with pytest.raises(ValueError):
        decide(StrategyConfig("fifo"), Buffer(2), float("nan"))


def test_apply_skip_returns_buffer_unchanged():
    buf = filled_buffer(3, 2)
    assert apply_decision(buf, Decision("skip"), make_sample(10)) is buf


def test_apply_accept_appends_and_evicts():
    buf = filled_buffer(3)
    out = apply_decision(buf, Decision("accept", 0), make_sample(10))
    assert [s.arrival_index for s in out.items] == [1, 2, 10]
    assert len(buf) == 3  # original untouched
    with pytest.raises(ValueError):
        apply_decision(buf, Decision("accept"), make_sample(11))  # full, no eviction
    with pytest.raises(ValueError):
        apply_decision(buf, Decision("accept", 5), make_sample(11))
    with pytest.raises(ValueError):
        apply_decision(filled_buffer(3, 2), Decision("accept"), make_sample(1))  # dup arrival


def test_decide_is_reproducible():
    cfg = StrategyConfig("riro", p=0.3)
    buf = filled_buffer(5)
    a = [decide(cfg, buf, 0.0, rng=np.random.default_rng(9)) for _ in range(20)]
    b = [decide(cfg, buf, 0.0, rng=np.random.default_rng(9)) for _ in range(20)]
    assert a == b


@settings(max_examples=50, deadline=None)
@given(
    st.integers(1, 6),
    st.sampled_from(["fifo", "firo", "riro", "greedy", "threshold", "threshold_greedy"]),
    st.integers(0, 2 ** 32 - 1),
)
def test_policy_run_preserves_buffer_invariants(capacity, kind, seed):
    rng = np.random.default_rng(seed)
    if kind == "riro":
        cfg = StrategyConfig(kind, p=float(rng.uniform(0.1, 1.0)))
    elif kind in ("threshold", "threshold_greedy"):
        cfg = StrategyConfig(kind, t=float(rng.uniform(0.0, 0.8)))
    else:
        cfg = StrategyConfig(kind)
    buf = Buffer(capacity)
    for i in range(25):
        score = float(rng.uniform(0.0, 1.0))
        stored = [float(rng.uniform(0.0, 1.0)) for _ in buf.items]
        d = decide(cfg, buf, score, stored_scores=stored, rng=rng)
        buf = apply_decision(buf, d, make_sample(i))
        assert len(buf) <= capacity
        arrivals = [s.arrival_index for s in buf.items]
        assert len(set(arrivals)) == len(arrivals)
    if kind in ("fifo", "firo"):
        assert buf.is_full  # unconditional acceptance fills the buffer
    if kind == "fifo":
        # oldest-first eviction leaves exactly the most recent arrivals
        assert sorted(s.arrival_index for s in buf.items) == list(range(25 - capacity, 25))
