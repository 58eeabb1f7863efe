import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chainreg.errors import DimensionError, ParameterError
from chainreg.ewa import EwaState, square_loss_expconcave_eta


def test_init():
    assert np.allclose(EwaState(2, 0.02).weights(), [0.5, 0.5])
    assert EwaState(1, 1.0).weights().tolist() == [1.0]
    assert np.allclose(EwaState(5, 1 / 50).weights(), [0.2] * 5)
    with pytest.raises(ParameterError):
        EwaState(3, 0.0)
    with pytest.raises(DimensionError):
        EwaState(0, 1.0)


def test_weights_examples():
    s = EwaState(2, 1 / 50)
    s.observe([0.0, 50.0])
    # (e^0, e^-1) normalised
    assert np.allclose(s.weights(), [1 / (1 + math.exp(-1)), math.exp(-1) / (1 + math.exp(-1))])
    assert np.allclose(s.weights(), [0.7310585786300049, 0.2689414213699951], atol=1e-15)
    t = EwaState(2, 0.3)
    t.observe([123.0, 123.0])
    assert np.allclose(t.weights(), [0.5, 0.5])


def test_observe():
    s = EwaState(2, 1.0)
    s.observe([0.0, 0.0])
    assert np.allclose(s.weights(), [0.5, 0.5])
    s.observe([1.0, 0.0])
    s.observe([1.0, 0.0])
    assert np.allclose(s.weights(), [0.11920292202211755, 0.8807970779778823], atol=1e-15)
    assert s.rounds_seen == 3
    with pytest.raises(DimensionError):
        s.observe([1.0])
    with pytest.raises(ValueError):
        s.observe([np.nan, 0.0])


def test_symmetric_stream_stays_uniform():
    s = EwaState(3, 0.5)
    for l in ([1, 2, 3], [3, 1, 2], [2, 3, 1]):
        s.observe(l)
    assert np.allclose(s.weights(), [1 / 3] * 3)


def test_order_independence():
    rng = np.random.Generator(np.random.PCG64(4))
    losses = rng.random((20, 4))
    a, b = EwaState(4, 0.7), EwaState(4, 0.7)
    for l in losses:
        a.observe(l)
    for l in losses[::-1]:
        b.observe(l)
    assert np.allclose(a.weights(), b.weights(), atol=1e-12)


def test_copy_is_independent():
    a = EwaState(2, 1.0)
    b = a.copy()
    b.observe([1.0, 0.0])
    assert np.allclose(a.weights(), [0.5, 0.5])


def test_expconcave_eta():
    assert square_loss_expconcave_eta(1, 5) == 0.02
    assert square_loss_expconcave_eta(1, 4) == 0.03125
    assert square_loss_expconcave_eta(2, 5) == 1 / 200
    with pytest.raises(ParameterError):
        square_loss_expconcave_eta(1, 3)
    with pytest.raises(ParameterError):
        square_loss_expconcave_eta(0, 5)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([4, 5]), st.integers(2, 12))
def test_mixture_regret_within_log_n_over_eta(seed, r, n):
    # exp-concavity needs |y - z| <= r B: experts in [-(r-1)B, (r-1)B], |y| <= B
    rng = np.random.Generator(np.random.PCG64(seed))
    b, t = 1.0, 200
    eta = square_loss_expconcave_eta(b, r)
    experts = (r - 1) * b * (2 * rng.random((t, n)) - 1)
    ys = b * (2 * rng.random(t) - 1)
    s = EwaState(n, eta)
    mix = 0.0
    for e, y in zip(experts, ys):
        mix += (y - s.weights() @ e) ** 2
        s.observe((y - e) ** 2)
    best = ((ys[:, None] - experts) ** 2).sum(axis=0).min()
    assert mix - best <= math.log(n) / eta + 1e-9
