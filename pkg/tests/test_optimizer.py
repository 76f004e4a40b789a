import numpy as np
import pytest

from errors import InvalidArgumentError
from models import Bounds
from optimizer import DifferentialEvolution, default_pop_size, reflect


def bowl(X):
    """Peak 1.0 at (0.3, 0.3, ...); payload is the distance to the peak."""
    dist = np.linalg.norm(X - 0.3, axis=1)
    return 1.0 - dist ** 2, dist.reshape(-1, 1)


def test_default_pop_size():
    assert default_pop_size(1) == 10
    assert default_pop_size(2) == 20
    assert default_pop_size(40) == 150


def test_reflect_stays_in_bounds():
    low, high = np.zeros(2), np.ones(2)
    out = reflect(np.array([[-0.2, 1.3], [0.5, 3.5]]), low, high)
    assert out[0].tolist() == pytest.approx([0.2, 0.7])
    assert out[1].tolist() == pytest.approx([0.5, 0.0])


def test_finds_the_peak():
    result = DifferentialEvolution(bowl, Bounds.unit(2), budget=2000, seed=0).run()
    assert result.x_best == pytest.approx([0.3, 0.3], abs=1e-2)
    assert result.score_best == pytest.approx(1.0, abs=1e-3)
    assert result.payload_best[0] == pytest.approx(np.linalg.norm(result.x_best - 0.3))


def test_budget_and_trace():
    de = DifferentialEvolution(bowl, Bounds.unit(2), budget=205, seed=1)
    result = de.run()
    assert result.evaluations == 200
    scores = [score for _, score, _ in result.trace]
    assert len(scores) == 10
    assert all(b >= a for a, b in zip(scores, scores[1:]))


def test_respects_non_unit_bounds():
    bounds = Bounds(np.array([0.5, 0.5]), np.array([2.0, 2.0]))
    result = DifferentialEvolution(bowl, bounds, budget=1000, seed=0).run()
    assert bounds.contains(result.x_best)
    assert result.x_best == pytest.approx([0.5, 0.5], abs=1e-2)


def test_same_seed_same_result():
    a = DifferentialEvolution(bowl, Bounds.unit(3), budget=600, seed=5, restarts=2).run()
    b = DifferentialEvolution(bowl, Bounds.unit(3), budget=600, seed=5, restarts=2).run()
    assert np.array_equal(a.x_best, b.x_best)
    assert a.evaluations == b.evaluations == 600


def test_rejects_budget_below_population():
    with pytest.raises(InvalidArgumentError):
        DifferentialEvolution(bowl, Bounds.unit(2), budget=10)
    with pytest.raises(InvalidArgumentError):
        DifferentialEvolution(bowl, Bounds.unit(2), budget=100, restarts=6)


def test_extended_bounds_reach_past_the_unit_box():
    bounds = Bounds.unit(2).extended(0.1)
    assert bounds.low.tolist() == pytest.approx([-0.1, -0.1])
    assert bounds.high.tolist() == pytest.approx([1.1, 1.1])

    def outside(X):
        dist = np.linalg.norm(X - 1.05, axis=1)
        return -dist, dist.reshape(-1, 1)

    result = DifferentialEvolution(outside, bounds, budget=1500, seed=2).run()
    assert result.x_best == pytest.approx([1.05, 1.05], abs=2e-2)
    with pytest.raises(InvalidArgumentError):
        Bounds.unit(2).extended(-0.1)


def test_restarts_split_the_budget():
    result = DifferentialEvolution(bowl, Bounds.unit(2), budget=605, seed=3, restarts=3).run()
    # 201, 201, 203 per restart -> 10 generations of 20 each
    assert result.evaluations == 600
    assert len(result.trace) == 30
    scores = [score for _, score, _ in result.trace]
    assert all(b >= a for a, b in zip(scores, scores[1:]))
