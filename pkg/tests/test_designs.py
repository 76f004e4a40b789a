import numpy as np
import pytest

from designs import (
    denormalize,
    generate_clustered_design,
    generate_lhs,
    make_synthetic_dataset,
    minmax_rescale,
    normalize,
    optimize_lhs,
)
from errors import InvalidArgumentError, InvalidDataError
from models import Bounds, SamplingPlan
from spacefill import mmphi_intensive


def _is_lhs(points, n):
    strata = np.floor(points * n).astype(int)
    return all(sorted(strata[:, j]) == list(range(n)) for j in range(points.shape[1]))


def test_lhs_has_one_point_per_stratum():
    plan = generate_lhs(17, 3, seed=0, centered=False)
    assert plan.points.shape == (17, 3)
    assert _is_lhs(plan.points, 17)


def test_centered_lhs_uses_stratum_midpoints():
    plan = generate_lhs(4, 2, seed=0)
    for j in range(2):
        assert sorted(plan.points[:, j]) == [0.125, 0.375, 0.625, 0.875]


def test_lhs_is_reproducible():
    a = generate_lhs(10, 2, seed=42)
    b = generate_lhs(10, 2, seed=42)
    assert np.array_equal(a.points, b.points)


def test_lhs_rejects_bad_sizes():
    with pytest.raises(InvalidArgumentError):
        generate_lhs(1, 2)
    with pytest.raises(InvalidArgumentError):
        generate_lhs(5, 0)


def test_optimize_lhs_keeps_lhs_and_improves():
    start = generate_lhs(30, 2, seed=7)
    best = optimize_lhs(30, 2, iterations=1000, seed=7)
    assert _is_lhs(best.points, 30)
    assert mmphi_intensive(best).quality <= mmphi_intensive(start).quality


def test_optimize_lhs_zero_iterations_is_the_start():
    assert np.array_equal(optimize_lhs(12, 3, iterations=0, seed=1).points, generate_lhs(12, 3, seed=1).points)


def test_normalize_and_denormalize():
    raw = np.array([[10.0, -1.0], [20.0, 1.0], [15.0, 0.0]])
    bounds = Bounds.from_data(raw)
    plan = normalize(raw, bounds, ["temp", "pressure"])
    assert plan.feature_names == ("temp", "pressure")
    assert plan.points[:, 0].tolist() == [0.0, 1.0, 0.5]
    assert np.allclose(denormalize(plan, bounds), raw)


def test_normalize_round_trip_is_exact_to_1e_12():
    rng = np.random.default_rng(0)
    bounds = Bounds(np.array([-5.0, 100.0, 0.0]), np.array([5.0, 300.0, 1e-3]))
    raw = bounds.low + rng.random((500, 3)) * bounds.width
    assert np.max(np.abs(denormalize(normalize(raw, bounds), bounds) - raw)) <= 1e-12
    plan = SamplingPlan(rng.random((500, 3)))
    assert np.max(np.abs(normalize(denormalize(plan, bounds), bounds).points - plan.points)) <= 1e-12


def test_constant_column_gets_unit_range():
    bounds = Bounds.from_data(np.array([[3.0, 1.0], [3.0, 2.0]]))
    assert bounds.low.tolist() == [3.0, 1.0]
    assert bounds.high.tolist() == [4.0, 2.0]


def test_normalize_rejects_non_finite():
    with pytest.raises(InvalidDataError):
        normalize(np.array([[0.0, np.nan]]), Bounds.unit(2))


def test_plan_rejects_values_outside_unit_cube():
    with pytest.raises(InvalidDataError):
        SamplingPlan(np.array([[0.2, 1.5]]))


def test_bounds_extended():
    bounds = Bounds.unit(2).extended(0.1)
    assert bounds.low == pytest.approx([-0.1, -0.1])
    assert bounds.high == pytest.approx([1.1, 1.1])


def test_clustered_design_shape_and_range():
    plan = generate_clustered_design(213, 3, n_clusters=5, spread=0.03, seed=0)
    assert plan.points.shape == (213, 3)
    assert plan.points.min() >= 0.0 and plan.points.max() <= 1.0


def test_clustered_design_without_lanes_or_blobs():
    assert generate_clustered_design(20, 2, lane_fraction=0.0, seed=1).n == 20
    assert generate_clustered_design(20, 2, lane_fraction=1.0, seed=1).n == 20


def test_clustered_design_is_denser_than_lhs():
    clustered = generate_clustered_design(100, 2, spread=0.01, seed=0)
    lhs = generate_lhs(100, 2, seed=0)
    assert mmphi_intensive(clustered).quality > mmphi_intensive(lhs).quality


def test_minmax_rescale_handles_constant_columns():
    out = minmax_rescale(np.array([[1.0, 5.0], [3.0, 5.0]]))
    assert out.tolist() == [[0.0, 0.0], [1.0, 0.0]]


def test_synthetic_dataset():
    dataset = make_synthetic_dataset(n=50, k=2, seed=9)
    assert dataset.target_names == ("z1", "z2")
    assert dataset.Z.shape == (50, 2)
    assert dataset.Z.min() == 0.0 and dataset.Z.max() == 1.0
    again = make_synthetic_dataset(n=50, k=2, seed=9)
    assert np.array_equal(dataset.X.points, again.X.points)
    assert np.array_equal(dataset.Z, again.Z)


def test_dataset_columns_unknown_name(small_dataset):
    with pytest.raises(InvalidArgumentError):
        small_dataset.columns(["z3"])
