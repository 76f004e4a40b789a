import numpy as np
import pytest

from designs import make_synthetic_dataset
from errors import InvalidArgumentError, InvalidDataError, NumericalFailureError
from models import ForestConfig, GpConfig
from surrogate import (
    FunctionSurrogate,
    canonical_order,
    cross_validate,
    fit_forest,
    fit_gp,
    fold_indices,
    holdout_count,
    predict,
    train_test_evaluate,
)


def test_forest_on_constant_targets():
    X = np.random.default_rng(0).random((30, 2))
    model = fit_forest(X, np.full((30, 2), 0.5), ForestConfig(n_estimators=5))
    assert model.joint
    assert predict(model, np.random.default_rng(1).random((7, 2))) == pytest.approx(np.full((7, 2), 0.5))


def test_single_leaf_forest_predicts_the_mean():
    X = np.random.default_rng(0).random((20, 2))
    y = np.arange(20, dtype=float)
    cfg = ForestConfig(n_estimators=1, bootstrap=False, min_samples_leaf=20)
    model = fit_forest(X, y, cfg)
    assert model.predict(X[:3]).ravel() == pytest.approx([9.5, 9.5, 9.5])


def test_per_target_forest():
    X = np.random.default_rng(0).random((30, 2))
    model = fit_forest(X, X, ForestConfig(n_estimators=5), per_target=True, target_names=["a", "b"])
    assert not model.joint
    assert len(model.estimators) == 2
    assert model.target_names == ("a", "b")
    assert model.predict(X).shape == (30, 2)


def test_predict_validates_shape():
    model = fit_forest(np.random.default_rng(0).random((10, 2)), np.zeros(10), ForestConfig(n_estimators=2))
    with pytest.raises(InvalidArgumentError):
        model.predict(np.zeros((3, 3)))
    assert model.predict(np.empty((0, 2))).shape == (0, 1)


def test_fit_rejects_bad_data():
    with pytest.raises(InvalidDataError):
        fit_forest(np.zeros((5, 2)), np.zeros(4))
    with pytest.raises(InvalidDataError):
        fit_forest(np.array([[0.0, np.nan], [1.0, 1.0]]), np.zeros(2))


def test_gp_interpolates_training_points():
    rng = np.random.default_rng(3)
    X = rng.random((15, 2))
    y = np.sin(3 * X[:, 0]) + X[:, 1]
    model = fit_gp(X, y, GpConfig(length_scale=0.1, noise_jitter=1e-10))
    assert model.predict(X).ravel() == pytest.approx(y, abs=1e-4)


def test_gp_learns_a_sine():
    X = np.linspace(0, 1, 20).reshape(-1, 1)
    model = fit_gp(X, np.sin(2 * np.pi * X[:, 0]))
    X_test = np.linspace(0, 1, 200).reshape(-1, 1)
    rmse = np.sqrt(np.mean((model.predict(X_test).ravel() - np.sin(2 * np.pi * X_test[:, 0])) ** 2))
    assert rmse < 0.1


def test_gp_gives_up_after_max_jitter(mocker):
    mocker.patch("surrogate.GaussianProcessRegressor.fit", side_effect=np.linalg.LinAlgError("not PD"))
    with pytest.raises(NumericalFailureError):
        fit_gp(np.random.default_rng(0).random((5, 1)), np.zeros(5), GpConfig(length_scale=0.5))


def test_non_finite_predictions_raise():
    model = FunctionSurrogate(lambda X: np.full(X.shape[0], np.nan), n_features=2)
    with pytest.raises(NumericalFailureError):
        model.predict(np.zeros((2, 2)))


def test_holdout_count():
    assert holdout_count(213, 0.3) == 64
    assert holdout_count(10, 0.25) == 3


def test_canonical_order_ignores_input_order():
    rng = np.random.default_rng(0)
    X, Y = rng.random((12, 2)), rng.random((12, 1))
    perm = rng.permutation(12)
    a = canonical_order(X, Y)
    b = canonical_order(X[perm], Y[perm])
    assert np.array_equal(X[a], X[perm][b])


def test_train_test_evaluate(small_dataset):
    report = train_test_evaluate(small_dataset.X, small_dataset.Z, test_size=0.3, models=["forest"],
                                 forest=ForestConfig(n_estimators=10), target_names=["z1", "z2"])
    assert report.n_test == 18
    assert report.n_train == 42
    assert report.metrics[["model", "target"]].values.tolist() == [["forest", "z1"], ["forest", "z2"]]
    assert (report.metrics["MSE"] >= 0).all()
    assert len(report.predictions["forest"]) == 36


def test_train_test_evaluate_does_not_depend_on_row_order(small_dataset):
    perm = np.random.default_rng(1).permutation(small_dataset.X.n)
    kwargs = dict(models=["forest"], forest=ForestConfig(n_estimators=5), seed=4)
    a = train_test_evaluate(small_dataset.X.points, small_dataset.Z, **kwargs)
    b = train_test_evaluate(small_dataset.X.points[perm], small_dataset.Z[perm], **kwargs)
    assert a.metrics["MSE"].tolist() == pytest.approx(b.metrics["MSE"].tolist())


def test_train_test_evaluate_accepts_trained_surrogate(small_dataset):
    truth = FunctionSurrogate(lambda X: np.zeros((X.shape[0], 2)), n_features=2, n_outputs=2)
    report = train_test_evaluate(small_dataset.X, np.zeros((60, 2)), models=[truth])
    assert report.metrics["MSE"].tolist() == [0.0, 0.0]


def test_train_test_rejects_bad_test_size(small_dataset):
    with pytest.raises(InvalidArgumentError):
        train_test_evaluate(small_dataset.X, small_dataset.Z, test_size=1.0)


def test_folds_partition_rows():
    folds = fold_indices(23, 5, seed=0)
    assert len(folds) == 5
    assert sorted(np.concatenate(folds).tolist()) == list(range(23))


def test_cross_validate_summary(small_dataset):
    report = cross_validate(small_dataset.X, small_dataset.Z, k_folds=3, models=["forest", "gp"],
                            forest=ForestConfig(n_estimators=5), gp=GpConfig(length_scale=[0.1, 0.3]),
                            target_names=["z1", "z2"])
    summary = report.summary
    assert summary.columns.tolist() == ["Target", "Model", "Metric", "Mean", "Std", "Min", "Max"]
    assert summary[["Target", "Metric", "Model"]].values.tolist()[:4] == [
        ["z1", "MSE", "Random Forest"],
        ["z1", "MSE", "Gaussian Process"],
        ["z1", "MAE", "Random Forest"],
        ["z1", "MAE", "Gaussian Process"],
    ]
    assert len(summary) == 8
    assert (report.raw["forest"]["NMSE"][0] <= 0).all()
    assert (summary["Min"] <= summary["Mean"]).all() and (summary["Mean"] <= summary["Max"]).all()


def test_cross_validate_needs_enough_rows():
    with pytest.raises(InvalidArgumentError):
        cross_validate(np.random.default_rng(0).random((4, 2)), np.zeros(4), k_folds=5)


def test_forest_beats_the_mean_predictor():
    dataset = make_synthetic_dataset(n=200, k=5, seed=0)
    report = cross_validate(dataset.X, dataset.Z, k_folds=5, models=["forest"],
                            forest=ForestConfig(n_estimators=30), target_names=["z1", "z2"])
    mse = report.summary[report.summary["Metric"] == "MSE"]["Mean"].to_numpy()
    assert np.all(mse < dataset.Z.var(axis=0))


def test_forest_predictions_stay_in_training_range():
    dataset = make_synthetic_dataset(n=120, k=3, seed=5)
    model = fit_forest(dataset.X, dataset.Z, ForestConfig(n_estimators=20))
    pred = model.predict(np.random.default_rng(2).random((500, 3)))
    assert np.all(pred >= dataset.Z.min(axis=0))
    assert np.all(pred <= dataset.Z.max(axis=0))


def test_forest_in_bag_error_is_optimistic():
    dataset = make_synthetic_dataset(n=200, k=5, seed=1)
    X, Z = dataset.X.points, dataset.Z
    model = fit_forest(X[:140], Z[:140], ForestConfig(n_estimators=30))
    in_bag = np.mean((model.predict(X[:140]) - Z[:140]) ** 2, axis=0)
    held_out = np.mean((model.predict(X[140:]) - Z[140:]) ** 2, axis=0)
    assert np.all(in_bag <= held_out)


def test_gp_training_fit_tightens_as_jitter_shrinks():
    rng = np.random.default_rng(3)
    X = rng.random((15, 2))
    y = np.sin(3 * X[:, 0]) + X[:, 1]
    errors = {}
    for jitter in (1e-2, 1e-10):
        model = fit_gp(X, y, GpConfig(length_scale=0.1, noise_jitter=jitter))
        errors[jitter] = np.max(np.abs(model.predict(X).ravel() - y))
    assert errors[1e-10] < 1e-4
    assert errors[1e-10] < errors[1e-2] / 10
