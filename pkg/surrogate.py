"""Surrogate models standing in for experiments, and their evaluation harnesses."""

from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from sklearn.ensemble import RandomForestRegressor
from sklearn.gaussian_process import GaussianProcessRegressor
from sklearn.gaussian_process.kernels import RBF, ConstantKernel
from sklearn.metrics import mean_absolute_error, mean_squared_error
from sklearn.model_selection import KFold, train_test_split

from errors import InvalidArgumentError, InvalidDataError, NumericalFailureError
from models import CvReport, EvaluationReport, ForestConfig, GpConfig, SamplingPlan, default_names

DEFAULT_LENGTH_SCALES = np.logspace(-2, 1, 25)
MAX_JITTER = 1e-4
MODEL_LABELS = {"forest": "Random Forest", "gp": "Gaussian Process"}


class TrainedSurrogate:
    """A fitted regressor mapping the unit cube to p objective values.

    `estimators` is either one joint multi-output model or one model per target.
    """

    def __init__(self, kind: str, estimators: List, n_features: int, n_outputs: int,
                 joint: bool = False, target_names: Optional[Sequence[str]] = None):
        self.kind = kind
        self.estimators = estimators
        self.n_features = n_features
        self.n_outputs = n_outputs
        self.joint = joint
        self.target_names = tuple(target_names or default_names("z", n_outputs))

    def _raw_predict(self, X: np.ndarray) -> np.ndarray:
        if self.joint:
            return np.asarray(self.estimators[0].predict(X), dtype=float).reshape(X.shape[0], self.n_outputs)
        return np.column_stack([est.predict(X) for est in self.estimators])

    def predict(self, X_new) -> np.ndarray:
        X = X_new.points if isinstance(X_new, SamplingPlan) else np.asarray(X_new, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise InvalidArgumentError(
                f"{self.kind} surrogate expects (m, {self.n_features}) inputs, got shape {X.shape}"
            )
        if X.shape[0] == 0:
            return np.empty((0, self.n_outputs))
        Y = self._raw_predict(X)
        if not np.all(np.isfinite(Y)):
            raise NumericalFailureError(f"{self.kind} surrogate produced non-finite predictions")
        return Y

    def __repr__(self):
        return f"TrainedSurrogate(kind={self.kind!r}, k={self.n_features}, p={self.n_outputs}, joint={self.joint})"


class FunctionSurrogate(TrainedSurrogate):
    """Wraps an analytic function f(X) -> (m, p) in the surrogate contract."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], n_features: int, n_outputs: int = 1,
                 target_names: Optional[Sequence[str]] = None, kind: str = "function"):
        super().__init__(kind, [], n_features, n_outputs, joint=True, target_names=target_names)
        self.fn = fn

    def _raw_predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(X), dtype=float).reshape(X.shape[0], self.n_outputs)


def predict(model: TrainedSurrogate, X_new) -> np.ndarray:
    return model.predict(X_new)


def _training_data(X, Y) -> Tuple[np.ndarray, np.ndarray]:
    X = X.points if isinstance(X, SamplingPlan) else np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y.reshape(-1, 1)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise InvalidDataError(f"inputs {X.shape} and targets {Y.shape} do not line up")
    if X.shape[0] < 2:
        raise InvalidDataError(f"fitting needs at least 2 samples, got {X.shape[0]}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise InvalidDataError("training data contains non-finite values")
    return X, Y


def _forest(cfg: ForestConfig) -> RandomForestRegressor:
    return RandomForestRegressor(
        n_estimators=cfg.n_estimators,
        max_depth=cfg.max_depth,
        min_samples_leaf=cfg.min_samples_leaf,
        bootstrap=cfg.bootstrap,
        max_features=1.0,
        random_state=cfg.seed,
        n_jobs=cfg.n_jobs,
    )


def fit_forest(X, Y, cfg: Optional[ForestConfig] = None, per_target: bool = False,
               target_names: Optional[Sequence[str]] = None) -> TrainedSurrogate:
    """Random forest regression; one joint multi-output forest unless per_target."""
    cfg = cfg or ForestConfig()
    X, Y = _training_data(X, Y)
    p = Y.shape[1]
    if per_target or p == 1:
        estimators = [_forest(cfg).fit(X, Y[:, j]) for j in range(p)]
        joint = False
    else:
        estimators = [_forest(cfg).fit(X, Y)]
        joint = True
    logger.debug(f"🌲 Forest fitted: n={X.shape[0]}, k={X.shape[1]}, p={p}, joint={joint}")
    return TrainedSurrogate("forest", estimators, X.shape[1], p, joint, target_names)


def fit_ground_truth(X, Y, cfg: Optional[ForestConfig] = None,
                     target_names: Optional[Sequence[str]] = None) -> TrainedSurrogate:
    """One forest per target fitted on all data; serves as the experiment simulator."""
    return fit_forest(X, Y, cfg, per_target=True, target_names=target_names)


def _fit_single_gp(X: np.ndarray, y: np.ndarray, length_scale: float, cfg: GpConfig) -> GaussianProcessRegressor:
    jitter = cfg.noise_jitter
    while True:
        kernel = ConstantKernel(cfg.signal_variance, constant_value_bounds="fixed") * RBF(
            length_scale, length_scale_bounds="fixed"
        )
        gp = GaussianProcessRegressor(kernel=kernel, alpha=jitter, optimizer=None, normalize_y=False)
        try:
            return gp.fit(X, y)
        except np.linalg.LinAlgError as e:
            if jitter >= MAX_JITTER:
                raise NumericalFailureError(
                    f"kernel matrix not positive definite (length scale {length_scale:g}, jitter {jitter:g})"
                ) from e
            jitter = min(jitter * 10.0, MAX_JITTER)
            logger.warning(f"⚠️ Cholesky failed at length scale {length_scale:g}; raising jitter to {jitter:g}")


def fit_gp(X, Y, cfg: Optional[GpConfig] = None, target_names: Optional[Sequence[str]] = None) -> TrainedSurrogate:
    """One zero-mean squared-exponential GP per target, predictions stacked.

    The length scale of each target maximises the log marginal likelihood over
    cfg.length_scale (a value or list) or a 25-point log grid on [1e-2, 1e1].
    """
    cfg = cfg or GpConfig()
    X, Y = _training_data(X, Y)
    if cfg.length_scale is None:
        grid = DEFAULT_LENGTH_SCALES
    elif isinstance(cfg.length_scale, list):
        grid = np.asarray(cfg.length_scale, dtype=float)
    else:
        grid = np.asarray([cfg.length_scale], dtype=float)

    estimators = []
    for j in range(Y.shape[1]):
        best, best_lml = None, -np.inf
        for ls in grid:
            gp = _fit_single_gp(X, Y[:, j], float(ls), cfg)
            lml = gp.log_marginal_likelihood_value_
            if best is None or lml > best_lml:
                best, best_lml = gp, lml
        logger.debug(f"📈 GP target {j}: length scale {best.kernel_.k2.length_scale:g}, LML {best_lml:.4g}")
        estimators.append(best)
    return TrainedSurrogate("gp", estimators, X.shape[1], Y.shape[1], joint=False, target_names=target_names)


def _fit_named(name: str, X: np.ndarray, Y: np.ndarray, forest: Optional[ForestConfig],
               gp: Optional[GpConfig]) -> TrainedSurrogate:
    if name == "forest":
        return fit_forest(X, Y, forest)
    if name == "gp":
        return fit_gp(X, Y, gp)
    raise InvalidArgumentError(f"unknown model {name!r}; use 'forest' or 'gp'")


def canonical_order(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Row order sorted lexicographically by (x1..xk, y1..yp)."""
    keys = np.column_stack([X, Y])
    return np.lexsort(keys.T[::-1])


def holdout_count(n: int, test_size: float) -> int:
    """floor(test_size * n + 0.5): 0.3 of 213 rows gives 64."""
    return int(np.floor(test_size * n + 0.5))


ModelSpec = Union[str, TrainedSurrogate]


def train_test_evaluate(X, Y, test_size: float = 0.3, models: Sequence[ModelSpec] = ("forest", "gp"),
                        seed: int = 0, forest: Optional[ForestConfig] = None, gp: Optional[GpConfig] = None,
                        target_names: Optional[Sequence[str]] = None) -> EvaluationReport:
    """Seeded hold-out split; per-model MSE/MAE per target and predicted-vs-actual data.

    `models` entries are "forest", "gp" (fitted on the training part) or an already
    trained surrogate, which is only evaluated.
    """
    if not 0 < test_size < 1:
        raise InvalidArgumentError(f"test_size must lie in (0, 1), got {test_size}")
    X, Y = _training_data(X, Y)
    names = tuple(target_names or default_names("z", Y.shape[1]))
    order = canonical_order(X, Y)
    X, Y = X[order], Y[order]
    n_test = holdout_count(X.shape[0], test_size)
    if n_test < 1 or X.shape[0] - n_test < 2:
        raise InvalidArgumentError(f"test_size={test_size} on {X.shape[0]} rows leaves no usable split")
    X_tr, X_te, Y_tr, Y_te = train_test_split(X, Y, test_size=n_test, random_state=seed, shuffle=True)

    metric_rows = []
    predictions: Dict[str, pd.DataFrame] = {}
    for spec in models:
        model = spec if isinstance(spec, TrainedSurrogate) else _fit_named(spec, X_tr, Y_tr, forest, gp)
        label = model.kind if isinstance(spec, TrainedSurrogate) else spec
        Y_hat = model.predict(X_te)
        parts = []
        for j, target in enumerate(names):
            metric_rows.append({
                "model": label,
                "target": target,
                "MSE": mean_squared_error(Y_te[:, j], Y_hat[:, j]),
                "MAE": mean_absolute_error(Y_te[:, j], Y_hat[:, j]),
            })
            parts.append(pd.DataFrame({"target": target, "actual": Y_te[:, j], "predicted": Y_hat[:, j]}))
        predictions[label] = pd.concat(parts, ignore_index=True)
    metrics = pd.DataFrame(metric_rows, columns=["model", "target", "MSE", "MAE"])
    return EvaluationReport(metrics, predictions, X_tr.shape[0], X_te.shape[0])


def fold_indices(n: int, k_folds: int, seed: int = 0) -> List[np.ndarray]:
    """Test-row indices of each shuffled fold."""
    return [test for _, test in KFold(n_splits=k_folds, shuffle=True, random_state=seed).split(np.arange(n))]


def cross_validate(X, Y, k_folds: int = 10, models: Sequence[str] = ("forest", "gp"), seed: int = 0,
                   forest: Optional[ForestConfig] = None, gp: Optional[GpConfig] = None,
                   target_names: Optional[Sequence[str]] = None) -> CvReport:
    """k-fold scores per model and target.

    raw holds negated scores (NMSE, NMAE) per fold; the summary holds positive
    MSE/MAE mean, std, min and max, ordered target -> metric -> model.
    """
    X, Y = _training_data(X, Y)
    n = X.shape[0]
    if k_folds < 2 or n < k_folds:
        raise InvalidArgumentError(f"cross-validation needs 2 <= k_folds <= n, got k_folds={k_folds}, n={n}")
    names = tuple(target_names or default_names("z", Y.shape[1]))
    order = canonical_order(X, Y)
    X, Y = X[order], Y[order]
    folds = fold_indices(n, k_folds, seed)

    raw: Dict[str, Dict[str, List[np.ndarray]]] = {}
    for name in models:
        mse = np.zeros((Y.shape[1], k_folds))
        mae = np.zeros((Y.shape[1], k_folds))
        for f, test in enumerate(folds):
            train = np.setdiff1d(np.arange(n), test)
            model = _fit_named(name, X[train], Y[train], forest, gp)
            Y_hat = model.predict(X[test])
            for j in range(Y.shape[1]):
                mse[j, f] = mean_squared_error(Y[test, j], Y_hat[:, j])
                mae[j, f] = mean_absolute_error(Y[test, j], Y_hat[:, j])
        raw[name] = {"NMSE": [-row for row in mse], "NMAE": [-row for row in mae]}
        logger.info(f"🔁 {MODEL_LABELS.get(name, name)}: {k_folds}-fold CV done")

    summary_rows = []
    for j, target in enumerate(names):
        for metric, key in (("MSE", "NMSE"), ("MAE", "NMAE")):
            for name in models:
                scores = -raw[name][key][j]
                summary_rows.append({
                    "Target": target,
                    "Model": MODEL_LABELS.get(name, name),
                    "Metric": metric,
                    "Mean": float(scores.mean()),
                    "Std": float(scores.std()),
                    "Min": float(scores.min()),
                    "Max": float(scores.max()),
                })
    summary = pd.DataFrame(summary_rows, columns=["Target", "Model", "Metric", "Mean", "Std", "Min", "Max"])
    return CvReport(raw, summary, names, k_folds)
