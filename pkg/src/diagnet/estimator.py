"""Scikit-learn estimator facade over the training dynamics.

``DiagonalNetClassifier`` exposes the trajectory endpoint as an ordinary
linear classifier (fit / decision_function / predict, get_params), so the
dynamics compose with pipelines, grid search, and the rest of the
ecosystem.  The full trajectory remains available as ``trajectory_``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .data import make_dataset
from .dynamics import StepperConfig, init_params, run
from .regimes import suggest_eta


class DiagonalNetClassifier(ClassifierMixin, BaseEstimator):
    """Binary classifier trained by (normalized) gradient descent on a
    depth-D diagonal linear network with the exponential loss.

    Parameters
    ----------
    depth : network depth D >= 2.
    alpha : initialization scale (u(0) = alpha * ones, so w(0) = 0).
    gamma_tilde_target : stop once -log(training loss) reaches this value.
    eta : base step size; None picks one from the data and alpha.
    mode : "normalized_gd" (default) or "plain_gd".
    max_steps : step budget.
    record_every : trajectory recording cadence.

    Attributes
    ----------
    coef_ : (d,) linear predictor at the stopping surface.
    trajectory_ : list of TrajectoryRecord.
    classes_ : the two class labels; the second maps to the positive side.
    """

    def __init__(self, depth: int = 2, alpha: float = 1.0,
                 gamma_tilde_target: float = 100.0, eta: float | None = None,
                 mode: str = "normalized_gd", max_steps: int = 1_000_000,
                 record_every: int = 100):
        self.depth = depth
        self.alpha = alpha
        self.gamma_tilde_target = gamma_tilde_target
        self.eta = eta
        self.mode = mode
        self.max_steps = max_steps
        self.record_every = record_every

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_ = np.unique(y)
        if len(self.classes_) != 2:
            raise ValueError(
                f"expected exactly 2 classes, got {len(self.classes_)}"
            )
        signed = np.where(y == self.classes_[1], 1.0, -1.0)
        data = make_dataset(X, signed)
        eta = self.eta if self.eta is not None else \
            suggest_eta(data, self.depth, self.alpha)
        cfg = StepperConfig(
            eta=eta, mode=self.mode, max_steps=self.max_steps,
            record_every=self.record_every,
            gamma_tilde_target=self.gamma_tilde_target,
        )
        records = run(init_params(data.n_features, self.depth, self.alpha),
                      data, cfg)
        self.trajectory_ = records
        self.coef_ = records[-1].w
        self.gamma_tilde_ = records[-1].gamma_tilde
        self.n_iter_ = records[-1].step
        self.n_features_in_ = data.n_features
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_

    def predict(self, X):
        scores = self.decision_function(X)
        return self.classes_[(scores >= 0).astype(int)]
