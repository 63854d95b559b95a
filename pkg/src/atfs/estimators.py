"""Scikit-learn style front end for the attack.

``FeatureSynergyAttack`` is transform-shaped: ``fit`` optimises a
perturbation for one clean image against the configured extractors and
target, ``transform`` applies the learned perturbation. ``get_params`` /
``set_params`` come from ``BaseEstimator`` so the attack composes with
grid-search style tooling.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .attack import AttackConfig, run_attack
from .validation import check_image, check_same_shape


class FeatureSynergyAttack(BaseEstimator, TransformerMixin):
    def __init__(self, extractors=None, target=None, epsilon=6.0 / 255.0,
                 alpha=None, steps=100, weights=None, xi=1e-8,
                 method="atfs", seed=0):
        self.extractors = extractors
        self.target = target
        self.epsilon = epsilon
        self.alpha = alpha
        self.steps = steps
        self.weights = weights
        self.xi = xi
        self.method = method
        self.seed = seed

    def _config(self) -> AttackConfig:
        return AttackConfig(epsilon=self.epsilon, alpha=self.alpha,
                            steps=self.steps, weights=self.weights,
                            xi=self.xi, method=self.method, seed=self.seed)

    def fit(self, X, y=None):
        if not self.extractors:
            raise ValueError("extractors must be a nonempty list")
        x = check_image(X, "X")
        target = None
        if self.target is not None:
            target = check_image(self.target, "target")
            check_same_shape(x, target)
        x_adv, state = run_attack(list(self.extractors), x, target, self._config())
        self.x_ = x
        self.x_adv_ = x_adv
        self.delta_ = state.delta.copy()
        self.state_ = state
        return self

    def transform(self, X):
        if not hasattr(self, "delta_"):
            raise RuntimeError("fit must be called before transform")
        x = check_image(X, "X")
        check_same_shape(x, self.delta_)
        return np.clip(x + self.delta_, 0.0, 1.0)
