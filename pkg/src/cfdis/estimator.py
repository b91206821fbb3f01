"""Scikit-learn style wrapper: empirical Christoffel function as an
outlier / support detector."""

import numpy as np
from sklearn.base import BaseEstimator, OutlierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .basis import basis_size, enumerate_basis
from .christoffel import build_cf, cf_value
from .moments import CONDITION_LIMIT, affine_rescale, moment_matrix, moments_from_samples


class ChristoffelOutlierDetector(BaseEstimator, OutlierMixin):
    """Support / outlier detection with the empirical Christoffel function.

    fit builds the degree-t moment matrix of the training samples (after an
    optional affine rescaling to [-1, 1]^d) and caches its factorization;
    score_samples returns the scaled CF value s_d(t) * Lambda_t, which is
    large inside the data support and decays fast outside.

    Parameters
    ----------
    degree : polynomial degree t of the CF.
    gamma : superlevel threshold; points with score >= gamma are inliers.
    jitter : optional ridge added to the moment matrix diagonal.
    rescale : affinely map training data onto [-1, 1]^d before fitting.
    condition_limit : refuse moment matrices with a larger condition estimate.
    """

    def __init__(self, degree=3, gamma=0.5, jitter=0.0, rescale=True,
                 condition_limit=CONDITION_LIMIT):
        self.degree = degree
        self.gamma = gamma
        self.jitter = jitter
        self.rescale = rescale
        self.condition_limit = condition_limit

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=1)
        if self.rescale:
            X_fit, self.shift_, self.scale_ = affine_rescale(X)
        else:
            X_fit = X
            self.shift_ = np.zeros(X.shape[1])
            self.scale_ = np.ones(X.shape[1])
        seq = moments_from_samples(X_fit, self.degree)
        basis = enumerate_basis(X.shape[1], 0, self.degree)
        m = moment_matrix(seq, basis, jitter=self.jitter)
        self.evaluator_ = build_cf(m, condition_limit=self.condition_limit)
        self.n_features_in_ = X.shape[1]
        self.scale_factor_ = basis_size(X.shape[1], self.degree)
        return self

    def score_samples(self, X):
        check_is_fitted(self, "evaluator_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        X = (X - self.shift_) / self.scale_
        return np.array(
            [self.scale_factor_ * cf_value(self.evaluator_, row) for row in X]
        )

    def decision_function(self, X):
        return self.score_samples(X) - self.gamma

    def predict(self, X):
        """+1 for points in the superlevel set (inliers), -1 otherwise."""
        return np.where(self.decision_function(X) >= 0, 1, -1)
