"""scikit-learn style wrappers around the capacity and membership routines."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from .analysis import capacity_blahut_arimoto
from .gpt import CorrelationMatrix
from .polytope import membership


class ChannelCapacity(BaseEstimator):
    """Fit a channel matrix (rows are inputs) and expose its capacity in bits.

    Attributes set by ``fit``: ``capacity_``, ``prior_``, ``n_iter_``,
    ``converged_`` and ``upper_bound_``.
    """

    def __init__(self, tol: float = 1e-9, max_iter: int = 100000):
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        if isinstance(X, CorrelationMatrix):
            W = X
        else:
            W = check_array(X, dtype=float, ensure_min_samples=1, ensure_min_features=1)
        res = capacity_blahut_arimoto(W, tol=self.tol, max_iter=self.max_iter)
        self.capacity_ = res.capacity_bits
        self.prior_ = np.asarray(res.prior)
        self.n_iter_ = res.iterations
        self.converged_ = res.converged
        self.upper_bound_ = res.upper_bound_bits
        return self

    def score(self, X=None, y=None) -> float:
        check_is_fitted(self, "capacity_")
        return self.capacity_


def _as_correlation(item) -> CorrelationMatrix:
    if isinstance(item, CorrelationMatrix):
        return item
    if isinstance(item, dict):
        return CorrelationMatrix.from_json(item)
    return CorrelationMatrix(tuple(tuple(r) for r in item))


class ClassicalPolytopeMembership(ClassifierMixin, BaseEstimator):
    """Classify exact correlation matrices as inside (1) or outside (0) of ``C(m, n, d)``.

    Inputs are sequences of correlations: ``CorrelationMatrix`` objects,
    their JSON form, or nested lists of ints/Fractions/"a/b" strings.
    Floats are rejected.  ``fit`` only records the label set; the decision
    rule has no trainable parameters.
    """

    def __init__(self, d: int = 1):
        self.d = d

    def fit(self, X=None, y=None):
        if int(self.d) < 1:
            raise ValueError("d must be a positive integer")
        self.classes_ = np.array([0, 1])
        return self

    def certificates(self, X) -> list:
        check_is_fitted(self, "classes_")
        return [membership(_as_correlation(p), int(self.d)) for p in X]

    def predict(self, X) -> np.ndarray:
        return np.array([int(c.inside) for c in self.certificates(X)])
