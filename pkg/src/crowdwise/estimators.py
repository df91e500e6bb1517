"""Estimator-style wrappers over the stochastic core.

Both estimators are fitted on a row-stochastic matrix. Their ``transform``
maps initial opinion vectors (rows of ``X``) to averages: ``X @ chi(k)`` is
``ave(x(k))`` and ``X @ pi`` is the consensus value.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_int, check_stochastic
from .stochastic import influence_profile, stationary_distribution


def _check_X(X, n):
    X = check_array(X, ensure_2d=False, dtype=float)
    if X.shape[-1] != n:
        raise ValueError(f"X has {X.shape[-1]} features, expected {n}")
    return X


class StationaryDistribution(TransformerMixin, BaseEstimator):
    """Left dominant eigenvector ``pi`` of a primitive matrix.

    Attributes
    ----------
    pi_ : ndarray of shape (n,)
    n_iter_ : int
    residual_ : float
        ``||pi^T P - pi^T||_1`` at the returned vector.
    method_ : str
        ``"power"`` or ``"direct"``.
    """

    def __init__(self, tol=1e-12, max_iter=10**6, method="auto"):
        self.tol = tol
        self.max_iter = max_iter
        self.method = method

    def fit(self, P, y=None):
        P = check_stochastic(P)
        self.pi_, self.n_iter_, self.residual_, self.method_ = stationary_distribution(
            P, self.tol, self.max_iter, method=self.method
        )
        self.n_features_in_ = P.n
        return self

    def transform(self, X):
        check_is_fitted(self, "pi_")
        return _check_X(X, self.n_features_in_) @ self.pi_


class InfluenceTransformer(TransformerMixin, BaseEstimator):
    """Influence profile ``chi(k) = (1/n) 1^T P^k``; ``transform`` gives ``ave(x(k))``.

    Examples
    --------
    >>> import numpy as np
    >>> from crowdwise.families import star
    >>> t = InfluenceTransformer(k=1).fit(star(3).P)
    >>> np.round(t.chi_ * 9, 12).tolist()
    [7.0, 1.0, 1.0]
    """

    def __init__(self, k=1):
        self.k = k

    def fit(self, P, y=None):
        P = check_stochastic(P)
        k = check_int(self.k, "k", min_value=0)
        self.chi_ = influence_profile(P, k).chi
        self.n_features_in_ = P.n
        return self

    def transform(self, X):
        check_is_fitted(self, "chi_")
        return _check_X(X, self.n_features_in_) @ self.chi_
