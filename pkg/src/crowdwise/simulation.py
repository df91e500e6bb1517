"""Monte Carlo simulation of DeGroot averaging with noisy initial opinions.

Each run ``r`` draws ``xi(0) ~ N(0, sigma^2 I)`` from its own PCG64 stream,
seeded by ``SeedSequence([seed, r])``, so a run can be reproduced on its own.
All runs are then propagated together as the columns of one dense block.
"""

from dataclasses import asdict, dataclass
import math

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_int, check_scalar, check_seed, check_stochastic
from .exceptions import NotPrimitiveError
from .stochastic import is_primitive, iter_influence, max_column_average, stationary_distribution

PRNG_ALGORITHM = "numpy.random.PCG64"
NOISE_TRANSFORM = "numpy.random.Generator.standard_normal"
COMPENSATED_MIN_N = 100_000


@dataclass(frozen=True, kw_only=True)
class SimulationConfig:
    """Parameters of a simulation.

    Parameters
    ----------
    mu : float
        True value shared by all individuals.
    sigma : float
        Noise standard deviation, strictly positive.
    horizon : int
        Number of update steps ``T``; series have ``T + 1`` entries.
    runs : int
        Number of independent noise draws.
    seed : int
        Master seed; required.
    record_individuals : bool
        Keep every ``x(k)``, not only the averages.
    pin_first : float, optional
        If set, node 0 starts at this value in every run instead of a noisy
        draw (useful for plots showing how one opinion spreads).
    """

    mu: float = 0.0
    sigma: float = 1.0
    horizon: int = 100
    runs: int = 1
    seed: int
    record_individuals: bool = False
    pin_first: float = None

    def __post_init__(self):
        check_scalar(self.mu, "mu")
        check_scalar(self.sigma, "sigma", gt=0)
        check_int(self.horizon, "horizon", min_value=1)
        check_int(self.runs, "runs", min_value=1)
        check_seed(self.seed)
        if self.pin_first is not None:
            check_scalar(self.pin_first, "pin_first")

    def to_dict(self):
        return asdict(self)


def run_generator(seed, run):
    """The noise stream of one run."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, run])))


def initial_opinions(n, config):
    """``x(0)`` for every run, shape ``(n, runs)``."""
    X = np.empty((n, config.runs))
    for r in range(config.runs):
        X[:, r] = run_generator(config.seed, r).standard_normal(n)
    X *= config.sigma
    X += config.mu
    if config.pin_first is not None:
        X[0, :] = config.pin_first
    return X


def _average(X):
    if X.shape[0] >= COMPENSATED_MIN_N:
        return np.array([math.fsum(col) for col in X.T]) / X.shape[0]
    return X.mean(axis=0)


@dataclass
class SimulationTrace:
    """Outcome of :func:`simulate`.

    Attributes
    ----------
    ave : ndarray, shape (runs, T + 1)
        ``ave(x(k))`` per run.
    individuals : ndarray, shape (runs, T + 1, n), or None
        Full opinion vectors when recording was requested.
    """

    config: SimulationConfig
    n: int
    ave: np.ndarray
    individuals: np.ndarray = None

    @property
    def horizon(self):
        return self.ave.shape[1] - 1

    @property
    def runs(self):
        return self.ave.shape[0]

    def mean_ave(self):
        return self.ave.mean(axis=0)

    def var_ave(self):
        """Sample variance across runs (``ddof=1``); NaN with a single run."""
        if self.runs < 2:
            return np.full(self.horizon + 1, np.nan)
        return self.ave.var(axis=0, ddof=1)

    def summary(self, P=None):
        """Per-``k`` table with keys ``k, mean_ave, var_ave`` and, given ``P``, ``analytic_var``."""
        out = {"k": np.arange(self.horizon + 1), "mean_ave": self.mean_ave(), "var_ave": self.var_ave()}
        if P is not None:
            out["analytic_var"] = analytic_variance_series(
                P, self.config.sigma, self.horizon, pinned=self.config.pin_first is not None
            )
        return out


def simulate(P, config):
    """Iterate ``x(k+1) = P x(k)`` for ``config.runs`` noise draws.

    Examples
    --------
    >>> import numpy as np
    >>> tr = simulate(np.eye(3), SimulationConfig(horizon=2, runs=2, seed=0))
    >>> bool(np.all(tr.ave == tr.ave[:, :1]))
    True
    """
    P = check_stochastic(P)
    T = config.horizon
    X = initial_opinions(P.n, config)
    ave = np.empty((config.runs, T + 1))
    ind = np.empty((config.runs, T + 1, P.n)) if config.record_individuals else None
    for k in range(T + 1):
        if k:
            X = P.csr @ X
        ave[:, k] = _average(X)
        if ind is not None:
            ind[:, k, :] = X.T
    return SimulationTrace(config, P.n, ave, ind)


def analytic_variance_series(P, sigma, k_max, *, pinned=False):
    """``sigma^2 chi(k)^T chi(k)`` for ``k = 0..k_max``.

    With ``pinned=True`` node 0 carries no noise and its term is dropped.
    """
    sigma = check_scalar(sigma, "sigma", gt=0)
    out = np.empty(k_max + 1)
    for k, chi in iter_influence(P, k_max):
        c = chi[1:] if pinned else chi
        out[k] = sigma**2 * float(c @ c)
    return out


def analytic_variance(P, sigma, k):
    """Variance of ``ave(x(k))`` under i.i.d. noise: ``sigma^2 chi(k)^T chi(k)``.

    Examples
    --------
    >>> import numpy as np
    >>> float(round(analytic_variance(np.eye(4), 2.0, 3), 12))
    1.0
    """
    k = check_int(k, "k", min_value=0)
    return float(analytic_variance_series(P, sigma, k)[k])


def asymptotic_average(P, config):
    """Limit of each run's average, ``pi^T x(0)`` (``mu + pi^T xi(0)`` unpinned)."""
    P = check_stochastic(P)
    if not is_primitive(P):
        raise NotPrimitiveError("asymptotic average requires a primitive matrix")
    pi = stationary_distribution(P)[0]
    return pi @ initial_opinions(P.n, config)


def deviation_probability_estimate(P, config, delta, trace=None):
    """Fraction of runs with ``max_{k<=T} |ave(x(k)) - mu| > delta``.

    The supremum over all ``k`` is truncated at the horizon, so this is a
    lower bound on the untruncated probability. A precomputed ``trace`` for
    the same ``(P, config)`` may be supplied to skip the simulation.
    """
    delta = check_scalar(delta, "delta", gt=0)
    if trace is None:
        trace = simulate(P, config)
    dev = np.abs(trace.ave - config.mu).max(axis=1)
    return float(np.mean(dev > delta))


def deviation_bound(P, sigma, delta, tau):
    """``(18 e sigma^2 / delta^2) ||(1/n) P||_1^{1/2} tau`` for equal-neighbor ``P``; may exceed 1."""
    return 18 * math.e * sigma**2 / delta**2 * math.sqrt(max_column_average(P)) * tau


@dataclass(frozen=True)
class MomentCheck:
    k: int
    empirical: float
    analytic: float
    tolerance: float

    @property
    def ok(self):
        return abs(self.empirical - self.analytic) <= self.tolerance


def variance_checks(trace, P, ks=None, n_se=4.0):
    """Compare the empirical variance of ``ave(x(k))`` with the analytic one.

    The tolerance is ``n_se`` standard errors of the sample variance of a
    Gaussian, ``analytic * sqrt(2 / (runs - 1))``.
    """
    if trace.runs < 2:
        raise ValueError("variance checks need at least two runs")
    ks = range(trace.horizon + 1) if ks is None else ks
    analytic = trace.summary(P)["analytic_var"]
    emp = trace.var_ave()
    se = math.sqrt(2.0 / (trace.runs - 1))
    return [MomentCheck(k, float(emp[k]), float(analytic[k]), n_se * se * float(analytic[k])) for k in ks]


def mean_checks(trace, P, ks=None, n_se=4.0):
    """Check the ensemble mean of ``ave(x(k))`` against ``mu`` within ``n_se * sqrt(var / runs)``."""
    if trace.config.pin_first is not None:
        raise ValueError("the mean check assumes unpinned initial opinions")
    ks = range(trace.horizon + 1) if ks is None else ks
    analytic = trace.summary(P)["analytic_var"]
    mean = trace.mean_ave()
    mu = trace.config.mu
    return [MomentCheck(k, float(mean[k]), mu, n_se * math.sqrt(analytic[k] / trace.runs)) for k in ks]


# plot-oriented presets: a single pinned realization per family
FIGURE_PRESETS = {
    "star": {"family": "star", "size": 100, "params": {}, "horizon": 600},
    "star-complete": {"family": "star-complete", "size": 200, "params": {}, "horizon": 1400},
    "biased-path": {"family": "biased-path", "size": 100, "params": {"nu": 2.0}, "horizon": 600},
    "reversed-tree": {"family": "reversed-tree", "size": 15, "params": {}, "horizon": 31},
    "reversed-tree-long": {"family": "reversed-tree", "size": 15, "params": {}, "horizon": 200_000,
                           "expensive": True},
    "double-star": {"family": "double-star", "size": 10, "params": {}, "horizon": 100},
}


class DeGrootSimulator(BaseEstimator):
    """Estimator wrapper around :func:`simulate`.

    ``fit(P)`` runs the simulation and stores ``trace_``; ``predict()`` returns
    the per-run asymptotic averages; ``transform()`` returns ``trace_.ave``.
    """

    def __init__(self, mu=0.0, sigma=1.0, horizon=100, runs=1, seed=0,
                 record_individuals=False, pin_first=None):
        self.mu = mu
        self.sigma = sigma
        self.horizon = horizon
        self.runs = runs
        self.seed = seed
        self.record_individuals = record_individuals
        self.pin_first = pin_first

    def _config(self):
        return SimulationConfig(**self.get_params())

    def fit(self, P, y=None):
        self.P_ = check_stochastic(P)
        self.config_ = self._config()
        self.trace_ = simulate(self.P_, self.config_)
        return self

    def transform(self, P=None):
        if P is not None:
            return simulate(P, self._config()).ave
        return self.trace_.ave

    def predict(self, P=None):
        return asymptotic_average(self.P_ if P is None else P, self._config())
