"""Sparse row-stochastic matrices and the norm/spectral primitives built on them.

Everything here works with vector-matrix products against a CSR matrix; no
matrix power is ever formed densely except in :func:`mixing_time`, which needs
the rows of ``P^t`` by definition.
"""

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, shortest_path
from scipy.sparse.linalg import spsolve

from ._validation import check_int, check_scalar, check_stochastic
from .exceptions import (
    ConvergenceError,
    ExceedsCapError,
    NotStochasticError,
    ZeroOutDegreeError,
)

ROW_SUM_ATOL = 1e-12
SIMPLEX_ATOL = 1e-10
MIXING_THRESHOLD = 1.0 / math.e

EQUAL_NEIGHBOR = "equal-neighbor"
DIRECTED_EQUAL_NEIGHBOR = "directed-equal-neighbor"
WEIGHTED_NEIGHBOR = "weighted-neighbor"
GENERAL = "general"
KINDS = (EQUAL_NEIGHBOR, DIRECTED_EQUAL_NEIGHBOR, WEIGHTED_NEIGHBOR, GENERAL)


def _as_square_csr(matrix, name):
    if sp.issparse(matrix):
        csr = sp.csr_matrix(matrix, dtype=np.float64, copy=True)
    else:
        arr = np.asarray(matrix, dtype=np.float64)
        if arr.ndim != 2:
            raise NotStochasticError(f"{name} must be two-dimensional, got shape {arr.shape}")
        csr = sp.csr_matrix(arr)
    if csr.shape[0] != csr.shape[1]:
        raise NotStochasticError(f"{name} must be square, got shape {csr.shape}")
    if csr.shape[0] < 1:
        raise NotStochasticError(f"{name} must have at least one row")
    csr.sum_duplicates()
    csr.eliminate_zeros()
    csr.sort_indices()
    if not np.all(np.isfinite(csr.data)):
        raise NotStochasticError(f"{name} has non-finite entries")
    if np.any(csr.data < 0):
        raise NotStochasticError(f"{name} has negative entries")
    return csr


def _freeze(csr):
    for arr in (csr.data, csr.indices, csr.indptr):
        arr.flags.writeable = False
    return csr


class RowStochasticMatrix:
    """Immutable sparse matrix with nonnegative entries and unit row sums.

    Parameters
    ----------
    matrix : array-like or scipy sparse matrix, shape (n, n)
        Entries of ``P``. Explicitly stored zeros are dropped.
    atol : float, default=1e-12
        Allowed deviation of each row sum from one.
    """

    def __init__(self, matrix, *, atol=ROW_SUM_ATOL):
        csr = _as_square_csr(matrix, "P")
        row_sums = np.asarray(csr.sum(axis=1)).ravel()
        bad = np.flatnonzero(np.abs(row_sums - 1.0) > atol)
        if bad.size:
            i = int(bad[0])
            raise NotStochasticError(f"row {i} sums to {row_sums[i]!r}, not 1")
        self._csr = _freeze(csr)

    @property
    def n(self):
        return self._csr.shape[0]

    @property
    def shape(self):
        return self._csr.shape

    @property
    def nnz(self):
        return self._csr.nnz

    @property
    def csr(self):
        """The underlying CSR matrix (read-only buffers)."""
        return self._csr

    @cached_property
    def _csr_t(self):
        return _freeze(self._csr.T.tocsr())

    def toarray(self):
        return self._csr.toarray()

    def rmatvec(self, x):
        """Row-vector product ``x^T P``."""
        return self._csr_t @ x

    def matvec(self, x):
        """Column-vector product ``P x``."""
        return self._csr @ x

    def __eq__(self, other):
        if not isinstance(other, RowStochasticMatrix):
            return NotImplemented
        a, b = self._csr, other._csr
        return (
            a.shape == b.shape
            and np.array_equal(a.indptr, b.indptr)
            and np.array_equal(a.indices, b.indices)
            and np.array_equal(a.data, b.data)
        )

    __hash__ = None

    def __repr__(self):
        return f"RowStochasticMatrix(n={self.n}, nnz={self.nnz})"


def infer_kind(weights):
    """Classify a weight matrix as one of :data:`KINDS`."""
    csr = weights if sp.isspmatrix_csr(weights) else sp.csr_matrix(weights)
    symmetric = (csr != csr.T).nnz == 0
    equal = np.unique(csr.data).size <= 1
    if equal:
        return EQUAL_NEIGHBOR if symmetric else DIRECTED_EQUAL_NEIGHBOR
    return WEIGHTED_NEIGHBOR if symmetric else GENERAL


class WeightGraph:
    """Nonnegative weight matrix ``W`` from which an influence matrix is derived.

    Parameters
    ----------
    weights : array-like or scipy sparse matrix, shape (n, n)
    kind : str, optional
        One of :data:`KINDS`. Inferred from ``weights`` when omitted; when
        given it must match the inferred kind.
    """

    def __init__(self, weights, kind=None):
        csr = _as_square_csr(weights, "W")
        degrees = np.asarray(csr.sum(axis=1)).ravel()
        zero = np.flatnonzero(degrees <= 0)
        if zero.size:
            raise ZeroOutDegreeError(zero[0])
        inferred = infer_kind(csr)
        if kind is None:
            kind = inferred
        elif kind not in KINDS:
            raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
        elif kind != inferred:
            raise ValueError(f"weights are {inferred!r}, not {kind!r}")
        self._csr = _freeze(csr)
        self.kind = kind
        degrees.flags.writeable = False
        self._degrees = degrees

    @property
    def n(self):
        return self._csr.shape[0]

    @property
    def weights(self):
        return self._csr

    @property
    def degrees(self):
        """Weighted out-degrees ``d = W 1``."""
        return self._degrees

    @property
    def is_symmetric(self):
        return self.kind in (EQUAL_NEIGHBOR, WEIGHTED_NEIGHBOR)

    def toarray(self):
        return self._csr.toarray()

    def __repr__(self):
        return f"WeightGraph(n={self.n}, nnz={self._csr.nnz}, kind={self.kind!r})"


@dataclass(frozen=True)
class InfluenceProfile:
    """Column averages ``chi(k) = (1/n) 1^T P^k`` at time step ``k``."""

    k: int
    chi: np.ndarray

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        if abs(float(self.chi.sum()) - 1.0) > SIMPLEX_ATOL:
            raise ValueError("influence profile does not lie on the simplex")

    @property
    def max_entry(self):
        return float(self.chi.max())


def build_from_weights(W):
    """Normalize a weight matrix row by row: ``P = diag(W 1)^{-1} W``.

    ``W`` may be a :class:`WeightGraph` or anything accepted by its
    constructor. The sparsity pattern of the result equals that of ``W``.
    """
    csr = W.weights if isinstance(W, WeightGraph) else _as_square_csr(W, "W")
    degrees = np.asarray(csr.sum(axis=1)).ravel()
    zero = np.flatnonzero(degrees <= 0)
    if zero.size:
        raise ZeroOutDegreeError(zero[0])
    counts = np.diff(csr.indptr)
    data = csr.data / np.repeat(degrees, counts)
    P = sp.csr_matrix((data, csr.indices.copy(), csr.indptr.copy()), shape=csr.shape)
    return RowStochasticMatrix(P)


def column_sums(P):
    """Column sums ``1^T P``; they are nonnegative and add up to ``n``."""
    P = check_stochastic(P)
    return np.asarray(P.csr.sum(axis=0)).ravel()


def max_column_average(P):
    """Maximum column average ``||(1/n) P||_1``."""
    P = check_stochastic(P)
    return float(column_sums(P).max() / P.n)


def iter_influence(P, k_max):
    """Yield ``(k, chi(k))`` for ``k = 0, ..., k_max`` by repeated products."""
    P = check_stochastic(P)
    k_max = check_int(k_max, "k_max", min_value=0)
    chi = np.full(P.n, 1.0 / P.n)
    yield 0, chi
    for k in range(1, k_max + 1):
        chi = P.rmatvec(chi)
        yield k, chi


def influence_profile(P, k):
    """Influence profile ``chi(k) = (1/n) 1^T P^k``.

    Computed with ``k`` successive vector-matrix products from the uniform
    vector. Its largest entry equals ``||(1/n) P^k||_1``.
    """
    k = check_int(k, "k", min_value=0)
    chi = None
    for _, chi in iter_influence(P, k):
        pass
    return InfluenceProfile(k=k, chi=chi)


def _power_iteration(P, tol, max_iter):
    x = np.full(P.n, 1.0 / P.n)
    residual = math.inf
    for it in range(1, max_iter + 1):
        y = P.rmatvec(x)
        residual = float(np.abs(y - x).sum())
        x = y
        if residual < tol:
            return x / x.sum(), it, residual
    raise ConvergenceError(residual, max_iter)


def _stationary_direct(P):
    """Solve ``pi^T (I - P) = 0`` with the normalization replacing one equation."""
    n = P.n
    A = (sp.identity(n, format="csr") - P.csr).T.tolil()
    A[n - 1, :] = np.ones(n)
    b = np.zeros(n)
    b[n - 1] = 1.0
    pi = spsolve(A.tocsc(), b)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def stationary_distribution(P, tol=1e-12, max_iter=10**6, *, method="auto", power_budget=10_000):
    """Stationary distribution with diagnostics.

    Returns ``(pi, n_iter, residual, method_used)``. ``method`` is
    ``"power"``, ``"direct"`` or ``"auto"``; the latter runs power iteration
    for at most ``power_budget`` steps and, if the matrix is primitive but the
    iterates have not settled (nearly periodic chains), switches to a sparse
    direct solve.
    """
    P = check_stochastic(P)
    tol = check_scalar(tol, "tol", gt=0)
    max_iter = check_int(max_iter, "max_iter", min_value=1)
    if method not in ("auto", "power", "direct"):
        raise ValueError(f"unknown method {method!r}")
    if method == "power":
        return (*_power_iteration(P, tol, max_iter), "power")
    if method == "auto":
        try:
            return (*_power_iteration(P, tol, min(max_iter, power_budget)), "power")
        except ConvergenceError as err:
            if max_iter <= power_budget or not is_primitive(P):
                raise ConvergenceError(err.residual, max_iter) from None
    pi = _stationary_direct(P)
    residual = float(np.abs(P.rmatvec(pi) - pi).sum())
    if not residual < 10 * tol:
        raise ConvergenceError(residual, 0)
    return pi, 0, residual, "direct"


def dominant_left_eigenvector(P, tol=1e-12, max_iter=10**6, *, method="auto"):
    """Stationary distribution ``pi`` of a primitive stochastic matrix.

    Power iteration from the uniform vector, stopped once successive iterates
    differ by less than ``tol`` in one-norm. Nearly periodic primitive chains
    (where that would take millions of steps) fall back to a sparse direct
    solve unless ``method="power"``; see :func:`stationary_distribution`.

    Parameters
    ----------
    P : RowStochasticMatrix or array-like
        Should be primitive (see :func:`is_primitive`).
    tol : float, default=1e-12
    max_iter : int, default=10**6

    Returns
    -------
    pi : ndarray of shape (n,)
        Nonnegative, sums to one, and ``||pi^T P - pi^T||_1 < 10 tol``.

    Raises
    ------
    ConvergenceError
        If the iterates have not settled after ``max_iter`` steps and no
        fallback applies; carries the last residual.
    """
    return stationary_distribution(P, tol, max_iter, method=method)[0]


class MixingTime(int):
    """Integer mixing time that also records which criterion produced it.

    ``criterion`` is ``"pairwise"`` for the exact row-pair definition or
    ``"stationary-surrogate"`` for the conservative bound
    ``2 max_i ||row_i(P^t) - pi||_1 <= 1/e`` used on large matrices.
    """

    criterion: str

    def __new__(cls, value, criterion):
        obj = super().__new__(cls, value)
        obj.criterion = criterion
        return obj

    def __repr__(self):
        return f"MixingTime({int(self)}, criterion={self.criterion!r})"

    def __reduce__(self):
        return (MixingTime, (int(self), self.criterion))


PAIRWISE = "pairwise"
SURROGATE = "stationary-surrogate"


def _pairs_exceed(rows, threshold):
    """True if some pair of rows is more than ``threshold`` apart in one-norm.

    Exact, with pruning: distances to the mean row ``c`` give the lower bound
    ``max_i ||r_i - c||`` and the pairwise upper bound ``d_i + d_j``.
    """
    center = rows.mean(axis=0)
    d = np.abs(rows - center).sum(axis=1)
    if d.max() > threshold:
        return True
    order = np.argsort(-d, kind="stable")
    ds = d[order]
    if ds.size < 2 or ds[0] + ds[1] <= threshold - 1e-12:
        return False
    neg = -ds
    for a in range(ds.size - 1):
        lim = int(np.searchsorted(neg, -(threshold - 1e-12 - ds[a]), side="left"))
        if lim <= a + 1:
            break
        partners = rows[order[a + 1 : lim]]
        dist = np.abs(partners - rows[order[a]]).sum(axis=1)
        if np.any(dist > threshold):
            return True
    return False


def _mixing_time_pairwise(P, cap):
    rows = np.eye(P.n)
    for t in range(1, cap + 1):
        rows = np.asarray(rows @ P.csr)
        if not _pairs_exceed(rows, MIXING_THRESHOLD):
            return t
    raise ExceedsCapError(cap)


def _mixing_time_surrogate(P, pi, cap, block_size):
    # each row's distance to pi is non-increasing in t, so a block that passes
    # at the running maximum cannot raise it
    n = P.n
    PT = P._csr_t
    tau = 1
    for start in range(0, n, block_size):
        stop = min(n, start + block_size)
        block = np.zeros((n, stop - start))
        block[np.arange(start, stop), np.arange(stop - start)] = 1.0
        t = 0
        while t < tau:
            block = PT @ block
            t += 1
        while True:
            dist = 2.0 * np.abs(block - pi[:, None]).sum(axis=0)
            if np.all(dist <= MIXING_THRESHOLD):
                break
            if t >= cap:
                raise ExceedsCapError(cap)
            block = PT @ block
            t += 1
        tau = max(tau, t)
    return tau


def mixing_time(P, cap=1000, *, exact_max_n=2000, block_size=512):
    """Smallest ``t <= cap`` with every pair of rows of ``P^t`` within ``1/e``.

    For ``n <= exact_max_n`` the pairwise definition is evaluated exactly.
    Larger matrices use ``2 max_i ||row_i(P^t) - pi||_1 <= 1/e``, which upper
    bounds the pairwise maximum by the triangle inequality and therefore never
    returns a smaller time than the exact criterion would.

    Returns
    -------
    MixingTime
        An ``int`` with a ``criterion`` attribute.

    Raises
    ------
    ExceedsCapError
        If no ``t <= cap`` qualifies (e.g. periodic chains).
    """
    P = check_stochastic(P)
    cap = check_int(cap, "cap", min_value=1)
    if P.n == 1:
        return MixingTime(1, PAIRWISE)
    if P.n <= exact_max_n:
        return MixingTime(_mixing_time_pairwise(P, cap), PAIRWISE)
    try:
        pi = dominant_left_eigenvector(P)
    except ConvergenceError as err:
        raise ExceedsCapError(cap) from err
    return MixingTime(_mixing_time_surrogate(P, pi, cap, block_size), SURROGATE)


def period(P):
    """Period of the graph of ``P``; 0 when it is not strongly connected."""
    P = check_stochastic(P)
    n_scc, _ = connected_components(P.csr, directed=True, connection="strong")
    if n_scc != 1:
        return 0
    level = shortest_path(P.csr, unweighted=True, indices=0).astype(np.int64)
    coo = P.csr.tocoo()
    gaps = np.abs(level[coo.row] + 1 - level[coo.col])
    return int(np.gcd.reduce(gaps))


def is_primitive(P):
    """True iff the graph of nonzero entries is strongly connected and aperiodic."""
    return period(P) == 1


def influence_curve(P):
    """Array ``Phi_P(s)`` for ``s = 0, ..., n``: sums of the ``s`` largest column sums."""
    cs = np.sort(column_sums(P))[::-1]
    return np.concatenate(([0.0], np.cumsum(cs)))


def max_influence(P, s):
    """Maximum one-time influence of a set of ``s`` nodes.

    The maximum over subsets decomposes column by column, so it is the sum of
    the ``s`` largest column sums.
    """
    P = check_stochastic(P)
    s = check_int(s, "s", min_value=0, max_value=P.n)
    return float(influence_curve(P)[s])
