"""Shared test corpus: extra families and random matrix builders."""

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from crowdwise.families import FamilyGenerator, _finish
from crowdwise.stochastic import EQUAL_NEIGHBOR, WeightGraph, build_from_weights


def hub_cluster(m):
    """``m`` hubs forming a clique, each with ``m`` degree-one leaves.

    Has ``m + m**2`` nodes; no single node keeps order-one influence, but the
    hubs together (about ``sqrt(n)`` nodes) do.
    """
    if m < 3:
        raise ValueError("need m >= 3 so the hub clique has a triangle")
    n = m + m * m
    rows, cols = [], []
    for a in range(m):
        for b in range(a + 1, m):
            rows.append(a)
            cols.append(b)
        for j in range(m):
            rows.append(a)
            cols.append(m + a * m + j)
    W = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
    W = W + W.T
    return _finish(W, EQUAL_NEIGHBOR, {"first_hub": 0, "first_leaf": m}, {"hubs": m})


def hub_cluster_family():
    return FamilyGenerator("hub-cluster", builder=hub_cluster)


def random_stochastic(rng, n, density=None):
    """Dense random row-stochastic matrix with random sparsity and a few heavy columns."""
    density = rng.uniform(0.1, 1.0) if density is None else density
    A = rng.random((n, n)) * (rng.random((n, n)) < density)
    if rng.random() < 0.5:  # skew influence towards a few columns
        heavy = rng.choice(n, size=max(1, n // 8), replace=False)
        A[:, heavy] += rng.random((n, heavy.size)) * rng.uniform(1, 20)
    A[np.arange(n), rng.integers(0, n, n)] += 1e-3  # no empty rows
    return A / A.sum(axis=1, keepdims=True)


def random_connected_equal_neighbor(rng, n):
    """Symmetric binary weights on a connected graph: random tree plus extra edges."""
    parents = [int(rng.integers(0, i)) for i in range(1, n)]
    rows = list(range(1, n))
    cols = parents
    extra = int(rng.integers(0, 3 * n))
    rows += list(rng.integers(0, n, extra))
    cols += list(rng.integers(0, n, extra))
    if rng.random() < 0.3:  # a hub
        hub = int(rng.integers(0, n))
        others = rng.choice(n, size=n // 2, replace=False)
        rows += [hub] * others.size
        cols += list(others)
    B = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
    B = B + B.T
    B.data[:] = 1.0
    B.setdiag(0)
    B.eliminate_zeros()
    if rng.random() < 0.5:
        B = B + sp.identity(n, format="csr")
    W = WeightGraph(B)
    assert connected_components(B, directed=False)[0] == 1
    return W, build_from_weights(W)
