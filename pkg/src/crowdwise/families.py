"""Generators for growing graph families and their influence matrices.

Node numbering is fixed per family (0-based):

* ``star``: center 0, leaves 1..n-1.
* ``star_complete``: star center 0, leaves 1..n-1, contracted node n
  (shared by the star and the complete graph), remaining clique nodes
  n+1..2n-1.
* ``biased_path``: nodes 0..n-1 along the path; mass drifts toward n-1.
* ``reversed_binary_tree``: breadth-first by layer, root 0, parent of node
  i is (i-1)//2, leaves are the last 2**(L-1) nodes.
* ``weighted_double_star``: root 0, intermediates 1..m, leaves of
  intermediate h are m+1+(h-1)m .. m+hm.

Random families draw from ``numpy.random.Generator(PCG64(seed))``.
"""

from dataclasses import dataclass, field
import math

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from ._validation import check_int, check_scalar, check_seed
from .stochastic import (
    DIRECTED_EQUAL_NEIGHBOR,
    EQUAL_NEIGHBOR,
    GENERAL,
    WEIGHTED_NEIGHBOR,
    WeightGraph,
    build_from_weights,
)

PRNG_ALGORITHM = "numpy.random.PCG64"


@dataclass(frozen=True)
class FamilyMetadata:
    actual_node_count: int
    special_nodes: dict = field(default_factory=dict)
    degree_min: float = math.nan
    degree_max: float = math.nan
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.actual_node_count < 1:
            raise ValueError("actual_node_count must be positive")
        for name, idx in self.special_nodes.items():
            if not 0 <= idx < self.actual_node_count:
                raise ValueError(f"special node {name}={idx} out of range")

    def to_dict(self):
        return {
            "actual_node_count": self.actual_node_count,
            "special_nodes": dict(self.special_nodes),
            "degree_min": self.degree_min,
            "degree_max": self.degree_max,
            **self.extra,
        }


@dataclass(frozen=True)
class Family:
    """One member of a family: weights, influence matrix and metadata."""

    W: WeightGraph
    P: object
    meta: FamilyMetadata

    def __iter__(self):
        return iter((self.W, self.P, self.meta))


def _symmetric_binary(n, rows, cols, self_loops=()):
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    loops = np.asarray(self_loops, dtype=np.int64)
    r = np.concatenate([rows, cols, loops])
    c = np.concatenate([cols, rows, loops])
    W = sp.csr_matrix((np.ones(r.size), (r, c)), shape=(n, n))
    W.data[:] = 1.0  # duplicates collapse to a single edge
    return W


def _finish(W, kind, special=None, extra=None):
    graph = WeightGraph(W, kind=kind)
    d = graph.degrees
    meta = FamilyMetadata(
        actual_node_count=graph.n,
        special_nodes=dict(special or {}),
        degree_min=float(d.min()),
        degree_max=float(d.max()),
        extra=dict(extra or {}),
    )
    return Family(graph, build_from_weights(graph), meta)


def star(n):
    """Star on ``n`` nodes with a self-loop at the center.

    The center averages uniformly over all ``n`` nodes (itself included);
    every leaf copies the center.
    """
    n = check_int(n, "n", min_value=2)
    leaves = np.arange(1, n)
    W = _symmetric_binary(n, np.zeros(n - 1, dtype=np.int64), leaves, self_loops=[0])
    return _finish(W, EQUAL_NEIGHBOR, {"center": 0})


def star_complete(n):
    """Star ``S_n`` glued to a complete graph ``K_n`` along one leaf (2n nodes)."""
    n = check_int(n, "n", min_value=3)
    hub = n
    rows = [np.zeros(n, dtype=np.int64)]
    cols = [np.arange(1, n + 1)]
    clique = np.arange(n, 2 * n)
    iu, ju = np.triu_indices(n, k=1)
    rows.append(clique[iu])
    cols.append(clique[ju])
    W = _symmetric_binary(2 * n, np.concatenate(rows), np.concatenate(cols))
    return _finish(
        W, EQUAL_NEIGHBOR, {"center": 0, "contracted": hub, "clique_representative": hub + 1}
    )


def biased_path_weights(nu):
    nu = check_scalar(nu, "nu", gt=1)
    return 1.0 / (1.0 + nu), nu / (1.0 + nu)


def biased_path(n, nu):
    """Path with self-loops at both ends, stepping right w.p. q and left w.p. p.

    ``p = 1/(1+nu)`` and ``q = nu/(1+nu)`` so that ``q/p = nu``.
    """
    n = check_int(n, "n", min_value=2)
    p, q = biased_path_weights(nu)
    i = np.arange(n)
    left = np.maximum(i - 1, 0)
    right = np.minimum(i + 1, n - 1)
    rows = np.concatenate([i, i])
    cols = np.concatenate([left, right])
    vals = np.concatenate([np.full(n, p), np.full(n, q)])
    W = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return _finish(W, GENERAL, {"first": 0, "last": n - 1}, {"p": p, "q": q})


def reversed_binary_tree(L):
    """Binary tree with ``L`` layers, edges pointing to the parent.

    The root has a self-loop plus edges to all ``2**(L-1)`` leaves.
    """
    L = check_int(L, "L", min_value=2)
    n = 2**L - 1
    child = np.arange(1, n)
    leaves = np.arange(2 ** (L - 1) - 1, n)
    rows = np.concatenate([child, [0], np.zeros(leaves.size, dtype=np.int64)])
    cols = np.concatenate([(child - 1) // 2, [0], leaves])
    W = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
    # with two layers every edge is reciprocated
    kind = DIRECTED_EQUAL_NEIGHBOR if L > 2 else EQUAL_NEIGHBOR
    return _finish(
        W,
        kind,
        {"root": 0, "first_leaf": int(leaves[0])},
        {"layers": L},
    )


def weighted_double_star(m):
    """Root, ``m`` intermediates and ``m**2`` leaves (``m`` per intermediate).

    Root-intermediate weight 1, intermediate-leaf weight ``1/m``, and a unit
    self-loop at the root.
    """
    m = check_int(m, "m", min_value=2)
    n = m * m + m + 1
    inter = np.arange(1, m + 1)
    leaves = np.arange(m + 1, n)
    parent = 1 + (leaves - m - 1) // m
    rows = np.concatenate([np.zeros(m, dtype=np.int64), inter, parent, leaves, [0]])
    cols = np.concatenate([inter, np.zeros(m, dtype=np.int64), leaves, parent, [0]])
    vals = np.concatenate([np.ones(2 * m), np.full(2 * m * m, 1.0 / m), [1.0]])
    W = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return _finish(
        W, WEIGHTED_NEIGHBOR, {"root": 0, "intermediate": 1, "leaf": m + 1}, {"aperture": m}
    )


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def _random_equal_neighbor(n, rows, cols, special=None, extra=None):
    """Assemble a symmetric binary graph, adding self-loops at isolated nodes."""
    deg = np.bincount(np.concatenate([rows, cols]).astype(np.int64), minlength=n)
    isolated = np.flatnonzero(deg == 0)
    W = _symmetric_binary(n, rows, cols, self_loops=isolated)
    n_cc, _ = connected_components(W, directed=False)
    info = {
        "prng": PRNG_ALGORITHM,
        "isolated_self_loops": int(isolated.size),
        "connected": bool(n_cc == 1),
        **(extra or {}),
    }
    return _finish(W, EQUAL_NEIGHBOR, special, info)


def erdos_renyi(n, c, seed):
    """G(n, p) with ``p = min(1, c ln(n) / n)``, equal-neighbor weights.

    Isolated vertices get a self-loop so that every row can be normalized;
    their number is recorded as ``isolated_self_loops``.
    """
    n = check_int(n, "n", min_value=2)
    c = check_scalar(c, "c", gt=1)
    seed = check_seed(seed)
    p = min(1.0, c * math.log(n) / n)
    rng = _rng(seed)
    rows, cols = [], []
    for i in range(n - 1):
        hits = np.flatnonzero(rng.random(n - 1 - i) < p)
        if hits.size:
            rows.append(np.full(hits.size, i))
            cols.append(hits + i + 1)
    rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    return _random_equal_neighbor(n, rows, cols, extra={"p": p, "seed": seed})


def _clique_edges(k):
    iu, ju = np.triu_indices(k, k=1)
    return list(iu), list(ju)


def barabasi_albert(n, m, m0, seed):
    """Linear preferential attachment grown from a clique on ``m0`` nodes.

    Each arriving node links to ``m`` distinct earlier nodes, sampled without
    replacement with probability proportional to current degree.
    """
    m = check_int(m, "m", min_value=1)
    m0 = check_int(m0, "m0", min_value=m)
    n = check_int(n, "n", min_value=m0)
    seed = check_seed(seed)
    rng = _rng(seed)
    rows, cols = _clique_edges(m0)
    # every edge endpoint once, so a uniform draw from it is degree-proportional
    ends = np.empty(2 * (len(rows) + m * (n - m0)), dtype=np.int64)
    n_ends = 0
    for u, v in zip(rows, cols):
        ends[n_ends : n_ends + 2] = (u, v)
        n_ends += 2
    for v in range(m0, n):
        chosen = []
        if n_ends == 0:
            chosen = list(rng.choice(v, size=m, replace=False))
        else:
            while len(chosen) < m:
                u = int(ends[rng.integers(n_ends)])
                if u not in chosen:
                    chosen.append(u)
        for u in chosen:
            rows.append(u)
            cols.append(v)
            ends[n_ends : n_ends + 2] = (u, v)
            n_ends += 2
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    fam = _random_equal_neighbor(n, rows, cols, extra={"m": m, "m0": m0, "seed": seed})
    d = fam.W.degrees
    grown = d[m0:] if n > m0 else d
    extra = {**fam.meta.extra, "degree_min_grown": float(grown.min())}
    special = {"top_degree": int(np.argmax(d))}
    return Family(fam.W, fam.P, _replace_meta(fam.meta, special, extra))


def _replace_meta(meta, special, extra):
    return FamilyMetadata(
        actual_node_count=meta.actual_node_count,
        special_nodes={**meta.special_nodes, **special},
        degree_min=meta.degree_min,
        degree_max=meta.degree_max,
        extra=extra,
    )


def superlinear_pa(n, m, exponent, seed):
    """Preferential attachment with weight ``degree**exponent``, ``exponent > 1``.

    Grown from a clique on ``m + 1`` nodes; targets are drawn without
    replacement.
    """
    exponent = check_scalar(exponent, "exponent", gt=1)
    m = check_int(m, "m", min_value=1)
    n = check_int(n, "n", min_value=m + 2)
    seed = check_seed(seed)
    rng = _rng(seed)
    m0 = m + 1
    rows, cols = _clique_edges(m0)
    deg = np.zeros(n)
    deg[:m0] = m0 - 1
    weight = np.zeros(n)
    weight[:m0] = deg[:m0] ** exponent
    for v in range(m0, n):
        w = weight[:v]
        targets = rng.choice(v, size=m, replace=False, p=w / w.sum())
        for u in targets:
            rows.append(int(u))
            cols.append(v)
        deg[targets] += 1
        deg[v] = m
        weight[targets] = deg[targets] ** exponent
        weight[v] = deg[v] ** exponent
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    fam = _random_equal_neighbor(n, rows, cols, extra={"m": m, "exponent": exponent, "seed": seed})
    d = fam.W.degrees
    top = int(np.argmax(d))
    extra = {**fam.meta.extra, "top_degree": float(d[top])}
    return Family(fam.W, fam.P, _replace_meta(fam.meta, {"top_degree": top}, extra))


def biased_path_pi(n, nu):
    """Closed-form stationary vector of :func:`biased_path`.

    Evaluated as ``pi_i = (1 - 1/nu) nu**(i-n) / (1 - nu**-n)`` (1-based
    ``i``), which neither overflows nor loses precision for large ``n``.
    """
    n = check_int(n, "n", min_value=2)
    nu = check_scalar(nu, "nu", gt=1)
    i = np.arange(1, n + 1)
    log_terms = (i - n) * math.log(nu)
    return -math.expm1(-math.log(nu)) * np.exp(log_terms) / -math.expm1(-n * math.log(nu))


def star_pi(n):
    n = check_int(n, "n", min_value=2)
    pi = np.full(n, 1.0 / (2 * n - 1))
    pi[0] = n / (2 * n - 1)
    return pi


def degree_pi(W):
    """``pi_i = d_i / sum(d)``, valid for irreducible symmetric ``W``."""
    d = np.asarray(W.degrees, dtype=float)
    return d / d.sum()


@dataclass(frozen=True)
class FamilySpec:
    name: str
    builder: object
    size_name: str
    params: tuple = ()
    random: bool = False
    defaults: dict = field(default_factory=dict)


FAMILIES = {
    "star": FamilySpec("star", star, "n"),
    "star-complete": FamilySpec("star-complete", star_complete, "n"),
    "biased-path": FamilySpec("biased-path", biased_path, "n", ("nu",), defaults={"nu": 2.0}),
    "reversed-tree": FamilySpec("reversed-tree", reversed_binary_tree, "L"),
    "double-star": FamilySpec("double-star", weighted_double_star, "m"),
    "erdos-renyi": FamilySpec(
        "erdos-renyi", erdos_renyi, "n", ("c",), random=True, defaults={"c": 2.0}
    ),
    "barabasi-albert": FamilySpec(
        "barabasi-albert", barabasi_albert, "n", ("m", "m0"), random=True,
        defaults={"m": 3, "m0": 4},
    ),
    "superlinear-pa": FamilySpec(
        "superlinear-pa", superlinear_pa, "n", ("m", "exponent"), random=True,
        defaults={"m": 1, "exponent": 2.0},
    ),
}


class FamilyGenerator:
    """A named, parameterized map from a size parameter to a :class:`Family`.

    Parameters
    ----------
    name : str
        Registered family name (see :data:`FAMILIES`), or any label when
        ``builder`` is given.
    params : dict, optional
        Family parameters other than the size and seed.
    seed : int, optional
        Required for random families.
    builder : callable, optional
        Custom ``builder(size, **params) -> Family`` for unregistered families.
    """

    def __init__(self, name, params=None, seed=None, *, builder=None, random=False):
        params = dict(params or {})
        if builder is None:
            if name not in FAMILIES:
                raise ValueError(f"unknown family {name!r}; expected one of {sorted(FAMILIES)}")
            entry = FAMILIES[name]
            unknown = set(params) - set(entry.params)
            if unknown:
                raise ValueError(f"unknown parameters for {name}: {sorted(unknown)}")
            params = {**entry.defaults, **params}
            random = entry.random
            builder = entry.builder
        if random:
            seed = check_seed(seed)
        self.name = name
        self.params = params
        self.seed = seed
        self.random = random
        self._builder = builder

    @property
    def size_name(self):
        entry = FAMILIES.get(self.name)
        return entry.size_name if entry else "n"

    def generate(self, size, seed=None):
        """Build the family member of the given size.

        ``seed`` overrides the generator's own seed (random families only).
        """
        if self.random:
            seed = self.seed if seed is None else check_seed(seed)
            return self._builder(size, **self.params, seed=seed)
        return self._builder(size, **self.params)

    def describe(self):
        return {"family": self.name, "params": dict(self.params), "seed": self.seed}

    def __repr__(self):
        return f"FamilyGenerator({self.name!r}, params={self.params!r}, seed={self.seed!r})"


def closed_form_pi(family, size, seed=None, **params):
    """Closed-form stationary vector, or ``None`` if none is available.

    Available for the star, the biased path, and every family with symmetric
    weights (degree-proportional). The reversed binary tree has none.
    """
    if family == "star":
        return star_pi(size)
    if family == "biased-path":
        return biased_path_pi(size, params.get("nu", FAMILIES["biased-path"].defaults["nu"]))
    entry = FAMILIES.get(family)
    if entry is None or family == "reversed-tree":
        return None
    fam = FamilyGenerator(family, params, seed).generate(size)
    if not fam.W.is_symmetric:
        return None
    return degree_pi(fam.W)
