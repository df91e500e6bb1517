"""Finite-n wisdom diagnostics over growing matrix families.

Every asymptotic notion becomes a trace: the relevant norm evaluated at each
size of a grid, plus a least-squares fit of ``ln(value)`` against
``ln(n)``. Verdicts are a pure function of a trace and the thresholds in
:class:`DiagnosticConfig`.
"""

from dataclasses import asdict, dataclass, field
from functools import cached_property
import io
import json
import math

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_grid, check_int, check_scalar, check_stochastic
from .exceptions import ExceedsCapError, NotPrimitiveError
from .families import FamilyGenerator
from .stochastic import (
    EQUAL_NEIGHBOR,
    WeightGraph,
    column_sums,
    influence_curve,
    is_primitive,
    iter_influence,
    max_column_average,
    mixing_time,
    stationary_distribution,
)

WISE = "wise"
UNWISE = "unwise"
INCONCLUSIVE = "inconclusive"

ONE_TIME = "one-time"
FINITE_TIME = "finite-time"
WISDOM = "wise"
PRE_UNIFORM = "pre-uniform"
UNIFORM_SUFFICIENT = "uniform-sufficient"
PROMINENT_INDIVIDUAL = "prominent-individual"
PROMINENT_FAMILY = "prominent-family"
DMAX_DMIN = "dmax-dmin"

BASE_NOTIONS = (
    ONE_TIME, FINITE_TIME, WISDOM, PRE_UNIFORM, UNIFORM_SUFFICIENT,
    PROMINENT_INDIVIDUAL, PROMINENT_FAMILY, DMAX_DMIN,
)
# a failed sufficient condition says nothing, so these never report "unwise"
SUFFICIENT_ONLY = (UNIFORM_SUFFICIENT, DMAX_DMIN)
CROSS_CHECK_FLAG = "theorem-5.3-violation"


@dataclass(frozen=True)
class DiagnosticConfig:
    """Thresholds and horizons shared by all traces and verdicts."""

    slope_min: float = 0.2
    value_max: float = 0.2
    value_floor: float = 0.3
    flat_slope: float = -0.05
    k_list: tuple = (1, 2, 3, 4, 5)
    K_cap: object = "auto"
    K_budget: int = 10_000
    alphas: tuple = (0.3, 0.5, 0.7, 0.9)
    n_seeds: int = 5
    mixing_cap: object = None

    def __post_init__(self):
        check_scalar(self.slope_min, "slope_min", ge=0)
        check_scalar(self.value_max, "value_max", gt=0)
        check_scalar(self.value_floor, "value_floor", gt=0)
        check_scalar(self.flat_slope, "flat_slope")
        object.__setattr__(self, "k_list", tuple(check_int(k, "k", min_value=1) for k in self.k_list))
        if self.K_cap != "auto":
            object.__setattr__(self, "K_cap", check_int(self.K_cap, "K_cap", min_value=1))
        check_int(self.K_budget, "K_budget", min_value=1)
        alphas = tuple(check_scalar(a, "alpha", gt=0, lt=1) for a in self.alphas)
        object.__setattr__(self, "alphas", alphas)
        check_int(self.n_seeds, "n_seeds", min_value=1)
        if self.mixing_cap is not None:
            check_int(self.mixing_cap, "mixing_cap", min_value=1)

    def to_dict(self):
        d = asdict(self)
        d["k_list"] = list(self.k_list)
        d["alphas"] = list(self.alphas)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in ("k_list", "alphas"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


def default_mixing_cap(n):
    return max(1, 10 * math.ceil(math.log(n)) ** 2)


@dataclass(frozen=True)
class TrendFit:
    slope: float
    intercept: float
    r2: float

    def to_dict(self):
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2}


@dataclass(frozen=True)
class TracePoint:
    n: int
    value: float
    size: int
    iqr: tuple = None
    missing_seeds: int = 0

    def to_dict(self):
        d = {"n": self.n, "value": self.value, "size": self.size}
        if self.iqr is not None:
            d["iqr"] = list(self.iqr)
        if self.missing_seeds:
            d["missing_seeds"] = self.missing_seeds
        return d


def fit_loglog(ns, values):
    """Least-squares line through ``(ln n, ln value)``.

    Zero values are floored at the smallest positive double so the fit stays
    finite. Fewer than two points give a NaN fit.
    """
    x = np.log(np.asarray(ns, dtype=float))
    if x.size < 2:
        return TrendFit(math.nan, math.nan, math.nan)
    y = np.log(np.maximum(np.asarray(values, dtype=float), np.finfo(float).tiny))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return TrendFit(float(slope), float(intercept), r2)


@dataclass
class TrendTrace:
    """Values of one notion across a size grid, with their log-log fit."""

    notion: str
    points: list
    fit: TrendFit = None
    missing: list = field(default_factory=list)

    def __post_init__(self):
        ns = [p.n for p in self.points]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("trace points must be strictly increasing in n")
        for p in self.points:
            if not (math.isfinite(p.value) and p.value >= 0):
                raise ValueError(f"invalid trace value {p.value!r} at n={p.n}")
        if self.fit is None:
            self.fit = fit_loglog(ns, [p.value for p in self.points])

    @property
    def ns(self):
        return np.array([p.n for p in self.points])

    @property
    def values(self):
        return np.array([p.value for p in self.points])

    def to_dict(self):
        return {
            "notion": self.notion,
            "points": [p.to_dict() for p in self.points],
            "fit": self.fit.to_dict(),
            "missing": list(self.missing),
        }

    @classmethod
    def from_dict(cls, d):
        points = [
            TracePoint(
                n=p["n"], value=p["value"], size=p.get("size", p["n"]),
                iqr=tuple(p["iqr"]) if "iqr" in p else None,
                missing_seeds=p.get("missing_seeds", 0),
            )
            for p in d["points"]
        ]
        return cls(d["notion"], points, TrendFit(**d["fit"]), list(d.get("missing", [])))

    def to_csv(self):
        buf = io.StringIO()
        buf.write("n,value\n")
        for p in self.points:
            buf.write(f"{p.n},{p.value!r}\n")
        return buf.getvalue()


def parse_notion(notion, config=None):
    """Expand a notion name into the list of concrete trace names.

    ``"finite-time:3"`` stays as is, while a bare ``finite-time`` or
    ``prominent-family`` expands over ``config.k_list`` or ``config.alphas``.
    Unknown names raise ``ValueError``.
    """
    config = config or DiagnosticConfig()
    base, _, arg = notion.partition(":")
    if base not in BASE_NOTIONS:
        raise ValueError(f"unknown notion {notion!r}; expected one of {BASE_NOTIONS}")
    if base == FINITE_TIME:
        ks = [check_int(int(arg), "k", min_value=1)] if arg else list(config.k_list)
        return [f"{FINITE_TIME}:{k}" for k in ks]
    if base == PROMINENT_FAMILY:
        alphas = [check_scalar(float(arg), "alpha", gt=0, lt=1)] if arg else list(config.alphas)
        return [f"{PROMINENT_FAMILY}:{a:g}" for a in alphas]
    if arg:
        raise ValueError(f"notion {base!r} takes no argument")
    return [base]


class MatrixInstance:
    """One generated matrix with lazily computed, cached spectral quantities."""

    def __init__(self, family, size, seed):
        self.size = size
        self.seed = seed
        self.W, self.P, self.meta = family
        self.n = self.P.n
        self._chi = None
        self._chi_k = -1
        self._chi_max = []
        self._tau = {}

    @cached_property
    def primitive(self):
        return is_primitive(self.P)

    @cached_property
    def pi(self):
        if not self.primitive:
            raise NotPrimitiveError(f"matrix of size {self.size} is not primitive")
        return stationary_distribution(self.P)[0]

    @cached_property
    def column_sums(self):
        return column_sums(self.P)

    @cached_property
    def influence_curve(self):
        return influence_curve(self.P)

    def chi_maxima(self, K):
        """``max_j chi(k)_j`` for ``k = 0..K``."""
        if self._chi is None:
            self._chi = np.full(self.n, 1.0 / self.n)
            self._chi_k = 0
            self._chi_max = [float(self._chi.max())]
        while self._chi_k < K:
            self._chi = self.P.rmatvec(self._chi)
            self._chi_k += 1
            self._chi_max.append(float(self._chi.max()))
        return np.array(self._chi_max[: K + 1])

    def tau(self, cap):
        if cap not in self._tau:
            try:
                self._tau[cap] = mixing_time(self.P, cap)
            except ExceedsCapError as err:
                self._tau[cap] = err
        result = self._tau[cap]
        if isinstance(result, ExceedsCapError):
            raise result
        return result


class InstanceCache:
    """Memoizes generated family members so several traces share work."""

    def __init__(self):
        self._store = {}

    def get(self, family, size, seed=None):
        key = (family.name, tuple(sorted(family.params.items())), size, seed)
        if key not in self._store:
            self._store[key] = MatrixInstance(family.generate(size, seed=seed), size, seed)
        return self._store[key]


class _Missing(Exception):
    pass


def _seeds(family, n_seeds):
    if not family.random:
        return [None]
    return [family.seed + j for j in range(n_seeds)]


def _trace(notion, family, n_grid, value_fn, *, n_seeds, cache):
    if not isinstance(family, FamilyGenerator):
        raise TypeError("family must be a FamilyGenerator")
    n_grid = check_grid(n_grid)
    cache = cache or InstanceCache()
    points, missing = [], []
    for size in n_grid:
        vals, n_nodes, n_missing = [], None, 0
        for seed in _seeds(family, n_seeds):
            inst = cache.get(family, size, seed)
            n_nodes = inst.n
            try:
                vals.append(float(value_fn(inst)))
            except _Missing:
                n_missing += 1
            except NotPrimitiveError:
                if not family.random:
                    raise
                n_missing += 1  # e.g. a disconnected random draw
        if not vals or len(vals) * 2 < len(vals) + n_missing:
            missing.append(size)
            continue
        value = float(np.median(vals))
        iqr = tuple(float(q) for q in np.percentile(vals, [25, 75])) if family.random else None
        points.append(TracePoint(n_nodes, value, size, iqr, n_missing))
    return TrendTrace(notion, points, missing=missing)


def _cap_for(inst, config):
    return config.mixing_cap or default_mixing_cap(inst.n)


def _auto_horizon(inst, config, on_exceed):
    """``min(K_budget, max(4 tau, ceil(2 ln(n) tau)))``.

    In ``truncate`` mode a non-primitive matrix, or one whose mixing time
    exceeds the cap, gets the cap itself as horizon.
    """
    cap = _cap_for(inst, config)
    if not inst.primitive:
        if on_exceed == "truncate":
            return min(config.K_budget, cap), True
        raise NotPrimitiveError("K_cap='auto' requires primitive matrices; pass an explicit K_cap")
    try:
        tau = inst.tau(cap)
    except ExceedsCapError:
        if on_exceed == "truncate":
            return min(config.K_budget, cap), True
        raise ExceedsCapError(cap, f"size {inst.size}: pass an explicit K_cap") from None
    return min(config.K_budget, max(4 * tau, math.ceil(2 * math.log(max(inst.n, 2)) * tau))), False


def _preuniform_value(inst, config, K_cap=None, on_exceed="raise", truncated=None):
    K_cap = config.K_cap if K_cap is None else K_cap
    if K_cap == "auto":
        K, cut = _auto_horizon(inst, config, on_exceed)
        if cut and truncated is not None:
            truncated.append(inst.size)
    else:
        K = K_cap
    value = float(inst.chi_maxima(K)[1:].max())
    if inst.primitive:
        value = max(value, float(inst.pi.max()))
    return value


def one_time_trace(family, n_grid, *, n_seeds=5, cache=None):
    """Maximum column average ``||(1/n) P||_1`` across the grid."""
    return _trace(ONE_TIME, family, n_grid, lambda i: i.column_sums.max() / i.n,
                  n_seeds=n_seeds, cache=cache)


def prominent_individual_trace(family, n_grid, *, n_seeds=5, cache=None):
    """Largest average one-time influence of a single node (equals the one-time value)."""
    return _trace(PROMINENT_INDIVIDUAL, family, n_grid, lambda i: i.column_sums.max() / i.n,
                  n_seeds=n_seeds, cache=cache)


def finite_time_trace(family, n_grid, k, *, n_seeds=5, cache=None):
    """``||(1/n) P^k||_1``, i.e. the largest entry of ``chi(k)``."""
    k = check_int(k, "k", min_value=1)
    return _trace(f"{FINITE_TIME}:{k}", family, n_grid, lambda i: i.chi_maxima(k)[k],
                  n_seeds=n_seeds, cache=cache)


def wisdom_trace(family, n_grid, *, n_seeds=5, cache=None):
    """``||pi||_inf`` across the grid; every matrix must be primitive."""
    return _trace(WISDOM, family, n_grid, lambda i: i.pi.max(), n_seeds=n_seeds, cache=cache)


def preuniform_trace(family, n_grid, K_cap="auto", *, config=None, n_seeds=5, cache=None,
                     on_exceed="raise"):
    """``max_{1<=k<=K} ||(1/n) P^k||_1``, further maxed with ``||pi||_inf``.

    With ``K_cap="auto"`` the horizon is ``max(4 tau, 2 ln(n) tau)`` capped at
    ``config.K_budget``; the mixing time must then be finite under the cap.
    For non-primitive matrices an explicit ``K_cap`` is required and no
    ``pi`` term is added.

    ``on_exceed="truncate"`` replaces the error for a mixing time beyond the
    cap (or a non-primitive matrix) with a horizon equal to the cap; the
    sizes affected are listed in the trace's ``truncated`` attribute. The
    value is then a lower bound.
    """
    config = config or DiagnosticConfig()
    if on_exceed not in ("raise", "truncate"):
        raise ValueError(f"on_exceed must be 'raise' or 'truncate', got {on_exceed!r}")
    truncated = []
    trace = _trace(PRE_UNIFORM, family, n_grid,
                   lambda i: _preuniform_value(i, config, K_cap, on_exceed, truncated),
                   n_seeds=n_seeds, cache=cache)
    trace.truncated = sorted(set(truncated))
    return trace


def uniform_sufficient_trace(family, n_grid, *, config=None, n_seeds=5, cache=None):
    """Pre-uniform value times ``tau_mix``; mixing beyond the cap is recorded as missing."""
    config = config or DiagnosticConfig()

    def value(inst):
        if not inst.primitive:
            raise NotPrimitiveError(f"matrix of size {inst.size} is not primitive")
        try:
            tau = inst.tau(_cap_for(inst, config))
            return _preuniform_value(inst, config) * tau
        except ExceedsCapError:
            raise _Missing from None

    return _trace(UNIFORM_SUFFICIENT, family, n_grid, value, n_seeds=n_seeds, cache=cache)


def prominent_family_trace(family, n_grid, alpha, *, n_seeds=5, cache=None):
    """``Phi(ceil(n**alpha)) / n``: one-time influence of the best ``n**alpha`` nodes."""
    alpha = check_scalar(alpha, "alpha", gt=0, lt=1)

    def value(inst):
        s = min(inst.n, math.ceil(inst.n**alpha))
        return inst.influence_curve[s] / inst.n

    return _trace(f"{PROMINENT_FAMILY}:{alpha:g}", family, n_grid, value,
                  n_seeds=n_seeds, cache=cache)


def dmax_dmin_trace(family, n_grid, *, n_seeds=5, cache=None):
    """``(d_max / d_min) / n`` from the generated weight degrees."""
    return _trace(DMAX_DMIN, family, n_grid,
                  lambda i: (i.meta.degree_max / i.meta.degree_min) / i.n,
                  n_seeds=n_seeds, cache=cache)


def compute_trace(notion, family, n_grid, config=None, cache=None, on_exceed="raise"):
    """Dispatch a single expanded notion name (e.g. ``"finite-time:2"``)."""
    config = config or DiagnosticConfig()
    base, _, arg = notion.partition(":")
    kw = {"n_seeds": config.n_seeds, "cache": cache}
    if base == ONE_TIME:
        return one_time_trace(family, n_grid, **kw)
    if base == PROMINENT_INDIVIDUAL:
        return prominent_individual_trace(family, n_grid, **kw)
    if base == FINITE_TIME:
        return finite_time_trace(family, n_grid, int(arg), **kw)
    if base == WISDOM:
        return wisdom_trace(family, n_grid, **kw)
    if base == PRE_UNIFORM:
        return preuniform_trace(family, n_grid, config.K_cap, config=config,
                                on_exceed=on_exceed, **kw)
    if base == UNIFORM_SUFFICIENT:
        return uniform_sufficient_trace(family, n_grid, config=config, **kw)
    if base == PROMINENT_FAMILY:
        return prominent_family_trace(family, n_grid, float(arg), **kw)
    if base == DMAX_DMIN:
        return dmax_dmin_trace(family, n_grid, **kw)
    raise ValueError(f"unknown notion {notion!r}")


def classify(trace, config=None):
    """Verdict for one trace.

    ``wise`` when the fitted slope is at most ``-slope_min`` and the last value
    at most ``value_max``; ``unwise`` when the last value is at least
    ``value_floor`` and the slope at least ``flat_slope``; otherwise
    ``inconclusive``. Sufficient-only notions never return ``unwise``, and
    traces with missing points are inconclusive.
    """
    config = config or DiagnosticConfig()
    if trace.missing or len(trace.points) < 2:
        return INCONCLUSIVE
    last = trace.points[-1].value
    slope = trace.fit.slope
    if slope <= -config.slope_min and last <= config.value_max:
        return WISE
    if trace.notion.partition(":")[0] in SUFFICIENT_ONLY:
        return INCONCLUSIVE
    if last >= config.value_floor and slope >= config.flat_slope:
        return UNWISE
    return INCONCLUSIVE


@dataclass
class WisdomReport:
    family: str
    params: dict
    seed: object
    traces: dict
    verdicts: dict
    config: dict
    n_grid: list
    flags: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "family": self.family,
            "params": dict(self.params),
            "seed": self.seed,
            "n_grid": list(self.n_grid),
            "config": dict(self.config),
            "traces": [
                {**t.to_dict(), "verdict": self.verdicts[name]} for name, t in self.traces.items()
            ],
            "verdicts": dict(self.verdicts),
            "flags": list(self.flags),
            "notes": list(self.notes),
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), indent=2, **kw)

    @classmethod
    def from_dict(cls, d):
        traces = {t["notion"]: TrendTrace.from_dict(t) for t in d["traces"]}
        verdicts = {t["notion"]: t["verdict"] for t in d["traces"]}
        return cls(d["family"], d["params"], d.get("seed"), traces, verdicts, d["config"],
                   d.get("n_grid", []), d.get("flags", []), d.get("notes", []))

    def reclassify(self):
        """Re-derive every verdict from the stored traces and config."""
        config = DiagnosticConfig.from_dict(self.config)
        return {name: classify(t, config) for name, t in self.traces.items()}

    def summary_table(self):
        width = max([len(n) for n in self.traces] + [6])
        lines = [f"{'notion':<{width}}  {'verdict':<12}  {'slope':>8}  {'last':>10}"]
        for name, t in self.traces.items():
            last = t.points[-1].value if t.points else math.nan
            lines.append(f"{name:<{width}}  {self.verdicts[name]:<12}  {t.fit.slope:>8.3f}  {last:>10.4g}")
        lines.extend(f"flag: {f}" for f in self.flags)
        return "\n".join(lines)


def _is_equal_neighbor_family(family, n_grid, config, cache):
    for size in n_grid:
        for seed in _seeds(family, config.n_seeds):
            if cache.get(family, size, seed).W.kind != EQUAL_NEIGHBOR:
                return False
    return True


def verdict(family, n_grid, config=None, notions=None, *, cache=None):
    """Evaluate traces for the requested notions and classify each.

    For equal-neighbor families the one-time and pre-uniform traces are
    always computed and must agree; a disagreement adds
    ``CROSS_CHECK_FLAG`` to the report flags, which indicates a bug rather
    than a property of the family.
    """
    return _report(family, check_grid(n_grid, min_length=4), config, notions, cache, True)


def trace_report(family, n_grid, config=None, notions=None, *, cache=None):
    """Like :func:`verdict` but for any grid length; no verdicts are drawn.

    Every verdict is ``inconclusive`` and the cross-check is skipped.
    """
    return _report(family, check_grid(n_grid), config, notions, cache, False)


def _report(family, n_grid, config, notions, cache, decide):
    config = config or DiagnosticConfig()
    cache = cache or InstanceCache()
    names = []
    for notion in notions or (ONE_TIME, FINITE_TIME, WISDOM):
        for name in parse_notion(notion, config):
            if name not in names:
                names.append(name)
    equal_neighbor = decide and _is_equal_neighbor_family(family, n_grid, config, cache)
    added = [n for n in (ONE_TIME, PRE_UNIFORM) if n not in names] if equal_neighbor else []
    traces = {}
    for name in names + added:
        # cross-check traces must not abort a run the caller did not ask for
        mode = "truncate" if name in added else "raise"
        traces[name] = compute_trace(name, family, n_grid, config, cache, on_exceed=mode)
    if decide:
        verdicts = {name: classify(t, config) for name, t in traces.items()}
    else:
        verdicts = dict.fromkeys(traces, INCONCLUSIVE)
    flags, notes = [], []
    if not decide:
        notes.append("grid too short for verdicts; traces only")
    cut = getattr(traces.get(PRE_UNIFORM), "truncated", [])
    if cut:
        notes.append(f"pre-uniform sup truncated at the mixing cap for sizes {cut}")
    if equal_neighbor and verdicts[ONE_TIME] != verdicts[PRE_UNIFORM]:
        flags.append(CROSS_CHECK_FLAG)
    if verdicts.get(UNIFORM_SUFFICIENT) == INCONCLUSIVE:
        # uniform and pre-uniform wisdom each imply wisdom
        for name in (WISDOM, PRE_UNIFORM):
            if verdicts.get(name) == UNWISE:
                notes.append(f"not uniformly wise: the {name} trace is unwise")
    desc = family.describe()
    return WisdomReport(desc["family"], desc["params"], desc["seed"], traces, verdicts,
                        config.to_dict(), list(n_grid), flags, notes)


@dataclass(frozen=True)
class InequalityReport:
    """Outcome of checking an inequality over a parameter grid."""

    name: str
    n_checked: int
    violations: list
    min_slack: float
    max_slack: float
    max_ratio: float = math.nan

    @property
    def holds(self):
        return not self.violations

    def to_dict(self):
        return {**asdict(self), "holds": self.holds}


def _phi_at(curve, x):
    n = curve.size - 1
    s = math.floor(x + 1e-12 * max(1.0, x))  # absorbs rounding in products like delta*Phi
    return float(curve[min(max(s, 0), n)])


def recursive_influence_bound_check(P, Q, deltas=(0.5, 1, 2, 5, 10)):
    """Check ``Phi_PQ(s) <= Phi_P(delta * Phi_Q(s)) + n / delta`` for all ``s``.

    ``Phi`` is extended to the reals by flooring its argument (and saturates at
    ``Phi(n) = n``).
    """
    P = check_stochastic(P)
    Q = check_stochastic(Q, name="Q")
    if P.n != Q.n:
        raise ValueError(f"dimension mismatch: {P.n} vs {Q.n}")
    deltas = [check_scalar(d, "delta", gt=0) for d in deltas]
    n = P.n
    phi_p = influence_curve(P)
    phi_q = influence_curve(Q)
    phi_pq = np.concatenate(([0.0], np.cumsum(np.sort(np.asarray((P.csr @ Q.csr).sum(axis=0)).ravel())[::-1])))
    violations, slacks = [], []
    for delta in deltas:
        for s in range(n + 1):
            rhs = _phi_at(phi_p, delta * phi_q[s]) + n / delta
            slack = rhs - phi_pq[s]
            slacks.append(slack)
            if slack < 0:
                violations.append({"s": s, "delta": delta, "lhs": float(phi_pq[s]), "rhs": rhs})
    return InequalityReport("recursive-influence", len(slacks), violations,
                            float(min(slacks)), float(max(slacks)))


def equal_neighbor_power_bound_check(W, k_max=50):
    """Check ``||(1/n) P^k||_1 <= 2 ||(1/n) P||_1^{1/2}`` for ``k = 1..k_max``.

    Only meaningful for symmetric binary weights; other kinds are rejected.
    """
    if not isinstance(W, WeightGraph):
        W = WeightGraph(W)
    if W.kind != EQUAL_NEIGHBOR:
        raise ValueError(f"power bound requires equal-neighbor weights, got {W.kind!r}")
    k_max = check_int(k_max, "k_max", min_value=1)
    from .stochastic import build_from_weights

    P = build_from_weights(W)
    one = max_column_average(P)
    bound = 2.0 * math.sqrt(one)
    violations, ratios = [], []
    for k, chi in iter_influence(P, k_max):
        if k == 0:
            continue
        value = float(chi.max())
        ratios.append(value / bound)
        if value > bound:
            violations.append({"k": k, "value": value, "bound": bound})
    slacks = [bound * (1 - r) for r in ratios]
    return InequalityReport("equal-neighbor-power", k_max, violations,
                            float(min(slacks)), float(max(slacks)), float(max(ratios)))


class WisdomAnalyzer(BaseEstimator):
    """Estimator-style front end to :func:`verdict`.

    ``fit(family, n_grid)`` evaluates the requested notions over the grid and
    stores ``report_``, ``traces_`` and ``verdicts_``.

    Parameters
    ----------
    notions : sequence of str, optional
        Notion names such as ``"one-time"``, ``"finite-time:2"`` or
        ``"prominent-family:0.5"``. Defaults to one-time, finite-time over
        ``k_list`` and wise.
    Remaining parameters mirror :class:`DiagnosticConfig`.

    Examples
    --------
    >>> from crowdwise import FamilyGenerator, WisdomAnalyzer
    >>> an = WisdomAnalyzer(notions=["one-time", "wise"])
    >>> an.fit(FamilyGenerator("star"), [10, 20, 40, 80]).verdicts_["one-time"]
    'unwise'
    """

    def __init__(self, notions=None, *, slope_min=0.2, value_max=0.2, value_floor=0.3,
                 flat_slope=-0.05, k_list=(1, 2, 3, 4, 5), K_cap="auto", K_budget=10_000,
                 alphas=(0.3, 0.5, 0.7, 0.9), n_seeds=5, mixing_cap=None):
        self.notions = notions
        self.slope_min = slope_min
        self.value_max = value_max
        self.value_floor = value_floor
        self.flat_slope = flat_slope
        self.k_list = k_list
        self.K_cap = K_cap
        self.K_budget = K_budget
        self.alphas = alphas
        self.n_seeds = n_seeds
        self.mixing_cap = mixing_cap

    def _config(self):
        params = self.get_params()
        params.pop("notions")
        return DiagnosticConfig(**params)

    def fit(self, family, n_grid, cache=None):
        self.report_ = verdict(family, n_grid, self._config(), self.notions, cache=cache)
        self.traces_ = self.report_.traces
        self.verdicts_ = self.report_.verdicts
        self.flags_ = self.report_.flags
        return self
