import json
import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from crowdwise.diagnostics import (
    INCONCLUSIVE,
    UNWISE,
    WISE,
    DiagnosticConfig,
    InstanceCache,
    TracePoint,
    TrendTrace,
    WisdomAnalyzer,
    WisdomReport,
    classify,
    dmax_dmin_trace,
    equal_neighbor_power_bound_check,
    finite_time_trace,
    fit_loglog,
    one_time_trace,
    parse_notion,
    preuniform_trace,
    prominent_family_trace,
    prominent_individual_trace,
    recursive_influence_bound_check,
    trace_report,
    uniform_sufficient_trace,
    verdict,
    wisdom_trace,
)
from crowdwise.exceptions import ExceedsCapError, NotPrimitiveError
from crowdwise.families import FamilyGenerator, _finish, star, star_complete, weighted_double_star
from crowdwise.stochastic import DIRECTED_EQUAL_NEIGHBOR, EQUAL_NEIGHBOR, GENERAL, influence_curve

from _corpus import hub_cluster_family, random_stochastic


def identity_family():
    return FamilyGenerator("identity", builder=lambda n: _finish(sp.identity(n, format="csr"),
                                                                 EQUAL_NEIGHBOR))


def uniform_family():
    return FamilyGenerator("uniform", builder=lambda n: _finish(np.ones((n, n)), EQUAL_NEIGHBOR))


def cycle_family():
    return FamilyGenerator("cycle", builder=lambda n: _finish(np.roll(np.eye(n), 1, axis=1), DIRECTED_EQUAL_NEIGHBOR))


class TestTraces:
    def test_star_one_time(self):
        tr = one_time_trace(FamilyGenerator("star"), [10, 100, 1000])
        n = tr.ns
        np.testing.assert_allclose(tr.values, (n - 1 + 1 / n) / n, atol=1e-12)
        np.testing.assert_allclose(tr.values, [0.91, 0.9901, 0.999001], atol=1e-12)
        assert abs(tr.fit.slope) < 0.05
        assert tr.to_csv().splitlines()[0] == "n,value"

    def test_identity_slope_minus_one(self):
        tr = one_time_trace(identity_family(), [4, 8, 16, 32])
        np.testing.assert_allclose(tr.values, 1 / tr.ns)
        assert tr.fit.slope == pytest.approx(-1.0) and tr.fit.r2 == pytest.approx(1.0)

    def test_biased_path_one_time_le_two_over_n(self):
        tr = one_time_trace(FamilyGenerator("biased-path"), [10, 100, 1000])
        assert np.all(tr.values <= 2 / tr.ns)
        assert tr.fit.slope == pytest.approx(-1, abs=0.05)

    def test_star_wisdom(self):
        tr = wisdom_trace(FamilyGenerator("star"), [10, 20, 40])
        np.testing.assert_allclose(tr.values, tr.ns / (2 * tr.ns - 1), atol=1e-10)

    def test_star_complete_wisdom(self):
        tr = wisdom_trace(FamilyGenerator("star-complete"), [10, 20, 40])
        sizes = np.array([p.size for p in tr.points])
        np.testing.assert_allclose(tr.values, sizes / (sizes**2 + sizes), atol=1e-10)
        assert list(tr.ns) == list(2 * sizes)  # normalized by the actual node count

    def test_non_primitive_rejected(self):
        with pytest.raises(NotPrimitiveError):
            wisdom_trace(cycle_family(), [3, 4, 5])

    def test_tree_finite_time(self):
        tr = finite_time_trace(FamilyGenerator("reversed-tree"), [5, 6, 7, 8], 3)
        assert np.all(tr.values <= 3**3 / tr.ns)

    def test_double_star_k2(self):
        tr = finite_time_trace(FamilyGenerator("double-star"), [5, 10, 20], 2)
        ns = tr.ns
        m = np.array([5, 10, 20])
        assert np.all(tr.values >= (m**2 / 2) / ns)

    def test_prominent_family(self):
        tr = prominent_family_trace(FamilyGenerator("star"), [16, 64, 256], 0.5)
        assert np.all(tr.values >= 0.9)
        tr = prominent_family_trace(uniform_family(), [16, 64, 256], 0.5)
        np.testing.assert_allclose(tr.values, np.ceil(tr.ns**0.5) / tr.ns)
        hub = prominent_family_trace(hub_cluster_family(), [4, 8, 16, 32], 0.6)
        single = prominent_individual_trace(hub_cluster_family(), [4, 8, 16, 32])
        assert classify(hub) == UNWISE and hub.values[-1] > 0.9
        assert classify(single) == WISE

    def test_dmax_dmin(self):
        sl = dmax_dmin_trace(FamilyGenerator("superlinear-pa", seed=1), [200, 400, 800, 1600], n_seeds=2)
        assert sl.values.min() > 0.5 and classify(sl) == INCONCLUSIVE  # sufficient-only
        er = dmax_dmin_trace(FamilyGenerator("erdos-renyi", seed=1), [200, 400, 800, 1600], n_seeds=3)
        assert classify(er) == WISE

    def test_random_points_carry_iqr(self):
        tr = one_time_trace(FamilyGenerator("erdos-renyi", seed=4), [100, 200], n_seeds=5)
        lo, hi = tr.points[0].iqr
        assert lo <= tr.points[0].value <= hi

    def test_preuniform_auto_needs_explicit_cap_when_slow(self):
        with pytest.raises(ExceedsCapError, match="K_cap"):
            preuniform_trace(FamilyGenerator("reversed-tree"), [4, 6, 8])

    def test_preuniform_tree_explicit_cap(self):
        tr = preuniform_trace(FamilyGenerator("reversed-tree"), [6, 8, 10], K_cap=20)
        assert np.all(tr.values >= 0.5 * (1 - 2 / tr.ns))

    def test_preuniform_truncate_mode(self):
        tr = preuniform_trace(FamilyGenerator("star"), [10, 20, 40], on_exceed="truncate",
                              config=DiagnosticConfig(mixing_cap=5))
        assert tr.truncated == [10, 20, 40]
        assert np.all(tr.values >= 0.9)

    def test_uniform_sufficient_missing_on_cap(self):
        tr = uniform_sufficient_trace(FamilyGenerator("star"), [10, 20, 40, 80],
                                      config=DiagnosticConfig(mixing_cap=5))
        assert tr.missing == [10, 20, 40, 80] and classify(tr) == INCONCLUSIVE

    def test_equal_neighbor_preuniform_bound(self):
        fam = FamilyGenerator("star-complete")
        pre = preuniform_trace(fam, [8, 16, 32])
        one = one_time_trace(fam, [8, 16, 32])
        assert np.all(pre.values <= 2 * np.sqrt(one.values) + 1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(2, 30))
@settings(max_examples=30, deadline=None)
def test_preuniform_dominates(seed, n):
    A = random_stochastic(np.random.default_rng(seed), n, density=1.0)
    fam = FamilyGenerator("fixed", builder=lambda size: _finish(A, GENERAL))
    cache = InstanceCache()
    pre = preuniform_trace(fam, [n], K_cap=12, cache=cache).values[0]
    inst = cache.get(fam, n)
    assert pre >= inst.column_sums.max() / n - 1e-15
    assert pre >= inst.pi.max() - 1e-15
    assert pre >= inst.chi_maxima(12)[1:].max() - 1e-15
    curve = influence_curve(A)
    assert curve[1] / n == pytest.approx(inst.column_sums.max() / n)


class TestClassify:
    def _trace(self, notion, values, ns=(10, 20, 40, 80)):
        return TrendTrace(notion, [TracePoint(n, v, n) for n, v in zip(ns, values)])

    def test_rules(self):
        assert classify(self._trace("one-time", [0.1, 0.05, 0.025, 0.0125])) == WISE
        assert classify(self._trace("one-time", [0.9, 0.9, 0.9, 0.9])) == UNWISE
        assert classify(self._trace("one-time", [0.25, 0.25, 0.25, 0.25])) == INCONCLUSIVE
        assert classify(self._trace("uniform-sufficient", [0.9, 0.9, 0.9, 0.9])) == INCONCLUSIVE

    def test_thresholds_configurable(self):
        tr = self._trace("one-time", [0.25, 0.25, 0.25, 0.25])
        assert classify(tr, DiagnosticConfig(value_floor=0.25)) == UNWISE

    def test_trace_invariants(self):
        with pytest.raises(ValueError):
            self._trace("one-time", [0.1, 0.2], ns=(20, 10))
        with pytest.raises(ValueError):
            self._trace("one-time", [0.1, -0.2], ns=(10, 20))
        with pytest.raises(ValueError):
            self._trace("one-time", [0.1, math.nan], ns=(10, 20))

    def test_fit_handles_zero(self):
        fit = fit_loglog([10, 20], [0.0, 0.0])
        assert np.isfinite(fit.slope)


def test_parse_notion():
    assert parse_notion("finite-time") == [f"finite-time:{k}" for k in range(1, 6)]
    assert parse_notion("prominent-family:0.5") == ["prominent-family:0.5"]
    with pytest.raises(ValueError):
        parse_notion("bogus")
    with pytest.raises(ValueError):
        parse_notion("wise:3")


class TestVerdict:
    def test_star(self):
        rep = verdict(FamilyGenerator("star"), [10, 20, 40, 80, 160], notions=["one-time", "wise"])
        assert rep.verdicts["one-time"] == UNWISE and rep.verdicts["wise"] == UNWISE
        assert not rep.flags

    def test_requires_four_points(self):
        with pytest.raises(ValueError, match="at least 4"):
            verdict(FamilyGenerator("star"), [10, 20, 40])

    def test_short_grid_report(self):
        rep = trace_report(FamilyGenerator("star"), [10], notions=["one-time"])
        assert rep.verdicts == {"one-time": INCONCLUSIVE}

    def test_json_round_trip_reproduces_verdicts(self):
        rep = verdict(FamilyGenerator("double-star"), [4, 8, 16, 32], notions=["finite-time:1", "finite-time:2"])
        doc = json.loads(rep.to_json())
        assert set(doc) >= {"family", "params", "config", "traces"}
        for t in doc["traces"]:
            assert set(t) >= {"notion", "points", "fit", "verdict"}
            assert set(t["fit"]) == {"slope", "intercept", "r2"}
            assert set(t["points"][0]) >= {"n", "value"}
        back = WisdomReport.from_dict(doc)
        assert back.reclassify() == rep.verdicts

    def test_uniform_note(self):
        rep = verdict(FamilyGenerator("star"), [10, 20, 40, 80], DiagnosticConfig(mixing_cap=5),
                      notions=["uniform-sufficient", "wise"])
        assert rep.verdicts["uniform-sufficient"] == INCONCLUSIVE
        assert any("not uniformly wise" in n for n in rep.notes)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            DiagnosticConfig(alphas=(1.5,))
        with pytest.raises(TypeError):
            DiagnosticConfig(K_cap="soon")

    def test_analyzer(self):
        an = WisdomAnalyzer(notions=["one-time", "wise"])
        assert an.get_params()["slope_min"] == 0.2
        an.fit(FamilyGenerator("star-complete"), [10, 20, 40, 80])
        assert an.verdicts_["wise"] == WISE and an.verdicts_["one-time"] == UNWISE
        an.set_params(value_floor=0.6)
        an.fit(FamilyGenerator("star-complete"), [10, 20, 40, 80])
        assert an.verdicts_["one-time"] == INCONCLUSIVE


class TestBoundChecks:
    def test_identity(self):
        rep = recursive_influence_bound_check(np.eye(6), np.eye(6), [1])
        assert rep.holds and rep.min_slack == pytest.approx(6)

    def test_star_slack(self):
        P = star(5).P
        A = P.toarray()
        cs = np.sort((A @ A).sum(axis=0))[::-1]
        phi = np.concatenate(([0], np.cumsum(np.sort(A.sum(axis=0))[::-1])))
        rhs = phi[min(5, math.floor(2 * phi[1]))] + 5 / 2
        rep = recursive_influence_bound_check(P, P, [2])
        assert rep.holds and rhs - cs[0] >= 0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            recursive_influence_bound_check(np.eye(2), np.eye(3))

    def test_power_bound(self):
        rep = equal_neighbor_power_bound_check(star_complete(20).W, 50)
        assert rep.holds and rep.n_checked == 50 and rep.max_ratio <= 1

    def test_power_bound_rejects_weighted(self):
        with pytest.raises(ValueError, match="equal-neighbor"):
            equal_neighbor_power_bound_check(weighted_double_star(4).W)
