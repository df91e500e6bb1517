import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse.csgraph import connected_components

from crowdwise.families import (
    FAMILIES,
    FamilyGenerator,
    barabasi_albert,
    biased_path,
    biased_path_pi,
    closed_form_pi,
    erdos_renyi,
    reversed_binary_tree,
    star,
    star_complete,
    superlinear_pa,
    weighted_double_star,
)
from crowdwise.stochastic import (
    DIRECTED_EQUAL_NEIGHBOR,
    EQUAL_NEIGHBOR,
    GENERAL,
    WEIGHTED_NEIGHBOR,
    build_from_weights,
    column_sums,
    is_primitive,
    stationary_distribution,
)

from _corpus import hub_cluster


def tree_root_pi(L):
    return (2 ** (L - 1) + 1) / ((2 ** (L - 1) + 1) + (L - 1) * 2 ** (L - 1))


class TestDeterministic:
    def test_star(self):
        W, P, meta = star(3)
        assert W.kind == EQUAL_NEIGHBOR and meta.special_nodes["center"] == 0
        np.testing.assert_allclose(P.toarray(), [[1 / 3, 1 / 3, 1 / 3], [1, 0, 0], [1, 0, 0]])
        assert column_sums(star(6).P)[0] == pytest.approx(5 + 1 / 6, abs=1e-14)

    def test_star_complete(self):
        n = 6
        W, P, meta = star_complete(n)
        assert meta.actual_node_count == 2 * n
        assert W.degrees.sum() == n * n + n
        pi = stationary_distribution(P)[0]
        assert pi[0] == pytest.approx(1 / 7, abs=1e-12)

    def test_biased_path_matrix(self):
        W, P, meta = biased_path(3, 2.0)
        assert W.kind == GENERAL
        p, q = 1 / 3, 2 / 3
        np.testing.assert_allclose(P.toarray(), [[p, q, 0], [p, 0, q], [0, p, q]], atol=1e-15)
        np.testing.assert_allclose(stationary_distribution(P)[0], [1 / 7, 2 / 7, 4 / 7], atol=1e-12)
        # direct summation of the displayed matrix
        np.testing.assert_allclose(column_sums(P), [2 / 3, 1, 4 / 3], atol=1e-15)

    def test_biased_path_rejects_nu_one(self):
        with pytest.raises(ValueError):
            biased_path(5, 1.0)

    def test_biased_path_pi_closed_form(self):
        assert biased_path_pi(10, 2.0)[-1] == pytest.approx(512 / 1023, abs=1e-15)
        np.testing.assert_allclose(closed_form_pi("biased-path", 4, nu=3.0), np.array([1, 3, 9, 27]) / 40)
        big = biased_path_pi(5000, 2.0)
        assert np.isfinite(big).all() and big[-1] == pytest.approx(0.5)
        assert big.sum() == pytest.approx(1.0)

    @pytest.mark.parametrize("L", [2, 3, 4, 7, 10])
    def test_tree(self, L):
        W, P, meta = reversed_binary_tree(L)
        assert meta.actual_node_count == 2**L - 1
        assert W.kind == (EQUAL_NEIGHBOR if L == 2 else DIRECTED_EQUAL_NEIGHBOR)
        assert is_primitive(P)
        pi = stationary_distribution(P)[0]
        assert pi[meta.special_nodes["root"]] == pytest.approx(tree_root_pi(L), abs=1e-10)

    def test_tree_l2_is_not_two_over_l_plus_one(self):
        pi = stationary_distribution(reversed_binary_tree(2).P)[0]
        assert pi[0] == pytest.approx(3 / 5)

    def test_double_star(self):
        m = 3
        W, P, meta = weighted_double_star(m)
        assert W.kind == WEIGHTED_NEIGHBOR and meta.actual_node_count == m * m + m + 1
        A = P.toarray()
        leaf, inter, root = meta.special_nodes["leaf"], meta.special_nodes["intermediate"], 0
        assert A[leaf, inter] == 1.0 and A[inter, root] == 0.5
        np.testing.assert_allclose(W.degrees, [4, 2, 2, 2] + [1 / 3] * 9)
        np.testing.assert_allclose(closed_form_pi("double-star", m), W.degrees / W.degrees.sum())
        assert column_sums(P)[inter] == pytest.approx(3.25)
        assert (A @ A)[:, root].sum() >= m * m / 2

    def test_closed_form_unavailable_for_tree(self):
        assert closed_form_pi("reversed-tree", 5) is None


class TestRandom:
    def test_er_deterministic_and_connected(self):
        a, b = erdos_renyi(500, 2.0, 7), erdos_renyi(500, 2.0, 7)
        assert a.P == b.P
        assert a.meta.extra["prng"] == "numpy.random.PCG64"
        assert a.meta.extra["connected"]
        assert erdos_renyi(500, 2.0, 8).P != a.P

    def test_er_isolated_self_loops(self):
        fam = erdos_renyi(50, 1.01, 3)
        iso = fam.meta.extra["isolated_self_loops"]
        assert iso == int(np.sum(fam.W.toarray().diagonal()))

    def test_er_requires_seed(self):
        with pytest.raises(ValueError, match="seed"):
            erdos_renyi(10, 2.0, None)

    def test_ba(self):
        W, P, meta = barabasi_albert(2000, 3, 4, 1)
        assert W.kind == EQUAL_NEIGHBOR
        assert meta.extra["degree_min_grown"] >= 3
        assert W.degrees.sum() == 2 * (6 + 3 * (2000 - 4))
        assert connected_components(W.weights, directed=False)[0] == 1
        assert barabasi_albert(4, 3, 4, 1).meta.actual_node_count == 4

    def test_superlinear_has_dominant_hub(self):
        fam = superlinear_pa(2000, 1, 2.0, 5)
        assert fam.meta.extra["top_degree"] > 0.9 * 2000

    @given(st.integers(0, 2**63), st.integers(5, 60))
    @settings(max_examples=30, deadline=None)
    def test_generators_are_pure(self, seed, n):
        for make in (lambda: erdos_renyi(n, 2.0, seed), lambda: barabasi_albert(n, 2, 3, seed),
                     lambda: superlinear_pa(n, 1, 2.0, seed)):
            a, b = make(), make()
            assert a.P == b.P and a.meta == b.meta


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_every_family_builds_consistently(name):
    gen = FamilyGenerator(name, seed=11 if FAMILIES[name].random else None)
    size = {"star": 7, "star-complete": 7, "biased-path": 7, "reversed-tree": 4,
            "double-star": 3}.get(name, 60)
    W, P, meta = gen.generate(size)
    assert build_from_weights(W) == P
    assert meta.actual_node_count == P.n
    assert meta.degree_min == W.degrees.min()


def test_generator_validation():
    with pytest.raises(ValueError, match="unknown family"):
        FamilyGenerator("nope")
    with pytest.raises(ValueError, match="unknown parameters"):
        FamilyGenerator("star", {"nu": 2})
    with pytest.raises(ValueError, match="seed"):
        FamilyGenerator("erdos-renyi")
    gen = FamilyGenerator("erdos-renyi", seed=3)
    assert gen.describe() == {"family": "erdos-renyi", "params": {"c": 2.0}, "seed": 3}


def test_hub_cluster_helper():
    W, P, meta = hub_cluster(4)
    assert W.kind == EQUAL_NEIGHBOR and P.n == 20 and is_primitive(P)
