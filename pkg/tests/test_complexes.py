from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from egf.complexes import (
    ChainMap,
    DirectSystem,
    GradedComplex,
    TowerOfComplexes,
    cohomology,
    cohomology_dims,
    compose,
    cone,
    direct_limit_cohomology,
    direct_sum,
    identity_map,
    induced_map,
    inverse_limit_cohomology,
    is_quasi_isomorphism,
    same_class,
    telescope,
    tensor,
    truncate,
    verify_chain_map,
    zero_map,
)
from egf.errors import CapExceedsSystem, NotADifferential, NotChainMap, NotStabilized, NotSurjective, RangeUnbounded
from egf.models import conic_complex, conic_system, ConicModel
from egf.random_models import random_complex
from oracles import brute_cohomology_dim, convolve


def acyclic_pair(p=2, deg=0, prefix=""):
    return GradedComplex([(prefix + "a", deg), (prefix + "b", deg + 1)], {prefix + "a": {prefix + "b": 1}}, p)


def free_line(degrees, p=2):
    return GradedComplex([(f"g{n}", n) for n in degrees], {}, p)


class TestConstruction:
    def test_rejects_square_nonzero(self):
        with pytest.raises(NotADifferential) as exc:
            GradedComplex([("a", 0), ("b", 1), ("c", 2)], {"a": {"b": 1}, "b": {"c": 1}})
        assert "d(d(a))" in str(exc.value)

    def test_rejects_wrong_degree(self):
        with pytest.raises(NotADifferential):
            GradedComplex([("a", 0), ("b", 2)], {"a": {"b": 1}})

    def test_rejects_unknown_target(self):
        with pytest.raises(NotADifferential):
            GradedComplex([("a", 0)], {"a": {"zz": 1}})

    def test_duplicate_label(self):
        with pytest.raises(ValueError):
            GradedComplex([("a", 0), ("a", 1)])

    def test_coefficients_reduced(self):
        c = GradedComplex([("a", 0), ("b", 1)], {"a": {"b": 3}}, p=3)
        assert c.differential == {}
        assert cohomology_dims(c, (0, 1)) == [1, 1]

    def test_unbounded_range(self):
        with pytest.raises(RangeUnbounded):
            cohomology(acyclic_pair(), (0, None))


class TestCohomologyExamples:
    def test_identity_two_term_is_acyclic(self):
        assert cohomology_dims(acyclic_pair(), (-2, 3)) == [0] * 6

    def test_zero_differential(self):
        assert cohomology_dims(free_line(range(4)), (0, 3)) == [1, 1, 1, 1]

    def test_conic_nu1(self):
        c = conic_complex(ConicModel(nu=1), degree_cap=8)
        assert cohomology_dims(c, (0, 4)) == [1, 0, 1, 0, 1]
        for n in range(5):
            assert brute_cohomology_dim(c, n) == [1, 0, 1, 0, 1][n]

    def test_representatives_are_cycles_not_boundaries(self):
        c = GradedComplex([("a", 0), ("b", 0), ("c", 1)], {"a": {"c": 1}, "b": {"c": 1}})
        (rep,) = cohomology(c, (0, 0))[0].representatives
        assert c.boundary(dict(rep)) == {}
        assert cohomology(c, (1, 1))[1].dim == 0

    def test_same_class(self):
        c = GradedComplex([("x", 0), ("y", 1), ("z", 1)], {"x": {"y": 1, "z": 1}})
        assert same_class(c, {"y": 1}, {"z": 1})
        assert not same_class(c, {"y": 1}, {})


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]))
def test_cohomology_matches_enumeration(seed, p):
    c = random_complex(np.random.default_rng(seed), max_generators=7 if p == 3 else 10, p=p)
    for n in range(-1, 6):
        assert cohomology_dims(c, (n, n))[0] == brute_cohomology_dim(c, n)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
def test_kunneth(s1, s2):
    a = random_complex(np.random.default_rng(s1), max_generators=8, degrees=(0, 3))
    b = random_complex(np.random.default_rng(s2), max_generators=8, degrees=(0, 3))
    ha, hb = cohomology_dims(a, (0, 3)), cohomology_dims(b, (0, 3))
    assert cohomology_dims(tensor(a, b), (0, 6)) == convolve(ha, hb, 6)


class TestTensorAndSum:
    def test_unit(self):
        unit = GradedComplex([("1", 0)])
        c = conic_complex(ConicModel(nu=2), degree_cap=10)
        assert cohomology_dims(tensor(unit, c), (0, 8)) == cohomology_dims(c, (0, 8))
        assert len(tensor(unit, c)) == len(c)

    def test_acyclic_tensor_acyclic(self):
        t = tensor(acyclic_pair(), acyclic_pair(deg=1))
        assert cohomology_dims(t, (0, 4)) == [0] * 5

    def test_direct_sum_additive(self):
        s = direct_sum([free_line([0, 2]), acyclic_pair(), free_line([2])], ["a:", "b:", "c:"])
        assert cohomology_dims(s, (0, 2)) == [1, 0, 2]

    def test_truncate(self):
        t = truncate(free_line(range(5)), 2)
        assert t.max_degree == 2


class TestChainMaps:
    def test_identity(self):
        c = conic_complex(ConicModel(nu=1), degree_cap=8)
        assert verify_chain_map(identity_map(c))
        assert is_quasi_isomorphism(identity_map(c))

    def test_cycle_to_non_cycle(self):
        a = free_line([0])
        b = acyclic_pair()
        assert not verify_chain_map(ChainMap(a, b, {"g0": {"a": 1}}))

    def test_degree_mismatch(self):
        with pytest.raises(NotChainMap):
            ChainMap(free_line([0]), free_line([1]), {"g0": {"g1": 1}})

    def test_compose_and_induced(self):
        c = free_line([0, 1])
        f = ChainMap(c, c, {"g0": {"g0": 1}})
        g = compose(f, f)
        assert induced_map(g, 0).to_dense().tolist() == [[1]]
        assert induced_map(g, 1).to_dense().tolist() == [[0]]


class TestCone:
    def test_cone_of_zero(self):
        a, b = free_line([0, 2]), free_line([1])
        dims = cohomology_dims(cone(zero_map(a, b)), (-1, 3))
        assert dims == [1, 0, 2, 0, 0]

    def test_cone_of_surjection(self):
        a = GradedComplex([("u", 0), ("v", 0)])
        b = GradedComplex([("w", 0)])
        k = cone(ChainMap(a, b, {"u": {"w": 1}, "v": {"w": 1}}))
        assert cohomology_dims(k, (-1, 0)) == [1, 0]
        assert [brute_cohomology_dim(k, n) for n in (-1, 0)] == [1, 0]

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_cone_acyclic_iff_quasi_iso(self, seed):
        rng = np.random.default_rng(seed)
        c = random_complex(rng, max_generators=8)
        extra = acyclic_pair(deg=int(rng.integers(0, 3)), prefix="x")
        big = direct_sum([c, extra], ["", ""])
        inc = ChainMap(c, big, {lab: {lab: 1} for lab in c.labels})
        acyclic = not any(cohomology_dims(cone(inc), (-2, 6)))
        assert acyclic and is_quasi_isomorphism(inc)
        drop = ChainMap(c, c, {})
        has_h = any(cohomology_dims(c, (-1, 6)))
        assert is_quasi_isomorphism(drop) == (not has_h)
        assert (not any(cohomology_dims(cone(drop), (-2, 6)))) == (not has_h)

    def test_cone_requires_chain_map(self):
        with pytest.raises(NotChainMap):
            cone(ChainMap(free_line([0]), acyclic_pair(), {"g0": {"a": 1}}))


def constant_system(c, n):
    return DirectSystem([c] * n, [identity_map(c)] * (n - 1))


class TestLimits:
    def test_constant_system(self):
        c = conic_complex(ConicModel(nu=1), degree_cap=8)
        s = constant_system(c, 3)
        assert direct_limit_cohomology(s, (0, 4)).dim_list() == [1, 0, 1, 0, 1]
        assert cohomology_dims(telescope(s, 2), (0, 4)) == [1, 0, 1, 0, 1]

    def test_zero_then_line(self):
        zero = GradedComplex([])
        line = GradedComplex([("k", 0)])
        s = DirectSystem([zero, line, line], [zero_map(zero, line), identity_map(line)])
        table = direct_limit_cohomology(s, (0, 0))
        assert table[0].dim == 1 and table[0].stable_level == 1
        assert cohomology_dims(telescope(s, 2), (0, 0)) == [1]

    def test_regular_conic_telescope(self):
        s = conic_system(4, variant="regular", degree_cap=10)
        for cap in range(len(s)):
            assert cohomology_dims(telescope(s, cap), (0, 10)) == cohomology_dims(s.levels[cap], (0, 10))

    def test_telescope_cap_bounds(self):
        s = constant_system(free_line([0]), 2)
        with pytest.raises(CapExceedsSystem):
            telescope(s, 2)

    def test_not_stabilized(self):
        zero = GradedComplex([])
        line = GradedComplex([("k", 0)])
        s = DirectSystem([zero, line], [zero_map(zero, line)])
        with pytest.raises(NotStabilized):
            direct_limit_cohomology(s, (0, 0))

    def test_system_rejects_non_chain_map(self):
        a, b = free_line([0]), acyclic_pair()
        with pytest.raises(NotChainMap):
            DirectSystem([a, b], [ChainMap(a, b, {"g0": {"a": 1}})])

    def test_constant_tower(self):
        c = conic_complex(ConicModel(nu=2), degree_cap=10)
        t = TowerOfComplexes([c] * 3, [identity_map(c)] * 2)
        table = inverse_limit_cohomology(t, (0, 6))
        assert table.dim_list() == cohomology_dims(c, (0, 6))
        assert all(r.stable_level == 0 for r in table.rows.values())

    def test_tower_requires_surjection(self):
        small, big = free_line([0]), free_line([0, 1])
        with pytest.raises(NotSurjective):
            TowerOfComplexes([big, small], [ChainMap(small, big, {"g0": {"g0": 1}})])
