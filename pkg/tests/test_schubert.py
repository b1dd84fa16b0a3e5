from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from egf.complexes import cohomology_dims, inverse_limit_cohomology
from egf.errors import BadRange, RankDeficient
from egf.schubert import (
    SchubertCritical,
    TorusBGModel,
    cellular_complex,
    check_spectrum,
    critical_points,
    default_spectrum,
    flow_limit,
    gaussian_binomial,
    grassmann_complex,
    index_polynomial,
    morse_index,
    numerical_flow_limit,
    plucker_coordinates,
    random_plane,
    torus_tower,
    tower_report,
    truncated_polynomial_dims,
)

seeds = st.integers(0, 2**32 - 1)


def q_binomial_by_recursion(n, k):
    """Pascal rule [n,k] = [n-1,k-1] + q^k [n-1,k]; independent of the product formula."""
    if k < 0 or k > n:
        return [0]
    if k == 0 or k == n:
        return [1]
    a = q_binomial_by_recursion(n - 1, k - 1)
    b = [0] * k + q_binomial_by_recursion(n - 1, k)
    out = [0] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] += x
    for i, x in enumerate(b):
        out[i] += x
    return out


def plucker_limit(V, spectrum, direction):
    """Dominant nonzero Plucker coordinate under p_J(t) = exp(-t sum_J a_j) p_J(0)."""
    weights = {J: sum(spectrum[j - 1] for j in J) for J, v in plucker_coordinates(V).items() if v}
    pick = max if direction == "backward" else min
    return pick(weights, key=weights.get)


class TestCriticalPoints:
    def test_cpn_indices(self):
        for N in range(6):
            assert sorted(c.morse_index for c in critical_points(1, N + 1)) == list(range(0, 2 * N + 1, 2))

    def test_point(self):
        for n in range(1, 5):
            assert [c.morse_index for c in critical_points(n, n)] == [0]

    def test_gr24(self):
        assert sorted(c.morse_index for c in critical_points(2, 4)) == [0, 2, 4, 4, 6, 8]
        assert gaussian_binomial(4, 2) == [1, 1, 2, 1, 1]

    def test_bad_range(self):
        with pytest.raises(BadRange):
            critical_points(3, 2)
        with pytest.raises(BadRange):
            critical_points(0, 2)

    def test_label(self):
        assert SchubertCritical((1, 3), 2).label == "cell:I={1,3}"

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_census(self, k):
        for n in range(k, 11):
            pts = critical_points(k, n)
            assert len(pts) == comb(n, k)
            assert index_polynomial(k, n) == gaussian_binomial(n, k) == q_binomial_by_recursion(n, k)
            assert all(c.morse_index % 2 == 0 for c in pts)

    def test_odd_index_rejected(self):
        with pytest.raises(ValueError):
            index_polynomial(1, 3, index_fn=lambda I: sum(i - j for j, i in enumerate(I, 1)))

    def test_grassmann_complex(self):
        q = gaussian_binomial(5, 2)
        expected = [q[n // 2] if n % 2 == 0 and n // 2 < len(q) else 0 for n in range(14)]
        assert cohomology_dims(grassmann_complex(2, 5), (0, 13)) == expected


class TestSpectrum:
    def test_default(self):
        assert default_spectrum(3) == (Fraction(-1), Fraction(-1, 2), Fraction(-1, 3))

    def test_rejects(self):
        with pytest.raises(BadRange):
            check_spectrum([-1, -2])
        with pytest.raises(BadRange):
            check_spectrum([-1, 0])
        with pytest.raises(BadRange):
            check_spectrum([-2, -1], 3)


class TestFlow:
    def test_coordinate_plane_is_fixed(self):
        for I in combinations(range(1, 6), 2):
            V = [[1 if i == I[j] else 0 for j in range(2)] for i in range(1, 6)]
            for direction in ("forward", "backward"):
                assert flow_limit(2, 5, V, direction).index_set == I

    def test_cp2_generic_line(self):
        lim = flow_limit(1, 3, [[Fraction(2, 3)], [-5], [1]], "backward")
        assert lim.index_set == (3,) and lim.morse_index == 4
        assert flow_limit(1, 3, [[Fraction(2, 3)], [-5], [1]], "forward").index_set == (1,)

    def test_rank_deficient(self):
        with pytest.raises(RankDeficient):
            flow_limit(2, 3, [[1, 2], [2, 4], [3, 6]])

    def test_bad_direction(self):
        with pytest.raises(ValueError):
            flow_limit(1, 2, [[1], [1]], "sideways")

    @settings(max_examples=60, deadline=None)
    @given(seeds, st.integers(1, 3), st.integers(0, 4))
    def test_random_plane_lands_in_its_cell(self, seed, k, extra):
        n = k + extra
        rng = np.random.default_rng(seed)
        cells = list(combinations(range(1, n + 1), k))
        cell = cells[int(rng.integers(0, len(cells)))]
        V = random_plane(rng, k, n, cell)
        assert flow_limit(k, n, V, "backward").index_set == cell

    @settings(max_examples=60, deadline=None)
    @given(seeds, st.integers(1, 3), st.integers(0, 4))
    def test_matches_plucker_oracle(self, seed, k, extra):
        n = k + extra
        rng = np.random.default_rng(seed)
        V = random_plane(rng, k, n)
        spec = default_spectrum(n)
        for direction in ("forward", "backward"):
            assert flow_limit(k, n, V, direction).index_set == plucker_limit(V, spec, direction)

    def test_generic_plane_endpoints_differ(self):
        rng = np.random.default_rng(1)
        V = random_plane(rng, 2, 4, (3, 4))
        back = flow_limit(2, 4, V, "backward")
        fwd = flow_limit(2, 4, V, "forward")
        assert back.index_set == (3, 4) and fwd.index_set == (1, 2)
        assert back.morse_index > fwd.morse_index

    @settings(max_examples=30, deadline=None)
    @given(seeds, st.integers(-3, 3))
    def test_orbit_invariance(self, seed, t0):
        rng = np.random.default_rng(seed)
        n, k = 5, 2
        V = random_plane(rng, k, n)
        moved = [[x * Fraction(2) ** ((n + 1 - j) * t0) for x in row] for j, row in enumerate(V, start=1)]
        for direction in ("forward", "backward"):
            assert flow_limit(k, n, moved, direction) == flow_limit(k, n, V, direction)

    def test_numerical_oracle(self):
        rng = np.random.default_rng(20)
        spec = (-4, -3, -2, -1)
        for _ in range(5):
            V = random_plane(rng, 2, 4)
            assert numerical_flow_limit(V, spec) == flow_limit(2, 4, V, "backward", spec).index_set


class TestTower:
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_report(self, k):
        rep = tower_report(k, 6)
        assert rep.ok
        for lv in rep.levels[1:]:
            assert lv.min_new_index == 2 * lv.level
            assert lv.new_count == comb(lv.n - 1, k - 1)
        assert rep.stabilization == {l: l // 2 + 1 for l in range(0, 13, 2)}

    def test_undoubled_index_breaks_minimum(self):
        rep = tower_report(1, 4, index_fn=lambda I: sum(i - j for j, i in enumerate(sorted(I), 1)))
        assert [lv.min_new_index for lv in rep.levels[1:]] == [1, 2, 3, 4]

    def test_bad_levels(self):
        with pytest.raises(BadRange):
            tower_report(2, 0)
        with pytest.raises(BadRange):
            tower_report(2, 3, spectrum=[-1, -2, -3, -4, -5])


class TestTorus:
    def test_point(self):
        assert cohomology_dims(cellular_complex(TorusBGModel(1, 0)), (0, 0)) == [1]

    def test_cp3(self):
        assert cohomology_dims(cellular_complex(TorusBGModel(1, 3)), (0, 6)) == [1, 0, 1, 0, 1, 0, 1]

    def test_rank2_level1(self):
        assert cohomology_dims(cellular_complex(TorusBGModel(2, 1)), (0, 4)) == [1, 0, 2, 0, 1]

    @pytest.mark.parametrize("rank,level", [(1, 4), (2, 3), (3, 2)])
    def test_truncated_polynomial(self, rank, level):
        c = cellular_complex(TorusBGModel(rank, level))
        assert cohomology_dims(c, (0, 12)) == truncated_polynomial_dims(rank, level, 12)

    def test_tower_limit(self):
        t = torus_tower(2, 4)
        table = inverse_limit_cohomology(t, (0, 6))
        assert table.dim_list() == truncated_polynomial_dims(2, None, 6)

    def test_negative_rank(self):
        with pytest.raises(BadRange):
            TorusBGModel(-1, 2)


def test_morse_index_examples():
    assert morse_index((1, 2)) == 0
    assert morse_index((3, 4)) == 8
    assert morse_index((2,)) == 2
