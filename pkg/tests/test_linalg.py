from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from egf.errors import AmbientMismatch, NotContained
from egf.linalg import (
    EchelonBasis,
    FieldScalar,
    SparseMatrix,
    Subspace,
    image_basis,
    kernel_basis,
    preimage_subspace,
    rank,
    solve,
    subquotient_dim,
)
from oracles import brute_rank

PRIMES = (2, 3, 5, 7)


def dense(rows, p=2):
    return SparseMatrix.from_dense(np.array(rows, dtype=np.int64), p)


@st.composite
def matrices(draw, max_dim=8, p=None):
    p = p or draw(st.sampled_from(PRIMES))
    r = draw(st.integers(0, max_dim))
    c = draw(st.integers(0, max_dim))
    vals = draw(st.lists(st.integers(0, p - 1), min_size=r * c, max_size=r * c))
    arr = np.array(vals, dtype=np.int64).reshape(r, c) if r * c else np.zeros((r, c), dtype=np.int64)
    return SparseMatrix.from_dense(arr, p)


class TestExamples:
    def test_rank_empty(self):
        assert rank(SparseMatrix(0, 0)) == 0

    def test_rank_identity(self):
        assert rank(SparseMatrix.identity(3)) == 3

    @pytest.mark.parametrize("method", ["dense", "sparse"])
    def test_rank_repeated_rows(self, method):
        assert rank(dense([[1, 1, 0], [1, 1, 0]]), method) == 1

    def test_kernel_identity_and_zero(self):
        assert kernel_basis(SparseMatrix.identity(2)).dim == 0
        assert kernel_basis(SparseMatrix.zeros(2, 2)).dim == 2

    @pytest.mark.parametrize("method", ["dense", "sparse"])
    def test_kernel_row_of_ones(self, method):
        k = kernel_basis(dense([[1, 1]]), method)
        assert k.basis == ({0: 1, 1: 1},)

    def test_image_examples(self):
        assert image_basis(SparseMatrix.zeros(3, 2)).dim == 0
        assert image_basis(SparseMatrix.identity(3)).same_as(Subspace.full(3))
        img = image_basis(dense([[1, 1], [1, 1]]))
        assert img.same_as(Subspace(2, ({0: 1, 1: 1},)))

    def test_preimage_examples(self):
        m = dense([[1, 0], [0, 1]])
        assert preimage_subspace(m, Subspace.full(2)).same_as(Subspace.full(2))
        assert preimage_subspace(m, Subspace.zero(2)).dim == 0
        assert preimage_subspace(m, Subspace(2, ({0: 1},))).same_as(Subspace(2, ({0: 1},)))

    def test_preimage_mismatch(self):
        with pytest.raises(AmbientMismatch):
            preimage_subspace(SparseMatrix.identity(2), Subspace.full(3))

    def test_subquotient_examples(self):
        a = Subspace(2, ({0: 1}, {1: 1}))
        assert subquotient_dim(a, a) == 0
        assert subquotient_dim(Subspace.full(2), Subspace.zero(2)) == 2
        assert subquotient_dim(a, Subspace(2, ({0: 1, 1: 1},))) == 1

    def test_subquotient_not_contained(self):
        with pytest.raises(NotContained):
            subquotient_dim(Subspace(2, ({0: 1},)), Subspace(2, ({1: 1},)))


class TestStructures:
    def test_no_stored_zeros(self):
        m = SparseMatrix(2, 2, [(0, 0, 2), (1, 1, 3)], p=2)
        assert m.entries == frozenset({(1, 1, 1)})

    def test_duplicate_entries_accumulate(self):
        assert SparseMatrix(2, 2, [(0, 0, 1), (0, 0, 1)]).is_zero()
        assert SparseMatrix(2, 2, [(0, 0, 1), (0, 0, 1)], p=3).entries == frozenset({(0, 0, 2)})

    def test_dependent_basis_rejected(self):
        with pytest.raises(ValueError):
            Subspace(2, ({0: 1}, {0: 1}))

    def test_field_scalar_arithmetic(self):
        a, b = FieldScalar(3, 7), FieldScalar(5, 7)
        assert int(a + b) == 1 and int(a * b) == 1 and int(a - b) == 5
        assert int(a / b) == (3 * pow(5, 5, 7)) % 7
        assert int(a.inverse() * a) == 1
        with pytest.raises(ValueError):
            FieldScalar(1, 4)

    @given(st.integers(0, 6), st.integers(0, 6), st.integers(1, 6), st.sampled_from(PRIMES))
    def test_field_axioms(self, x, y, z, p):
        a, b, c = FieldScalar(x, p), FieldScalar(y, p), FieldScalar(z % p or 1, p)
        assert a + b == b + a and a * b == b * a
        assert a * (b + c) == a * b + a * c
        assert int((a / c) * c) == x % p

    def test_solve(self):
        m = dense([[1, 1], [0, 1]], 3)
        x = solve(m, {0: 2, 1: 1})
        assert m.apply(x) == {0: 2, 1: 1}
        assert solve(dense([[1], [1]]), {0: 1}) is None

    def test_echelon_full_reduction_combo(self):
        ech = EchelonBasis(5)
        vs = [{0: 1, 2: 3}, {1: 2, 2: 1}, {0: 4, 1: 1}]
        for v in vs:
            ech.add(v)
        target = {0: 2, 1: 3, 2: 4}
        res, combo = ech.reduce(target, full=True)
        rebuilt = {}
        for i, c in combo.items():
            for k, x in vs[i].items():
                rebuilt[k] = (rebuilt.get(k, 0) + c * x) % 5
        for k, x in res.items():
            rebuilt[k] = (rebuilt.get(k, 0) + x) % 5
        assert {k: v for k, v in rebuilt.items() if v} == target


class TestProperties:
    @settings(max_examples=150, deadline=None)
    @given(matrices())
    def test_rank_nullity(self, m):
        assert rank(m) + kernel_basis(m).dim == m.cols

    @settings(max_examples=150, deadline=None)
    @given(matrices())
    def test_kernel_vectors_are_killed(self, m):
        for v in kernel_basis(m).basis:
            assert m.apply(v) == {}

    @settings(max_examples=150, deadline=None)
    @given(matrices())
    def test_dense_and_sparse_agree(self, m):
        assert rank(m, "dense") == rank(m, "sparse")
        assert kernel_basis(m, "dense").same_as(kernel_basis(m, "sparse"))
        assert image_basis(m, "dense").same_as(image_basis(m, "sparse"))

    @settings(max_examples=60, deadline=None)
    @given(matrices(max_dim=5, p=2))
    def test_rank_against_enumeration(self, m):
        assert rank(m) == brute_rank(m.to_dense(), 2)

    @settings(max_examples=100, deadline=None)
    @given(matrices())
    def test_preimage_of_image_is_everything(self, m):
        pre = preimage_subspace(m, image_basis(m))
        assert pre.dim == m.cols
        assert pre.contains_subspace(kernel_basis(m)) if m.cols else True

    @settings(max_examples=100, deadline=None)
    @given(matrices(), st.data())
    def test_preimage_definition(self, m, data):
        k = data.draw(st.integers(0, m.rows))
        target = Subspace.coordinate(m.rows, range(k), m.p)
        pre = preimage_subspace(m, target)
        for v in pre.basis:
            assert target.contains(m.apply(v))
        assert pre.contains_subspace(kernel_basis(m)) if m.cols else True

    def test_rank_transpose_random_50(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            r, c = rng.integers(1, 51, size=2)
            arr = (rng.random((r, c)) < 0.1).astype(np.int64)
            m = SparseMatrix.from_dense(arr, 2)
            assert rank(m, "sparse") == rank(m.T, "sparse") == rank(m, "dense")

    def test_operations_are_pure(self):
        m = dense([[1, 2, 0], [0, 1, 1]], 3)
        before = m.entries
        assert kernel_basis(m).basis == kernel_basis(m).basis
        assert rank(m) == rank(m)
        assert m.entries == before
