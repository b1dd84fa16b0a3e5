"""Exact sparse linear algebra over a prime field F_p.

Vectors are plain ``dict[int, int]`` maps from coordinate index to a nonzero
residue in ``[1, p)``.  Matrices are stored column-wise.  Every routine here is
pure: inputs are never mutated and no floating point is used.

Two elimination paths exist.  The sparse path (:class:`EchelonBasis`) reduces
columns by their lowest nonzero row, persistence style.  The dense path works
on small numpy integer arrays and is used for matrices under 64x64 unless a
method is forced; the two paths are cross-checked in the test-suite.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import AmbientMismatch, NotContained

Vector = dict[int, int]

DENSE_LIMIT = 64


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, (int, np.integer)) or not is_prime(int(p)):
        raise ValueError(f"field characteristic must be prime, got {p!r}")
    return int(p)


def inverse(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError("zero has no inverse")
    return pow(a, p - 2, p)


@dataclass(frozen=True)
class FieldScalar:
    """An element of F_p.  Internals use bare ints; this is the public face."""

    value: int
    p: int = 2

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(self, "value", self.value % self.p)

    def _coerce(self, other) -> int:
        if isinstance(other, FieldScalar):
            if other.p != self.p:
                raise ValueError("mixing scalars from different fields")
            return other.value
        if isinstance(other, int):
            return other % self.p
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return FieldScalar(self.value + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return FieldScalar(self.value - o, self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        return FieldScalar(o - self.value, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        return FieldScalar(self.value * o, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldScalar(-self.value, self.p)

    def inverse(self) -> FieldScalar:
        return FieldScalar(inverse(self.value, self.p), self.p)

    def __truediv__(self, other):
        o = self._coerce(other)
        return FieldScalar(self.value * inverse(o, self.p), self.p)

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value


# --------------------------------------------------------------------------
# vector helpers


def normalize(v: Mapping[int, int], p: int) -> Vector:
    out = {}
    for i, c in v.items():
        c %= p
        if c:
            out[i] = c
    return out


def _axpy(y: Vector, x: Mapping[int, int], a: int, p: int) -> None:
    """y += a*x in place (y is always a private scratch copy)."""
    for i, c in x.items():
        s = (y.get(i, 0) + a * c) % p
        if s:
            y[i] = s
        else:
            y.pop(i, None)


def scale(v: Mapping[int, int], a: int, p: int) -> Vector:
    a %= p
    if a == 0:
        return {}
    return {i: (c * a) % p for i, c in v.items()}


def add(u: Mapping[int, int], v: Mapping[int, int], p: int, b: int = 1) -> Vector:
    out = dict(u)
    _axpy(out, v, b, p)
    return out


# --------------------------------------------------------------------------


class SparseMatrix:
    """Immutable sparse matrix over F_p, stored as a tuple of column dicts."""

    __slots__ = ("rows", "cols", "p", "_columns", "__dict__")

    def __init__(self, rows: int, cols: int, entries: Iterable[tuple[int, int, int]] = (), p: int = 2):
        if rows < 0 or cols < 0:
            raise ValueError("matrix shape must be non-negative")
        self.rows = int(rows)
        self.cols = int(cols)
        self.p = check_prime(p)
        columns: list[Vector] = [{} for _ in range(self.cols)]
        for r, c, v in entries:
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise IndexError(f"entry ({r}, {c}) outside {self.rows}x{self.cols}")
            col = columns[c]
            s = (col.get(r, 0) + int(v)) % self.p
            if s:
                col[r] = s
            else:
                col.pop(r, None)
        self._columns = tuple(columns)

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[Mapping[int, int]], p: int = 2) -> SparseMatrix:
        m = cls(rows, len(columns), (), p)
        cols = []
        for j, col in enumerate(columns):
            nc = normalize(col, m.p)
            if nc and (min(nc) < 0 or max(nc) >= rows):
                raise IndexError(f"column {j} has a row index outside [0, {rows})")
            cols.append(nc)
        m._columns = tuple(cols)
        return m

    @classmethod
    def from_dense(cls, array, p: int = 2) -> SparseMatrix:
        a = np.asarray(array, dtype=np.int64)
        if a.ndim != 2:
            raise ValueError("dense matrix must be two-dimensional")
        rows, cols = a.shape
        entries = [(int(r), int(c), int(a[r, c])) for r, c in zip(*np.nonzero(a % p))]
        return cls(rows, cols, entries, p)

    @classmethod
    def identity(cls, n: int, p: int = 2) -> SparseMatrix:
        return cls(n, n, ((i, i, 1) for i in range(n)), p)

    @classmethod
    def zeros(cls, rows: int, cols: int, p: int = 2) -> SparseMatrix:
        return cls(rows, cols, (), p)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @cached_property
    def entries(self) -> frozenset[tuple[int, int, int]]:
        return frozenset((r, c, v) for c, col in enumerate(self._columns) for r, v in col.items())

    @property
    def nnz(self) -> int:
        return sum(len(c) for c in self._columns)

    def column(self, j: int) -> Vector:
        return dict(self._columns[j])

    def columns(self) -> list[Vector]:
        return [dict(c) for c in self._columns]

    def is_zero(self) -> bool:
        return not any(self._columns)

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.rows, self.cols), dtype=np.int64)
        for c, col in enumerate(self._columns):
            for r, v in col.items():
                a[r, c] = v
        return a

    def transpose(self) -> SparseMatrix:
        return SparseMatrix(self.cols, self.rows, ((c, r, v) for r, c, v in self.entries), self.p)

    @property
    def T(self) -> SparseMatrix:
        return self.transpose()

    def apply(self, v: Mapping[int, int]) -> Vector:
        out: Vector = {}
        for j, a in v.items():
            if not 0 <= j < self.cols:
                raise IndexError(f"vector index {j} outside {self.cols} columns")
            _axpy(out, self._columns[j], a, self.p)
        return out

    def __matmul__(self, other):
        if isinstance(other, SparseMatrix):
            if other.p != self.p:
                raise ValueError("matrices over different fields")
            if self.cols != other.rows:
                raise AmbientMismatch(f"cannot multiply {self.shape} by {other.shape}")
            return SparseMatrix.from_columns(self.rows, [self.apply(c) for c in other._columns], self.p)
        if isinstance(other, Mapping):
            return self.apply(other)
        return NotImplemented

    def __add__(self, other: SparseMatrix) -> SparseMatrix:
        if self.shape != other.shape or self.p != other.p:
            raise AmbientMismatch("shape or field mismatch in matrix sum")
        return SparseMatrix.from_columns(self.rows, [add(a, b, self.p) for a, b in zip(self._columns, other._columns)], self.p)

    def __sub__(self, other: SparseMatrix) -> SparseMatrix:
        if self.shape != other.shape or self.p != other.p:
            raise AmbientMismatch("shape or field mismatch in matrix difference")
        return SparseMatrix.from_columns(self.rows, [add(a, b, self.p, -1) for a, b in zip(self._columns, other._columns)], self.p)

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> SparseMatrix:
        rmap = {r: i for i, r in enumerate(row_idx)}
        cols = []
        for j in col_idx:
            cols.append({rmap[r]: v for r, v in self._columns[j].items() if r in rmap})
        return SparseMatrix.from_columns(len(row_idx), cols, self.p)

    def hstack(self, other: SparseMatrix) -> SparseMatrix:
        if self.rows != other.rows or self.p != other.p:
            raise AmbientMismatch("row count mismatch in hstack")
        return SparseMatrix.from_columns(self.rows, list(self._columns) + list(other._columns), self.p)

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and self.p == other.p and self._columns == other._columns

    def __hash__(self):
        return hash((self.shape, self.p, self.entries))

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz}, p={self.p})"


class EchelonBasis:
    """Incrementally built reduced basis of a span, keyed by lowest nonzero row.

    Every stored vector remembers its expression as a combination of the
    *original* vectors accepted so far, so ``reduce`` can solve linear systems.
    """

    def __init__(self, p: int = 2):
        self.p = p
        self._pivot: dict[int, tuple[Vector, Vector]] = {}  # low row -> (reduced, combination)
        self.originals: list[Vector] = []

    def __len__(self):
        return len(self.originals)

    def reduce(self, v: Mapping[int, int], full: bool = False) -> tuple[Vector, Vector]:
        """Return ``(residual, combo)`` with ``v = residual + sum combo[i] * originals[i]``.

        With ``full=False`` reduction stops once the lowest entry is not a
        pivot (enough to decide membership); ``full=True`` gives the normal
        form, with no entry on any pivot row.
        """
        p = self.p
        res = normalize(v, p)
        combo: Vector = {}
        if not full:
            while res:
                low = max(res)
                hit = self._pivot.get(low)
                if hit is None:
                    break
                vec, comb = hit
                a = (-res[low] * inverse(vec[low], p)) % p
                _axpy(res, vec, a, p)
                _axpy(combo, comb, -a, p)
            return res, combo
        cursor = None
        while True:
            hits = [i for i in res if i in self._pivot and (cursor is None or i < cursor)]
            if not hits:
                return res, combo
            low = max(hits)
            vec, comb = self._pivot[low]
            a = (-res[low] * inverse(vec[low], p)) % p
            _axpy(res, vec, a, p)
            _axpy(combo, comb, -a, p)
            cursor = low

    def add(self, v: Mapping[int, int]) -> bool:
        """Insert ``v``; return True iff it was independent of the current span."""
        res, combo = self.reduce(v)
        if not res:
            return False
        idx = len(self.originals)
        self.originals.append(normalize(v, self.p))
        # res = v - sum combo * originals, so res is expressed by idx - combo
        comb: Vector = {idx: 1}
        _axpy(comb, combo, -1, self.p)
        self._pivot[max(res)] = (res, comb)
        return True

    def contains(self, v: Mapping[int, int]) -> bool:
        return not self.reduce(v)[0]

    @property
    def pivots(self) -> list[int]:
        return sorted(self._pivot)


# --------------------------------------------------------------------------
# subspaces


@dataclass(frozen=True)
class Subspace:
    """A linear subspace of F_p^ambient_dim given by an independent basis."""

    ambient_dim: int
    basis: tuple[Vector, ...] = ()
    p: int = 2
    _echelon: EchelonBasis | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        check_prime(self.p)
        basis = tuple(normalize(v, self.p) for v in self.basis)
        ech = EchelonBasis(self.p)
        for v in basis:
            if v and (min(v) < 0 or max(v) >= self.ambient_dim):
                raise AmbientMismatch(f"basis vector outside ambient dimension {self.ambient_dim}")
            if not ech.add(v):
                raise ValueError("subspace basis vectors are linearly dependent")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "_echelon", ech)

    @classmethod
    def span(cls, ambient_dim: int, vectors: Iterable[Mapping[int, int]], p: int = 2) -> Subspace:
        ech = EchelonBasis(p)
        keep = [normalize(v, p) for v in vectors if ech.add(v)]
        return cls(ambient_dim, tuple(keep), p)

    @classmethod
    def zero(cls, ambient_dim: int, p: int = 2) -> Subspace:
        return cls(ambient_dim, (), p)

    @classmethod
    def full(cls, ambient_dim: int, p: int = 2) -> Subspace:
        return cls(ambient_dim, tuple({i: 1} for i in range(ambient_dim)), p)

    @classmethod
    def coordinate(cls, ambient_dim: int, indices: Iterable[int], p: int = 2) -> Subspace:
        return cls(ambient_dim, tuple({i: 1} for i in sorted(set(indices))), p)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __len__(self):
        return self.dim

    def contains(self, v: Mapping[int, int]) -> bool:
        return self._echelon.contains(v)

    def contains_subspace(self, other: Subspace) -> bool:
        if other.ambient_dim != self.ambient_dim:
            raise AmbientMismatch("subspaces live in different ambient spaces")
        return all(self.contains(v) for v in other.basis)

    def __add__(self, other: Subspace) -> Subspace:
        if other.ambient_dim != self.ambient_dim:
            raise AmbientMismatch("subspaces live in different ambient spaces")
        return Subspace.span(self.ambient_dim, self.basis + other.basis, self.p)

    def as_matrix(self) -> SparseMatrix:
        return SparseMatrix.from_columns(self.ambient_dim, self.basis, self.p)

    def same_as(self, other: Subspace) -> bool:
        return self.dim == other.dim and self.contains_subspace(other)


# --------------------------------------------------------------------------
# dense path


def _dense_rref(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    R = np.array(a, dtype=np.int64) % p
    m, n = R.shape
    pivots: list[int] = []
    row = 0
    for col in range(n):
        if row >= m:
            break
        nz = np.nonzero(R[row:, col])[0]
        if nz.size == 0:
            continue
        r = row + int(nz[0])
        if r != row:
            R[[row, r]] = R[[r, row]]
        R[row] = (R[row] * inverse(int(R[row, col]), p)) % p
        others = np.nonzero(R[:, col])[0]
        for o in others:
            if o != row:
                R[o] = (R[o] - R[o, col] * R[row]) % p
        pivots.append(col)
        row += 1
    return R, pivots


def _use_dense(m: SparseMatrix, method: str) -> bool:
    if method not in ("auto", "dense", "sparse"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        return m.rows < DENSE_LIMIT and m.cols < DENSE_LIMIT
    return method == "dense"


def rank(m: SparseMatrix, method: str = "auto") -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    if _use_dense(m, method):
        return len(_dense_rref(m.to_dense(), m.p)[1])
    ech = EchelonBasis(m.p)
    return sum(ech.add(c) for c in m._columns)


def kernel_basis(m: SparseMatrix, method: str = "auto") -> Subspace:
    p = m.p
    if m.cols == 0:
        return Subspace.zero(0, p)
    if m.rows == 0 or m.is_zero():
        return Subspace.full(m.cols, p)
    if _use_dense(m, method):
        R, pivots = _dense_rref(m.to_dense(), p)
        vecs = []
        pivot_set = set(pivots)
        for free in range(m.cols):
            if free in pivot_set:
                continue
            v = {free: 1}
            for i, pc in enumerate(pivots):
                c = (-int(R[i, free])) % p
                if c:
                    v[pc] = c
            vecs.append(v)
        return Subspace(m.cols, tuple(vecs), p)
    ech = EchelonBasis(p)
    accepted: list[int] = []
    vecs = []
    for j, col in enumerate(m._columns):
        res, combo = ech.reduce(col)
        if res:
            ech.add(col)
            accepted.append(j)
            continue
        v = {j: 1}
        for i, c in combo.items():
            v[accepted[i]] = (-c) % p
        vecs.append(normalize(v, p))
    return Subspace(m.cols, tuple(vecs), p)


def image_basis(m: SparseMatrix, method: str = "auto") -> Subspace:
    p = m.p
    if m.rows == 0 or m.cols == 0:
        return Subspace.zero(m.rows, p)
    if _use_dense(m, method):
        _, pivots = _dense_rref(m.to_dense(), p)
        return Subspace(m.rows, tuple(m.column(j) for j in pivots), p)
    return Subspace.span(m.rows, m._columns, p)


def preimage_subspace(m: SparseMatrix, target: Subspace, method: str = "auto") -> Subspace:
    """``{v : m v in span(target)}`` as a subspace of the domain."""
    if target.ambient_dim != m.rows:
        raise AmbientMismatch(f"target lives in dimension {target.ambient_dim}, matrix has {m.rows} rows")
    if target.p != m.p:
        raise AmbientMismatch("target subspace is over a different field")
    if m.cols == 0:
        return Subspace.zero(0, m.p)
    block = m.hstack(target.as_matrix())
    ker = kernel_basis(block, method)
    projected = [{i: c for i, c in v.items() if i < m.cols} for v in ker.basis]
    return Subspace.span(m.cols, projected, m.p)


def subquotient_dim(a: Subspace, b: Subspace) -> int:
    """dim(a) - dim(b) after verifying ``b`` is contained in ``a``."""
    if a.ambient_dim != b.ambient_dim:
        raise AmbientMismatch("subspaces live in different ambient spaces")
    if not a.contains_subspace(b):
        raise NotContained("second subspace is not contained in the first")
    return a.dim - b.dim


def solve(m: SparseMatrix, b: Mapping[int, int]) -> Vector | None:
    """Some ``x`` with ``m x = b``, or None when ``b`` is outside the column span."""
    ech = EchelonBasis(m.p)
    accepted = [j for j, col in enumerate(m._columns) if ech.add(col)]
    res, combo = ech.reduce(b)
    if res:
        return None
    return normalize({accepted[i]: c for i, c in combo.items()}, m.p)
