"""Spectral sequence of a filtered cochain complex.

Cohomological indexing: the filtration is decreasing, ``F^p`` is spanned by
generators of level >= p, and ``d_r: E_r^{p,q} -> E_r^{p+r, q-r+1}``.
Pages are computed directly from the subquotient formula

    E_r^p = Z_r^p / (Z_{r-1}^{p+1} + B_{r-1}^p),
    Z_r^p = F^p ∩ d^{-1} F^{p+r},   B_{r-1}^p = d(Z_{r-1}^{p-r+1}),

never by iterating homology, so ``E_{r+1} = H(E_r, d_r)`` is a genuine check.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

from .complexes import GradedComplex, cohomology
from .errors import InvalidFiltration
from .linalg import EchelonBasis, SparseMatrix, Subspace, preimage_subspace, rank, subquotient_dim

Cell = tuple[int, int]


class FilteredComplex:
    """A graded complex with an integer filtration level on every generator."""

    def __init__(self, underlying: GradedComplex, levels: Mapping[str, int]):
        missing = [lab for lab in underlying.labels if lab not in levels]
        if missing:
            raise InvalidFiltration(f"no filtration level for generator {missing[0]!r}")
        extra = [lab for lab in levels if lab not in underlying]
        if extra:
            raise InvalidFiltration(f"filtration level given for undeclared generator {extra[0]!r}")
        self.underlying = underlying
        self.levels = {lab: int(levels[lab]) for lab in underlying.labels}
        for src, terms in underlying.differential.items():
            for tgt in terms:
                if self.levels[tgt] < self.levels[src]:
                    raise InvalidFiltration(
                        f"d({src}) hits {tgt} at level {self.levels[tgt]} below level {self.levels[src]}"
                    )
        self._idx: dict[tuple[int, int], list[int]] = {}

    @property
    def p(self) -> int:
        return self.underlying.p

    @property
    def min_level(self) -> int:
        return min(self.levels.values(), default=0)

    @property
    def max_level(self) -> int:
        return max(self.levels.values(), default=0)

    @property
    def width(self) -> int:
        return self.max_level - self.min_level

    def level(self, label: str) -> int:
        return self.levels[label]

    def filtered_indices(self, p: int, n: int) -> list[int]:
        """Indices of degree-n generators spanning F^p C^n."""
        key = (p, n)
        if key not in self._idx:
            b = self.underlying.basis(n)
            self._idx[key] = [i for i, lab in enumerate(b) if self.levels[lab] >= p]
        return self._idx[key]

    def shifted(self, k: int) -> FilteredComplex:
        return FilteredComplex(self.underlying, {lab: v + k for lab, v in self.levels.items()})

    def associated_graded_dims(self) -> dict[Cell, int]:
        out: dict[Cell, int] = {}
        for lab, n in self.underlying.generators:
            p = self.levels[lab]
            out[(p, n - p)] = out.get((p, n - p), 0) + 1
        return out


@dataclass(frozen=True)
class SSPage:
    r: int
    entries: dict[Cell, int]
    differentials: dict[Cell, SparseMatrix] = field(default_factory=dict, repr=False)

    def dim(self, p: int, q: int) -> int:
        return self.entries.get((p, q), 0)

    def total(self, n: int) -> int:
        return sum(d for (p, q), d in self.entries.items() if p + q == n)

    def nonzero(self) -> dict[Cell, int]:
        return {k: v for k, v in sorted(self.entries.items()) if v}

    def columns(self) -> list[int]:
        return sorted({p for (p, _), v in self.entries.items() if v})

    def differentials_vanish(self) -> bool:
        return all(m.is_zero() for m in self.differentials.values())

    def homology_dims(self) -> dict[Cell, int]:
        """dim ker(d_r out) - rank(d_r in) at every cell; the next page by recursion."""
        out = {}
        for (p, q), dim in self.entries.items():
            m_out = self.differentials.get((p, q))
            m_in = self.differentials.get((p - self.r, q + self.r - 1))
            out[(p, q)] = dim - (rank(m_out) if m_out is not None else 0) - (rank(m_in) if m_in is not None else 0)
        return out

    def restricted(self, window: tuple[int, int, int, int] | None) -> SSPage:
        if window is None:
            return self
        p0, p1, q0, q1 = window
        keep = lambda c: p0 <= c[0] <= p1 and q0 <= c[1] <= q1  # noqa: E731
        return SSPage(
            self.r,
            {c: v for c, v in self.entries.items() if keep(c)},
            {c: m for c, m in self.differentials.items() if keep(c)},
        )


class _PageBuilder:
    """Caches Z-subspaces of one filtered complex across pages."""

    def __init__(self, fc: FilteredComplex):
        self.fc = fc
        self.c = fc.underlying
        self._z: dict[tuple[int, int, int], Subspace] = {}

    def Z(self, r: int, p: int, n: int) -> Subspace:
        key = (r, p, n)
        if key in self._z:
            return self._z[key]
        c, fc = self.c, self.fc
        dim_n = c.dim(n)
        cols = fc.filtered_indices(p, n)
        if not cols:
            z = Subspace.zero(dim_n, c.p)
        else:
            sub = c.d(n).submatrix(range(c.dim(n + 1)), cols)
            target = Subspace.coordinate(c.dim(n + 1), fc.filtered_indices(p + r, n + 1), c.p)
            pre = preimage_subspace(sub, target)
            z = Subspace(dim_n, tuple({cols[i]: a for i, a in v.items()} for v in pre.basis), c.p)
        self._z[key] = z
        return z

    def B(self, r: int, p: int, n: int) -> Subspace:
        """B_r^p in degree n: d applied to Z_r^{p-r} in degree n-1."""
        z = self.Z(r, p - r, n - 1)
        d = self.c.d(n - 1)
        return Subspace.span(self.c.dim(n), (d.apply(v) for v in z.basis), self.c.p)

    def denominator(self, r: int, p: int, n: int) -> Subspace:
        return self.Z(r - 1, p + 1, n) + self.B(r - 1, p, n)

    def cell(self, r: int, p: int, n: int) -> tuple[int, list[dict], Subspace]:
        z = self.Z(r, p, n)
        den = self.denominator(r, p, n)
        dim = subquotient_dim(z, den)
        ech = EchelonBasis(self.c.p)
        for v in den.basis:
            ech.add(v)
        reps = [v for v in z.basis if ech.add(v)]
        assert len(reps) == dim
        return dim, reps, den

    def page(self, r: int) -> SSPage:
        if r < 0:
            raise ValueError("page index must be non-negative")
        fc, c = self.fc, self.c
        if not len(c):
            return SSPage(r, {}, {})
        plo, phi = fc.min_level, fc.max_level
        cells: dict[tuple[int, int], tuple[int, list[dict], Subspace]] = {}
        for n in c.degrees:
            for p in range(plo, phi + 1):
                cells[(p, n)] = self.cell(r, p, n)
        entries = {(p, n - p): v[0] for (p, n), v in cells.items()}
        diffs: dict[Cell, SparseMatrix] = {}
        for (p, n), (dim, reps, _) in cells.items():
            tgt = cells.get((p + r, n + 1))
            if tgt is None:
                rows = 0
                cols = []
                for z in reps:
                    # F^{p+r} vanishes or degree n+1 is empty; d z must be 0 there
                    assert not c.d(n).apply(z)
                    cols.append({})
            else:
                tdim, treps, tden = tgt
                ech = EchelonBasis(c.p)
                for v in tden.basis:
                    ech.add(v)
                m = len(ech)
                for v in treps:
                    ech.add(v)
                rows = tdim
                cols = []
                for z in reps:
                    res, combo = ech.reduce(c.d(n).apply(z))
                    assert not res
                    cols.append({i - m: a for i, a in combo.items() if i >= m})
            diffs[(p, n - p)] = SparseMatrix.from_columns(rows, cols, c.p)
        return SSPage(r, entries, diffs)


def page(fc: FilteredComplex, r: int, window: tuple[int, int, int, int] | None = None) -> SSPage:
    """E_r with its differential d_r, optionally restricted to ``(p0, p1, q0, q1)``."""
    return _PageBuilder(fc).page(r).restricted(window)


def pages(fc: FilteredComplex, r_max: int) -> list[SSPage]:
    b = _PageBuilder(fc)
    return [b.page(r) for r in range(r_max + 1)]


def collapse_bound(fc: FilteredComplex) -> int:
    """Past this page every d_r leaves the occupied band of levels."""
    return fc.width + 1


def limit_page(fc: FilteredComplex) -> tuple[SSPage, int]:
    """``(E_infinity, collapse page)``; the collapse page is the first r >= 1 after which all d_r vanish."""
    b = _PageBuilder(fc)
    R = collapse_bound(fc)
    all_pages = [b.page(r) for r in range(1, R + 1)]
    collapse = R
    for pg in reversed(all_pages):
        if pg.differentials_vanish():
            collapse = pg.r
        else:
            break
    return all_pages[-1], collapse


@dataclass(frozen=True)
class ConvergenceReport:
    rows: tuple[tuple[int, int, int], ...]  # (n, sum_p dim E_inf^{p,n-p}, dim H^n)
    collapse_page: int

    @property
    def discrepancies(self) -> list[int]:
        return [n for n, e, h in self.rows if e != h]

    @property
    def ok(self) -> bool:
        return not self.discrepancies


def compare_with_cohomology(fc: FilteredComplex) -> ConvergenceReport:
    einf, collapse = limit_page(fc)
    c = fc.underlying
    if not len(c):
        return ConvergenceReport((), collapse)
    lo, hi = c.min_degree, c.max_degree
    h = cohomology(c, (lo, hi)).dims()
    rows = tuple((n, einf.total(n), h[n]) for n in range(lo, hi + 1))
    return ConvergenceReport(rows, collapse)


def page_recursion_holds(fc: FilteredComplex, r_max: int | None = None) -> bool:
    """E_{r+1} from the subquotient formula equals H(E_r, d_r) for r < r_max."""
    if r_max is None:
        r_max = collapse_bound(fc)
    ps = pages(fc, r_max)
    return all(ps[r + 1].entries == ps[r].homology_dims() for r in range(r_max))
