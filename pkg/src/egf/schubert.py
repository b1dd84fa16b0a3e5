"""Morse-Schubert model of Grassmannians and of classifying-space towers.

The Morse function on Gr(k, n) built from a diagonal matrix A with spectrum
a_1 < ... < a_n < 0 has the coordinate k-planes as critical points.  The
plane spanned by e_i, i in I = {i_1 < ... < i_k}, has real Morse index
2 * sum_j (i_j - j).  The negative gradient flow acts by V -> exp(-A t) V,
so limits of the flow are coordinate planes picked out by the order of the
decay rates; we compute them exactly by a greedy pivot search.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import comb

import numpy as np

from .complexes import ChainMap, GradedComplex, TowerOfComplexes
from .errors import BadRange, RankDeficient

IndexSet = tuple[int, ...]
IndexFn = Callable[[IndexSet], int]


def morse_index(index_set: Sequence[int]) -> int:
    """Real Morse index 2 * sum_j (i_j - j) of a coordinate plane (1-based)."""
    return 2 * sum(i - j for j, i in enumerate(sorted(index_set), start=1))


def format_index_set(index_set: Sequence[int]) -> str:
    return "I={" + ",".join(str(i) for i in index_set) + "}"


@dataclass(frozen=True, order=True)
class SchubertCritical:
    index_set: IndexSet
    morse_index: int

    @property
    def label(self) -> str:
        return "cell:" + format_index_set(self.index_set)


def _check_range(k: int, n: int) -> None:
    if not (1 <= k <= n):
        raise BadRange(f"need 1 <= k <= n, got k={k}, n={n}")


def critical_points(k: int, n: int, index_fn: IndexFn = morse_index) -> list[SchubertCritical]:
    """All C(n, k) coordinate k-planes of C^n with their Morse indices."""
    _check_range(k, n)
    return [SchubertCritical(I, index_fn(I)) for I in combinations(range(1, n + 1), k)]


# -- q-binomial oracle -------------------------------------------------------


def _polymul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _polydiv_exact(a: list[int], b: list[int]) -> list[int]:
    """a / b for integer polynomials where b is monic at the bottom and divides a."""
    a = list(a)
    if b[0] not in (1, -1):
        raise ValueError("divisor must have unit constant term")
    q = [0] * (len(a) - len(b) + 1)
    for i in range(len(q)):
        c = a[i] * b[0]
        q[i] = c
        if c:
            for j, y in enumerate(b):
                a[i + j] -= c * y
    if any(a):
        raise ValueError("polynomial division is not exact")
    return q


def gaussian_binomial(n: int, k: int) -> list[int]:
    """Coefficients of [n choose k]_q from the product formula prod (1 - q^{n-k+i}) / (1 - q^i)."""
    if not 0 <= k <= n:
        return [0]
    num = [1]
    den = [1]
    for i in range(1, k + 1):
        num = _polymul(num, [1] + [0] * (n - k + i - 1) + [-1])
        den = _polymul(den, [1] + [0] * (i - 1) + [-1])
    out = _polydiv_exact(num, den)
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def index_polynomial(k: int, n: int, index_fn: IndexFn = morse_index) -> list[int]:
    """Coefficients of sum over critical points of q^{index/2}."""
    pts = critical_points(k, n, index_fn)
    top = max(c.morse_index for c in pts) // 2
    out = [0] * (top + 1)
    for c in pts:
        if c.morse_index % 2:
            raise ValueError(f"odd Morse index {c.morse_index} at {c.label}")
        out[c.morse_index // 2] += 1
    return out


# -- flow limits ---------------------------------------------------------------


def default_spectrum(n: int) -> tuple[Fraction, ...]:
    """a_i = -1/i: strictly increasing and negative."""
    return tuple(Fraction(-1, i) for i in range(1, n + 1))


def check_spectrum(spectrum: Sequence, n: int | None = None) -> tuple[Fraction, ...]:
    spec = tuple(Fraction(a) for a in spectrum)
    if n is not None and len(spec) < n:
        raise BadRange(f"spectrum has {len(spec)} values, need {n}")
    if any(a >= 0 for a in spec):
        raise BadRange("spectrum must be negative")
    if any(b <= a for a, b in zip(spec, spec[1:])):
        raise BadRange("spectrum must be strictly increasing")
    return spec


def _as_fraction_matrix(V) -> list[list[Fraction]]:
    return [[Fraction(x) for x in row] for row in V]


def _greedy_rows(rows: list[list[Fraction]], order: Sequence[int], k: int) -> IndexSet:
    basis: list[tuple[int, list[Fraction]]] = []  # (pivot column, reduced row)
    chosen = []
    for r in order:
        v = list(rows[r])
        for piv, b in basis:
            if v[piv]:
                c = v[piv] / b[piv]
                v = [x - c * y for x, y in zip(v, b)]
        nz = next((j for j, x in enumerate(v) if x), None)
        if nz is not None:
            basis.append((nz, v))
            chosen.append(r + 1)
            if len(chosen) == k:
                break
    if len(chosen) < k:
        raise RankDeficient(f"plane has rank {len(chosen)} < {k}")
    return tuple(sorted(chosen))


def flow_limit(
    k: int,
    n: int,
    V,
    direction: str = "backward",
    spectrum: Sequence | None = None,
    index_fn: IndexFn = morse_index,
) -> SchubertCritical:
    """Limit coordinate plane of span(exp(-A t) V) as t -> +inf or -inf.

    Row j of V is scaled by exp(-a_j t).  Backward in time the least
    negative rates dominate, forward the most negative ones do, and the
    limit is the coordinate plane on the first k independent rows in that
    order.  The backward limit names the Schubert cell containing V.
    """
    _check_range(k, n)
    spec = check_spectrum(spectrum if spectrum is not None else default_spectrum(n), n)[:n]
    rows = _as_fraction_matrix(V)
    if len(rows) != n or any(len(r) != k for r in rows):
        raise ValueError(f"V must be an {n}x{k} matrix")
    if direction == "backward":
        order = sorted(range(n), key=lambda j: -spec[j])
    elif direction == "forward":
        order = sorted(range(n), key=lambda j: spec[j])
    else:
        raise ValueError("direction must be 'forward' or 'backward'")
    I = _greedy_rows(rows, order, k)
    return SchubertCritical(I, index_fn(I))


def plucker_coordinates(V) -> dict[IndexSet, Fraction]:
    """Exact k x k minors of an n x k matrix, keyed by 1-based row sets."""
    rows = _as_fraction_matrix(V)
    n, k = len(rows), len(rows[0]) if rows else 0
    out = {}
    for J in combinations(range(n), k):
        out[tuple(j + 1 for j in J)] = _det([rows[j] for j in J])
    return out


def _det(m: list[list[Fraction]]) -> Fraction:
    m = [list(r) for r in m]
    size = len(m)
    det = Fraction(1)
    for c in range(size):
        piv = next((r for r in range(c, size) if m[r][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, size):
            f = m[r][c] / m[c][c]
            if f:
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return det


def numerical_flow_limit(V, spectrum: Sequence, t_end: float = -40.0) -> IndexSet:
    """Integrate the flow on Plucker coordinates numerically and read off the dominant one.

    Under V -> exp(-A t) V the coordinate p_J obeys dp_J/dt = -(sum_{j in J} a_j) p_J.
    Starting from exact coordinates keeps vanishing ones identically zero.
    """
    from scipy.integrate import solve_ivp

    pl = plucker_coordinates(V)
    keys = sorted(pl)
    rates = np.array([-float(sum(Fraction(spectrum[j - 1]) for j in J)) for J in keys])
    y0 = np.array([float(pl[J]) for J in keys])
    sol = solve_ivp(lambda _t, y: rates * y, (0.0, t_end), y0, method="DOP853", rtol=1e-10, atol=1e-300)
    y = np.abs(sol.y[:, -1])
    return keys[int(np.argmax(y))]


def random_plane(rng: np.random.Generator, k: int, n: int, cell: IndexSet | None = None) -> list[list[Fraction]]:
    """A random rational plane in the Schubert cell ``cell`` (random if omitted).

    Column j has a 1 in row i_j, zeros below it, and small random rationals
    above; a random invertible column mix then hides the echelon shape.
    """
    if cell is None:
        cells = list(combinations(range(1, n + 1), k))
        cell = cells[int(rng.integers(0, len(cells)))]
    V = [[Fraction(0)] * k for _ in range(n)]
    for j, i in enumerate(cell):
        V[i - 1][j] = Fraction(1)
        for r in range(i - 1):
            if r + 1 not in cell:
                V[r][j] = Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4)))
    while True:
        g = [[Fraction(int(rng.integers(-3, 4))) for _ in range(k)] for _ in range(k)]
        if _det(g):
            break
    return [[sum((V[r][a] * g[a][b] for a in range(k)), Fraction(0)) for b in range(k)] for r in range(n)]


def grassmann_complex(k: int, n: int, p: int = 2, index_fn: IndexFn = morse_index) -> GradedComplex:
    """Cellular cochain complex of Gr(k, n): one cell per critical point, zero differential."""
    pts = critical_points(k, n, index_fn)
    return GradedComplex([(c.label, c.morse_index) for c in pts], {}, p, name=f"grassmann:{k},{n}")


# -- tower of Grassmannians ------------------------------------------------------


@dataclass(frozen=True)
class TowerLevel:
    level: int
    n: int
    count: int
    new_count: int
    min_new_index: int | None
    inclusion_ok: bool


@dataclass(frozen=True)
class TowerReport:
    k: int
    levels: tuple[TowerLevel, ...]
    stabilization: dict[int, int]  # l -> N(l)

    @property
    def ok(self) -> bool:
        return all(lv.inclusion_ok for lv in self.levels) and all(
            lv.new_count == comb(lv.n - 1, self.k - 1) for lv in self.levels[1:]
        )


def tower_report(k: int, N_max: int, spectrum: Sequence | None = None, index_fn: IndexFn = morse_index) -> TowerReport:
    """Level N of the tower is Gr(k, k + N); checks inclusions and computes N(l).

    N(l) is the least level from which every newly added critical point has
    index > l, read off the levels 1..N_max.
    """
    if N_max < 1:
        raise BadRange("N_max must be at least 1")
    n_top = k + N_max
    if spectrum is not None:
        check_spectrum(spectrum, n_top)
    rows = []
    prev: set[IndexSet] = set()
    prev_idx: dict[IndexSet, int] = {}
    for N in range(N_max + 1):
        n = k + N
        pts = critical_points(k, n, index_fn)
        cur = {c.index_set: c.morse_index for c in pts}
        inclusion = all(I in cur and cur[I] == prev_idx[I] for I in prev)
        new = [c.morse_index for c in pts if c.index_set not in prev] if N else []
        rows.append(TowerLevel(N, n, len(pts), len(new), min(new) if new else None, inclusion))
        prev, prev_idx = set(cur), cur
    stab = {}
    for l in range(0, 2 * N_max + 1, 2):
        N0 = N_max + 1
        for lv in reversed(rows[1:]):
            if lv.min_new_index is not None and lv.min_new_index > l:
                N0 = lv.level
            else:
                break
        stab[l] = N0
    return TowerReport(k, tuple(rows), stab)


# -- tori -----------------------------------------------------------------------


def cell_label(m: Sequence[int]) -> str:
    return "cell:(" + ",".join(str(x) for x in m) + ")"


@dataclass(frozen=True)
class TorusBGModel:
    """Level-N approximation (CP^N)^r of the classifying space of an r-torus."""

    rank: int
    level: int

    def __post_init__(self):
        if self.rank < 0 or self.level < 0:
            raise BadRange("rank and level must be non-negative")

    def cells(self) -> list[tuple[int, ...]]:
        return list(product(range(self.level + 1), repeat=self.rank))


def cellular_complex(model: TorusBGModel, p: int = 2) -> GradedComplex:
    """Product Schubert cells of (CP^N)^r; every cell is even so d = 0."""
    gens = [(cell_label(m), 2 * sum(m)) for m in model.cells()]
    return GradedComplex(gens, {}, p, name=f"bg:{model.rank},{model.level}")


def truncated_polynomial_dims(rank: int, level: int, max_degree: int) -> list[int]:
    """dims of K[l_1..l_r]/(l_i^{N+1}) in degrees 0..max_degree, |l_i| = 2 (level=None: untruncated)."""
    one = np.zeros(max_degree + 1, dtype=np.int64)
    for m in range(0, max_degree // 2 + 1):
        if level is None or m <= level:
            one[2 * m] = 1
    out = np.zeros(max_degree + 1, dtype=np.int64)
    out[0] = 1
    for _ in range(rank):
        out = np.convolve(out, one)[: max_degree + 1]
    return [int(x) for x in out]


def torus_tower(rank: int, N_max: int, p: int = 2) -> TowerOfComplexes:
    """Levels (CP^N)^r for N = 0..N_max; projections keep cells that survive and kill the rest."""
    levels = [cellular_complex(TorusBGModel(rank, N), p) for N in range(N_max + 1)]
    projs = []
    for N in range(N_max):
        src, tgt = levels[N + 1], levels[N]
        amap = {}
        for m in TorusBGModel(rank, N + 1).cells():
            if max(m, default=0) <= N:
                amap[cell_label(m)] = {cell_label(m): 1}
        projs.append(ChainMap(src, tgt, amap))
    return TowerOfComplexes(levels, projs)
