"""Graded cochain complexes with named bases, chain maps and limit constructions.

A :class:`GradedComplex` is finite: finitely many generators, each with an
integer degree, and a differential of degree +1 given as formal sums of
labels.  Degreewise-infinite objects from the models (untruncated polynomial
parameters) are always handed in through a finite degree window, see
:func:`truncate`.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from .errors import (
    CapExceedsSystem,
    NotADifferential,
    NotChainMap,
    NotStabilized,
    NotSurjective,
    RangeUnbounded,
)
from .linalg import EchelonBasis, SparseMatrix, Vector, check_prime, kernel_basis, rank

Terms = Mapping[str, int]
Representative = tuple[tuple[str, int], ...]


def _norm_terms(terms: Terms, p: int) -> dict[str, int]:
    out = {}
    for lab, c in terms.items():
        c = int(c) % p
        if c:
            out[lab] = c
    return out


def _add_terms(acc: dict[str, int], terms: Terms, a: int, p: int) -> None:
    for lab, c in terms.items():
        s = (acc.get(lab, 0) + a * c) % p
        if s:
            acc[lab] = s
        else:
            acc.pop(lab, None)


def degree_range(deg_range) -> list[int]:
    """Normalise ``(a, b)``, ``range`` or a single int to an inclusive list of degrees."""
    if isinstance(deg_range, range):
        return list(deg_range)
    if isinstance(deg_range, int):
        return [deg_range]
    try:
        a, b = deg_range
    except (TypeError, ValueError):
        raise RangeUnbounded(f"degree range must be a finite pair, got {deg_range!r}") from None
    for x in (a, b):
        if x is None or (isinstance(x, float) and not math.isfinite(x)):
            raise RangeUnbounded("degree range must be finite")
    a, b = int(a), int(b)
    return list(range(a, b + 1))


class GradedComplex:
    """Z-graded cochain complex over F_p with labelled generators.

    ``differential`` maps a generator label to a formal sum ``{label: coeff}``.
    Construction validates that d has degree +1 and that d o d = 0; violations
    raise :class:`NotADifferential` naming the offending generator.
    """

    def __init__(
        self,
        generators: Iterable[tuple[str, int]],
        differential: Mapping[str, Terms] | None = None,
        p: int = 2,
        name: str | None = None,
    ):
        self.p = check_prime(p)
        self.name = name
        gens = []
        self._degree: dict[str, int] = {}
        for lab, deg in generators:
            lab = str(lab)
            if not lab or any(ch.isspace() for ch in lab):
                raise ValueError(f"generator label {lab!r} must be non-empty without whitespace")
            if lab in self._degree:
                raise ValueError(f"duplicate generator label {lab!r}")
            self._degree[lab] = int(deg)
            gens.append((lab, int(deg)))
        self.generators: tuple[tuple[str, int], ...] = tuple(gens)

        self._basis: dict[int, list[str]] = {}
        self._index: dict[str, int] = {}
        for lab, deg in gens:
            b = self._basis.setdefault(deg, [])
            self._index[lab] = len(b)
            b.append(lab)

        diff: dict[str, dict[str, int]] = {}
        for src, terms in (differential or {}).items():
            if src not in self._degree:
                raise NotADifferential(f"differential given for undeclared generator {src!r}", src)
            t = _norm_terms(terms, self.p)
            for tgt in t:
                if tgt not in self._degree:
                    raise NotADifferential(f"d({src}) mentions undeclared generator {tgt!r}", src)
                if self._degree[tgt] != self._degree[src] + 1:
                    raise NotADifferential(
                        f"d({src}) hits {tgt} in degree {self._degree[tgt]}, expected {self._degree[src] + 1}", src
                    )
            if t:
                diff[src] = t
        self.differential: dict[str, dict[str, int]] = diff

        self._d: dict[int, SparseMatrix] = {}
        for n, labels in self._basis.items():
            rows = len(self._basis.get(n + 1, ()))
            cols = [{self._index[t]: c for t, c in diff.get(lab, {}).items()} for lab in labels]
            self._d[n] = SparseMatrix.from_columns(rows, cols, self.p)
        self._cache: dict = {}
        self._check_square_zero()

    def _check_square_zero(self) -> None:
        for n in self.degrees:
            if n + 1 not in self._d:
                continue
            dd = self._d[n + 1] @ self._d[n]
            for j in range(dd.cols):
                if dd.column(j):
                    lab = self._basis[n][j]
                    raise NotADifferential(f"d(d({lab})) != 0", lab)

    # -- basic accessors ---------------------------------------------------

    @property
    def degrees(self) -> list[int]:
        return sorted(self._basis)

    @property
    def labels(self) -> list[str]:
        return [g for g, _ in self.generators]

    def __len__(self) -> int:
        return len(self.generators)

    def __contains__(self, label: str) -> bool:
        return label in self._degree

    def degree(self, label: str) -> int:
        return self._degree[label]

    def basis(self, n: int) -> tuple[str, ...]:
        return tuple(self._basis.get(n, ()))

    def dim(self, n: int) -> int:
        return len(self._basis.get(n, ()))

    def index(self, label: str) -> int:
        return self._index[label]

    def d(self, n: int) -> SparseMatrix:
        """Matrix of d: C^n -> C^{n+1}."""
        m = self._d.get(n)
        if m is None:
            return SparseMatrix.zeros(self.dim(n + 1), 0, self.p)
        return m

    @property
    def min_degree(self) -> int | None:
        return min(self._basis) if self._basis else None

    @property
    def max_degree(self) -> int | None:
        return max(self._basis) if self._basis else None

    def vector(self, terms: Terms) -> tuple[int | None, Vector]:
        """Coordinates of a homogeneous formal sum; returns ``(degree, vector)``."""
        t = _norm_terms(terms, self.p)
        degs = {self._degree[lab] for lab in t}
        if len(degs) > 1:
            raise ValueError("formal sum is not homogeneous")
        deg = degs.pop() if degs else None
        return deg, {self._index[lab]: c for lab, c in t.items()}

    def terms(self, n: int, vec: Mapping[int, int]) -> Representative:
        b = self._basis.get(n, ())
        return tuple((b[i], c % self.p) for i, c in sorted(vec.items()) if c % self.p)

    def boundary(self, terms: Terms) -> dict[str, int]:
        out: dict[str, int] = {}
        for lab, c in _norm_terms(terms, self.p).items():
            _add_terms(out, self.differential.get(lab, {}), c, self.p)
        return out

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"GradedComplex{tag}({len(self)} generators, degrees {self.min_degree}..{self.max_degree}, p={self.p})"

    # -- cohomology data (cached; complexes are immutable) -----------------

    def _hdata(self, n: int) -> tuple[list[Vector], EchelonBasis, int]:
        """Representatives of H^n plus an echelon basis [image | reps] for coordinates."""
        if n in self._cache:
            return self._cache[n]
        dim_n = self.dim(n)
        img = EchelonBasis(self.p)
        prev = self._d.get(n - 1)
        if prev is not None:
            for j in range(prev.cols):
                img.add(prev.column(j))
        n_img = len(img)
        reps: list[Vector] = []
        if dim_n:
            for k in kernel_basis(self.d(n)).basis:
                r = img.reduce(k, full=True)[0]
                if img.add(r):
                    reps.append(r)
        self._cache[n] = (reps, img, n_img)
        return self._cache[n]


# --------------------------------------------------------------------------
# cohomology


@dataclass(frozen=True)
class CohomologyGroup:
    degree: int
    dim: int
    representatives: tuple[Representative, ...] = ()


@dataclass(frozen=True)
class CohomologyTable:
    groups: dict[int, CohomologyGroup]

    def dims(self) -> dict[int, int]:
        return {n: g.dim for n, g in sorted(self.groups.items())}

    def dim_list(self) -> list[int]:
        return [g.dim for _, g in sorted(self.groups.items())]

    def __getitem__(self, n: int) -> CohomologyGroup:
        return self.groups[n]

    def __iter__(self):
        return iter(sorted(self.groups))


def cohomology(c: GradedComplex, deg_range) -> CohomologyTable:
    """dim H^n = dim ker d^n - rank d^{n-1}, with representatives in normal form mod image."""
    out = {}
    for n in degree_range(deg_range):
        reps, _, _ = c._hdata(n)
        out[n] = CohomologyGroup(n, len(reps), tuple(c.terms(n, r) for r in reps))
    return CohomologyTable(out)


def cohomology_dims(c: GradedComplex, deg_range) -> list[int]:
    return cohomology(c, deg_range).dim_list()


def class_coordinates(c: GradedComplex, terms: Terms) -> tuple[int | None, Vector]:
    """Coordinates of the class of a cocycle in the representative basis of H^n."""
    n, v = c.vector(terms)
    if n is None:
        return None, {}
    if c.d(n).apply(v):
        raise ValueError("formal sum is not a cocycle")
    reps, ech, n_img = c._hdata(n)
    res, combo = ech.reduce(v)
    assert not res
    return n, {i - n_img: a for i, a in combo.items() if i >= n_img}


def is_exact(c: GradedComplex, terms: Terms) -> bool:
    n, coords = class_coordinates(c, terms)
    return not coords


def same_class(c: GradedComplex, a: Terms, b: Terms) -> bool:
    diff = dict(_norm_terms(a, c.p))
    _add_terms(diff, b, -1, c.p)
    return is_exact(c, diff)


# --------------------------------------------------------------------------
# chain maps


class ChainMap:
    """Degree-preserving linear map between complexes, given per generator.

    Generators missing from ``assignment`` map to zero.  Construction checks
    labels and degrees only; use :func:`verify_chain_map` for commutation.
    """

    def __init__(self, source: GradedComplex, target: GradedComplex, assignment: Mapping[str, Terms]):
        if source.p != target.p:
            raise ValueError("chain map between complexes over different fields")
        self.source = source
        self.target = target
        p = source.p
        amap: dict[str, dict[str, int]] = {}
        for src, terms in assignment.items():
            if src not in source:
                raise KeyError(f"chain map assigns undeclared source generator {src!r}")
            t = _norm_terms(terms, p)
            for tgt in t:
                if tgt not in target:
                    raise KeyError(f"image of {src!r} mentions undeclared target generator {tgt!r}")
                if target.degree(tgt) != source.degree(src):
                    raise NotChainMap(f"image of {src} is not in degree {source.degree(src)}")
            if t:
                amap[src] = t
        self.assignment = amap
        self._mats: dict[int, SparseMatrix] = {}

    def matrix(self, n: int) -> SparseMatrix:
        m = self._mats.get(n)
        if m is None:
            cols = [
                {self.target.index(t): c for t, c in self.assignment.get(lab, {}).items()}
                for lab in self.source.basis(n)
            ]
            m = SparseMatrix.from_columns(self.target.dim(n), cols, self.source.p)
            self._mats[n] = m
        return m

    def apply(self, terms: Terms) -> dict[str, int]:
        out: dict[str, int] = {}
        for lab, c in _norm_terms(terms, self.source.p).items():
            _add_terms(out, self.assignment.get(lab, {}), c, self.source.p)
        return out

    def __call__(self, terms: Terms) -> dict[str, int]:
        return self.apply(terms)


def verify_chain_map(f: ChainMap) -> bool:
    """True iff d_target o f = f o d_source in every degree."""
    for n in sorted(set(f.source.degrees) | {m - 1 for m in f.target.degrees}):
        lhs = f.target.d(n) @ f.matrix(n)
        rhs = f.matrix(n + 1) @ f.source.d(n)
        if lhs != rhs:
            return False
    return True


def identity_map(c: GradedComplex) -> ChainMap:
    return ChainMap(c, c, {lab: {lab: 1} for lab in c.labels})


def zero_map(a: GradedComplex, b: GradedComplex) -> ChainMap:
    return ChainMap(a, b, {})


def compose(g: ChainMap, f: ChainMap) -> ChainMap:
    return ChainMap(f.source, g.target, {lab: g.apply(f.assignment.get(lab, {})) for lab in f.source.labels})


def induced_map(f: ChainMap, n: int) -> SparseMatrix:
    """Matrix of H^n(f) in the representative bases of source and target."""
    reps_s, _, _ = f.source._hdata(n)
    reps_t, ech, n_img = f.target._hdata(n)
    m = f.matrix(n)
    cols = []
    for r in reps_s:
        res, combo = ech.reduce(m.apply(r))
        if res:
            raise NotChainMap(f"image of a degree-{n} cocycle is not a cocycle")
        cols.append({i - n_img: a for i, a in combo.items() if i >= n_img})
    return SparseMatrix.from_columns(len(reps_t), cols, f.source.p)


def is_bijective(m: SparseMatrix) -> bool:
    return m.rows == m.cols and rank(m) == m.rows


def is_quasi_isomorphism(f: ChainMap) -> bool:
    degs = sorted(set(f.source.degrees) | set(f.target.degrees))
    return all(is_bijective(induced_map(f, n)) for n in degs)


# --------------------------------------------------------------------------
# constructions


def truncate(c: GradedComplex, max_degree: int) -> GradedComplex:
    """Brutal truncation keeping degrees <= max_degree (a quotient complex).

    Cohomology is unchanged in degrees < max_degree.
    """
    gens = [(lab, d) for lab, d in c.generators if d <= max_degree]
    keep = {lab for lab, _ in gens}
    diff = {s: {t: v for t, v in terms.items() if t in keep} for s, terms in c.differential.items() if s in keep}
    return GradedComplex(gens, diff, c.p, c.name)


def relabel(c: GradedComplex, fn: Callable[[str], str], shift: int = 0) -> GradedComplex:
    gens = [(fn(lab), d + shift) for lab, d in c.generators]
    diff = {fn(s): {fn(t): v for t, v in terms.items()} for s, terms in c.differential.items()}
    return GradedComplex(gens, diff, c.p, c.name)


def direct_sum(parts: Sequence[GradedComplex], prefixes: Sequence[str] | None = None) -> GradedComplex:
    if not parts:
        raise ValueError("direct sum of no complexes")
    p = parts[0].p
    gens: list[tuple[str, int]] = []
    diff: dict[str, dict[str, int]] = {}
    for i, c in enumerate(parts):
        if c.p != p:
            raise ValueError("direct sum of complexes over different fields")
        pre = prefixes[i] if prefixes is not None else ""
        gens.extend((pre + lab, d) for lab, d in c.generators)
        for s, terms in c.differential.items():
            diff[pre + s] = {pre + t: v for t, v in terms.items()}
    return GradedComplex(gens, diff, p)


def tensor_label(a: str, b: str) -> str:
    return f"{a}|{b}"


def tensor(a: GradedComplex, b: GradedComplex) -> GradedComplex:
    """Tensor product with d(x|y) = dx|y + (-1)^{|x|} x|dy."""
    if a.p != b.p:
        raise ValueError("tensor of complexes over different fields")
    p = a.p
    gens = [(tensor_label(x, y), dx + dy) for x, dx in a.generators for y, dy in b.generators]
    diff: dict[str, dict[str, int]] = {}
    for x, dx in a.generators:
        sign = -1 if dx % 2 else 1
        ax = a.differential.get(x, {})
        for y, _ in b.generators:
            terms: dict[str, int] = {}
            for x2, c in ax.items():
                _add_terms(terms, {tensor_label(x2, y): c}, 1, p)
            for y2, c in b.differential.get(y, {}).items():
                _add_terms(terms, {tensor_label(x, y2): c}, sign, p)
            if terms:
                diff[tensor_label(x, y)] = terms
    return GradedComplex(gens, diff, p)


def tensor_map(f: ChainMap, g: ChainMap) -> ChainMap:
    """f (x) g on generators; both maps have degree zero so no signs arise."""
    src = tensor(f.source, g.source)
    tgt = tensor(f.target, g.target)
    return _tensor_map_between(f, g, src, tgt)


def _tensor_map_between(f: ChainMap, g: ChainMap, src: GradedComplex, tgt: GradedComplex) -> ChainMap:
    p = src.p
    amap: dict[str, dict[str, int]] = {}
    for x, _ in f.source.generators:
        fx = f.assignment.get(x)
        if not fx:
            continue
        for y, _ in g.source.generators:
            gy = g.assignment.get(y)
            if not gy:
                continue
            lab = tensor_label(x, y)
            if lab not in src:
                continue
            terms: dict[str, int] = {}
            for x2, a in fx.items():
                for y2, b in gy.items():
                    t = tensor_label(x2, y2)
                    if t in tgt:
                        _add_terms(terms, {t: a * b}, 1, p)
            amap[lab] = terms
    return ChainMap(src, tgt, amap)


def cone(f: ChainMap) -> GradedComplex:
    """Mapping cone: Cone(f)^n = A^{n+1} (+) B^n with d(a, b) = (-da, f(a) + db).

    Source generators carry the prefix ``s:``, target generators ``t:``.
    """
    if not verify_chain_map(f):
        raise NotChainMap("cone requires a chain map")
    a, b = f.source, f.target
    p = a.p
    gens = [("s:" + lab, d - 1) for lab, d in a.generators] + [("t:" + lab, d) for lab, d in b.generators]
    diff: dict[str, dict[str, int]] = {}
    for lab, _ in a.generators:
        terms: dict[str, int] = {}
        _add_terms(terms, {"s:" + t: v for t, v in a.differential.get(lab, {}).items()}, -1, p)
        _add_terms(terms, {"t:" + t: v for t, v in f.assignment.get(lab, {}).items()}, 1, p)
        if terms:
            diff["s:" + lab] = terms
    for lab, terms in b.differential.items():
        diff["t:" + lab] = {"t:" + t: v for t, v in terms.items()}
    return GradedComplex(gens, diff, p)


# --------------------------------------------------------------------------
# systems


def _same_complex(a: GradedComplex, b: GradedComplex) -> bool:
    return a is b or (a.generators == b.generators and a.differential == b.differential and a.p == b.p)


class DirectSystem:
    """Complexes C_0 -> C_1 -> ... joined by chain maps (validated)."""

    def __init__(self, levels: Sequence[GradedComplex], connecting: Sequence[ChainMap]):
        if not levels:
            raise ValueError("direct system needs at least one level")
        if len(connecting) != len(levels) - 1:
            raise ValueError(f"{len(levels)} levels need {len(levels) - 1} connecting maps, got {len(connecting)}")
        for i, f in enumerate(connecting):
            if not (_same_complex(f.source, levels[i]) and _same_complex(f.target, levels[i + 1])):
                raise ValueError(f"connecting map {i} does not join level {i} to level {i + 1}")
            if not verify_chain_map(f):
                raise NotChainMap(f"connecting map {i} -> {i + 1} is not a chain map")
        self.levels = tuple(levels)
        self.connecting = tuple(connecting)

    def __len__(self):
        return len(self.levels)


class TowerOfComplexes:
    """Complexes ... -> C_1 -> C_0 joined by degreewise-surjective chain maps.

    ``projections[i]`` goes from level i+1 to level i.  Surjectivity is the
    Mittag-Leffler hypothesis and is enforced here.
    """

    def __init__(self, levels: Sequence[GradedComplex], projections: Sequence[ChainMap]):
        if not levels:
            raise ValueError("tower needs at least one level")
        if len(projections) != len(levels) - 1:
            raise ValueError(f"{len(levels)} levels need {len(levels) - 1} projections, got {len(projections)}")
        for i, f in enumerate(projections):
            if not (_same_complex(f.source, levels[i + 1]) and _same_complex(f.target, levels[i])):
                raise ValueError(f"projection {i} does not map level {i + 1} to level {i}")
            if not verify_chain_map(f):
                raise NotChainMap(f"projection {i + 1} -> {i} is not a chain map")
            for n in f.target.degrees:
                if rank(f.matrix(n)) != f.target.dim(n):
                    raise NotSurjective(f"projection {i + 1} -> {i} is not surjective in degree {n}")
        self.levels = tuple(levels)
        self.projections = tuple(projections)

    def __len__(self):
        return len(self.levels)


def telescope(s: DirectSystem, level_cap: int) -> GradedComplex:
    """Truncated mapping telescope of levels 0..level_cap.

    Cone of ``(+)_{k<cap} C_k -> (+)_{k<=cap} C_k``, ``c_k -> c_k - e_k(c_k)``.
    The top level receives the maps but has no outgoing summand, so the
    cohomology is that of C_cap, i.e. the colimit once the system is stable.
    Labels are ``s:k:label`` and ``t:k:label``.
    """
    if level_cap < 0 or level_cap >= len(s.levels):
        raise CapExceedsSystem(f"cap {level_cap} outside the {len(s.levels)} supplied levels")
    p = s.levels[0].p
    src = direct_sum(s.levels[:level_cap], [f"{k}:" for k in range(level_cap)]) if level_cap else None
    tgt = direct_sum(s.levels[: level_cap + 1], [f"{k}:" for k in range(level_cap + 1)])
    if src is None:
        return relabel(tgt, lambda lab: "t:" + lab)
    amap: dict[str, dict[str, int]] = {}
    for k in range(level_cap):
        e = s.connecting[k]
        for lab in s.levels[k].labels:
            terms = {f"{k}:{lab}": 1}
            _add_terms(terms, {f"{k + 1}:{t}": v for t, v in e.assignment.get(lab, {}).items()}, -1, p)
            amap[f"{k}:{lab}"] = terms
    return cone(ChainMap(src, tgt, amap))


@dataclass(frozen=True)
class LimitRow:
    degree: int
    dim: int
    stable_level: int
    level_dims: tuple[int, ...]
    representatives: tuple[Representative, ...] = ()


@dataclass(frozen=True)
class LimitTable:
    kind: str
    rows: dict[int, LimitRow] = field(default_factory=dict)

    def dims(self) -> dict[int, int]:
        return {n: r.dim for n, r in sorted(self.rows.items())}

    def dim_list(self) -> list[int]:
        return [r.dim for _, r in sorted(self.rows.items())]

    def __getitem__(self, n: int) -> LimitRow:
        return self.rows[n]


def _stable_level(bijective: list[bool]) -> int:
    k = len(bijective)
    while k > 0 and bijective[k - 1]:
        k -= 1
    return k


def direct_limit_cohomology(s: DirectSystem, deg_range) -> LimitTable:
    """Colimit of H^n over the system, certified by a bijective final step.

    A degree counts as stable from level k when every induced map from level
    k onward is bijective; if the last map is not, :class:`NotStabilized`.
    """
    rows = {}
    last = s.levels[-1]
    for n in degree_range(deg_range):
        dims = tuple(len(c._hdata(n)[0]) for c in s.levels)
        bij = [is_bijective(induced_map(f, n)) for f in s.connecting]
        if bij and not bij[-1]:
            raise NotStabilized(
                f"degree {n}: H^{n} still changes between levels {len(s.levels) - 2} and {len(s.levels) - 1}", n
            )
        reps = cohomology(last, (n, n))[n].representatives
        rows[n] = LimitRow(n, dims[-1], _stable_level(bij), dims, reps)
    return LimitTable("colimit", rows)


def inverse_limit_cohomology(t: TowerOfComplexes, deg_range) -> LimitTable:
    """Inverse limit of H^n over a Mittag-Leffler tower.

    Chain-level surjectivity was checked when the tower was built.  Here the
    induced maps on H must be bijective from some level on; in that stable
    range they are in particular surjective, which is what is verified.
    """
    rows = {}
    last = t.levels[-1]
    for n in degree_range(deg_range):
        dims = tuple(len(c._hdata(n)[0]) for c in t.levels)
        maps = [induced_map(f, n) for f in t.projections]
        bij = [is_bijective(m) for m in maps]
        if bij and not bij[-1]:
            raise NotStabilized(
                f"degree {n}: H^{n} still changes between levels {len(t.levels) - 1} and {len(t.levels) - 2}", n
            )
        stable = _stable_level(bij)
        for k in range(stable, len(maps)):
            if rank(maps[k]) != maps[k].rows:
                raise NotSurjective(f"degree {n}: H-level projection {k + 1} -> {k} is not surjective")
        reps = cohomology(last, (n, n))[n].representatives
        rows[n] = LimitRow(n, dims[-1], stable, dims, reps)
    return LimitTable("inverse", rows)
