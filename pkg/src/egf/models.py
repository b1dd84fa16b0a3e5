"""Builders for explicit equivariant Floer models and comparison reports.

Two families live here:

* bigraded family complexes ``CM^{p,q}`` with total differential
  ``delta = sum_k delta_k``, filtered by base degree;
* the conic-fibration local model, generated by ``lambda^i x^k``,
  ``lambda^i x^k t`` (0 <= k <= nu) and, on the full Lagrangian, the fixed-point
  generators ``lambda^i p^{nu+1}``, together with its continuation maps,
  direct system, lambda-truncated tower and the reports built on them.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .complexes import (
    ChainMap,
    DirectSystem,
    GradedComplex,
    LimitTable,
    TowerOfComplexes,
    _tensor_map_between,
    cohomology,
    direct_limit_cohomology,
    identity_map,
    induced_map,
    inverse_limit_cohomology,
    is_exact,
    same_class,
    tensor,
    tensor_label,
    truncate,
    verify_chain_map,
)
from .errors import BadBidegree, BadLevels, NotADifferential, RangeUnbounded, UnorderedComponents
from .linalg import SparseMatrix
from .schubert import truncated_polynomial_dims
from .spectral import FilteredComplex, SSPage, compare_with_cohomology, limit_page, page

Terms = Mapping[str, int]

# ---------------------------------------------------------------------------
# family complexes


def product_deltas(base: GradedComplex, fiber: GradedComplex) -> dict[int, dict[str, dict[str, int]]]:
    """delta_0 = (+-) id (x) d_fiber and delta_1 = d_base (x) id for a product family."""
    p = base.p
    d0: dict[str, dict[str, int]] = {}
    d1: dict[str, dict[str, int]] = {}
    for c, dc in base.generators:
        sign = -1 if dc % 2 else 1
        for f, _ in fiber.generators:
            lab = tensor_label(c, f)
            t0 = {tensor_label(c, g): (sign * v) % p for g, v in fiber.differential.get(f, {}).items()}
            t1 = {tensor_label(b, f): v % p for b, v in base.differential.get(c, {}).items()}
            if t0:
                d0[lab] = t0
            if t1:
                d1[lab] = t1
    return {0: d0, 1: d1}


def build_family_complex(
    base: GradedComplex,
    fiber: GradedComplex,
    delta_components: Mapping[int, Mapping[str, Terms]] | None = None,
    include_product: bool = True,
) -> FilteredComplex:
    """Family Morse complex on pairs ``c|f`` filtered by the base degree of c.

    ``delta_components[k]`` maps a pair label to a formal sum of pair labels
    and must have bidegree (k, 1 - k).  With ``include_product`` the product
    components (fiber differential as delta_0, base differential as delta_1)
    are added first; the extra components model twisting of the family.
    """
    if base.p != fiber.p:
        raise ValueError("base and fiber over different fields")
    p = base.p
    bdeg = dict(base.generators)
    fdeg = dict(fiber.generators)
    gens = []
    split: dict[str, tuple[str, str]] = {}
    for c, dc in base.generators:
        for f, df in fiber.generators:
            lab = tensor_label(c, f)
            gens.append((lab, dc + df))
            split[lab] = (c, f)

    comps: dict[int, dict[str, dict[str, int]]] = {}
    if include_product:
        for k, m in product_deltas(base, fiber).items():
            comps.setdefault(k, {}).update({s: dict(t) for s, t in m.items()})
    for k, m in (delta_components or {}).items():
        k = int(k)
        if k < 0:
            raise BadBidegree(f"delta_{k}: component index must be non-negative")
        tgt = comps.setdefault(k, {})
        for s, terms in m.items():
            if s not in split:
                raise NotADifferential(f"delta_{k} given on unknown pair {s!r}", s)
            acc = tgt.setdefault(s, {})
            for t, v in terms.items():
                if t not in split:
                    raise NotADifferential(f"delta_{k}({s}) mentions unknown pair {t!r}", s)
                acc[t] = (acc.get(t, 0) + v) % p

    diff: dict[str, dict[str, int]] = {}
    for k, m in sorted(comps.items()):
        for s, terms in m.items():
            cs, fs = split[s]
            for t, v in terms.items():
                if not v % p:
                    continue
                ct, ft = split[t]
                if bdeg[ct] - bdeg[cs] != k or fdeg[ft] - fdeg[fs] != 1 - k:
                    raise BadBidegree(
                        f"delta_{k}({s}) hits {t} with bidegree ({bdeg[ct] - bdeg[cs]}, {fdeg[ft] - fdeg[fs]})"
                    )
                acc = diff.setdefault(s, {})
                acc[t] = (acc.get(t, 0) + v) % p
    c = GradedComplex(gens, diff, p, name="family")
    return FilteredComplex(c, {lab: bdeg[split[lab][0]] for lab, _ in gens})


# ---------------------------------------------------------------------------
# conic model


FULL = "full"
REGULAR = "regular"
VARIANTS = (FULL, REGULAR)


def conic_label(i: int, k: int, t: bool = False, fixed: int | None = None) -> str:
    """``lambda^i*x^k*t``; ``fixed`` replaces the x-power by ``p^fixed``."""
    parts = []
    if i:
        parts.append("lambda" if i == 1 else f"lambda^{i}")
    if fixed is not None:
        parts.append(f"p^{fixed}")
    elif k:
        parts.append("x" if k == 1 else f"x^{k}")
    if t:
        parts.append("t")
    return "*".join(parts) or "1"


@dataclass(frozen=True)
class HamiltonianSlopeSpec:
    """Slope data of the wrapping Hamiltonian; only nu enters the model."""

    nu: int
    eps: Fraction = Fraction(1, 2)
    constants: tuple = ()

    def __post_init__(self):
        if self.nu < 0 or not (0 < Fraction(self.eps) < 1):
            raise BadLevels("need nu >= 0 and slope nu + eps strictly between nu and nu + 1")


@dataclass(frozen=True)
class ConicModel:
    """Local model of the S^1-equivariant Floer complex near a conic fibre.

    ``lam_trunc`` imposes lambda^{N+1} = 0 (None keeps all powers, which then
    requires a degree cap).  ``outside`` is an optional summand attached to
    the fixed-point column by ``links`` (outside label -> formal sum of
    outside and model labels).
    """

    nu: int
    variant: str = FULL
    lam_trunc: int | None = None
    base_factor: GradedComplex | None = None
    sign: int = 1
    outside: GradedComplex | None = None
    links: Mapping[str, Terms] | None = field(default=None, hash=False)

    def __post_init__(self):
        if self.nu < 0:
            raise BadLevels("nu must be non-negative")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.lam_trunc is not None and self.lam_trunc < 0:
            raise BadLevels("lambda truncation must be non-negative")


def _conic_core(spec: ConicModel, degree_cap: int | None, p: int) -> GradedComplex:
    nu, N = spec.nu, spec.lam_trunc
    if N is None and degree_cap is None:
        raise RangeUnbounded("an untruncated conic model needs a degree cap")

    def i_max(base_deg: int) -> int:
        hi = N if N is not None else (degree_cap - base_deg) // 2
        if degree_cap is not None:
            hi = min(hi, (degree_cap - base_deg) // 2)
        return hi

    gens: list[tuple[str, int]] = []
    for k in range(nu + 1):
        for i in range(i_max(2 * k) + 1):
            gens.append((conic_label(i, k), 2 * i + 2 * k))
        for i in range(i_max(2 * k + 1) + 1):
            gens.append((conic_label(i, k, t=True), 2 * i + 2 * k + 1))
    if spec.variant == FULL:
        for i in range(i_max(2 * nu + 2) + 1):
            gens.append((conic_label(i, 0, fixed=nu + 1), 2 * i + 2 * nu + 2))
    present = {g for g, _ in gens}

    def xk(i: int, k: int) -> str:
        return conic_label(i, 0, fixed=nu + 1) if k == nu + 1 else conic_label(i, k)

    diff: dict[str, dict[str, int]] = {}
    for k in range(nu + 1):
        for i in range(i_max(2 * k + 1) + 1):
            terms: dict[str, int] = {}
            a = conic_label(i + 1, k)
            if a in present:
                terms[a] = 1
            if spec.variant == FULL:
                b = xk(i, k + 1)
                if b in present:
                    terms[b] = (terms.get(b, 0) + spec.sign) % p
            terms = {t: v for t, v in terms.items() if v}
            if terms:
                diff[conic_label(i, k, t=True)] = terms
    return GradedComplex(gens, diff, p, name=f"conic:nu={nu},variant={spec.variant}")


def conic_complex(spec: ConicModel, degree_cap: int | None = None, p: int = 2) -> GradedComplex:
    """The conic Floer complex, tensored with ``base_factor`` and summed with ``outside``.

    With a degree cap the complex is the brutal truncation at that degree,
    so its cohomology is exact strictly below the cap.
    """
    core = _conic_core(spec, degree_cap, p)
    if spec.base_factor is not None:
        base = spec.base_factor
        inner_cap = None if degree_cap is None else degree_cap - min(0, base.min_degree or 0)
        core = _conic_core(spec, inner_cap, p)
        core = tensor(base, core)
        if degree_cap is not None:
            core = truncate(core, degree_cap)
    if spec.outside is None:
        return core
    out = spec.outside
    gens = list(core.generators) + [("out:" + g, d) for g, d in out.generators]
    diff = {s: dict(t) for s, t in core.differential.items()}
    for s, terms in out.differential.items():
        diff["out:" + s] = {"out:" + t: v for t, v in terms.items()}
    for s, terms in (spec.links or {}).items():
        acc = diff.setdefault("out:" + s, {})
        for t, v in terms.items():
            key = t if t in core else "out:" + t
            acc[key] = (acc.get(key, 0) + v) % p
    if degree_cap is not None:
        keep = {g for g, d in gens if d <= degree_cap}
        gens = [(g, d) for g, d in gens if g in keep]
        diff = {s: {t: v for t, v in ts.items() if t in keep} for s, ts in diff.items() if s in keep}
    return GradedComplex(gens, diff, p, name=core.name)


def wrapping_filtration(spec: ConicModel, c: GradedComplex) -> FilteredComplex:
    """Level of lambda^i x^k (and its t-decoration) is k; p^{nu+1} sits at nu+1."""
    levels = {}
    for lab in c.labels:
        core = lab.split("|")[-1]
        lvl = 0
        for part in core.split("*"):
            if part.startswith("p^"):
                lvl = spec.nu + 1
            elif part == "x":
                lvl = 1
            elif part.startswith("x^"):
                lvl = int(part[2:])
        levels[lab] = lvl
    return FilteredComplex(c, levels)


FixedPointImage = Callable[[int, int], Terms]


def default_fixed_point_image(nu: int, i: int) -> dict[str, int]:
    """lambda^i p^{nu+1} -> lambda^i x^{nu+1}."""
    return {conic_label(i, nu + 1): 1}


def _core_continuation(
    src: GradedComplex, tgt: GradedComplex, nu: int, fixed_point_image: FixedPointImage
) -> ChainMap:
    amap: dict[str, dict[str, int]] = {}
    for lab in src.labels:
        if lab.startswith("out:"):
            amap[lab] = {lab: 1} if lab in tgt else {}
            continue
        i = 0
        fixed = False
        for part in lab.split("*"):
            if part == "lambda":
                i = 1
            elif part.startswith("lambda^"):
                i = int(part[7:])
            elif part.startswith("p^"):
                fixed = True
        if fixed:
            amap[lab] = {t: v for t, v in fixed_point_image(nu, i).items() if t in tgt}
        elif lab in tgt:
            amap[lab] = {lab: 1}
    return ChainMap(src, tgt, amap)


def continuation_between(
    src: GradedComplex,
    tgt: GradedComplex,
    spec: ConicModel,
    nu2: int,
    fixed_point_image: FixedPointImage = default_fixed_point_image,
) -> ChainMap:
    """Continuation from the model at ``spec.nu`` to the model at ``nu2`` built on given complexes."""
    if nu2 <= spec.nu:
        raise BadLevels(f"continuation needs nu' > nu, got {spec.nu} -> {nu2}")
    if spec.base_factor is None:
        return _core_continuation(src, tgt, spec.nu, fixed_point_image)
    # id_base (x) c on pairs base|core
    strip = lambda lab: lab.split("|", 1)[1]  # noqa: E731
    core_src = GradedComplex([(strip(g), d) for g, d in src.generators if "|" in g], {}, src.p)
    core_tgt = GradedComplex([(strip(g), d) for g, d in tgt.generators if "|" in g], {}, tgt.p)
    inner = _core_continuation(core_src, core_tgt, spec.nu, fixed_point_image)
    return _tensor_map_between(identity_map(spec.base_factor), inner, src, tgt)


def conic_continuation(
    nu: int,
    nu2: int,
    variant: str = FULL,
    degree_cap: int | None = None,
    lam_trunc: int | None = None,
    p: int = 2,
    fixed_point_image: FixedPointImage = default_fixed_point_image,
) -> ChainMap:
    """Continuation map c_{nu,nu'}: x, t, lambda fixed; p^{nu+1} -> x^{nu+1} (full variant)."""
    if nu2 <= nu:
        raise BadLevels(f"continuation needs nu' > nu, got {nu} -> {nu2}")
    if lam_trunc is None and degree_cap is None:
        degree_cap = 2 * nu2 + 4
    s = ConicModel(nu, variant, lam_trunc)
    t = ConicModel(nu2, variant, lam_trunc)
    return continuation_between(
        conic_complex(s, degree_cap, p), conic_complex(t, degree_cap, p), s, nu2, fixed_point_image
    )


def conic_system(
    nu_max: int,
    variant: str = FULL,
    degree_cap: int | None = None,
    lam_trunc: int | None = None,
    p: int = 2,
    nu_min: int = 0,
    base_factor: GradedComplex | None = None,
    fixed_point_image: FixedPointImage = default_fixed_point_image,
) -> DirectSystem:
    """Wrapping direct system nu_min -> ... -> nu_max joined by continuation maps."""
    if nu_max < nu_min:
        raise BadLevels("nu_max must be at least nu_min")
    specs = [ConicModel(nu, variant, lam_trunc, base_factor) for nu in range(nu_min, nu_max + 1)]
    levels = [conic_complex(s, degree_cap, p) for s in specs]
    maps = [
        continuation_between(levels[j], levels[j + 1], specs[j], specs[j + 1].nu, fixed_point_image)
        for j in range(len(levels) - 1)
    ]
    return DirectSystem(levels, maps)


def conic_tower(nu: int, N_max: int, variant: str = FULL, p: int = 2) -> TowerOfComplexes:
    """Borel tower of lambda-truncated models lambda^{N+1} = 0, N = 0..N_max."""
    levels = [conic_complex(ConicModel(nu, variant, lam_trunc=N), None, p) for N in range(N_max + 1)]
    projs = []
    for N in range(N_max):
        src, tgt = levels[N + 1], levels[N]
        projs.append(ChainMap(src, tgt, {g: {g: 1} for g in src.labels if g in tgt}))
    return TowerOfComplexes(levels, projs)


def lambda_times(label: str) -> str:
    """Label of lambda * (generator)."""
    parts = label.split("*") if label != "1" else []
    i = 0
    rest = []
    for part in parts:
        if part == "lambda":
            i = 1
        elif part.startswith("lambda^"):
            i = int(part[7:])
        else:
            rest.append(part)
    lam = "lambda" if i == 0 else f"lambda^{i + 1}"
    return "*".join([lam] + rest)


def lambda_acts_trivially(c: GradedComplex, deg_range) -> bool:
    """lambda * (every H representative) is exact, within the degrees present."""
    top = c.max_degree
    for grp in cohomology(c, deg_range).groups.values():
        if grp.degree + 2 >= top:
            continue
        for rep in grp.representatives:
            img = {lambda_times(lab): v for lab, v in rep}
            if any(lab not in c for lab in img):
                return False
            if not is_exact(c, img):
                return False
    return True


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class ColimitReport:
    variant: str
    nu_max: int
    table: LimitTable
    dictionary: dict[int, bool]  # k -> [x^k] = [lambda^k] (full) or [x^k] != 0 (regular)

    @property
    def ok(self) -> bool:
        return all(self.dictionary.values())


def conic_colimit(
    nu_max: int,
    variant: str = FULL,
    deg_range: tuple[int, int] = (0, 18),
    p: int = 2,
    fixed_point_image: FixedPointImage = default_fixed_point_image,
) -> ColimitReport:
    """Colimit over wrapping of the conic model, plus the class dictionary at the top level."""
    lo, hi = deg_range
    s = conic_system(nu_max, variant, degree_cap=hi + 1, p=p, fixed_point_image=fixed_point_image)
    table = direct_limit_cohomology(s, deg_range)
    top = s.levels[-1]
    dictionary = {}
    for k in range(0, min(nu_max, hi // 2) + 1):
        if not lo <= 2 * k <= hi:
            continue
        xk = conic_label(0, k)
        if variant == FULL:
            dictionary[k] = same_class(top, {xk: 1}, {conic_label(k, 0): 1})
        else:
            dictionary[k] = not is_exact(top, {xk: 1})
    return ColimitReport(variant, nu_max, table, dictionary)


def continuation_dictionary_holds(nu: int, nu2: int, k: int, p: int = 2) -> bool:
    """Under c_{nu,nu'} the image of [x^k] is the class of lambda^k at level nu' (full variant)."""
    f = conic_continuation(nu, nu2, FULL, degree_cap=2 * k + 2, p=p)
    img = f({conic_label(0, k): 1})
    return same_class(f.target, img, {conic_label(k, 0): 1})


def continuation_induced(nu: int, nu2: int, variant: str, deg_range, p: int = 2) -> dict[int, SparseMatrix]:
    lo, hi = deg_range
    f = conic_continuation(nu, nu2, variant, degree_cap=hi + 1, p=p)
    return {n: induced_map(f, n) for n in range(lo, hi + 1)}


@dataclass(frozen=True)
class ComparisonRow:
    degree: int
    values: tuple[int, ...]
    reference: int

    @property
    def ok(self) -> bool:
        return all(v == self.reference for v in self.values)


@dataclass(frozen=True)
class ComparisonReport:
    title: str
    columns: tuple[str, ...]
    rows: tuple[ComparisonRow, ...]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)


def pss_report(nu_max: int = 10, deg_range: tuple[int, int] = (0, 18), p: int = 2) -> ComparisonReport:
    """Full conic model against H_{S^1}(point) = K[lambda].

    Columns: colimit over wrapping, untruncated model at nu_max, and the
    inverse limit of the lambda-truncated tower at nu_max.
    """
    lo, hi = deg_range
    colim = conic_colimit(nu_max, FULL, deg_range, p).table.dims()
    untr = cohomology(conic_complex(ConicModel(nu_max, FULL), hi + 1, p), deg_range).dims()
    tower = inverse_limit_cohomology(conic_tower(nu_max, hi // 2 + 2, FULL, p), deg_range).dims()
    ref = truncated_polynomial_dims(1, None, hi)
    rows = tuple(ComparisonRow(n, (colim[n], untr[n], tower[n]), ref[n]) for n in range(lo, hi + 1))
    return ComparisonReport("pss", ("colimit", "untruncated", "tower"), rows)


def _convolve(a: Sequence[int], b: Sequence[int], top: int) -> list[int]:
    out = [0] * (top + 1)
    for i, x in enumerate(a[: top + 1]):
        for j, y in enumerate(b[: top + 1 - i]):
            out[i + j] += x * y
    return out


def reduction_report(
    n_factors: int = 1,
    nu_max: int = 10,
    deg_range: tuple[int, int] = (0, 18),
    base_factor: GradedComplex | None = None,
    p: int = 2,
) -> ComparisonReport:
    """Equivariant side against the quotient side, one reduction stage at a time.

    Stage s tensors s regular-locus factors (the reduced side, K[x]) with
    n - s full equivariant factors and the base factor.  Every stage must
    match the quotient reference K[x_1..x_n] (x) H(base).  For n = 1 the
    regular-locus column is the colimit over wrapping.
    """
    lo, hi = deg_range
    if lo < 0:
        raise ValueError("reduction report covers non-negative degrees")
    cap = hi + 1
    base_shift = -min(0, base_factor.min_degree or 0) if base_factor is not None else 0
    fcap = cap + base_shift
    full = conic_complex(ConicModel(nu_max, FULL), fcap, p)
    reg = conic_complex(ConicModel(nu_max, REGULAR), fcap, p)
    one = truncated_polynomial_dims(1, None, hi)
    ref = [1] + [0] * hi
    for _ in range(n_factors):
        ref = _convolve(ref, one, hi)
    if base_factor is not None:
        bdims = cohomology(base_factor, (base_factor.min_degree, base_factor.max_degree)).dims()
        shifted = [0] * (hi + 1)
        for n in range(lo, hi + 1):
            shifted[n] = sum(ref[n - b] * dim for b, dim in bdims.items() if 0 <= n - b <= hi)
        ref = shifted
    columns = []
    values: list[dict[int, int]] = []
    for stage in range(n_factors + 1):
        factors = [reg] * stage + [full] * (n_factors - stage)
        if base_factor is not None:
            factors = [base_factor] + factors
        c = factors[0]
        for fct in factors[1:]:
            c = truncate(tensor(c, fct), cap)
        values.append(cohomology(c, deg_range).dims())
        columns.append(f"stage{stage}")
    if n_factors == 1 and base_factor is None:
        values.append(conic_colimit(nu_max, REGULAR, deg_range, p).table.dims())
        columns.append("colimit")
    rows = tuple(ComparisonRow(n, tuple(v[n] for v in values), ref[n]) for n in range(lo, hi + 1))
    return ComparisonReport("reduction", tuple(columns), rows)


@dataclass(frozen=True)
class CleanComponent:
    name: str
    action: Fraction
    complex: GradedComplex


@dataclass(frozen=True)
class CleanSSReport:
    components: tuple[str, ...]
    e1: SSPage
    e_inf: SSPage
    collapse_page: int
    convergence_ok: bool

    @property
    def single_column(self) -> bool:
        return len(self.e1.columns()) <= 1


def clean_filtered_complex(
    components: Sequence[CleanComponent], links: Mapping[str, Terms] | None = None
) -> FilteredComplex:
    """Action-filtered sum of clean components; level = rank of the action value.

    Labels are ``name:label``; ``links`` add differential terms, which must
    run from lower to higher action.
    """
    if not components:
        raise ValueError("at least one clean component is required")
    actions = [Fraction(c.action) for c in components]
    if len(set(actions)) != len(actions):
        raise UnorderedComponents("two clean components share an action value")
    order = sorted(range(len(components)), key=lambda j: actions[j])
    rank_of = {j: r for r, j in enumerate(order)}
    p = components[0].complex.p
    gens = []
    diff: dict[str, dict[str, int]] = {}
    levels = {}
    for j, comp in enumerate(components):
        pre = comp.name + ":"
        for g, d in comp.complex.generators:
            gens.append((pre + g, d))
            levels[pre + g] = rank_of[j]
        for s, terms in comp.complex.differential.items():
            diff[pre + s] = {pre + t: v for t, v in terms.items()}
    for s, terms in (links or {}).items():
        acc = diff.setdefault(s, {})
        for t, v in terms.items():
            acc[t] = (acc.get(t, 0) + v) % p
    return FilteredComplex(GradedComplex(gens, diff, p, name="clean"), levels)


def clean_ss_report(
    components: Sequence[CleanComponent], links: Mapping[str, Terms] | None = None
) -> CleanSSReport:
    fc = clean_filtered_complex(components, links)
    e_inf, collapse = limit_page(fc)
    names = tuple(c.name for c in sorted(components, key=lambda c: Fraction(c.action)))
    return CleanSSReport(names, page(fc, 1), e_inf, collapse, compare_with_cohomology(fc).ok)


def conic_self_model(nu: int = 1, degree_cap: int = 8, p: int = 2) -> list[CleanComponent]:
    """Self-correspondence of the full conic Lagrangian: a single clean component."""
    return [CleanComponent("C0", Fraction(0), conic_complex(ConicModel(nu, FULL), degree_cap, p))]


def conic_chain_map_ok(nu: int, nu2: int, variant: str = FULL, **kw) -> bool:
    return verify_chain_map(conic_continuation(nu, nu2, variant, **kw))
