"""Command-line front end.

Every subcommand renders a deterministic plain-text report: sections start
with a ``## title`` line, tables are tab separated, sections are separated
by a blank line.  Exit codes: 0 success, 1 verification failure, 2 parse or
usage error, 3 invariant violation, 4 limit not stabilized.

A SOURCE is a model file path or a builtin name:

* ``conic:nu=1`` with optional ``variant=regular``, ``trunc=N``
* ``conic-self`` / ``conic-self:nu=2`` (single clean component)
* ``conic-filtered:nu=1`` (wrapping filtration)
* ``grassmann:k,n`` and ``bg:r,N``
"""

from __future__ import annotations

import os
import re
import sys
from fractions import Fraction

import click

from .complexes import (
    DirectSystem,
    GradedComplex,
    TowerOfComplexes,
    cohomology,
    direct_limit_cohomology,
    inverse_limit_cohomology,
    telescope,
)
from .errors import CapExceedsSystem, EGFError, InvariantViolation, ModelParseError, NotStabilized
from .linalg import rank
from .modelfile import Model, format_terms, load_model
from .models import (
    FULL,
    VARIANTS,
    ConicModel,
    clean_filtered_complex,
    conic_complex,
    conic_self_model,
    conic_system,
    conic_tower,
    wrapping_filtration,
)
from .schubert import (
    TorusBGModel,
    cellular_complex,
    flow_limit,
    format_index_set,
    grassmann_complex,
    torus_tower,
    tower_report,
    truncated_polynomial_dims,
)
from .spectral import FilteredComplex, collapse_bound, compare_with_cohomology, limit_page, pages

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_INVARIANT, EXIT_UNSTABLE = 0, 1, 2, 3, 4


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_range(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*", text)
    if not m:
        raise click.BadParameter(f"expected a..b, got {text!r}")
    a, b = int(m.group(1)), int(m.group(2))
    if b < a:
        raise click.BadParameter(f"empty range {text!r}")
    return a, b


def parse_window(text: str) -> tuple[int, int, int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise click.BadParameter("window must be p0..p1,q0..q1")
    (p0, p1), (q0, q1) = parse_range(parts[0]), parse_range(parts[1])
    return p0, p1, q0, q1


def _builtin_args(text: str) -> tuple[str, dict[str, str], list[str]]:
    head, _, tail = text.partition(":")
    kw: dict[str, str] = {}
    pos: list[str] = []
    for item in filter(None, tail.split(",")):
        if "=" in item:
            k, v = item.split("=", 1)
            kw[k.strip()] = v.strip()
        else:
            pos.append(item.strip())
    return head, kw, pos


def _int(kw: dict[str, str], key: str, default: int | None = None) -> int | None:
    if key not in kw:
        return default
    try:
        return int(kw[key])
    except ValueError:
        raise click.BadParameter(f"{key} must be an integer") from None


BUILTINS = ("conic", "conic-self", "conic-filtered", "grassmann", "bg")


def is_builtin(source: str) -> bool:
    return not os.path.exists(source) and _builtin_args(source)[0] in BUILTINS


def _conic_spec(kw: dict[str, str], model: Model | None = None) -> ConicModel:
    variant = kw.get("variant", FULL)
    if variant not in VARIANTS:
        raise click.BadParameter(f"variant must be one of {', '.join(VARIANTS)}")
    base = None
    if "base" in kw:
        if model is None or kw["base"] not in model.complexes:
            raise ModelParseError(f"unknown base complex {kw['base']!r}")
        base = model.complexes[kw["base"]]
    return ConicModel(_int(kw, "nu", 0), variant, _int(kw, "trunc"), base, _int(kw, "sign", 1))


# ---------------------------------------------------------------------------
# sources


class Source:
    """A resolved SOURCE argument: builtin spec or parsed model file."""

    def __init__(self, text: str, p: int | None = None, name: str | None = None):
        self.text = text
        self.p = p
        self.name = name
        self.model: Model | None = None
        if is_builtin(text):
            self.kind, self.kw, self.pos = _builtin_args(text)
        elif os.path.exists(text):
            self.model = load_model(text, p)
            self.kind = "file"
            self.kw, self.pos = {}, []
            if name is not None:
                try:
                    self.model.kind_of(name)
                except KeyError:
                    raise ModelParseError(f"no block named {name!r}") from None
        else:
            raise click.BadParameter(f"{text!r} is neither a file nor a builtin model", param_hint="SOURCE")

    @property
    def field(self) -> int:
        if self.model is not None:
            return self.model.p
        return self.p if self.p is not None else 2

    @property
    def title(self) -> str:
        if self.model is not None:
            base = os.path.basename(self.text)
            return f"{base}:{self.name}" if self.name else base
        return self.text

    def _pos_ints(self, count: int) -> list[int]:
        try:
            vals = [int(x) for x in self.pos]
        except ValueError:
            raise click.BadParameter(f"{self.kind} expects integers") from None
        if len(vals) != count:
            raise click.BadParameter(f"{self.kind} expects {count} integers")
        return vals

    def block_name(self, kinds: tuple[str, ...] | None = None) -> str:
        assert self.model is not None
        if self.name is not None:
            return self.name
        for kind, nm in self.model.order:
            if kinds is None or kind in kinds:
                return nm
        raise ModelParseError(f"no suitable block ({', '.join(kinds or ())}) in {self.text}")

    def _file_conic(self, st: dict[str, str]) -> ConicModel:
        return _conic_spec(st, self.model)

    def complex(self, max_degree: int) -> GradedComplex:
        p, cap = self.field, max_degree + 1
        if self.kind == "conic":
            spec = _conic_spec(self.kw)
            return conic_complex(spec, None if spec.lam_trunc is not None else cap, p)
        if self.kind in ("conic-self", "conic-filtered"):
            return self.filtered(max_degree).underlying
        if self.kind == "grassmann":
            k, n = self._pos_ints(2)
            return grassmann_complex(k, n, p)
        if self.kind == "bg":
            r, N = self._pos_ints(2)
            return cellular_complex(TorusBGModel(r, N), p)
        m = self.model
        nm = self.block_name(("complex", "filtered", "conic", "grassmann", "bifamily"))
        kind = m.kind_of(nm)
        if kind in ("complex",):
            return m.complexes[nm]
        if kind in ("filtered", "bifamily"):
            return (m.filtered.get(nm) or m.bifamilies[nm]).underlying
        if kind == "conic":
            st = m.conics[nm]
            spec = self._file_conic(st)
            c = int(st["cap"]) if "cap" in st else cap
            return conic_complex(spec, None if spec.lam_trunc is not None else c, p)
        if kind == "grassmann":
            st = m.grassmanns[nm]
            return grassmann_complex(int(st["k"]), int(st["n"]), p)
        raise ModelParseError(f"block {nm!r} is a {kind}, not a complex")

    def filtered(self, max_degree: int) -> FilteredComplex:
        p, cap = self.field, max_degree + 1
        if self.kind == "conic-self":
            return clean_filtered_complex(conic_self_model(_int(self.kw, "nu", 1), cap, p))
        if self.kind in ("conic-filtered", "conic"):
            spec = _conic_spec(self.kw)
            c = conic_complex(spec, None if spec.lam_trunc is not None else cap, p)
            return wrapping_filtration(spec, c)
        if self.kind == "file":
            nm = self.block_name(("filtered", "bifamily", "complex", "conic", "grassmann"))
            kind = self.model.kind_of(nm)
            if kind in ("filtered", "bifamily"):
                return self.model.filtered.get(nm) or self.model.bifamilies[nm]
            if kind == "conic":
                spec = self._file_conic(self.model.conics[nm])
                c = self.complex(max_degree)
                return wrapping_filtration(spec, c)
        c = self.complex(max_degree)
        return FilteredComplex(c, {lab: 0 for lab in c.labels})

    def system(self, max_degree: int) -> DirectSystem:
        if self.kind == "conic":
            spec = _conic_spec(self.kw)
            return conic_system(spec.nu, spec.variant, max_degree + 1, spec.lam_trunc, self.field)
        if self.kind == "file":
            nm = self.block_name(("system", "conic"))
            kind = self.model.kind_of(nm)
            if kind == "system":
                return self.model.systems[nm]
            if kind == "conic":
                spec = self._file_conic(self.model.conics[nm])
                return conic_system(
                    spec.nu, spec.variant, max_degree + 1, spec.lam_trunc, self.field, base_factor=spec.base_factor
                )
        raise click.BadParameter(f"{self.text} does not describe a direct system")

    def tower(self) -> TowerOfComplexes:
        if self.kind == "conic":
            spec = _conic_spec(self.kw)
            return conic_tower(spec.nu, spec.lam_trunc if spec.lam_trunc is not None else 6, spec.variant, self.field)
        if self.kind == "bg":
            r, N = self._pos_ints(2)
            return torus_tower(r, N, self.field)
        if self.kind == "file":
            nm = self.block_name(("tower",))
            return self.model.towers[nm]
        raise click.BadParameter(f"{self.text} does not describe a tower")


# ---------------------------------------------------------------------------
# report rendering (pure functions; the CLI and the acceptance suite share them)


def _section(title: str, rows: list[str]) -> str:
    return "\n".join([f"## {title}", *rows])


def _join(sections: list[str]) -> str:
    return "\n\n".join(sections) + "\n"


def _rep(terms) -> str:
    return format_terms(dict(terms))


def render_cohomology(src: Source, deg_range: tuple[int, int]) -> str:
    lo, hi = deg_range
    c = src.complex(hi)
    table = cohomology(c, deg_range)
    rows = ["degree\tdim\trepresentatives"]
    for n in table:
        g = table[n]
        rows.append(f"{n}\t{g.dim}\t" + "; ".join(_rep(r) for r in g.representatives))
    nonzero = [str(n) for n in table if table[n].dim]
    summary = [
        f"field\t{c.p}",
        f"generators\t{len(c)}",
        f"total_dim\t{sum(table.dims().values())}",
        "nonzero_degrees\t" + (",".join(nonzero) if nonzero else "none"),
    ]
    return _join([_section(f"cohomology {src.title}", rows), _section("summary", summary)])


def render_ss(
    src: Source,
    deg_range: tuple[int, int] = (0, 8),
    page_range: tuple[int, int] | None = None,
    window: tuple[int, int, int, int] | None = None,
) -> str:
    fc = src.filtered(deg_range[1])
    R = collapse_bound(fc)
    r0, r1 = page_range if page_range is not None else (0, R)
    all_pages = pages(fc, max(r1, 1))
    _, collapse = limit_page(fc)
    conv = compare_with_cohomology(fc)
    head = [
        f"field\t{fc.p}",
        f"levels\t{fc.min_level}..{fc.max_level}",
        f"collapse_bound\t{R}",
        f"collapse_page\t{collapse}",
    ]
    sections = [_section(f"spectral sequence {src.title}", head)]
    # builtins are degree-truncated models: only degrees inside the range are exact
    in_range = (lambda n: True) if src.kind == "file" else (lambda n: deg_range[0] <= n <= deg_range[1])
    for r in range(r0, r1 + 1):
        pg = all_pages[r].restricted(window)
        rows = ["p\tq\tdim"] + [f"{p}\t{q}\t{d}" for (p, q), d in pg.nonzero().items() if in_range(p + q)]
        sections.append(_section(f"page {r}", rows))
        drows = ["p\tq\ttarget_p\ttarget_q\trank"]
        for (p, q), m in sorted(pg.differentials.items()):
            rk = rank(m)
            if rk and in_range(p + q):
                drows.append(f"{p}\t{q}\t{p + r}\t{q - r + 1}\t{rk}")
        sections.append(_section(f"d_{r}", drows))
    crow = ["degree\tE_inf\tH\tmatch"] + [
        f"{n}\t{e}\t{h}\t{'yes' if e == h else 'no'}" for n, e, h in conv.rows if in_range(n)
    ]
    sections.append(_section("convergence", crow))
    notes = []
    e1_cols = all_pages[1].columns()
    if len(e1_cols) == 1:
        notes.append(f"single-column E_1 at p={e1_cols[0]}")
    notes.append("E_inf totals match H in every degree" if conv.ok else "E_inf totals differ from H in degrees " + ",".join(map(str, conv.discrepancies)))
    sections.append(_section("summary", notes))
    return _join(sections)


def _cap_system(s: DirectSystem, cap: int | None) -> DirectSystem:
    if cap is None:
        return s
    if cap < 0 or cap >= len(s.levels):
        raise CapExceedsSystem(f"cap {cap} outside the {len(s.levels)} supplied levels")
    return DirectSystem(s.levels[: cap + 1], s.connecting[:cap])


def _cap_tower(t: TowerOfComplexes, cap: int | None) -> TowerOfComplexes:
    if cap is None:
        return t
    if cap < 0 or cap >= len(t.levels):
        raise CapExceedsSystem(f"cap {cap} outside the {len(t.levels)} supplied levels")
    return TowerOfComplexes(t.levels[: cap + 1], t.projections[:cap])


def render_limits(src: Source, mode: str, deg_range: tuple[int, int], cap: int | None = None) -> str:
    head = [f"mode\t{mode}"]
    if mode == "tower":
        t = _cap_tower(src.tower(), cap)
        table = inverse_limit_cohomology(t, deg_range)
        head.append(f"levels\t{len(t.levels)}")
    else:
        s = _cap_system(src.system(deg_range[1]), cap)
        head.append(f"levels\t{len(s.levels)}")
        if mode == "colimit":
            table = direct_limit_cohomology(s, deg_range)
        else:
            tel = telescope(s, len(s.levels) - 1)
            h = cohomology(tel, deg_range).dims()
            rows = ["degree\ttelescope\tcolimit\tmatch"]
            for n in range(deg_range[0], deg_range[1] + 1):
                try:
                    col = str(direct_limit_cohomology(s, (n, n))[n].dim)
                except NotStabilized:
                    col = "unstable"
                match = "yes" if col == str(h[n]) else ("n/a" if col == "unstable" else "no")
                rows.append(f"{n}\t{h[n]}\t{col}\t{match}")
            head.append(f"telescope_generators\t{len(tel)}")
            return _join([_section(f"limits {src.title}", head), _section("telescope", rows)])
    rows = ["degree\tdim\tstable_level\tlevel_dims"]
    for n, row in sorted(table.rows.items()):
        rows.append(f"{n}\t{row.dim}\t{row.stable_level}\t" + ",".join(map(str, row.level_dims)))
    return _join([_section(f"limits {src.title}", head), _section(table.kind, rows)])


def parse_plane(text: str) -> list[list[Fraction]]:
    try:
        return [[Fraction(x.strip()) for x in row.split(",")] for row in text.split(";")]
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter("plane rows are ';'-separated, entries ','-separated rationals") from None


def parse_spectrum(text: str | None):
    if text is None:
        return None
    try:
        return [Fraction(x) for x in re.split(r"[,\s]+", text.strip()) if x]
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter("spectrum must be rationals") from None


def render_flow(k: int, n: int, plane: str, direction: str, spectrum: str | None) -> str:
    V = parse_plane(plane)
    spec = parse_spectrum(spectrum)
    crit = flow_limit(k, n, V, direction, spec)
    rows = [
        f"k\t{k}",
        f"n\t{n}",
        f"direction\t{direction}",
        f"limit\t{format_index_set(crit.index_set)}",
        f"morse_index\t{crit.morse_index}",
    ]
    return _join([_section("flow", rows)])


def render_tower(k: int, n_max: int, spectrum: str | None, torus: int | None = None) -> str:
    if torus is not None:
        t = torus_tower(torus, n_max)
        top = 2 * max(n_max - 1, 0)
        rows = ["level\tdims"]
        for N, c in enumerate(t.levels):
            rows.append(f"{N}\t" + ",".join(map(str, cohomology(c, (0, 2 * N * torus)).dim_list())))
        inv = inverse_limit_cohomology(t, (0, top)).dims()
        ref = truncated_polynomial_dims(torus, None, top)
        lim = ["degree\tdim\treference\tmatch"] + [
            f"{n}\t{inv[n]}\t{ref[n]}\t{'yes' if inv[n] == ref[n] else 'no'}" for n in range(top + 1)
        ]
        return _join([_section(f"torus tower r={torus}", rows), _section("inverse limit", lim)])
    rep = tower_report(k, n_max, parse_spectrum(spectrum))
    rows = ["level\tn\tcritical_points\tnew\tmin_new_index\tinclusion"]
    for lv in rep.levels:
        mi = "-" if lv.min_new_index is None else str(lv.min_new_index)
        rows.append(f"{lv.level}\t{lv.n}\t{lv.count}\t{lv.new_count}\t{mi}\t{'ok' if lv.inclusion_ok else 'FAIL'}")
    stab = ["l\tN(l)"] + [f"{l}\t{N}" for l, N in sorted(rep.stabilization.items())]
    return _join([_section(f"tower k={k}", rows), _section("stabilization", stab), _section("summary", [f"ok\t{'yes' if rep.ok else 'no'}"])])


# ---------------------------------------------------------------------------
# click wiring


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _run(fn) -> None:
    try:
        fn()
    except ModelParseError as e:
        click.echo(f"parse error: {e}", err=True)
        sys.exit(EXIT_PARSE)
    except InvariantViolation as e:
        click.echo(f"invariant violation: {e}", err=True)
        sys.exit(EXIT_INVARIANT)
    except NotStabilized as e:
        click.echo(f"not stabilized: first unstable degree {e.degree}: {e}", err=True)
        sys.exit(EXIT_UNSTABLE)
    except EGFError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_PARSE)


_field = click.option("--field", "field_p", type=int, default=None, help="Prime characteristic (overrides the file).")
_output = click.option("--output", type=click.Path(dir_okay=False), default=None, help="Write the report here.")
_name = click.option("--name", default=None, help="Block to use from a model file.")


@click.group()
@click.version_option(package_name="artifact")
def main() -> None:
    """Exact homological computations for equivariant Floer models."""


@main.command("cohomology")
@click.argument("source")
@click.option("--range", "rng", default="0..8", show_default=True, help="Degree range a..b.")
@_field
@_name
@_output
def cmd_cohomology(source, rng, field_p, name, output):
    """Cohomology table with representatives."""
    deg = parse_range(rng)
    _run(lambda: _emit(render_cohomology(Source(source, field_p, name), deg), output))


@main.command("ss")
@click.argument("source")
@click.option("--pages", "page_rng", default=None, help="Pages r0..r1 (default 0..collapse bound).")
@click.option("--window", default=None, help="Restrict tables to p0..p1,q0..q1.")
@click.option("--range", "rng", default="0..8", show_default=True, help="Degree range for builtin truncations.")
@_field
@_name
@_output
def cmd_ss(source, page_rng, window, rng, field_p, name, output):
    """Spectral sequence pages, differentials, collapse page and convergence check."""
    pr = parse_range(page_rng) if page_rng else None
    if pr is not None and pr[0] < 0:
        raise click.BadParameter("pages must be non-negative")
    win = parse_window(window) if window else None
    deg = parse_range(rng)
    _run(lambda: _emit(render_ss(Source(source, field_p, name), deg, pr, win), output))


@main.command("limits")
@click.argument("source")
@click.option("--mode", type=click.Choice(["colimit", "tower", "telescope"]), default="colimit", show_default=True)
@click.option("--cap", type=int, default=None, help="Use levels 0..cap only.")
@click.option("--range", "rng", default="0..8", show_default=True)
@_field
@_name
@_output
def cmd_limits(source, mode, cap, rng, field_p, name, output):
    """Direct limit, inverse limit or telescope cohomology with stabilization levels."""
    deg = parse_range(rng)
    _run(lambda: _emit(render_limits(Source(source, field_p, name), mode, deg, cap), output))


@main.command("flow")
@click.option("--k", type=int, required=True)
@click.option("--n", type=int, required=True)
@click.option("--plane", required=True, help="n rows separated by ';', k rational entries per row.")
@click.option("--direction", type=click.Choice(["backward", "forward"]), default="backward", show_default=True)
@click.option("--spectrum", default=None, help="Strictly increasing negative rationals a_1..a_n.")
@_output
def cmd_flow(k, n, plane, direction, spectrum, output):
    """Exact limit of the gradient flow through a k-plane."""
    _run(lambda: _emit(render_flow(k, n, plane, direction, spectrum), output))


@main.command("tower")
@click.option("--k", type=int, default=1, show_default=True)
@click.option("--n-max", type=int, default=6, show_default=True)
@click.option("--spectrum", default=None)
@click.option("--torus", type=int, default=None, help="Report the torus tower of this rank instead.")
@_output
def cmd_tower(k, n_max, spectrum, torus, output):
    """Critical-set inclusions and stabilization levels of the Grassmannian tower."""
    _run(lambda: _emit(render_tower(k, n_max, spectrum, torus), output))


@main.command("verify")
@click.option("--only", default=None, help="Comma-separated criterion numbers.")
@click.option(
    "--mutation",
    type=click.Choice(["none", "undoubled-index", "zero-fixed-point"]),
    default="none",
    show_default=True,
    help="Run against a deliberately broken build.",
)
@_output
def cmd_verify(only, mutation, output):
    """Run the acceptance criteria; exit 1 on any failure."""
    from .acceptance import run_all

    numbers = None
    if only:
        try:
            numbers = [int(x) for x in only.split(",")]
        except ValueError:
            raise click.BadParameter("--only takes comma-separated integers") from None
    results = run_all(numbers, mutation)
    rows = [f"criterion {r.number}\t{'PASS' if r.passed else 'FAIL'}\t{r.name}\t{r.detail}" for r in results]
    passed = sum(r.passed for r in results)
    text = _join([_section("acceptance", rows), _section("summary", [f"passed\t{passed}/{len(results)}"])])
    _emit(text, output)
    sys.exit(EXIT_OK if passed == len(results) else EXIT_VERIFY)


if __name__ == "__main__":  # pragma: no cover
    main()
