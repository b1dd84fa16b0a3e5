"""Reader and writer for the line-oriented ``egf-model v1`` format.

::

    egf-model v1
    [field]
    p = 2

    [complex A]          # generators "label degree", then "label -> sum"
    a 0
    b 1
    a -> b

    [filtered F]         # generators "label degree level"
    u 0 0
    v 1 1
    u -> v

    [system S]           # levels and connecting maps between named complexes
    levels = A0 A1 A2
    A0 -> A1: identity
    A1 -> A2: a -> a + 2*b     # or "identity", or "zero"

    [tower T]            # levels listed from 0 upwards, maps go down
    levels = B0 B1
    B1 -> B0: identity

    [conic K]            # key = value settings
    nu = 1
    variant = full

    [grassmann G]
    k = 2
    n = 4

    [bifamily X]
    base = A
    fiber = F0
    delta 2: a|f1 -> b|f0

Formal sums are terms joined by ``+`` (or `` - ``), each ``label`` or
``c*label``; ``0`` is the empty sum.  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .complexes import ChainMap, DirectSystem, GradedComplex, TowerOfComplexes
from .errors import ModelParseError
from .linalg import check_prime
from .spectral import FilteredComplex

HEADER = "egf-model v1"
BLOCK_KINDS = ("field", "complex", "filtered", "system", "tower", "conic", "grassmann", "bifamily")

_BLOCK_RE = re.compile(r"^\[(\w+)(?:\s+(\S+))?\]$")
_COEF_RE = re.compile(r"^(-?\d+)\*(.+)$")


@dataclass
class _Block:
    kind: str
    name: str | None
    line: int
    lines: list[tuple[int, str]] = field(default_factory=list)


@dataclass
class Model:
    """Parsed model file; entries keep file order in ``order``."""

    p: int = 2
    complexes: dict[str, GradedComplex] = field(default_factory=dict)
    filtered: dict[str, FilteredComplex] = field(default_factory=dict)
    systems: dict[str, DirectSystem] = field(default_factory=dict)
    towers: dict[str, TowerOfComplexes] = field(default_factory=dict)
    conics: dict[str, dict[str, str]] = field(default_factory=dict)
    grassmanns: dict[str, dict[str, str]] = field(default_factory=dict)
    bifamilies: dict[str, FilteredComplex] = field(default_factory=dict)
    order: list[tuple[str, str]] = field(default_factory=list)

    def lookup(self, name: str):
        for table in (
            self.filtered,
            self.complexes,
            self.systems,
            self.towers,
            self.conics,
            self.grassmanns,
            self.bifamilies,
        ):
            if name in table:
                return table[name]
        raise KeyError(name)

    def kind_of(self, name: str) -> str:
        for kind, n in self.order:
            if n == name:
                return kind
        raise KeyError(name)


def parse_terms(text: str, line: int | None = None) -> dict[str, int]:
    """Parse ``a + 2*b - c`` into ``{label: coeff}`` (coefficients not yet reduced)."""
    text = text.strip()
    if text in ("", "0"):
        return {}
    text = re.sub(r"\s+-\s*", " + -", text)
    out: dict[str, int] = {}
    for raw in text.split("+"):
        term = raw.strip()
        if not term:
            raise ModelParseError(f"empty term in {text!r}", line)
        sign = 1
        if term.startswith("-"):
            sign, term = -1, term[1:].strip()
        m = _COEF_RE.match(term)
        if m:
            coef, lab = int(m.group(1)), m.group(2).strip()
        else:
            coef, lab = 1, term
        if not lab or any(ch.isspace() for ch in lab):
            raise ModelParseError(f"bad label {lab!r}", line)
        out[lab] = out.get(lab, 0) + sign * coef
    return out


def _split_blocks(text: str) -> list[_Block]:
    lines = text.splitlines()
    first = next(((i, ln.split("#", 1)[0].strip()) for i, ln in enumerate(lines, 1) if ln.split("#", 1)[0].strip()), None)
    if first is None or first[1] != HEADER:
        raise ModelParseError(f"missing header {HEADER!r}", first[0] if first else 1)
    blocks: list[_Block] = []
    for i, raw in enumerate(lines, 1):
        if i <= first[0]:
            continue
        ln = raw.split("#", 1)[0].strip()
        if not ln:
            continue
        m = _BLOCK_RE.match(ln)
        if m:
            kind, name = m.group(1), m.group(2)
            if kind not in BLOCK_KINDS:
                raise ModelParseError(f"unknown block kind {kind!r}", i)
            if kind != "field" and not name:
                raise ModelParseError(f"[{kind}] block needs a name", i)
            blocks.append(_Block(kind, name, i))
        elif ln.startswith("["):
            raise ModelParseError(f"malformed block header {ln!r}", i)
        else:
            if not blocks:
                raise ModelParseError("content before the first block", i)
            blocks[-1].lines.append((i, ln))
    return blocks


def _settings(block: _Block) -> dict[str, str]:
    out = {}
    for i, ln in block.lines:
        if "=" not in ln:
            raise ModelParseError(f"expected 'key = value', got {ln!r}", i)
        k, v = (s.strip() for s in ln.split("=", 1))
        if not k:
            raise ModelParseError("empty key", i)
        out[k] = v
    return out


def _parse_complex(block: _Block, p: int, with_levels: bool) -> tuple[GradedComplex, dict[str, int]]:
    gens: list[tuple[str, int]] = []
    levels: dict[str, int] = {}
    diff_lines: list[tuple[int, str, str]] = []
    for i, ln in block.lines:
        if "->" in ln:
            src, rhs = ln.split("->", 1)
            diff_lines.append((i, src.strip(), rhs))
            continue
        parts = ln.split()
        want = 3 if with_levels else 2
        if len(parts) != want:
            what = "label degree level" if with_levels else "label degree"
            raise ModelParseError(f"expected '{what}', got {ln!r}", i)
        try:
            nums = [int(x) for x in parts[1:]]
        except ValueError:
            raise ModelParseError(f"non-integer degree or level in {ln!r}", i) from None
        if parts[0] in levels or any(parts[0] == g for g, _ in gens):
            raise ModelParseError(f"duplicate generator {parts[0]!r}", i)
        gens.append((parts[0], nums[0]))
        if with_levels:
            levels[parts[0]] = nums[1]
    declared = {g for g, _ in gens}
    diff: dict[str, dict[str, int]] = {}
    for i, src, rhs in diff_lines:
        if src not in declared:
            raise ModelParseError(f"differential of undeclared generator {src!r}", i)
        terms = parse_terms(rhs, i)
        for lab in terms:
            if lab not in declared:
                raise ModelParseError(f"undeclared generator {lab!r}", i)
        acc = diff.setdefault(src, {})
        for lab, c in terms.items():
            acc[lab] = acc.get(lab, 0) + c
    return GradedComplex(gens, diff, p, name=block.name), levels


def _parse_maps(block: _Block, model: Model) -> tuple[list[GradedComplex], dict[tuple[str, str], ChainMap]]:
    names: list[str] | None = None
    raw: dict[tuple[str, str], list[tuple[int, str]]] = {}
    for i, ln in block.lines:
        if ln.startswith("levels") and "=" in ln and ln.split("=", 1)[0].strip() == "levels":
            names = ln.split("=", 1)[1].split()
            continue
        m = re.match(r"^(\S+)\s*->\s*(\S+?)\s*:\s*(.*)$", ln)
        if not m:
            raise ModelParseError(f"expected 'A -> B: ...' map line, got {ln!r}", i)
        raw.setdefault((m.group(1), m.group(2)), []).append((i, m.group(3)))
    if not names:
        raise ModelParseError(f"[{block.kind} {block.name}] needs a 'levels = ...' line", block.line)
    levels = []
    for nm in names:
        if nm not in model.complexes:
            raise ModelParseError(f"unknown complex {nm!r} in levels", block.line)
        levels.append(model.complexes[nm])
    maps: dict[tuple[str, str], ChainMap] = {}
    for (a, b), entries in raw.items():
        if a not in model.complexes or b not in model.complexes:
            raise ModelParseError(f"map {a} -> {b} between unknown complexes", entries[0][0])
        src, tgt = model.complexes[a], model.complexes[b]
        amap: dict[str, dict[str, int]] = {}
        for i, body in entries:
            if body.strip() == "identity":
                for lab in src.labels:
                    if lab in tgt:
                        amap[lab] = {lab: 1}
                continue
            if body.strip() == "zero":
                continue
            if "->" not in body:
                raise ModelParseError(f"expected 'label -> sum', 'identity' or 'zero', got {body!r}", i)
            s, rhs = body.split("->", 1)
            s = s.strip()
            if s not in src:
                raise ModelParseError(f"{s!r} is not a generator of {a}", i)
            terms = parse_terms(rhs, i)
            for lab in terms:
                if lab not in tgt:
                    raise ModelParseError(f"{lab!r} is not a generator of {b}", i)
            amap[s] = terms
        maps[(a, b)] = ChainMap(src, tgt, amap)
    return levels, maps


def _map_for(maps, a: str, b: str, line: int) -> ChainMap:
    if (a, b) not in maps:
        raise ModelParseError(f"missing map {a} -> {b}", line)
    return maps[(a, b)]


def parse_model(text: str, p: int | None = None) -> Model:
    """Parse a model document; ``p`` overrides the [field] block."""
    blocks = _split_blocks(text)
    model = Model()
    field_blocks = [b for b in blocks if b.kind == "field"]
    if len(field_blocks) > 1:
        raise ModelParseError("more than one [field] block", field_blocks[1].line)
    if field_blocks:
        st = _settings(field_blocks[0])
        try:
            model.p = check_prime(int(st.get("p", "2")))
        except ValueError as e:
            raise ModelParseError(str(e), field_blocks[0].line) from None
    if p is not None:
        model.p = check_prime(p)
    seen: set[str] = set()
    for b in blocks:
        if b.kind == "field":
            continue
        if b.name in seen:
            raise ModelParseError(f"duplicate block name {b.name!r}", b.line)
        seen.add(b.name)
        model.order.append((b.kind, b.name))
        if b.kind == "complex":
            model.complexes[b.name] = _parse_complex(b, model.p, False)[0]
        elif b.kind == "filtered":
            c, lv = _parse_complex(b, model.p, True)
            model.complexes.setdefault(b.name, c)
            model.filtered[b.name] = FilteredComplex(c, lv)
        elif b.kind == "system":
            levels, maps = _parse_maps(b, model)
            names = _level_names(b)
            conn = [_map_for(maps, names[j], names[j + 1], b.line) for j in range(len(names) - 1)]
            model.systems[b.name] = DirectSystem(levels, conn)
        elif b.kind == "tower":
            levels, maps = _parse_maps(b, model)
            names = _level_names(b)
            projs = [_map_for(maps, names[j + 1], names[j], b.line) for j in range(len(names) - 1)]
            model.towers[b.name] = TowerOfComplexes(levels, projs)
        elif b.kind == "conic":
            st = _settings(b)
            if "nu" not in st:
                raise ModelParseError("[conic] block needs nu", b.line)
            model.conics[b.name] = st
        elif b.kind == "grassmann":
            st = _settings(b)
            if "k" not in st or "n" not in st:
                raise ModelParseError("[grassmann] block needs k and n", b.line)
            if "spectrum" in st:
                try:
                    [Fraction(x) for x in st["spectrum"].split()]
                except (ValueError, ZeroDivisionError):
                    raise ModelParseError("spectrum must be rationals", b.line) from None
            model.grassmanns[b.name] = st
        elif b.kind == "bifamily":
            model.bifamilies[b.name] = _parse_bifamily(b, model)
    return model


def _level_names(b: _Block) -> list[str]:
    for _, ln in b.lines:
        if ln.split("=", 1)[0].strip() == "levels":
            return ln.split("=", 1)[1].split()
    return []


def _parse_bifamily(b: _Block, model: Model) -> FilteredComplex:
    from .models import build_family_complex

    refs: dict[str, str] = {}
    deltas: dict[int, dict[str, dict[str, int]]] = {}
    for i, ln in b.lines:
        m = re.match(r"^delta\s+(-?\d+)\s*:\s*(\S+)\s*->\s*(.*)$", ln)
        if m:
            k = int(m.group(1))
            deltas.setdefault(k, {}).setdefault(m.group(2), {}).update(parse_terms(m.group(3), i))
            continue
        if "=" in ln:
            key, val = (s.strip() for s in ln.split("=", 1))
            if key not in ("base", "fiber"):
                raise ModelParseError(f"unknown bifamily key {key!r}", i)
            refs[key] = val
            continue
        raise ModelParseError(f"expected 'base = ', 'fiber = ' or 'delta k: ...', got {ln!r}", i)
    for key in ("base", "fiber"):
        if key not in refs:
            raise ModelParseError(f"[bifamily] needs {key}", b.line)
        if refs[key] not in model.complexes:
            raise ModelParseError(f"unknown complex {refs[key]!r}", b.line)
    return build_family_complex(model.complexes[refs["base"]], model.complexes[refs["fiber"]], deltas)


def load_model(path: str, p: int | None = None) -> Model:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read(), p)


# -- writing -------------------------------------------------------------------------


def format_terms(terms, p: int | None = None) -> str:
    items = terms.items() if hasattr(terms, "items") else terms
    parts = []
    for lab, c in sorted(items):
        if p is not None:
            c %= p
        if not c:
            continue
        parts.append(lab if c == 1 else f"{c}*{lab}")
    return " + ".join(parts) if parts else "0"


def _complex_lines(c: GradedComplex, levels: dict[str, int] | None) -> list[str]:
    out = []
    for lab, d in c.generators:
        out.append(f"{lab} {d}" + (f" {levels[lab]}" if levels is not None else ""))
    for lab, _ in c.generators:
        terms = c.differential.get(lab)
        if terms:
            out.append(f"{lab} -> {format_terms(terms, c.p)}")
    return out


def dump_model(
    complexes: dict[str, GradedComplex] | None = None,
    filtered: dict[str, FilteredComplex] | None = None,
    p: int = 2,
) -> str:
    lines = [HEADER, "", "[field]", f"p = {p}"]
    filtered = filtered or {}
    for name, c in (complexes or {}).items():
        if name in filtered:  # [filtered] blocks also register their complex
            continue
        lines += ["", f"[complex {name}]"] + _complex_lines(c, None)
    for name, fc in filtered.items():
        lines += ["", f"[filtered {name}]"] + _complex_lines(fc.underlying, fc.levels)
    return "\n".join(lines) + "\n"
