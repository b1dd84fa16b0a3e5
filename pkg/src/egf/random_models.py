"""Random finite complexes, filtered complexes and direct systems.

Every instance is built from a known decomposition (free classes plus
acyclic pairs) and then scrambled by an invertible change of basis, so
d o d = 0 holds by construction while the differential looks generic.
For filtered instances the basis change only adds higher-level generators
to lower-level ones, which keeps the filtration intact.
"""

from __future__ import annotations

import numpy as np

from .complexes import ChainMap, DirectSystem, GradedComplex
from .spectral import FilteredComplex


def _scramble(
    rng: np.random.Generator,
    gens: list[tuple[str, int]],
    diff: dict[str, dict[str, int]],
    levels: dict[str, int],
    p: int,
    steps: int,
) -> tuple[dict[str, dict[str, int]], dict[str, dict[str, int]]]:
    """Apply random elementary basis changes ``u' = u + a v`` (level v >= level u).

    Returns the new differential and the old-to-new coordinate map, the latter
    expressing each old generator in the new basis.
    """
    labels = [g for g, _ in gens]
    deg = dict(gens)
    by_deg: dict[int, list[str]] = {}
    for g, n in gens:
        by_deg.setdefault(n, []).append(g)
    # D[src][tgt] with current basis; represent as dense dicts
    d = {g: dict(diff.get(g, {})) for g in labels}
    # old generator in terms of new basis
    coords = {g: {g: 1} for g in labels}
    for _ in range(steps):
        n = int(rng.choice(sorted(by_deg)))
        pool = by_deg[n]
        if len(pool) < 2:
            continue
        u, v = rng.choice(pool, size=2, replace=False)
        u, v = str(u), str(v)
        if levels[v] < levels[u]:
            u, v = v, u
        a = int(rng.integers(1, p))
        # new basis: u' = u + a v, others unchanged.  Then v_old = v', u_old = u' - a v'.
        # d(u') = d(u) + a d(v)
        du = d[u]
        for t, c in d[v].items():
            du[t] = (du.get(t, 0) + a * c) % p
        d[u] = {t: c for t, c in du.items() if c}
        # every occurrence of u in images becomes u' - a v'
        for g in by_deg.get(n - 1, []):
            c = d[g].get(u)
            if c:
                d[g][v] = (d[g].get(v, 0) - a * c) % p
                if not d[g][v]:
                    del d[g][v]
        for g in labels:
            c = coords[g].get(u)
            if c and deg[g] == n:
                coords[g][v] = (coords[g].get(v, 0) - a * c) % p
                if not coords[g][v]:
                    del coords[g][v]
    return {g: t for g, t in d.items() if t}, coords


def random_filtered_complex(
    rng: np.random.Generator,
    max_generators: int = 40,
    max_levels: int = 5,
    degrees: tuple[int, int] = (0, 5),
    p: int = 2,
) -> FilteredComplex:
    """A scrambled sum of free classes and acyclic pairs with random levels."""
    n_levels = int(rng.integers(1, max_levels + 1))
    budget = int(rng.integers(1, max_generators + 1))
    lo, hi = degrees
    gens: list[tuple[str, int]] = []
    diff: dict[str, dict[str, int]] = {}
    levels: dict[str, int] = {}
    i = 0
    while len(gens) < budget:
        n = int(rng.integers(lo, hi + 1))
        la = int(rng.integers(0, n_levels))
        if len(gens) + 2 <= budget and n < hi and rng.random() < 0.6:
            a, b = f"g{i}", f"g{i + 1}"
            lb = int(rng.integers(la, n_levels))
            gens += [(a, n), (b, n + 1)]
            levels[a], levels[b] = la, lb
            diff[a] = {b: int(rng.integers(1, p))}
            i += 2
        else:
            a = f"g{i}"
            gens.append((a, n))
            levels[a] = la
            i += 1
    d, _ = _scramble(rng, gens, diff, levels, p, steps=3 * len(gens))
    return FilteredComplex(GradedComplex(gens, d, p), levels)


def random_complex(
    rng: np.random.Generator,
    max_generators: int = 12,
    degrees: tuple[int, int] = (0, 4),
    p: int = 2,
) -> GradedComplex:
    return random_filtered_complex(rng, max_generators, 1, degrees, p).underlying


def random_direct_system(
    rng: np.random.Generator,
    n_levels: int = 4,
    start_generators: int = 6,
    degrees: tuple[int, int] = (0, 4),
    p: int = 2,
) -> DirectSystem:
    """Each level extends the previous one by a subcomplex inclusion.

    A step adds free classes, acyclic pairs, or "killer" generators whose
    boundary is a cycle of the previous level, so classes appear, persist
    and die along the system.  The last step is the identity, so degrees
    that settle before the end are reported as stable.
    """
    lo, hi = degrees
    base = random_complex(rng, start_generators, degrees, p)
    gens = list(base.generators)
    diff = {k: dict(v) for k, v in base.differential.items()}
    levels = [base]
    maps = []
    counter = 0
    for _ in range(n_levels - 2):
        prev = levels[-1]
        new_gens = list(gens)
        new_diff = {k: dict(v) for k, v in diff.items()}
        for _ in range(int(rng.integers(1, 4))):
            kind = rng.random()
            n = int(rng.integers(lo, hi + 1))
            if kind < 0.3:
                new_gens.append((f"n{counter}", n))
                counter += 1
            elif kind < 0.6 and n < hi:
                a, b = f"n{counter}", f"n{counter + 1}"
                counter += 2
                new_gens += [(a, n), (b, n + 1)]
                new_diff[a] = {b: 1}
            else:
                h = prev._hdata(n + 1)[0] if prev.dim(n + 1) else []
                if not h:
                    continue
                z = h[int(rng.integers(0, len(h)))]
                a = f"n{counter}"
                counter += 1
                new_gens.append((a, n))
                new_diff[a] = dict(prev.terms(n + 1, z))
        nxt = GradedComplex(new_gens, new_diff, p)
        maps.append(ChainMap(prev, nxt, {g: {g: 1} for g in prev.labels}))
        levels.append(nxt)
        gens, diff = new_gens, new_diff
    last = levels[-1]
    copy = GradedComplex(last.generators, last.differential, p)
    maps.append(ChainMap(last, copy, {g: {g: 1} for g in last.labels}))
    levels.append(copy)
    return DirectSystem(levels, maps)
