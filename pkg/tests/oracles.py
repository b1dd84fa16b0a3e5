"""Independent brute-force oracles used by the tests.

Nothing here touches the engine's linear algebra: cohomology is computed by
enumerating every vector of a small F_p space.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def all_vectors(dim: int, p: int):
    return itertools.product(range(p), repeat=dim)


def dense_d(c, n: int) -> np.ndarray:
    rows, cols = c.dim(n + 1), c.dim(n)
    m = np.zeros((rows, cols), dtype=np.int64)
    src = c.basis(n)
    tgt = {lab: i for i, lab in enumerate(c.basis(n + 1))}
    for j, lab in enumerate(src):
        for t, v in c.differential.get(lab, {}).items():
            m[tgt[t], j] = v % c.p
    return m


def brute_cohomology_dim(c, n: int) -> int:
    """log_p(|ker d^n| / |im d^{n-1}|) by enumeration."""
    p = c.p
    dn = dense_d(c, n)
    ker = sum(1 for v in all_vectors(c.dim(n), p) if not ((dn @ np.array(v, dtype=np.int64)) % p).any()) if c.dim(n) else 1
    if c.dim(n - 1):
        dp = dense_d(c, n - 1)
        img = {tuple((dp @ np.array(v, dtype=np.int64)) % p) for v in all_vectors(c.dim(n - 1), p)}
        im = len(img)
    else:
        im = 1
    return round(math.log(ker // im, p)) if ker // im > 1 else 0


def brute_rank(m: np.ndarray, p: int) -> int:
    """rank = log_p of the size of the column span, by enumeration."""
    rows, cols = m.shape
    if rows == 0 or cols == 0:
        return 0
    span = {tuple((m @ np.array(v, dtype=np.int64)) % p) for v in all_vectors(cols, p)}
    return round(math.log(len(span), p))


def convolve(a, b, top: int) -> list[int]:
    return [sum(a[i] * b[n - i] for i in range(n + 1) if i < len(a) and n - i < len(b)) for n in range(top + 1)]


def brute_filtered_h_dim(fc, p_level: int, n: int) -> int:
    """dim of the image of H^n(F^p) in H^n, as log_p |(Z cap F^p) + B| / |B|."""
    c, p = fc.underlying, fc.p
    dim = c.dim(n)
    if not dim:
        return 0
    dn = dense_d(c, n)
    allowed = [lab_level >= p_level for lab_level in (fc.level(lab) for lab in c.basis(n))]
    cycles = [
        np.array(v, dtype=np.int64)
        for v in all_vectors(dim, p)
        if all(x == 0 or ok for x, ok in zip(v, allowed)) and not ((dn @ np.array(v, dtype=np.int64)) % p).any()
    ]
    if c.dim(n - 1):
        dp = dense_d(c, n - 1)
        bounds = {tuple((dp @ np.array(v, dtype=np.int64)) % p) for v in all_vectors(c.dim(n - 1), p)}
    else:
        bounds = {tuple([0] * dim)}
    total = {tuple((z + np.array(b, dtype=np.int64)) % p) for z in cycles for b in bounds}
    return round(math.log(len(total) / len(bounds), p)) if len(total) > len(bounds) else 0


def brute_graded_h(fc, n: int) -> dict[int, int]:
    """p -> dim F^p H^n / F^{p+1} H^n."""
    lo, hi = fc.min_level, fc.max_level
    dims = {q: brute_filtered_h_dim(fc, q, n) for q in range(lo, hi + 2)}
    return {q: dims[q] - dims[q + 1] for q in range(lo, hi + 1)}
