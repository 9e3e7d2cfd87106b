"""Shared builders and independent oracles for the test suite.

The oracles here deliberately avoid the library's own machinery: lattice
membership is checked by exact rational scanning, and 1-D norms come from
the closed form |D_n(x)| = |sin((n+1)x/2) / sin(x/2)| integrated piecewise
between the kernel's zeros with Gauss-Legendre nodes.
"""

import itertools
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from lebconst.geometry import HalfSpace, HRep

TAU = 2.0 * math.pi


# ---------------------------------------------------------------------------
# half-space builders


def hs(coeffs, bound, strict=False):
    return HalfSpace(tuple(Fraction(c) for c in coeffs), Fraction(bound), strict)


def nonneg_rows(dim):
    rows = []
    for j in range(dim):
        rows.append(hs([-1 if t == j else 0 for t in range(dim)], 0))
    return rows


def interval_hrep(lo, hi):
    """1-D polytope lo <= x <= hi (lo, hi rational)."""
    return HRep(1, (hs([-1], -Fraction(lo)), hs([1], Fraction(hi))))


def box_hrep(*sides):
    """[0, s_1] x ... x [0, s_d]."""
    d = len(sides)
    rows = nonneg_rows(d)
    for j, s in enumerate(sides):
        rows.append(hs([1 if t == j else 0 for t in range(d)], s))
    return HRep(d, tuple(rows))


def corner_simplex_hrep(d, n):
    """x >= 0, x_1 + ... + x_d <= n."""
    return HRep(d, tuple(nonneg_rows(d) + [hs([1] * d, n)]))


def right_triangle_hrep(a, b):
    """x, y >= 0, x/a + y/b <= 1."""
    return HRep(2, tuple(nonneg_rows(2) + [hs([Fraction(1, a), Fraction(1, b)], 1)]))


def pentagon_hrep():
    """x, y >= 0, x <= 4, y <= 4, x + y <= 6."""
    return HRep(2, tuple(nonneg_rows(2) + [hs([1, 0], 4), hs([0, 1], 4), hs([1, 1], 6)]))


# ---------------------------------------------------------------------------
# exact lattice oracle


def oracle_points(h, caps):
    """All integer points of h in [0, caps_1] x ... x [0, caps_d], by
    exhaustive rational membership testing."""
    pts = []
    for q in itertools.product(*(range(c + 1) for c in caps)):
        ok = True
        for row in h.rows:
            val = sum(c * k for c, k in zip(row.coeffs, q))
            if (val >= row.bound) if row.strict else (val > row.bound):
                ok = False
                break
        if ok:
            pts.append(q)
    return sorted(pts)


# ---------------------------------------------------------------------------
# 1-D Dirichlet norm oracle


def dirichlet_abs(n, x):
    """|sum_{k=0}^n e^{ikx}| via the closed sine quotient."""
    x = np.asarray(x, dtype=float)
    num = np.sin((n + 1) * x / 2.0)
    den = np.sin(x / 2.0)
    out = np.full_like(x, float(n + 1))
    safe = np.abs(den) > 1e-12
    out[safe] = np.abs(num[safe] / den[safe])
    return out


@lru_cache(maxsize=None)
def _leggauss(nodes):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return x, w


@lru_cache(maxsize=None)
def oned_lp(n, p, nodes=96):
    """((2 pi)^{-1} integral of |D_n|^p)^{1/p} for the interval [0, n].

    The integrand is analytic between consecutive zeros 2 pi j / (n+1), so
    per-segment Gauss-Legendre converges to machine precision for the
    integer p used in the tests.
    """
    xg, wg = _leggauss(nodes)
    edges = TAU * np.arange(n + 2) / (n + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        total += half * float(np.sum(wg * dirichlet_abs(n, mid + half * xg) ** p))
    return (total / TAU) ** (1.0 / p)
