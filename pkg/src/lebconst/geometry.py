"""Exact rational geometry for convex lattice polytopes in the nonnegative orthant.

Every predicate in this module runs in exact rational arithmetic
(fractions.Fraction); floating point never enters.  Vertex enumeration,
facet recovery and triangulation are implemented for d <= 3, which is the
range the torus studies exercise; H-representation pipelines (bounding
boxes, lattice point scans) accept any d >= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    DegeneratePolytope,
    DimensionTooLarge,
    PolytopeFormatError,
    UnboundedPolytope,
)

Rational = Fraction
Vector = Tuple[Fraction, ...]

# Lattice scans switch from int64 numpy to pure python above this magnitude.
_INT64_SAFE = 2 ** 60


def _frac_vector(values: Iterable, dim: Optional[int] = None) -> Vector:
    vec = tuple(Fraction(v) for v in values)
    if dim is not None and len(vec) != dim:
        raise ValueError(f"expected {dim} components, got {len(vec)}")
    return vec


@dataclass(frozen=True)
class HalfSpace:
    """One row (a, x) <= b of an H-representation; strict means (a, x) < b."""

    coeffs: Vector
    bound: Fraction
    strict: bool = False

    def satisfied(self, point: Sequence[Fraction]) -> bool:
        lhs = sum(c * x for c, x in zip(self.coeffs, point))
        return lhs < self.bound if self.strict else lhs <= self.bound

    def normalized(self) -> "HalfSpace":
        """Scale to a primitive integer row (canonical form for dedup)."""
        denom = math.lcm(*(c.denominator for c in self.coeffs), self.bound.denominator)
        ints = [int(c * denom) for c in self.coeffs] + [int(self.bound * denom)]
        g = math.gcd(*(abs(v) for v in ints))
        if g > 1:
            ints = [v // g for v in ints]
        return HalfSpace(tuple(Fraction(v) for v in ints[:-1]), Fraction(ints[-1]), self.strict)


@dataclass(frozen=True)
class HRep:
    """Intersection of half-spaces; the feasible region must lie in R_+^d.

    Nonnegativity rows are included by the family constructors and the file
    parser whenever they are facets; operations do not require redundant
    copies of implied rows.
    """

    dim: int
    rows: Tuple[HalfSpace, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        for row in self.rows:
            if len(row.coeffs) != self.dim:
                raise ValueError("row length does not match dimension")

    def contains(self, point: Sequence) -> bool:
        pt = _frac_vector(point, self.dim)
        return all(row.satisfied(pt) for row in self.rows)


@dataclass(frozen=True)
class VRep:
    """Vertex set of a polytope; every vertex is extreme."""

    dim: int
    vertices: Tuple[Vector, ...]

    def __post_init__(self):
        for v in self.vertices:
            if len(v) != self.dim:
                raise ValueError("vertex length does not match dimension")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertices")


@dataclass(frozen=True)
class Simplex:
    """d+1 affinely independent vertices."""

    dim: int
    vertices: Tuple[Vector, ...]

    def __post_init__(self):
        if len(self.vertices) != self.dim + 1:
            raise ValueError("simplex needs d+1 vertices")
        if self.volume() == 0:
            raise ValueError("vertices are affinely dependent")

    def volume(self) -> Fraction:
        base = self.vertices[0]
        mat = [[v[j] - base[j] for j in range(self.dim)] for v in self.vertices[1:]]
        return abs(_det(mat)) / Fraction(math.factorial(self.dim))


@dataclass(frozen=True)
class LatticePointSet:
    """Lexicographically sorted, duplicate-free integer points."""

    dim: int
    points: Tuple[Tuple[int, ...], ...]

    @staticmethod
    def from_iterable(dim: int, pts: Iterable[Sequence[int]]) -> "LatticePointSet":
        uniq = sorted({tuple(int(c) for c in p) for p in pts})
        for p in uniq:
            if len(p) != dim:
                raise ValueError("point length does not match dimension")
        return LatticePointSet(dim, tuple(uniq))

    def __len__(self) -> int:
        return len(self.points)


# ---------------------------------------------------------------------------
# exact linear algebra helpers


def _det(mat: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(mat)
    m = [list(row) for row in mat]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = Fraction(1) / m[col][col]
        for r in range(col + 1, n):
            factor = m[r][col] * inv
            if factor:
                m[r] = [a - factor * b for a, b in zip(m[r], m[col])]
    return det


def _solve(mat: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> Optional[Vector]:
    """Solve a square rational system; None when singular."""
    n = len(mat)
    aug = [list(row) + [b] for row, b in zip(mat, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = Fraction(1) / aug[col][col]
        aug[col] = [a * inv for a in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return tuple(aug[r][n] for r in range(n))


def _affine_rank(points: Sequence[Vector]) -> int:
    if not points:
        return -1
    base = points[0]
    rows = [[p[j] - base[j] for j in range(len(base))] for p in points[1:]]
    rank = 0
    cols = len(base)
    for col in range(cols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = Fraction(1) / rows[rank][col]
        rows[rank] = [a * inv for a in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                factor = rows[r][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


# ---------------------------------------------------------------------------
# Fourier-Motzkin projection helpers (single-interval form, no branching)

_Row = Tuple[Tuple[Fraction, ...], Fraction, bool]  # coeffs, bound, strict


def _rows_of(h: HRep) -> List[_Row]:
    return [(r.coeffs, r.bound, r.strict) for r in h.rows]


def _project_out(rows: List[_Row], var: int) -> Optional[List[_Row]]:
    """Eliminate one variable; None when a constant contradiction appears."""
    uppers, lowers, rest = [], [], []
    for coeffs, bound, strict in rows:
        c = coeffs[var]
        if c > 0:
            uppers.append((coeffs, bound, strict))
        elif c < 0:
            lowers.append((coeffs, bound, strict))
        else:
            rest.append((coeffs, bound, strict))
    for lc, lb, ls in lowers:
        for uc, ub, us in uppers:
            mult_u, mult_l = -lc[var], uc[var]
            coeffs = tuple(mult_u * u + mult_l * l for u, l in zip(uc, lc))
            bound = mult_u * ub + mult_l * lb
            rest.append((coeffs, bound, ls or us))
    out: List[_Row] = []
    for coeffs, bound, strict in rest:
        if all(c == 0 for c in coeffs):
            if bound < 0 or (bound == 0 and strict):
                return None
            continue
        out.append((coeffs, bound, strict))
    return out


def _axis_interval(h: HRep, axis: int) -> Optional[Tuple[Fraction, Optional[Fraction]]]:
    """Exact (min, max) of coordinate `axis` over the closure of the region.

    Returns None when the region is empty, max None when unbounded above.
    """
    rows = _rows_of(h)
    for var in range(h.dim):
        if var == axis:
            continue
        rows = _project_out(rows, var)
        if rows is None:
            return None
    lo, hi = None, None
    for coeffs, bound, _strict in rows:
        c = coeffs[axis]
        val = bound / c
        if c > 0:
            hi = val if hi is None else min(hi, val)
        else:
            lo = val if lo is None else max(lo, val)
    if lo is None:
        lo = Fraction(0)  # region is constrained to R_+^d by contract
    if hi is not None and hi < lo:
        return None
    return lo, hi


def is_empty(h: HRep) -> bool:
    """Exact emptiness test via full elimination."""
    rows = _rows_of(h)
    for var in range(h.dim):
        rows = _project_out(rows, var)
        if rows is None:
            return True
    return False


def bounding_box(h: HRep) -> Vector:
    """Componentwise maximum of the closure of the feasible region."""
    maxima = []
    for axis in range(h.dim):
        interval = _axis_interval(h, axis)
        if interval is None:
            raise DegeneratePolytope("empty feasible region has no bounding box")
        lo, hi = interval
        if hi is None:
            raise UnboundedPolytope(f"coordinate {axis + 1} is unbounded above")
        if lo < 0:
            raise ValueError(
                f"coordinate {axis + 1} reaches {lo} < 0; regions must lie in "
                "the nonnegative orthant (translate the polytope first)"
            )
        maxima.append(hi)
    return tuple(maxima)


# ---------------------------------------------------------------------------
# representation conversions


def vrep_from_hrep(h: HRep) -> VRep:
    """Enumerate vertices of the closure of a bounded region (d <= 3)."""
    if h.dim > 3:
        raise DimensionTooLarge("vertex enumeration is implemented for d <= 3")
    bounding_box(h)  # raises on unbounded or empty input
    d = h.dim
    verts = set()
    for combo in combinations(h.rows, d):
        mat = [row.coeffs for row in combo]
        rhs = [row.bound for row in combo]
        sol = _solve(mat, rhs)
        if sol is None:
            continue
        if all(sum(c * x for c, x in zip(row.coeffs, sol)) <= row.bound for row in h.rows):
            verts.add(sol)
    if not verts:
        raise DegeneratePolytope("no vertices found")
    return VRep(d, tuple(sorted(verts)))


def _hull2(points: Sequence[Vector]) -> List[Vector]:
    """Counter-clockwise convex hull cycle (monotone chain, exact)."""

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: List[Vector] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: List[Vector] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def hrep_from_vrep(v: VRep) -> HRep:
    """Minimal facet system of the hull of a full-dimensional vertex set (d <= 3)."""
    if v.dim > 3:
        raise DimensionTooLarge("facet recovery is implemented for d <= 3")
    if _affine_rank(v.vertices) < v.dim:
        raise DegeneratePolytope("vertices do not affinely span R^d")
    d = v.dim
    rows = set()
    if d == 1:
        xs = [p[0] for p in v.vertices]
        rows.add(HalfSpace((Fraction(-1),), -min(xs)).normalized())
        rows.add(HalfSpace((Fraction(1),), max(xs)).normalized())
    elif d == 2:
        cycle = _hull2(v.vertices)
        for p, q in zip(cycle, cycle[1:] + cycle[:1]):
            dx, dy = q[0] - p[0], q[1] - p[1]
            normal = (dy, -dx)
            bound = normal[0] * p[0] + normal[1] * p[1]
            rows.add(HalfSpace(normal, bound).normalized())
    else:
        for combo in combinations(v.vertices, 3):
            u = tuple(combo[1][j] - combo[0][j] for j in range(3))
            w = tuple(combo[2][j] - combo[0][j] for j in range(3))
            normal = (
                u[1] * w[2] - u[2] * w[1],
                u[2] * w[0] - u[0] * w[2],
                u[0] * w[1] - u[1] * w[0],
            )
            if all(c == 0 for c in normal):
                continue
            bound = sum(n * x for n, x in zip(normal, combo[0]))
            sides = [sum(n * x for n, x in zip(normal, p)) - bound for p in v.vertices]
            if all(s <= 0 for s in sides):
                rows.add(HalfSpace(normal, bound).normalized())
            elif all(s >= 0 for s in sides):
                neg = tuple(-n for n in normal)
                rows.add(HalfSpace(neg, -bound).normalized())
    return HRep(d, tuple(sorted(rows, key=lambda r: (r.coeffs, r.bound))))


# ---------------------------------------------------------------------------
# triangulation


def _facet_vertices(v: VRep, row: HalfSpace) -> List[Vector]:
    return [
        p
        for p in v.vertices
        if sum(c * x for c, x in zip(row.coeffs, p)) == row.bound
    ]


def _fan_polygon(points: Sequence[Vector], drop_axis: Optional[int]) -> List[Tuple[Vector, ...]]:
    """Fan triangulation of a polygon from its lexicographically smallest vertex.

    drop_axis projects embedded (3-d) polygons to a plane where the hull
    cycle can be computed exactly; None means the points are planar already.
    """
    if drop_axis is None:
        proj = {p: p for p in points}
    else:
        proj = {tuple(c for j, c in enumerate(p) if j != drop_axis): p for p in points}
    cycle = [proj[q] for q in _hull2(list(proj))]
    apex = min(points)
    start = cycle.index(apex)
    ordered = cycle[start + 1:] + cycle[:start]
    return [(apex, a, b) for a, b in zip(ordered, ordered[1:])]


def triangulate(v: VRep) -> List[Simplex]:
    """Fan triangulation from the lexicographically smallest vertex (d <= 3).

    Facets that do not contain the apex are triangulated recursively by the
    same rule and coned with the apex, so shared faces receive identical
    triangulations and the pieces meet face to face.
    """
    if v.dim > 3:
        raise DimensionTooLarge("triangulation is implemented for d <= 3")
    if _affine_rank(v.vertices) < v.dim:
        raise DegeneratePolytope("vertices do not affinely span R^d")
    d = v.dim
    if d == 1:
        xs = sorted(v.vertices)
        return [Simplex(1, (xs[0], xs[-1]))]
    if d == 2:
        tris = _fan_polygon(v.vertices, None)
        return sorted(
            (Simplex(2, tuple(sorted(t))) for t in tris),
            key=lambda s: s.vertices,
        )
    apex = min(v.vertices)
    h = hrep_from_vrep(v)
    simplices = []
    for row in h.rows:
        facet = _facet_vertices(v, row)
        if apex in facet:
            continue
        drop = next(j for j in range(3) if row.coeffs[j] != 0)
        for tri in _fan_polygon(facet, drop):
            simplices.append(Simplex(3, tuple(sorted(tri + (apex,)))))
    return sorted(simplices, key=lambda s: s.vertices)


# ---------------------------------------------------------------------------
# lattice point enumeration (brute-force oracle)


def lattice_points(h: HRep) -> LatticePointSet:
    """Scan the integer bounding box and keep points satisfying every row.

    The scan clears denominators row by row, so membership tests are exact
    integer comparisons; int64 vectorization falls back to python integers
    when magnitudes could overflow.
    """
    try:
        box = bounding_box(h)
    except DegeneratePolytope:
        return LatticePointSet(h.dim, ())
    sizes = [math.floor(b) + 1 for b in box]
    if any(s <= 0 for s in sizes):
        return LatticePointSet(h.dim, ())
    int_rows = []
    for row in h.rows:
        norm = row.normalized()
        int_rows.append((
            [int(c) for c in norm.coeffs],
            int(norm.bound),
            norm.strict,
        ))
    total = math.prod(sizes)
    max_abs = max(
        (abs(c) for coeffs, _b, _s in int_rows for c in coeffs),
        default=0,
    )
    worst = max_abs * max(sizes) * h.dim + max(
        (abs(b) for _c, b, _s in int_rows), default=0
    )
    if worst >= _INT64_SAFE or total > 5 * 10 ** 7:
        return _lattice_points_python(h.dim, sizes, int_rows)
    grids = np.indices(sizes, dtype=np.int64).reshape(h.dim, -1)
    mask = np.ones(grids.shape[1], dtype=bool)
    for coeffs, bound, strict in int_rows:
        lhs = np.zeros(grids.shape[1], dtype=np.int64)
        for j, c in enumerate(coeffs):
            if c:
                lhs += c * grids[j]
        mask &= (lhs < bound) if strict else (lhs <= bound)
    pts = grids[:, mask].T
    return LatticePointSet(h.dim, tuple(sorted(map(tuple, pts.tolist()))))


def _lattice_points_python(dim: int, sizes: List[int], int_rows) -> LatticePointSet:
    from itertools import product

    pts = []
    for pt in product(*(range(s) for s in sizes)):
        ok = True
        for coeffs, bound, strict in int_rows:
            lhs = sum(c * x for c, x in zip(coeffs, pt))
            if lhs > bound or (strict and lhs == bound):
                ok = False
                break
        if ok:
            pts.append(pt)
    return LatticePointSet(dim, tuple(sorted(pts)))


# ---------------------------------------------------------------------------
# polytope files


def parse_polytope(text: str) -> Union[HRep, VRep]:
    """Parse the polytope file format.

    Line 1 is ``d <dim>``; a line ``H`` or ``V`` opens the block.  H rows
    read ``a1 ... ad <= b`` (``<`` for a strict row), V rows list vertex
    coordinates.  Entries are integers or rationals ``p/q``; blank lines and
    ``#`` comments are ignored.
    """
    lines = []
    for raw in text.splitlines():
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            lines.append(stripped)
    if not lines:
        raise PolytopeFormatError("empty polytope file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "d":
        raise PolytopeFormatError("first line must be 'd <dim>'")
    try:
        dim = int(head[1])
    except ValueError as exc:
        raise PolytopeFormatError(f"bad dimension {head[1]!r}") from exc
    if dim < 1:
        raise PolytopeFormatError("dimension must be >= 1")
    if len(lines) < 2 or lines[1] not in ("H", "V"):
        raise PolytopeFormatError("second line must be 'H' or 'V'")
    kind = lines[1]

    def frac(tok: str) -> Fraction:
        try:
            return Fraction(tok)
        except (ValueError, ZeroDivisionError) as exc:
            raise PolytopeFormatError(f"bad rational {tok!r}") from exc

    if kind == "V":
        verts = []
        for line in lines[2:]:
            toks = line.split()
            if len(toks) != dim:
                raise PolytopeFormatError(f"vertex row needs {dim} coordinates: {line!r}")
            verts.append(tuple(frac(t) for t in toks))
        if not verts:
            raise PolytopeFormatError("V block has no vertices")
        return VRep(dim, tuple(dict.fromkeys(verts)))
    rows = []
    for line in lines[2:]:
        toks = line.split()
        if len(toks) != dim + 2 or toks[dim] not in ("<=", "<"):
            raise PolytopeFormatError(f"bad H row: {line!r}")
        coeffs = tuple(frac(t) for t in toks[:dim])
        rows.append(HalfSpace(coeffs, frac(toks[dim + 1]), strict=toks[dim] == "<"))
    if not rows:
        raise PolytopeFormatError("H block has no rows")
    return HRep(dim, tuple(rows))


def load_polytope(path) -> Union[HRep, VRep]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_polytope(fh.read())


def as_hrep(poly: Union[HRep, VRep]) -> HRep:
    """Validated H-representation of a parsed polytope.

    Rejects unbounded or empty systems; V input is converted through the
    exact facet recovery (d <= 3).
    """
    if isinstance(poly, VRep):
        return hrep_from_vrep(poly)
    if is_empty(poly):
        raise DegeneratePolytope("empty feasible region")
    bounding_box(poly)  # raises UnboundedPolytope when a direction escapes
    return poly


def load_hrep(path) -> HRep:
    return as_hrep(load_polytope(path))
