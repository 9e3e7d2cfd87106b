"""Fourier-Motzkin elimination of bounded H-representations into disjoint
nested summation systems, and prefix splitting into zero-based signed forms.

The elimination keeps one lower and one upper bound per variable by
branching on which candidate bound is extremal; ties are broken by strict
inequalities against all candidates that sort earlier, so the branch
regions partition the input region exactly.  All arithmetic is rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .errors import UnboundedPolytope
from .geometry import HRep, LatticePointSet

# Reading of a rational ceiling L as an integer summation limit:
# FLOOR_CLOSED enumerates 0 <= k <= L, HALF_OPEN enumerates 0 <= k < L + 1.
# The two readings differ exactly when L is not integral.
FLOOR_CLOSED = "floor"
HALF_OPEN = "halfopen"


@dataclass(frozen=True)
class AffineBound:
    """Value constant - (coeffs, prefix) bounding a nested variable."""

    constant: Fraction
    coeffs: Tuple[Fraction, ...]
    strict: bool = False

    def value(self, prefix: Sequence) -> Fraction:
        return self.constant - sum(c * k for c, k in zip(self.coeffs, prefix))

    def is_constant(self) -> bool:
        return all(c == 0 for c in self.coeffs)


def lower_index(bound: AffineBound, prefix: Sequence) -> int:
    """Smallest integer admitted by a lower bound at this prefix."""
    v = bound.value(prefix)
    return math.floor(v) + 1 if bound.strict else math.ceil(v)


def upper_index(bound: AffineBound, prefix: Sequence) -> int:
    """Largest integer admitted by an upper bound at this prefix."""
    v = bound.value(prefix)
    return math.ceil(v) - 1 if bound.strict else math.floor(v)


def ceiling_index(convention: str, value: Fraction) -> int:
    """Integer summation limit of a rational ceiling under a reading."""
    if convention == FLOOR_CLOSED:
        return math.floor(value)
    if convention == HALF_OPEN:
        return math.ceil(value + 1) - 1
    raise ValueError(f"unknown convention {convention!r}")


@dataclass(frozen=True)
class NestedSystem:
    """Iterated summation domain: bounds on variable s see variables < s.

    ``axes[s]`` is the original coordinate enumerated at nested position s.
    The integer points described are exactly those with
    lowers[s] <= k_s <= uppers[s] at every position (strict rows excluded).
    """

    dim: int
    axes: Tuple[int, ...]
    lowers: Tuple[AffineBound, ...]
    uppers: Tuple[AffineBound, ...]

    def __post_init__(self):
        if len(self.axes) != self.dim or sorted(self.axes) != list(range(self.dim)):
            raise ValueError("axes must be a permutation of 0..d-1")
        if len(self.lowers) != self.dim or len(self.uppers) != self.dim:
            raise ValueError("need one lower and one upper bound per variable")
        for s in range(self.dim):
            if len(self.lowers[s].coeffs) != s or len(self.uppers[s].coeffs) != s:
                raise ValueError(f"bounds at position {s} must see {s} variables")


def _enumerate_nested(ns: NestedSystem, s: int, prefix: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
    lo = lower_index(ns.lowers[s], prefix)
    hi = upper_index(ns.uppers[s], prefix)
    if s == ns.dim - 1:
        for k in range(lo, hi + 1):
            yield prefix + (k,)
    else:
        for k in range(lo, hi + 1):
            yield from _enumerate_nested(ns, s + 1, prefix + (k,))


def nested_lattice_points(ns: NestedSystem) -> LatticePointSet:
    """Enumerate the system; points come back in original coordinates."""
    pts = []
    for nested_pt in _enumerate_nested(ns, 0, ()):
        orig = [0] * ns.dim
        for s, k in enumerate(nested_pt):
            orig[ns.axes[s]] = k
        pts.append(tuple(orig))
    return LatticePointSet.from_iterable(ns.dim, pts)


def nested_count(ns: NestedSystem) -> int:
    """Exact point count with the innermost range counted arithmetically."""

    def rec(s: int, prefix: Tuple[int, ...]) -> int:
        lo = lower_index(ns.lowers[s], prefix)
        hi = upper_index(ns.uppers[s], prefix)
        if s == ns.dim - 1:
            return max(hi - lo + 1, 0)
        return sum(rec(s + 1, prefix + (k,)) for k in range(lo, hi + 1))

    return rec(0, ())


# ---------------------------------------------------------------------------
# elimination

_Row = Tuple[Tuple[Fraction, ...], Fraction, bool]


def _clean_rows(rows: Sequence[_Row]) -> Optional[List[_Row]]:
    """Primitive-integer normalization, dominance dedup, contradiction check."""
    best: Dict[Tuple[int, ...], Tuple[Fraction, bool]] = {}
    for coeffs, bound, strict in rows:
        if all(c == 0 for c in coeffs):
            if bound < 0 or (bound == 0 and strict):
                return None
            continue
        denom = math.lcm(*(c.denominator for c in coeffs), bound.denominator)
        ints = [int(c * denom) for c in coeffs]
        b_int = int(bound * denom)
        g = math.gcd(*(abs(v) for v in ints), abs(b_int))
        if g > 1:
            ints = [v // g for v in ints]
            b_int //= g
        key = tuple(ints)
        b_frac = Fraction(b_int)
        cur = best.get(key)
        if cur is None or b_frac < cur[0]:
            best[key] = (b_frac, strict)
        elif b_frac == cur[0]:
            best[key] = (b_frac, strict or cur[1])
    out = [
        (tuple(Fraction(c) for c in key), bound, strict)
        for key, (bound, strict) in best.items()
    ]
    out.sort()
    return out


def _candidates(rows: Sequence[_Row], s: int):
    """Split stage-s rows into upper/lower bound candidates and the rest."""
    uppers: Dict[Tuple, AffineBound] = {}
    lowers: Dict[Tuple, AffineBound] = {}
    rest: List[_Row] = []
    for coeffs, bound, strict in rows:
        c = coeffs[s]
        if c == 0:
            rest.append((coeffs, bound, strict))
            continue
        const = bound / c
        seen = tuple(coeffs[t] / c for t in range(s))
        key = (const, seen)
        target = uppers if c > 0 else lowers
        cur = target.get(key)
        target[key] = AffineBound(const, seen, strict or (cur.strict if cur else False))
    up = sorted(uppers.values(), key=lambda b: (b.constant, b.coeffs, b.strict))
    low = sorted(lowers.values(), key=lambda b: (b.constant, b.coeffs, b.strict))
    return up, low, rest


def _pad(coeffs: Tuple[Fraction, ...], dim: int) -> Tuple[Fraction, ...]:
    return coeffs + (Fraction(0),) * (dim - len(coeffs))


def _difference_row(keep: AffineBound, other: AffineBound, dim: int, strict: bool) -> _Row:
    """Row asserting keep <= other (strict: keep < other)."""
    coeffs = tuple(o - k for k, o in zip(_pad(keep.coeffs, dim), _pad(other.coeffs, dim)))
    return coeffs, other.constant - keep.constant, strict


def _pair_row(low: AffineBound, up: AffineBound, dim: int) -> _Row:
    """Row asserting low <= up, strict when either side is strict."""
    coeffs = tuple(u - l for l, u in zip(_pad(low.coeffs, dim), _pad(up.coeffs, dim)))
    return coeffs, up.constant - low.constant, low.strict or up.strict


def _tie(keep: AffineBound, other: AffineBound, earlier: bool) -> bool:
    """Strictness of the dominance row for a kept candidate.

    A strict bound is tighter than a non-strict one of equal value, so a
    non-strict keeper must dominate strict rivals strictly, while a strict
    keeper owns value ties against non-strict rivals.  Between candidates of
    the same kind the earlier one in sort order owns the tie.
    """
    if other.strict != keep.strict:
        return other.strict
    return earlier


def eliminate(h: HRep, order: Optional[Sequence[int]] = None) -> List[NestedSystem]:
    """Rewrite a bounded region as disjoint nested systems.

    ``order`` permutes coordinates (outermost first, 0-based); identity by
    default.  Returns [] for an empty region; raises UnboundedPolytope when
    some variable has no bound at its elimination stage.
    """
    d = h.dim
    axes = tuple(order) if order is not None else tuple(range(d))
    if sorted(axes) != list(range(d)):
        raise ValueError("order must be a permutation of 0..d-1")
    base: List[_Row] = [
        (tuple(row.coeffs[axes[j]] for j in range(d)), row.bound, row.strict)
        for row in h.rows
    ]
    cleaned = _clean_rows(base)
    if cleaned is None:
        return []
    branches: List[Tuple[List[_Row], List[Optional[Tuple[AffineBound, AffineBound]]]]] = [
        (cleaned, [None] * d)
    ]
    for s in range(d - 1, -1, -1):
        grown = []
        for rows, bounds in branches:
            uppers, lowers, rest = _candidates(rows, s)
            if not uppers:
                raise UnboundedPolytope(f"coordinate {axes[s] + 1} is unbounded above")
            if not lowers:
                raise UnboundedPolytope(f"coordinate {axes[s] + 1} is unbounded below")
            for j, up in enumerate(uppers):
                for i, low in enumerate(lowers):
                    new_rows = list(rest)
                    for t, other in enumerate(uppers):
                        if t != j:
                            new_rows.append(
                                _difference_row(up, other, d, _tie(up, other, t < j))
                            )
                    for t, other in enumerate(lowers):
                        if t != i:
                            # low must dominate: other <= low
                            new_rows.append(
                                _difference_row(other, low, d, _tie(low, other, t < i))
                            )
                    new_rows.append(_pair_row(low, up, d))
                    kept = _clean_rows(new_rows)
                    if kept is None:
                        continue
                    new_bounds = list(bounds)
                    new_bounds[s] = (low, up)
                    grown.append((kept, new_bounds))
        branches = grown
    systems = []
    for _rows, bounds in branches:
        low0, up0 = bounds[0]
        if low0.constant > up0.constant:
            continue
        if low0.constant == up0.constant and (low0.strict or up0.strict):
            continue
        systems.append(
            NestedSystem(
                dim=d,
                axes=axes,
                lowers=tuple(b[0] for b in bounds),
                uppers=tuple(b[1] for b in bounds),
            )
        )
    systems.sort(key=_system_key)
    return systems


def _bound_key(b: AffineBound):
    return (b.constant, b.coeffs, b.strict)


def _system_key(ns: NestedSystem):
    return tuple((_bound_key(l), _bound_key(u)) for l, u in zip(ns.lowers, ns.uppers))


# ---------------------------------------------------------------------------
# signed prefix forms


@dataclass(frozen=True)
class SignedPrefixForm:
    """Zero-based nested form with an integer modulation shift per variable.

    Variable s enumerates j_s = 0 .. T_s where T_s is the integer reading
    (``conventions[s]``) of the rational ceiling
    constants[s] - (coeffs[s], j-prefix); the lattice coordinate on axis
    ``axes[s]`` is j_s + shifts[s].  A subtree is empty whenever T_s < 0.
    """

    sign: int
    dim: int
    axes: Tuple[int, ...]
    shifts: Tuple[int, ...]
    constants: Tuple[Fraction, ...]
    coeffs: Tuple[Tuple[Fraction, ...], ...]
    conventions: Tuple[str, ...]

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        for s in range(self.dim):
            if len(self.coeffs[s]) != s:
                raise ValueError(f"ceiling at position {s} must see {s} variables")
            if self.conventions[s] not in (FLOOR_CLOSED, HALF_OPEN):
                raise ValueError(f"unknown convention {self.conventions[s]!r}")

    def ceiling(self, s: int, prefix: Sequence[int]) -> Fraction:
        return self.constants[s] - sum(c * j for c, j in zip(self.coeffs[s], prefix))

    def limit(self, s: int, prefix: Sequence[int]) -> int:
        return ceiling_index(self.conventions[s], self.ceiling(s, prefix))


def to_signed_prefix_forms(ns: NestedSystem) -> List[SignedPrefixForm]:
    """Split a nested system into at most 2^d zero-based signed forms.

    Constant lower bounds are absorbed as integer modulation shifts, which
    keeps per-axis degrees within the system's own ranges; affine lower
    bounds split the sum at zero, flipping the sign of the complementary
    form.  Identically empty forms are dropped.
    """
    d = ns.dim
    shifts: List[int] = []
    # choices: list of (sign, [(constant, coeffs, convention), ...])
    partials: List[Tuple[int, List[Tuple[Fraction, Tuple[Fraction, ...], str]]]] = [(1, [])]
    for s in range(d):
        up, low = ns.uppers[s], ns.lowers[s]
        shift_adjust = sum(c * sh for c, sh in zip(up.coeffs, shifts))
        if up.strict:
            up_data = (up.constant - shift_adjust - 1, up.coeffs, HALF_OPEN)
        else:
            up_data = (up.constant - shift_adjust, up.coeffs, FLOOR_CLOSED)
        if low.is_constant():
            sigma = lower_index(low, ())
            up_data = (up_data[0] - sigma, up_data[1], up_data[2])
            shifts.append(sigma)
            partials = [(sign, rows + [up_data]) for sign, rows in partials]
        else:
            low_adjust = sum(c * sh for c, sh in zip(low.coeffs, shifts))
            if low.strict:
                low_data = (low.constant - low_adjust, low.coeffs, FLOOR_CLOSED)
            else:
                low_data = (low.constant - low_adjust - 1, low.coeffs, HALF_OPEN)
            shifts.append(0)
            partials = [
                choice
                for sign, rows in partials
                for choice in ((sign, rows + [up_data]), (-sign, rows + [low_data]))
            ]
    forms = []
    for sign, rows in partials:
        form = SignedPrefixForm(
            sign=sign,
            dim=d,
            axes=ns.axes,
            shifts=tuple(shifts),
            constants=tuple(r[0] for r in rows),
            coeffs=tuple(r[1] for r in rows),
            conventions=tuple(r[2] for r in rows),
        )
        if not _statically_empty(form):
            forms.append(form)
    forms.sort(key=lambda f: (-f.sign, f.constants, f.coeffs, f.conventions, f.shifts))
    return forms


def _statically_empty(form: SignedPrefixForm) -> bool:
    """True when some constant ceiling already empties the whole form."""
    for s in range(form.dim):
        if all(c == 0 for c in form.coeffs[s]):
            if ceiling_index(form.conventions[s], form.constants[s]) < 0:
                return True
    return False


def form_lattice_points(form: SignedPrefixForm) -> Iterator[Tuple[int, ...]]:
    """Yield the form's points in original coordinates (sign not applied)."""

    def rec(s: int, prefix: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
        hi = form.limit(s, prefix)
        if s == form.dim - 1:
            for j in range(hi + 1):
                yield prefix + (j,)
        else:
            for j in range(hi + 1):
                yield from rec(s + 1, prefix + (j,))

    for nested_pt in rec(0, ()):
        orig = [0] * form.dim
        for s, j in enumerate(nested_pt):
            orig[form.axes[s]] = j + form.shifts[s]
        yield tuple(orig)


def signed_point_counts(forms: Sequence[SignedPrefixForm]) -> Dict[Tuple[int, ...], int]:
    """Net multiplicity of every lattice point across signed forms."""
    counts: Dict[Tuple[int, ...], int] = {}
    for form in forms:
        for pt in form_lattice_points(form):
            counts[pt] = counts.get(pt, 0) + form.sign
    return {pt: c for pt, c in counts.items() if c != 0}


def form_degree_bounds(form: SignedPrefixForm) -> Optional[Tuple[int, ...]]:
    """Per-axis upper bounds on the form's attainable indices.

    Computed by interval propagation through the affine ceilings; exact for
    ceilings whose maxima sit at range corners.  None when the form is
    empty along some variable.
    """
    j_max: List[int] = []
    for s in range(form.dim):
        val = form.constants[s]
        for t, c in enumerate(form.coeffs[s]):
            if c < 0:
                val -= c * j_max[t]
        hi = ceiling_index(form.conventions[s], val)
        if hi < 0:
            return None
        j_max.append(hi)
    deg = [0] * form.dim
    for s in range(form.dim):
        deg[form.axes[s]] = form.shifts[s] + j_max[s]
    return tuple(deg)
