"""Dirichlet-type kernels of nested lattice domains.

A signed prefix form contributes sign * e^{i(shift, x)} * D(x) where D is
the iterated sum over the form's zero-based ranges.  The innermost range
always collapses to the closed-form geometric sum, evaluated through the
sine-quotient identity which is stable near the zeros of the denominator.
Tensor-grid evaluation collapses one more level for integer-slope ceilings,
which covers the product, simplex and rhomb families at scale.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import EmptySet, SingularArgument
from .fmelim import (
    FLOOR_CLOSED,
    SignedPrefixForm,
    ceiling_index,
    form_degree_bounds,
    form_lattice_points,
)
from .geometry import LatticePointSet

# Half-width (radians) of the strip around the denominator zeros inside
# which closed forms are replaced by their limits.
EPS_SING = 1e-9

# degrees() enumerates attainable indices exactly up to this many prefixes.
_DEGREE_ENUM_CAP = 200_000

TorusPoint = Sequence[float]


def _wrap(x: float) -> float:
    """Representative of x modulo 2*pi closest to 0."""
    return math.remainder(x, math.tau)


def s_t(t: int, x: float) -> complex:
    """Closed form of sum_{k=0}^{t} e^{ikx} for t >= -1 (empty sum is 0).

    Raises SingularArgument within EPS_SING of the zeros of e^{ix} - 1;
    the limit there is t + 1.
    """
    if t < -1:
        raise ValueError("t must be >= -1")
    if abs(_wrap(x)) <= EPS_SING:
        raise SingularArgument(f"argument {x!r} is within {EPS_SING} of a lattice of 2*pi")
    half = 0.5 * x
    return math.sin((t + 1) * half) / math.sin(half) * complex(math.cos(t * half), math.sin(t * half))


def _s_scalar(t: int, x: float) -> complex:
    """s_t with the singular strip replaced by its limit t + 1."""
    if t < 0:
        return 0j
    if abs(_wrap(x)) <= EPS_SING:
        return complex(t + 1)
    half = 0.5 * x
    return math.sin((t + 1) * half) / math.sin(half) * complex(math.cos(t * half), math.sin(t * half))


def _singular_mask(x: np.ndarray) -> np.ndarray:
    return np.abs(np.remainder(x + np.pi, math.tau) - np.pi) <= EPS_SING


def _s_row(t: int, x: np.ndarray) -> np.ndarray:
    """Vectorized _s_scalar over an arbitrary-shape argument array."""
    if t < 0:
        return np.zeros(np.shape(x), dtype=complex)
    x = np.asarray(x, dtype=float)
    half = 0.5 * x
    denom = np.sin(half)
    mask = _singular_mask(x)
    safe = np.where(mask, 1.0, denom)
    vals = np.sin((t + 1) * half) / safe * np.exp(1j * t * half)
    return np.where(mask, complex(t + 1), vals)


def _r_row(t: int, x: np.ndarray) -> np.ndarray:
    """Vectorized sum_{k=0}^{t} k e^{ikx} with its limit on the strip."""
    if t < 1:
        return np.zeros(np.shape(x), dtype=complex)
    x = np.asarray(x, dtype=float)
    mask = _singular_mask(x)
    q = np.exp(1j * x)
    one_minus = np.where(mask, 1.0, 1.0 - q)
    qt = np.exp(1j * t * x)
    vals = q * (1.0 - (t + 1) * qt + t * qt * q) / (one_minus * one_minus)
    return np.where(mask, 0.5 * t * (t + 1), vals)


# ---------------------------------------------------------------------------
# pointwise evaluation


def eval_direct(pts: Union[LatticePointSet, Sequence, np.ndarray], x: TorusPoint) -> complex:
    """Sum e^{i(k, x)} over lattice points in lexicographic order.

    numpy's pairwise accumulation keeps the result deterministic for a
    fixed point order.
    """
    if isinstance(pts, LatticePointSet):
        arr = np.array(pts.points, dtype=float) if pts.points else np.zeros((0, pts.dim))
    else:
        arr = np.asarray(pts, dtype=float)
        if arr.size:
            arr = arr[np.lexsort(arr.T[::-1])]
    if arr.size == 0:
        return 0j
    phases = arr @ np.asarray(x, dtype=float)
    return complex(np.sum(np.exp(1j * phases)))


def _plain_nested(
    constants: Sequence[Fraction],
    coeffs: Sequence[Tuple[Fraction, ...]],
    conventions: Sequence[str],
    xs: Sequence[float],
    s: int = 0,
    prefix: Tuple[int, ...] = (),
) -> complex:
    limit = ceiling_index(
        conventions[s],
        constants[s] - sum(c * j for c, j in zip(coeffs[s], prefix)),
    )
    if limit < 0:
        return 0j
    if s == len(constants) - 1:
        return _s_scalar(limit, xs[s])
    acc = 0j
    phase = 1 + 0j
    step = complex(math.cos(xs[s]), math.sin(xs[s]))
    for j in range(limit + 1):
        acc += phase * _plain_nested(constants, coeffs, conventions, xs, s + 1, prefix + (j,))
        phase *= step
    return acc


def _nested_xs(form: SignedPrefixForm, x: TorusPoint) -> List[float]:
    return [float(x[a]) for a in form.axes]


def _dress(form: SignedPrefixForm, xs: Sequence[float], value: complex) -> complex:
    phase = sum(sh * xv for sh, xv in zip(form.shifts, xs))
    return form.sign * complex(math.cos(phase), math.sin(phase)) * value


def eval_nested(form: SignedPrefixForm, x: TorusPoint) -> complex:
    """Kernel value of one signed form: nested loops with the innermost
    range collapsed to the closed-form geometric sum.

    Ranges that come out empty at a prefix contribute nothing, and the
    singular strip of the innermost closed form is replaced by its limit.
    Costs one complex exponential per enumerated prefix.
    """
    xs = _nested_xs(form, x)
    return _dress(form, xs, _plain_nested(form.constants, form.coeffs, form.conventions, xs))


def eval_forms(forms: Sequence[SignedPrefixForm], x: TorusPoint) -> complex:
    return sum((eval_nested(f, x) for f in forms), 0j)


def split_applicable(form: SignedPrefixForm) -> bool:
    """Whether eval_g + eval_f = eval_nested holds for this form.

    The split collapses the innermost sum through its closed form, which
    represents an empty range correctly only down to ceiling -1; forms
    whose innermost ceiling reads below -1 at some enumerated prefix (a
    cancellation artifact possible for d >= 3 splits) fall outside the
    identity's hypothesis.
    """
    if form.dim < 2:
        return False

    def rec(s: int, prefix: Tuple[int, ...]) -> bool:
        if s == form.dim - 1:
            return form.limit(s, prefix) >= -1
        return all(rec(s + 1, prefix + (j,)) for j in range(form.limit(s, prefix) + 1))

    return rec(0, ())


def eval_g(form: SignedPrefixForm, x: TorusPoint) -> complex:
    """Quotient term of the innermost-variable split of the form's kernel.

    Combines the kernel of the outer form at the sheared argument
    x' - m * x_d with its value at x'; requires d >= 2, an innermost
    ceiling that stays >= -1 on enumerated prefixes, and x_d off the
    singular strip (SingularArgument otherwise).  eval_g + eval_f equals
    eval_nested under the form's own ceiling reading.
    """
    if form.dim < 2:
        raise ValueError("the split needs d >= 2")
    xs = _nested_xs(form, x)
    xd = xs[-1]
    if abs(_wrap(xd)) <= EPS_SING:
        raise SingularArgument("innermost coordinate lies on the singular strip")
    w = 1.0 / (complex(math.cos(xd), math.sin(xd)) - 1.0)
    m = form.coeffs[-1]
    outer = (form.constants[:-1], form.coeffs[:-1], form.conventions[:-1])
    sheared = [xs[t] - float(m[t]) * xd for t in range(form.dim - 1)]
    top = float(form.constants[-1]) + 1.0
    value = w * (
        complex(math.cos(top * xd), math.sin(top * xd)) * _plain_nested(*outer, sheared)
        - _plain_nested(*outer, xs[:-1])
    )
    return _dress(form, xs, value)


def eval_f(form: SignedPrefixForm, x: TorusPoint) -> complex:
    """Fractional-part correction of the innermost-variable split.

    Identically zero when the innermost ceiling takes integer values on
    integer prefixes.  The fractional part is computed exactly in rational
    arithmetic before conversion to float, and follows the form's reading:
    in [0, 1) for the floor-closed reading, in (-1, 0] for the half-open
    one.
    """
    if form.dim < 2:
        raise ValueError("the split needs d >= 2")
    xs = _nested_xs(form, x)
    xd = xs[-1]
    if abs(_wrap(xd)) <= EPS_SING:
        raise SingularArgument("innermost coordinate lies on the singular strip")
    w = 1.0 / (complex(math.cos(xd), math.sin(xd)) - 1.0)
    conv = form.conventions[-1]

    def rec(s: int, prefix: Tuple[int, ...], phase: complex) -> complex:
        if s == form.dim - 1:
            lam = form.ceiling(s, prefix)
            frac = lam - ceiling_index(conv, lam)
            if frac == 0:
                return 0j
            lam_f = float(lam)
            outer_phase = complex(math.cos((lam_f + 1) * xd), math.sin((lam_f + 1) * xd))
            corr = complex(math.cos(-float(frac) * xd), math.sin(-float(frac) * xd)) - 1.0
            return phase * outer_phase * corr
        limit = form.limit(s, prefix)
        acc = 0j
        ph = phase
        step = complex(math.cos(xs[s]), math.sin(xs[s]))
        for j in range(limit + 1):
            acc += rec(s + 1, prefix + (j,), ph)
            ph *= step
        return acc

    return _dress(form, xs, w * rec(0, (), 1 + 0j))


# ---------------------------------------------------------------------------
# degrees


def degrees(arg: Union[LatticePointSet, SignedPrefixForm, Sequence[SignedPrefixForm]]) -> Tuple[int, ...]:
    """Per-axis trigonometric degree: max index over contributing points.

    Accepts a lattice point set, one form, or a form family; raises
    EmptySet when nothing contributes.  Attainable maxima are enumerated
    exactly when the prefix count is moderate, with an interval-propagated
    upper bound as the large-form fallback.
    """
    if isinstance(arg, LatticePointSet):
        if not arg.points:
            raise EmptySet("no lattice points")
        return tuple(max(p[j] for p in arg.points) for j in range(arg.dim))
    forms = [arg] if isinstance(arg, SignedPrefixForm) else list(arg)
    per_axis: Optional[List[int]] = None
    for form in forms:
        deg = _form_degrees(form)
        if deg is None:
            continue
        if per_axis is None:
            per_axis = list(deg)
        else:
            per_axis = [max(a, b) for a, b in zip(per_axis, deg)]
    if per_axis is None:
        raise EmptySet("all forms are empty")
    return tuple(per_axis)


def _form_degrees(form: SignedPrefixForm) -> Optional[Tuple[int, ...]]:
    bounds = form_degree_bounds(form)
    if bounds is None:
        return None
    prefix_cells = math.prod(
        bounds[form.axes[s]] - form.shifts[s] + 1 for s in range(form.dim - 1)
    )
    if prefix_cells > _DEGREE_ENUM_CAP:
        return bounds

    best = [-1] * form.dim

    def rec(s: int, prefix: Tuple[int, ...]) -> bool:
        limit = form.limit(s, prefix)
        if limit < 0:
            return False
        if s == form.dim - 1:
            best[s] = max(best[s], limit)
            return True
        nonempty = False
        for j in range(limit + 1):
            if rec(s + 1, prefix + (j,)):
                nonempty = True
                best[s] = max(best[s], j)
        return nonempty

    if not rec(0, ()):
        return None
    deg = [0] * form.dim
    for s in range(form.dim):
        deg[form.axes[s]] = best[s] + form.shifts[s]
    return tuple(deg)


# ---------------------------------------------------------------------------
# tensor-grid evaluation


def _grid_plain(
    constants: Sequence[Fraction],
    coeffs: Sequence[Tuple[Fraction, ...]],
    conventions: Sequence[str],
    grids: Sequence[np.ndarray],
) -> np.ndarray:
    d = len(constants)
    shape = tuple(len(g) for g in grids)
    if d == 1:
        return _s_row(ceiling_index(conventions[0], constants[0]), grids[0])
    top = ceiling_index(conventions[0], constants[0])
    if top < 0:
        return np.zeros(shape, dtype=complex)
    if d == 2:
        fast = _grid_fast2(constants, coeffs, conventions, grids, top)
        if fast is not None:
            return fast
    out = np.zeros(shape, dtype=complex)
    x0 = grids[0]
    for j in range(top + 1):
        sub_consts = [constants[s] - coeffs[s][0] * j for s in range(1, d)]
        sub_coeffs = [coeffs[s][1:] for s in range(1, d)]
        inner = _grid_plain(sub_consts, sub_coeffs, conventions[1:], grids[1:])
        out += np.exp(1j * j * x0).reshape((-1,) + (1,) * (d - 1)) * inner
    return out


_RESIDUE_CAP = 64


def _grid_fast2(constants, coeffs, conventions, grids, top: int) -> Optional[np.ndarray]:
    """Collapsed 2-d evaluation for rational-slope inner ceilings.

    The inner limit at outer index j = q*u + r is exactly c_r - p*u for a
    slope p/q, so the j-sum splits into q geometric collapses over u.  Each
    collapse is the ratio (e^{i(t+1)theta} - 1)/(e^{i theta} - 1) at the
    sheared angle theta = q*x0 - p*x1, assembled from rank-one products of
    one-dimensional phase vectors so no transcendental touches the full
    grid.  Valid when every residue class keeps its limit >= -1 over its u
    range, which elimination guarantees for branch splits in two dimensions.
    """
    slope = coeffs[1][0]
    p, q = slope.numerator, slope.denominator
    if q > _RESIDUE_CAP or q > top + 1:
        return None
    starts = []
    for r in range(q):
        t_r = (top - r) // q
        c_r = ceiling_index(conventions[1], constants[1] - slope * r)
        if t_r >= 0 and (c_r if p <= 0 else c_r - p * t_r) < -1:
            return None
        starts.append((t_r, c_r))
    x0, x1 = np.asarray(grids[0], dtype=float), np.asarray(grids[1], dtype=float)
    mask_x1 = _singular_mask(x1)
    w = 1.0 / np.where(mask_x1, 2.0, np.exp(1j * x1) - 1.0)
    any_x1 = bool(np.any(mask_x1))
    x0q = q * x0
    den = np.exp(1j * x0q)[:, None] * np.exp(-1j * p * x1)[None, :]
    den -= 1.0
    sing = np.abs(den) <= EPS_SING
    inv_den = 1.0 / np.where(sing, 1.0, den)
    ii, jj = np.nonzero(sing)
    out = np.zeros((len(x0), len(x1)), dtype=complex)
    for r, (t_r, c_r) in enumerate(starts):
        if t_r < 0:
            continue
        s_plain = _s_row(t_r, x0q)
        e_c = np.exp(1j * (c_r + 1) * x1)
        ph = np.exp(1j * r * x0) if r else None
        cell = np.exp(1j * q * (t_r + 1) * x0)[:, None] * np.exp(
            -1j * p * (t_r + 1) * x1
        )[None, :]
        cell -= 1.0
        cell *= inv_den
        cell *= (w * e_c)[None, :]
        if ph is not None:
            cell *= ph[:, None]
            s_plain = ph * s_plain
        cell -= s_plain[:, None] * w[None, :]
        if ii.size:
            shear_lim = e_c[jj] * (t_r + 1)
            if ph is not None:
                shear_lim = shear_lim * ph[ii]
            cell[ii, jj] = w[jj] * shear_lim - s_plain[ii] * w[jj]
        if any_x1:
            limit_col = (c_r + 1) * s_plain - p * _r_row(t_r, x0q) * (
                ph if ph is not None else 1.0
            )
            cell[:, mask_x1] = limit_col[:, None]
        out += cell
    return out


class FormKernel:
    """Summed kernel of a signed-form family on a d-torus."""

    def __init__(self, forms: Sequence[SignedPrefixForm], dim: int):
        self.forms = list(forms)
        self.dim = dim

    def point(self, x: TorusPoint) -> complex:
        return eval_forms(self.forms, x)

    def grid(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        """Kernel values on the tensor grid, axes in original order."""
        shape = tuple(len(a) for a in axes)
        total = np.zeros(shape, dtype=complex)
        for form in self.forms:
            nested_grids = [np.asarray(axes[a], dtype=float) for a in form.axes]
            vals = _grid_plain(form.constants, form.coeffs, form.conventions, nested_grids)
            for s, sigma in enumerate(form.shifts):
                if sigma:
                    phase = np.exp(1j * sigma * nested_grids[s])
                    vals *= phase.reshape((1,) * s + (-1,) + (1,) * (form.dim - s - 1))
            if form.sign < 0:
                vals = -vals
            total += np.transpose(vals, np.argsort(form.axes))
        return total
