"""Closed-form kernels: geometric sums, the boundary split, grids."""

import math

import numpy as np
import pytest

from conftest import box_hrep, corner_simplex_hrep, pentagon_hrep
from lebconst.errors import EmptySet, SingularArgument
from lebconst.experiments import FamilySpec, random_hrep
from lebconst.fmelim import eliminate, to_signed_prefix_forms
from lebconst.geometry import LatticePointSet, lattice_points
from lebconst.kernel import (
    EPS_SING,
    FormKernel,
    degrees,
    eval_direct,
    eval_f,
    eval_forms,
    eval_g,
    eval_nested,
    s_t,
    split_applicable,
)

TAU = 2.0 * math.pi


def all_forms(h):
    return [f for ns in eliminate(h) for f in to_signed_prefix_forms(ns)]


def random_x(rng, dim, margin=1e-3):
    """Torus point with every coordinate off the singular strip."""
    while True:
        x = rng.uniform(-math.pi, math.pi, size=dim)
        if all(abs(math.remainder(v, TAU)) > margin for v in x):
            return tuple(float(v) for v in x)


# ---------------------------------------------------------------------------
# geometric sum


def test_s_t_matches_brute_force():
    rng = np.random.default_rng(1)
    for t in (-1, 0, 1, 5, 12):
        for _ in range(10):
            x = float(rng.uniform(0.01, TAU - 0.01))
            brute = sum(complex(math.cos(k * x), math.sin(k * x)) for k in range(t + 1))
            assert abs(s_t(t, x) - brute) <= 1e-12 * max(1, t + 1)


def test_s_t_rejects_singular_arguments():
    for x in (0.0, TAU, -TAU, 1e-12, TAU + 5e-10):
        with pytest.raises(SingularArgument):
            s_t(3, x)
    with pytest.raises(ValueError):
        s_t(-2, 1.0)


def test_eval_direct_basic():
    assert eval_direct([], (0.5,)) == 0j
    val = eval_direct([(0,), (1,)], (0.7,))
    assert abs(val - (1 + complex(math.cos(0.7), math.sin(0.7)))) < 1e-14
    pts = lattice_points(box_hrep(2, 2))
    assert abs(eval_direct(pts, (0.0, 0.0)) - len(pts)) < 1e-12


# ---------------------------------------------------------------------------
# nested evaluation


def test_eval_nested_matches_signed_direct_sum():
    rng = np.random.default_rng(11)
    for trial in range(25):
        d = trial % 3 + 1
        h = random_hrep(rng, d, max_degree=6)
        for form in all_forms(h):
            pts = list(__import__("lebconst").fmelim.form_lattice_points(form))
            for _ in range(4):
                x = random_x(rng, d)
                ref = form.sign * eval_direct(pts, x)
                val = eval_nested(form, x)
                assert abs(val - ref) <= 1e-9 * max(1.0, abs(ref))


def test_eval_forms_matches_direct_kernel():
    rng = np.random.default_rng(22)
    for trial in range(20):
        d = trial % 3 + 1
        h = random_hrep(rng, d, max_degree=8)
        pts = lattice_points(h)
        forms = all_forms(h)
        for _ in range(10):
            x = random_x(rng, d)
            ref = eval_direct(pts, x)
            assert abs(eval_forms(forms, x) - ref) <= 1e-9 * max(1.0, abs(ref))


def test_kernel_at_origin_counts_points():
    for h in (box_hrep(3, 4), pentagon_hrep(), corner_simplex_hrep(3, 4)):
        count = len(lattice_points(h))
        val = eval_forms(all_forms(h), (0.0,) * h.dim)
        assert abs(val - count) <= 1e-9 * count


def test_kernel_conjugate_symmetry():
    rng = np.random.default_rng(33)
    forms = all_forms(pentagon_hrep())
    for _ in range(20):
        x = random_x(rng, 2)
        neg = tuple(-v for v in x)
        assert abs(eval_forms(forms, neg) - eval_forms(forms, x).conjugate()) < 1e-10


# ---------------------------------------------------------------------------
# boundary split


def split_forms(rng, trials, max_degree=6):
    pool = []
    for trial in range(trials):
        d = trial % 2 + 2
        h = random_hrep(rng, d, max_degree=max_degree)
        pool.extend(f for f in all_forms(h) if split_applicable(f))
    return pool


def test_split_identity_on_applicable_forms():
    rng = np.random.default_rng(44)
    pool = split_forms(rng, 30)
    assert len(pool) >= 20
    worst = 0.0
    for form in pool:
        for _ in range(5):
            x = random_x(rng, form.dim, margin=1e-5)
            ref = eval_nested(form, x)
            dev = abs(eval_g(form, x) + eval_f(form, x) - ref) / max(1.0, abs(ref))
            worst = max(worst, dev)
    assert worst <= 1e-8


def test_split_rejects_one_dimensional_forms():
    form = all_forms(box_hrep(5))[0]
    assert not split_applicable(form)
    with pytest.raises(ValueError):
        eval_g(form, (0.5,))
    with pytest.raises(ValueError):
        eval_f(form, (0.5,))


def test_split_rejects_singular_innermost_coordinate():
    form = all_forms(box_hrep(3, 4))[0]
    bad = [0.0] * form.dim
    bad[form.axes[0]] = 0.7
    with pytest.raises(SingularArgument):
        eval_g(form, tuple(bad))
    with pytest.raises(SingularArgument):
        eval_f(form, tuple(bad))


def test_fractional_correction_vanishes_on_integer_ceilings():
    rng = np.random.default_rng(55)
    for h in (box_hrep(3, 4), corner_simplex_hrep(2, 5)):
        for form in all_forms(h):
            if form.dim < 2:
                continue
            for _ in range(5):
                x = random_x(rng, form.dim)
                assert eval_f(form, x) == 0j


# ---------------------------------------------------------------------------
# degrees


def test_degrees_of_point_sets_and_forms():
    assert degrees(lattice_points(pentagon_hrep())) == (4, 4)
    assert degrees(all_forms(box_hrep(3, 4))) == (3, 4)
    assert degrees(all_forms(corner_simplex_hrep(3, 5))) == (5, 5, 5)


def test_degrees_dominate_attained_maxima_randomly():
    # prefix splits may overshoot the attained maxima (cancelling ranges
    # extend past the surviving points) but must never undershoot
    rng = np.random.default_rng(66)
    for trial in range(20):
        d = trial % 3 + 1
        h = random_hrep(rng, d, max_degree=7)
        pts = lattice_points(h)
        if not pts.points:
            continue
        form_deg = degrees(all_forms(h))
        point_deg = degrees(pts)
        assert all(f >= p for f, p in zip(form_deg, point_deg))


def test_degrees_empty_inputs_raise():
    with pytest.raises(EmptySet):
        degrees(LatticePointSet.from_iterable(2, []))
    with pytest.raises(EmptySet):
        degrees([])


# ---------------------------------------------------------------------------
# tensor grids


def grid_reference(pts, axes):
    shape = tuple(len(a) for a in axes)
    out = np.empty(shape, dtype=complex)
    for idx in np.ndindex(shape):
        out[idx] = eval_direct(pts, [axes[j][idx[j]] for j in range(len(axes))])
    return out


def test_grid_matches_direct_sum_including_singular_nodes():
    rng = np.random.default_rng(77)
    for trial in range(12):
        d = trial % 3 + 1
        h = random_hrep(rng, d, max_degree=6)
        pts = lattice_points(h)
        kern = FormKernel(all_forms(h), d)
        axes = []
        for _ in range(d):
            vals = rng.uniform(-math.pi, math.pi, size=3).tolist() + [0.0, 1e-12]
            axes.append(np.array(vals))
        got = kern.grid(axes)
        ref = grid_reference(pts, axes)
        dev = np.abs(got - ref) / np.maximum(1.0, np.abs(ref))
        assert float(dev.max()) <= 1e-6


def test_grid_exact_zero_column_is_patched_exactly():
    h = pentagon_hrep()
    kern = FormKernel(all_forms(h), 2)
    axes = [np.array([0.0, 0.9]), np.array([0.0, -1.3])]
    got = kern.grid(axes)
    ref = grid_reference(lattice_points(h), axes)
    assert float(np.abs(got - ref).max()) <= 1e-9 * len(lattice_points(h))


def test_grid_fast_paths_match_direct_on_family_shapes():
    rng = np.random.default_rng(88)
    members = [
        FamilySpec("rhomb", dim=2).instantiate(2),
        FamilySpec("polygon", dim=2).instantiate(3),
        FamilySpec("simplex", dim=2).instantiate(5),
        FamilySpec("tpoly", dim=3).instantiate(3),
    ]
    for m in members:
        pts = lattice_points(m.hrep)
        kern = FormKernel(all_forms(m.hrep), m.hrep.dim)
        axes = [np.sort(rng.uniform(-math.pi, math.pi, size=5)) for _ in range(m.hrep.dim)]
        got = kern.grid(axes)
        ref = grid_reference(pts, axes)
        dev = np.abs(got - ref) / np.maximum(1.0, np.abs(ref))
        assert float(dev.max()) <= 1e-9


def test_grid_with_no_forms_is_zero():
    kern = FormKernel([], 2)
    out = kern.grid([np.array([0.3, 1.1]), np.array([0.5])])
    assert out.shape == (2, 1)
    assert float(np.abs(out).max()) == 0.0


def test_grid_axis_order_follows_original_coordinates():
    # elimination may permute axes internally; the grid must not
    h = corner_simplex_hrep(2, 4)
    kern = FormKernel(all_forms(h), 2)
    a0 = np.array([0.4, 2.0, -1.1])
    a1 = np.array([-0.9, 1.7])
    got = kern.grid([a0, a1])
    ref = grid_reference(lattice_points(h), [a0, a1])
    assert got.shape == (3, 2)
    assert float(np.abs(got - ref).max()) <= 1e-9 * len(lattice_points(h))
