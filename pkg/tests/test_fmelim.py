"""Elimination to nested systems and the signed prefix-form split."""

import itertools
from fractions import Fraction

import numpy as np
import pytest

from conftest import (
    box_hrep,
    corner_simplex_hrep,
    hs,
    interval_hrep,
    nonneg_rows,
    pentagon_hrep,
    right_triangle_hrep,
)
from lebconst.errors import UnboundedPolytope
from lebconst.experiments import random_hrep
from lebconst.fmelim import (
    FLOOR_CLOSED,
    HALF_OPEN,
    AffineBound,
    ceiling_index,
    eliminate,
    form_degree_bounds,
    form_lattice_points,
    lower_index,
    nested_count,
    nested_lattice_points,
    signed_point_counts,
    to_signed_prefix_forms,
    upper_index,
)
from lebconst.geometry import HRep, lattice_points


def all_points(branches):
    return sorted(q for ns in branches for q in nested_lattice_points(ns).points)


def all_forms(h, order=None):
    return [f for ns in eliminate(h, order) for f in to_signed_prefix_forms(ns)]


# ---------------------------------------------------------------------------
# index conventions


def test_index_conventions():
    assert ceiling_index(FLOOR_CLOSED, Fraction(7, 2)) == 3
    assert ceiling_index(HALF_OPEN, Fraction(7, 2)) == 4
    assert ceiling_index(FLOOR_CLOSED, Fraction(3)) == 3
    assert ceiling_index(HALF_OPEN, Fraction(3)) == 3
    with pytest.raises(ValueError):
        ceiling_index("open", Fraction(1))


def test_bound_indices_respect_strictness():
    closed = AffineBound(Fraction(2), ())
    strict = AffineBound(Fraction(2), (), strict=True)
    assert lower_index(closed, ()) == 2 and lower_index(strict, ()) == 3
    assert upper_index(closed, ()) == 2 and upper_index(strict, ()) == 1
    halfway = AffineBound(Fraction(5, 2), ())
    assert lower_index(halfway, ()) == 3 and upper_index(halfway, ()) == 2


def test_affine_bound_value_uses_prefix():
    b = AffineBound(Fraction(6), (Fraction(2),))
    assert b.value((2,)) == Fraction(2)
    assert upper_index(b, (1,)) == 4


# ---------------------------------------------------------------------------
# elimination on known shapes


def test_interval_with_fractional_ends():
    branches = eliminate(interval_hrep(Fraction(1, 2), Fraction(5, 2)))
    assert len(branches) == 1
    assert all_points(branches) == [(1,), (2,)]


def test_box_eliminates_to_single_branch():
    branches = eliminate(box_hrep(2, 3))
    assert len(branches) == 1
    assert nested_count(branches[0]) == 12
    assert all_points(branches) == sorted(lattice_points(box_hrep(2, 3)).points)


def test_simplex_eliminates_to_single_branch():
    branches = eliminate(corner_simplex_hrep(2, 6))
    assert len(branches) == 1
    assert nested_count(branches[0]) == 28


def test_pentagon_branches_partition_the_lattice():
    branches = eliminate(pentagon_hrep())
    counts = sorted(nested_count(ns) for ns in branches)
    assert counts == [7, 15]
    pts = all_points(branches)
    assert len(pts) == len(set(pts)) == 22
    assert pts == sorted(lattice_points(pentagon_hrep()).points)


def test_empty_region_yields_no_branches():
    assert eliminate(HRep(1, (hs([-1], 0), hs([1], -1)))) == []
    assert eliminate(HRep(1, (hs([-1], 0), hs([1], 0, strict=True)))) == []


def test_unbounded_region_is_rejected():
    with pytest.raises(UnboundedPolytope):
        eliminate(HRep(2, tuple(nonneg_rows(2) + [hs([1, -1], 0)])))
    with pytest.raises(UnboundedPolytope):
        eliminate(HRep(1, (hs([1], 3),)))


def test_order_must_be_a_permutation():
    h = box_hrep(2, 3)
    with pytest.raises(ValueError):
        eliminate(h, order=(0, 0))
    with pytest.raises(ValueError):
        eliminate(h, order=(0, 2))
    with pytest.raises(ValueError):
        eliminate(h, order=(0,))


def test_elimination_order_does_not_change_the_point_set():
    for h in (pentagon_hrep(), right_triangle_hrep(2, 4), corner_simplex_hrep(3, 4)):
        ref = all_points(eliminate(h))
        for order in itertools.permutations(range(h.dim)):
            assert all_points(eliminate(h, order)) == ref


def test_branch_partition_random_systems():
    rng = np.random.default_rng(101)
    for trial in range(40):
        d = trial % 3 + 1
        h = random_hrep(rng, d, max_degree=10)
        pts = all_points(eliminate(h))
        assert len(pts) == len(set(pts)), "branches overlap"
        assert pts == sorted(lattice_points(h).points)


def test_nested_count_agrees_with_enumeration():
    rng = np.random.default_rng(202)
    for trial in range(25):
        d = trial % 3 + 1
        h = random_hrep(rng, d, max_degree=8)
        for ns in eliminate(h):
            assert nested_count(ns) == len(nested_lattice_points(ns))


# ---------------------------------------------------------------------------
# signed prefix forms


def test_constant_lower_bound_becomes_a_shift():
    h = HRep(1, (hs([-1], -2), hs([1], 5)))
    branches = eliminate(h)
    assert len(branches) == 1
    forms = to_signed_prefix_forms(branches[0])
    assert len(forms) == 1 and forms[0].sign == 1
    assert forms[0].shifts == (2,)
    assert sorted(form_lattice_points(forms[0])) == [(k,) for k in range(2, 6)]
    assert signed_point_counts(forms) == {(k,): 1 for k in range(2, 6)}


def test_prefix_dependent_lower_bound_splits_into_signed_pair():
    # 0 <= x, x <= y <= 4: the lower bound on y moves with the prefix
    h = HRep(2, (hs([-1, 0], 0), hs([1, -1], 0), hs([0, 1], 4)))
    branches = eliminate(h)
    assert len(branches) == 1
    forms = to_signed_prefix_forms(branches[0])
    by_sign = {f.sign: sorted(form_lattice_points(f)) for f in forms}
    assert set(by_sign) == {1, -1}
    assert by_sign[1] == [(x, y) for x in range(5) for y in range(5)]
    assert by_sign[-1] == [(x, y) for x in range(1, 5) for y in range(x)]
    staircase = {(x, y): 1 for x in range(5) for y in range(x, 5)}
    assert signed_point_counts(forms) == staircase


def test_zero_based_system_needs_single_form():
    forms = all_forms(box_hrep(3, 4))
    assert len(forms) == 1 and forms[0].sign == 1
    assert signed_point_counts(forms) == {
        (i, j): 1 for i in range(4) for j in range(5)
    }


def test_form_count_is_bounded_by_prefix_splits():
    rng = np.random.default_rng(303)
    for trial in range(30):
        d = trial % 3 + 1
        h = random_hrep(rng, d, max_degree=8)
        for ns in eliminate(h):
            assert len(to_signed_prefix_forms(ns)) <= 2 ** ns.dim


def test_signed_reconstruction_random_systems():
    rng = np.random.default_rng(404)
    for trial in range(60):
        d = trial % 3 + 1
        h = random_hrep(rng, d, max_degree=8)
        counts = signed_point_counts(all_forms(h))
        assert counts == {q: 1 for q in lattice_points(h).points}


def test_form_degree_bounds_cover_their_points():
    rng = np.random.default_rng(505)
    for trial in range(25):
        d = trial % 3 + 1
        h = random_hrep(rng, d, max_degree=8)
        for form in all_forms(h):
            bounds = form_degree_bounds(form)
            pts = list(form_lattice_points(form))
            if bounds is None:
                continue
            for q in pts:
                assert all(q[j] <= bounds[j] for j in range(d))
            for j in range(d):
                if pts:
                    assert max(q[j] for q in pts) <= bounds[j]


def test_forms_enumerate_from_zero():
    rng = np.random.default_rng(606)
    for trial in range(20):
        d = trial % 3 + 1
        h = random_hrep(rng, d, max_degree=6)
        for form in all_forms(h):
            for q in form_lattice_points(form):
                assert min(q) >= 0
