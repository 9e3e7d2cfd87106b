"""Tensor-grid torus quadrature: accuracy, budget handling, determinism."""

import math

import numpy as np
import pytest

from conftest import box_hrep, interval_hrep, oned_lp, pentagon_hrep, right_triangle_hrep
from lebconst.errors import BudgetExceeded
from lebconst.fmelim import eliminate, to_signed_prefix_forms
from lebconst.geometry import lattice_points
from lebconst.kernel import FormKernel, eval_forms
from lebconst.quadrature import (
    NormEstimate,
    PointwiseEvaluator,
    QuadratureConfig,
    l2_exact,
    torus_lp_norm,
)


def kernel_of(h):
    forms = [f for ns in eliminate(h) for f in to_signed_prefix_forms(ns)]
    return FormKernel(forms, h.dim), forms


# ---------------------------------------------------------------------------
# configuration


@pytest.mark.parametrize("kwargs", [
    {"oversample": 1},
    {"max_levels": 1},
    {"budget": 0},
    {"tol": 0.0},
    {"tol": -1e-6},
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        QuadratureConfig(**kwargs)


def test_norm_input_validation():
    kern, _ = kernel_of(interval_hrep(0, 3))
    with pytest.raises(ValueError):
        torus_lp_norm(kern, (3,), 0.5)
    with pytest.raises(ValueError):
        torus_lp_norm(kern, (-1,), 1.0)


# ---------------------------------------------------------------------------
# accuracy against the closed-form oracle


@pytest.mark.parametrize("n,p", [(6, 1), (6, 3), (17, 1), (17, 3)])
def test_one_dimensional_norms_match_oracle(n, p):
    kern, _ = kernel_of(interval_hrep(0, n))
    cfg = QuadratureConfig(max_levels=6, tol=1e-7)
    est = torus_lp_norm(kern, (n,), float(p), cfg)
    exact = oned_lp(n, p)
    assert abs(est.value - exact) <= 1e-4 * exact
    assert est.error < 1e-3 * exact


def test_parseval_is_exact_on_oversampled_grids():
    for h in (interval_hrep(0, 9), right_triangle_hrep(2, 4), pentagon_hrep()):
        kern, forms = kernel_of(h)
        count = len(lattice_points(h))
        deg = tuple(int(b) for b in __import__("lebconst").kernel.degrees(forms))
        est = torus_lp_norm(kern, deg, 2.0, QuadratureConfig())
        assert est.converged
        assert abs(est.value - math.sqrt(count)) <= 1e-9 * math.sqrt(count)


def test_constant_kernel_norm_is_one():
    kern, _ = kernel_of(interval_hrep(0, 0))
    for p in (1.0, 2.0, 3.5):
        est = torus_lp_norm(kern, (0,), p)
        assert abs(est.value - 1.0) < 1e-12


def test_zero_offset_grid_stays_finite():
    kern, _ = kernel_of(interval_hrep(0, 8))
    mid = torus_lp_norm(kern, (8,), 1.0, QuadratureConfig(max_levels=5, tol=1e-8))
    zero = torus_lp_norm(
        kern, (8,), 1.0, QuadratureConfig(max_levels=5, tol=1e-8, grid_offset=0.0)
    )
    assert math.isfinite(zero.value)
    assert abs(zero.value - mid.value) <= 1e-3 * mid.value


# ---------------------------------------------------------------------------
# budget and level accounting


def test_budget_too_small_for_two_levels_raises():
    kern, _ = kernel_of(interval_hrep(0, 8))
    with pytest.raises(BudgetExceeded):
        torus_lp_norm(kern, (8,), 1.0, QuadratureConfig(budget=71))
    with pytest.raises(BudgetExceeded):
        torus_lp_norm(kern, (8,), 1.0, QuadratureConfig(budget=100))


def test_budget_cut_after_two_levels_returns_unconverged():
    kern, _ = kernel_of(interval_hrep(0, 8))
    est = torus_lp_norm(
        kern, (8,), 1.0, QuadratureConfig(max_levels=4, tol=1e-13, budget=216)
    )
    assert isinstance(est, NormEstimate)
    assert not est.converged
    assert est.levels == 2
    assert est.points == 216
    assert math.isfinite(est.value) and math.isfinite(est.error)


def test_levels_stop_once_tolerance_is_met():
    kern, _ = kernel_of(interval_hrep(0, 9))
    est = torus_lp_norm(kern, (9,), 2.0, QuadratureConfig(max_levels=5, tol=1e-9))
    assert est.converged
    assert est.levels == 2


# ---------------------------------------------------------------------------
# determinism


def test_jobs_do_not_change_the_result():
    kern, _ = kernel_of(pentagon_hrep())
    base = QuadratureConfig(max_levels=2, tile_cells=64, jobs=1)
    threaded = QuadratureConfig(max_levels=2, tile_cells=64, jobs=3)
    a = torus_lp_norm(kern, (4, 4), 1.0, base)
    b = torus_lp_norm(kern, (4, 4), 1.0, threaded)
    assert a.value == b.value
    assert a.points == b.points


def test_tiling_granularity_changes_nothing_material():
    kern, _ = kernel_of(pentagon_hrep())
    a = torus_lp_norm(kern, (4, 4), 1.0, QuadratureConfig(max_levels=2))
    b = torus_lp_norm(kern, (4, 4), 1.0, QuadratureConfig(max_levels=2, tile_cells=17))
    assert abs(a.value - b.value) <= 1e-12 * a.value


def test_repeat_runs_are_bit_identical():
    kern, _ = kernel_of(right_triangle_hrep(2, 4))
    cfg = QuadratureConfig(max_levels=3)
    a = torus_lp_norm(kern, (2, 4), 1.0, cfg)
    b = torus_lp_norm(kern, (2, 4), 1.0, cfg)
    assert a.value == b.value and a.error == b.error


# ---------------------------------------------------------------------------
# pointwise adapter and Parseval helper


def test_pointwise_evaluator_matches_form_kernel():
    h = right_triangle_hrep(2, 4)
    kern, forms = kernel_of(h)
    pw = PointwiseEvaluator(lambda x: eval_forms(forms, tuple(x)), 2)
    cfg = QuadratureConfig(max_levels=2)
    a = torus_lp_norm(kern, (2, 4), 1.0, cfg)
    b = torus_lp_norm(pw, (2, 4), 1.0, cfg)
    assert abs(a.value - b.value) <= 1e-8 * a.value


def test_pointwise_evaluator_unimodular_function():
    pw = PointwiseEvaluator(lambda x: complex(math.cos(x[0] + x[1]), math.sin(x[0] + x[1])), 2)
    est = torus_lp_norm(pw, (1, 1), 3.0, QuadratureConfig(oversample=2, max_levels=2))
    assert abs(est.value - 1.0) < 1e-12


def test_l2_exact():
    assert l2_exact(0) == 0.0
    assert l2_exact(9) == 3.0
    with pytest.raises(ValueError):
        l2_exact(-1)
