import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from dea_congestion.config import StepConfig
from dea_congestion.dataset import Dataset
from dea_congestion.directional import (BOTH, FDM, ULBM, Direction, DirectionError, analyze,
                                        find_dominating_activity, is_dlss, is_dsss,
                                        is_strongly_efficient, left_fdm, project, right_fdm,
                                        supporting_ratio, sweep, ulbm_bounds, ulbm_multipliers,
                                        validate_step_right)

DIAG = Direction.diagonal(1, 1)


# ---------------------------------------------------------------- Direction

def test_direction_normalises():
    d = Direction([3.4, 0.6], [1, 1, 1, 1])
    assert d.omega == pytest.approx([1.7, 0.3])
    assert d == Direction([1.7, 0.3], [2, 2, 2, 2])


@pytest.mark.parametrize("omega", [[-1, 3], [0, 0], [np.nan, 1], []])
def test_direction_rejects(omega):
    with pytest.raises(DirectionError):
        Direction(omega, [1])


def test_direction_arity_checked(toy):
    with pytest.raises(DirectionError):
        analyze(toy, 0, Direction([1, 1], [1]))


@given(st.lists(st.floats(0.01, 100), min_size=1, max_size=4), st.floats(0.01, 100))
def test_direction_scale_invariant(w, c):
    a = Direction(w, [1])
    b = Direction(np.array(w) * c, [1])
    assert a.omega == pytest.approx(b.omega)
    assert a.omega.sum() == pytest.approx(len(w))


# ------------------------------------------------------- frontier membership

def test_toy_points_strongly_efficient(toy):
    assert all(is_strongly_efficient(toy, k) for k in range(3))


def test_dominated_point_not_efficient():
    d = Dataset.from_rows([[1], [2], [3], [2]], [[1], [3], [2], [1]])
    assert not is_strongly_efficient(d, 3)


def test_single_dmu_efficient():
    assert is_strongly_efficient(Dataset.from_rows([[1]], [[1]]), 0)


def test_projection_of_interior_point():
    d = Dataset.from_rows([[1], [2], [3], [3]], [[1], [3], [2], [1]])
    p = project(d, 3)
    assert p.theta == pytest.approx(2.0)
    assert p.dataset.y(3) == pytest.approx([2.0])
    assert p.dataset.x(3) == pytest.approx([3.0])


def test_projection_identity_on_frontier(toy):
    p = project(toy, 1)
    assert p.dataset is toy and not p.moved


def test_cas_projections_are_strongly_efficient(cas):
    for k in range(cas.n):
        assert is_strongly_efficient(project(cas, k).dataset, k)


# --------------------------------------------------------- scale sizes

def test_scale_sizes(toy):
    assert is_dlss(toy, 2, DIAG) and not is_dlss(toy, 1, DIAG)
    assert is_dsss(toy, 0, DIAG) and not is_dsss(toy, 2, DIAG)
    one = Dataset.from_rows([[2, 3]], [[1]])
    assert is_dlss(one, 0, Direction([1, 1], [1])) and is_dsss(one, 0, Direction([1, 1], [1]))


# --------------------------------------------------------- finite differences

def test_toy_rates(toy):
    assert right_fdm(toy, 1, DIAG).value == pytest.approx(-2 / 3, abs=1e-9)
    assert left_fdm(toy, 1, DIAG).value == pytest.approx(4 / 3, abs=1e-9)
    assert left_fdm(toy, 2, DIAG).value == pytest.approx(-1.5, abs=1e-9)
    assert right_fdm(toy, 0, DIAG).value == pytest.approx(2.0, abs=1e-9)


def test_step_validation_geometry(toy):
    # B->C segment runs to x = 3, i.e. t = 0.5
    assert validate_step_right(toy, 1, DIAG, 0.4)
    assert not validate_step_right(toy, 1, DIAG, 0.6)


def test_step_crossing_a_kink_fails_validation():
    # frontier bends at x = 2 and again at x = 2.2
    d = Dataset.from_rows([[1], [2], [2.2], [4]], [[1], [3], [3.1], [2]])
    assert validate_step_right(d, 1, DIAG, 0.05)
    assert not validate_step_right(d, 1, DIAG, 0.5)
    r = right_fdm(d, 1, DIAG, StepConfig(t_initial=0.5))
    assert r.t <= 0.1 + 1e-12
    # slope 0.5 on the first segment, scaled by x0/y0 = 2/3
    assert r.value == pytest.approx(1 / 3)


def test_supporting_ratio_flags_off_face_point(toy):
    assert supporting_ratio(toy, 1, DIAG, 0.25, -2 / 3, +1.0) == pytest.approx(1.0, abs=1e-9)
    assert abs(supporting_ratio(toy, 1, DIAG, 1.0, 100.0, +1.0) - 1.0) > 0.1


def test_fdm_matches_frontier_oracle_one_input():
    rng = np.random.default_rng(8)
    for _ in range(30):
        n = int(rng.integers(2, 7))
        d = Dataset(rng.integers(1, 20, size=(1, n)), rng.integers(1, 20, size=(1, n)))
        f = oracles.hull_points_1d(d)
        for k in range(n):
            if not is_strongly_efficient(d, k):
                continue
            x0, y0 = d.x(k)[0], d.y(k)[0]
            h = 1e-7
            if not is_dlss(d, k, DIAG):
                expect = (f(x0 * (1 + h)) - y0) / (y0 * h)
                assert right_fdm(d, k, DIAG).value == pytest.approx(expect, abs=1e-5)
            if not is_dsss(d, k, DIAG):
                expect = (y0 - f(x0 * (1 - h))) / (y0 * h)
                assert left_fdm(d, k, DIAG).value == pytest.approx(expect, abs=1e-5)


# --------------------------------------------------------------- bounds method

def test_toy_bounds(toy):
    b = ulbm_bounds(toy, 2, DIAG)
    assert b.lower == -math.inf and b.upper == pytest.approx(-1.5)
    b = ulbm_bounds(toy, 0, DIAG)
    assert b.upper == math.inf and b.lower == pytest.approx(2.0)
    b = ulbm_bounds(toy, 1, DIAG)
    assert (b.lower, b.upper) == pytest.approx((-2 / 3, 4 / 3))


def test_bounds_reject_zero_weight(cas):
    with pytest.raises(DirectionError, match="FDM"):
        ulbm_bounds(cas, 0, Direction([2, 0], [1, 1, 1, 1]))


def test_multipliers_support_every_dmu(cas):
    d = project(cas, 14).dataset
    for upper in (False, True):
        sol = ulbm_multipliers(d, 14, Direction([1.2, 0.8], [1, 1, 1, 1]), upper)
        assert sol.max_violation(d) <= 1e-8
        assert sol.u @ d.y(14) - sol.v @ d.x(14) + sol.mu0 == pytest.approx(0, abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bounds_equal_rates(seed):
    rng = np.random.default_rng(seed)
    m, s = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    d = oracles.random_dataset(rng, int(rng.integers(2, 8)), m, s)
    direction = Direction(rng.uniform(0.2, 2, m), rng.uniform(0.2, 2, s))
    for k in range(d.n):
        if not is_strongly_efficient(d, k):
            continue
        r = analyze(d, k, direction)
        assert r.dlss == (r.rho_lower == -math.inf)
        assert r.dsss == (r.rho_upper == math.inf)
        if r.right is not None:
            assert r.right == pytest.approx(r.rho_lower, abs=1e-6)
        if r.left is not None:
            assert r.left == pytest.approx(r.rho_upper, abs=1e-6)
        if r.right is not None and r.left is not None:
            # concave frontier: slope on the left is at least the slope on the right
            assert r.rho_lower <= r.rho_upper + 1e-7


# ----------------------------------------------------------------- procedure

def test_analyze_toy(toy):
    c = analyze(toy, 2, DIAG)
    assert c.dlss and c.right is None and c.left_congested and not c.right_congested
    a = analyze(toy, 0, DIAG)
    assert a.dsss and a.left is None and a.right == pytest.approx(2)


def test_analyze_projects_inefficient():
    d = Dataset.from_rows([[1], [2], [3], [3]], [[1], [3], [2], [1]])
    r = analyze(d, 3, DIAG)
    assert r.projected
    assert r.left == pytest.approx(-1.5)


@pytest.mark.parametrize("method", [FDM, ULBM, BOTH])
def test_methods_agree_on_verdicts(cas, method):
    ref = analyze(cas, 14, Direction([1.7, 0.3], [1] * 4))
    r = analyze(cas, 14, Direction([1.7, 0.3], [1] * 4), method=method)
    assert (r.right_congested, r.left_congested) == (ref.right_congested, ref.left_congested)
    assert r.right_congested and r.left_congested


def test_unknown_method(toy):
    with pytest.raises(ValueError):
        analyze(toy, 0, DIAG, method="simplex")


def test_sweep_keeps_order_and_errors(cas):
    grid = [Direction([1, 1], [1] * 4), Direction([2, 0], [1] * 4), Direction([0.5, 1.5], [1] * 4)]
    rows = sweep(cas, 0, grid, method=ULBM)
    assert [r.direction for r in rows] == grid
    assert rows[0].error is None and rows[2].error is None
    assert "FDM" in rows[1].error


def test_sweep_zero_weight_via_fdm(cas):
    rows = sweep(cas, 14, [Direction([2, 0], [1] * 4)], method=FDM)
    assert rows[0].error is None and rows[0].rho_lower is None


def test_sweep_empty_grid(toy):
    with pytest.raises(DirectionError):
        sweep(toy, 0, [])


def test_left_congestion_has_dominating_activity(cas):
    r = analyze(cas, 14, Direction([1.7, 0.3], [1] * 4))
    assert r.left_congested
    x, y = find_dominating_activity(cas, 14)
    assert np.any(x < cas.x(14)) and np.any(y > cas.y(14))
