import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from dea_congestion.config import Tolerances
from dea_congestion.lp import (EQ, GE, LE, LinearProgram, LPInputError, Status, solve,
                               solve_lexicographic)


def lp(cost, A, rel, rhs, maximize=True, free=None):
    return LinearProgram(np.array(cost, float), np.array(A, float), tuple(rel),
                         np.array(rhs, float), maximize, free)


def test_single_bound():
    sol = solve(lp([1], [[1]], [LE], [1]))
    assert sol.status is Status.OPTIMAL
    assert sol.objective == pytest.approx(1.0)


def test_contradictory_bounds_infeasible():
    sol = solve(lp([1], [[1], [1]], [GE, LE], [2, 1]))
    assert sol.status is Status.INFEASIBLE


def test_unbounded():
    assert solve(lp([1, 1], [[1, -1]], [LE], [1])).status is Status.UNBOUNDED


def test_free_variable_goes_negative():
    sol = solve(lp([1], [[1]], [GE], [-3], maximize=False, free=[True]))
    assert sol.objective == pytest.approx(-3.0)
    assert sol.x[0] == pytest.approx(-3.0)


def test_free_variable_unbounded_below():
    sol = solve(lp([1], [[1]], [LE], [5], maximize=False, free=[True]))
    assert sol.status is Status.UNBOUNDED


@pytest.mark.parametrize("kwargs, msg", [
    (dict(cost=[1, 2], A=[[1]], rel=[LE], rhs=[1]), "row length"),
    (dict(cost=[1], A=[[np.nan]], rel=[LE], rhs=[1]), "non-finite"),
    (dict(cost=[1], A=[[1]], rel=["<"], rhs=[1]), "unknown relation"),
    (dict(cost=[1], A=[[1]], rel=[LE, LE], rhs=[1]), "differ in count"),
    (dict(cost=[], A=np.zeros((1, 0)), rel=[LE], rhs=[1]), "at least one variable"),
])
def test_malformed_instances_rejected(kwargs, msg):
    with pytest.raises(LPInputError, match=msg):
        lp(**kwargs)


def test_input_error_is_not_infeasible():
    assert not issubclass(LPInputError, RuntimeError)


def test_beale_cycling_example_terminates():
    # classic instance on which textbook Dantzig pivoting cycles
    c = [-0.75, 150, -0.02, 6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    sol = solve(lp(c, A, [LE] * 3, [0, 0, 1], maximize=False), Tolerances(max_pivots=60))
    assert sol.status is Status.OPTIMAL
    assert sol.objective == pytest.approx(-0.05)
    assert sol.iterations < 60


def test_highly_degenerate_assignment_polytope():
    # 4x4 doubly stochastic matrices: every vertex is massively degenerate
    k = 4
    rng = np.random.default_rng(7)
    cost = rng.integers(1, 10, size=k * k).astype(float)
    A, rhs = [], []
    for i in range(k):
        row = np.zeros(k * k); row[i * k:(i + 1) * k] = 1; A.append(row); rhs.append(1)
        col = np.zeros(k * k); col[i::k] = 1; A.append(col); rhs.append(1)
    sol = solve(lp(cost, A, [EQ] * (2 * k), rhs, maximize=False))
    assert sol.status is Status.OPTIMAL
    import itertools
    best = min(sum(cost[i * k + p[i]] for i in range(k)) for p in itertools.permutations(range(k)))
    assert sol.objective == pytest.approx(best)


def test_redundant_equalities():
    sol = solve(lp([1, 1], [[1, 1], [2, 2], [1, 0]], [EQ, EQ, LE], [2, 4, 1.5]))
    assert sol.objective == pytest.approx(2.0)


def test_matches_vertex_oracle_on_seeded_suite():
    rng = np.random.default_rng(99)
    for _ in range(150):
        prob = oracles.random_lp(rng)
        status, value = oracles.vertex_enumeration(prob)
        sol = solve(prob)
        assert sol.status.value == status, prob.dump()
        if value is not None:
            assert sol.objective == pytest.approx(value, abs=1e-7, rel=1e-7), prob.dump()


def test_oracle_agrees_with_scipy_on_a_few():
    # sanity check of the oracle itself against an outside solver
    scipy_opt = pytest.importorskip("scipy.optimize")
    rng = np.random.default_rng(3)
    for _ in range(40):
        prob = oracles.random_lp(rng)
        status, value = oracles.vertex_enumeration(prob)
        sign = -1.0 if prob.maximize else 1.0
        ub = [(a if r == LE else -a) for a, r in zip(prob.A, prob.relations) if r != EQ]
        bub = [(b if r == LE else -b) for b, r in zip(prob.rhs, prob.relations) if r != EQ]
        aeq = [a for a, r in zip(prob.A, prob.relations) if r == EQ]
        beq = [b for b, r in zip(prob.rhs, prob.relations) if r == EQ]
        res = scipy_opt.linprog(sign * prob.cost, A_ub=ub or None, b_ub=bub or None,
                                A_eq=aeq or None, b_eq=beq or None,
                                bounds=[(None, None) if f else (0, None) for f in prob.free])
        expected = {0: "optimal", 2: "infeasible", 3: "unbounded"}[res.status]
        assert status == expected
        if status == "optimal":
            assert value == pytest.approx(sign * res.fun, abs=1e-7)


def _check_certificate(prob, sol):
    x, y = sol.x, sol.duals
    act = prob.A @ x - prob.rhs
    for a, r in zip(act, prob.relations):
        if r == LE:
            assert a <= 1e-8
        elif r == GE:
            assert a >= -1e-8
        else:
            assert abs(a) <= 1e-8
    assert np.all(x[~prob.free] >= -1e-8)
    assert abs(prob.rhs @ y - sol.objective) <= 1e-7 * max(1.0, abs(sol.objective))
    # sign pattern of y = d(objective)/d(rhs)
    s = 1.0 if prob.maximize else -1.0
    for yi, r in zip(y, prob.relations):
        if r == LE:
            assert s * yi >= -1e-9
        elif r == GE:
            assert s * yi <= 1e-9
    red = s * (prob.A.T @ y - prob.cost)
    assert np.all(red[~prob.free] >= -1e-7)
    assert np.all(np.abs(red[prob.free]) <= 1e-7)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_feasibility_and_strong_duality(seed):
    prob = oracles.random_lp(np.random.default_rng(seed))
    sol = solve(prob)
    if sol.optimal:
        _check_certificate(prob, sol)


def test_deterministic():
    prob = oracles.random_lp(np.random.default_rng(5))
    a, b = solve(prob), solve(prob)
    assert a.status == b.status
    if a.optimal:
        assert np.array_equal(a.x, b.x) and a.basis == b.basis


def test_lexicographic_small_case():
    # max theta then max s with theta <= 1, s <= 2, s + theta <= 2.5
    prob = lp([1, 0], [[1, 0], [0, 1], [1, 1]], [LE] * 3, [1, 2, 2.5])
    sol = solve_lexicographic(prob, [0, 1])
    assert sol.x == pytest.approx([1.0, 1.5])
    assert sol.objective == pytest.approx(1.0)
    assert sol.secondary_objective == pytest.approx(1.5)


def test_lexicographic_matches_pinned_sequential_solve():
    rng = np.random.default_rng(17)
    checked = 0
    while checked < 60:
        prob = oracles.random_lp(rng)
        first = solve(prob)
        if not first.optimal:
            continue
        sec = rng.integers(-3, 4, size=prob.n_vars).astype(float)
        pinned = LinearProgram(sec, prob.A, prob.relations, prob.rhs, prob.maximize, prob.free)
        pinned = pinned.with_row(prob.cost, EQ, first.objective)
        ref = solve(pinned)
        lex = solve_lexicographic(prob, sec)
        if ref.status is Status.UNBOUNDED:
            assert lex.status is Status.UNBOUNDED
        else:
            assert lex.optimal
            assert lex.objective == pytest.approx(first.objective, abs=1e-7)
            assert lex.secondary_objective == pytest.approx(ref.objective, abs=1e-7)
        checked += 1


def test_lexicographic_rejects_bad_secondary():
    with pytest.raises(LPInputError):
        solve_lexicographic(lp([1], [[1]], [LE], [1]), [1, 2])


def test_dump_lists_every_row():
    text = lp([1, -2], [[1, 1], [0, 3]], [LE, EQ], [4, 1], maximize=False, free=[False, True]).dump()
    lines = text.splitlines()
    assert lines[0] == "sense min"
    assert lines[1] == "vars 2 rows 2"
    assert lines[3] == "free 0 1"
    assert lines[-1] == "row 0.0 3.0 = 1.0"
