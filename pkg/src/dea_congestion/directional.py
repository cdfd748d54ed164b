"""Directional congestion of DMUs on the strongly efficient frontier.

The technology is the convex hull with input equalities and free output
disposal::

    P = {(X, Y) : sum_j l_j X_j = X, sum_j l_j Y_j >= Y, sum_j l_j = 1, l >= 0}

Moving the inputs of DMU ``k`` by ``(1 +/- omega_i t)`` and asking how far
the outputs can move as ``(1 +/- delta_r beta)`` gives the right-hand and
left-hand directional rates ``xi* = beta*/t`` and ``psi* = beta*/t``.
A negative rate means directional congestion on that side. The same rates
are the extreme values of a ratio over supporting hyperplanes at the DMU,
which the bounds method computes directly through a Charnes-Cooper
linearisation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, StepConfig, Tolerances
from .dataset import Dataset
from .lp import EQ, GE, LE, LinearProgram, SolverError, Status, solve, solve_lexicographic

log = logging.getLogger(__name__)

FDM, ULBM, BOTH = "fdm", "ulbm", "both"
METHODS = (FDM, ULBM, BOTH)

# smallest direction component accepted by the bounds method
EPS_DIRECTION = 1e-9


class DirectionError(ValueError):
    """Direction vector is malformed or unusable for the requested method."""


class DirectionalError(RuntimeError):
    """A step of the directional procedure failed.

    ``step`` names the stage: ``a-0``/``b-0`` scale-size checks, ``a-1``/``b-1``
    step selection, ``a-2``/``b-2`` the finite-difference rate, ``ulbm`` the
    bounds, ``project`` the frontier projection.
    """

    def __init__(self, step: str, message: str):
        super().__init__(f"[{step}] {message}")
        self.step = step


class StepSelectionError(DirectionalError):
    pass


@dataclass(frozen=True)
class Direction:
    """Input weights ``omega`` and output weights ``delta``.

    Stored normalised so that ``sum(omega) == m`` and ``sum(delta) == s``;
    any positive rescaling of the arguments yields the same direction.
    """

    omega: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        omega = _normalise(self.omega, "omega")
        delta = _normalise(self.delta, "delta")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "delta", delta)

    @classmethod
    def diagonal(cls, m: int, s: int) -> "Direction":
        return cls(np.ones(m), np.ones(s))

    def check(self, d: Dataset) -> None:
        if self.omega.size != d.m or self.delta.size != d.s:
            raise DirectionError(
                f"direction has {self.omega.size} input / {self.delta.size} output weights, "
                f"dataset has {d.m} / {d.s}")

    def __eq__(self, other):
        if not isinstance(other, Direction):
            return NotImplemented
        return np.array_equal(self.omega, other.omega) and np.array_equal(self.delta, other.delta)

    def __hash__(self):
        return hash((self.omega.tobytes(), self.delta.tobytes()))


def _normalise(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        raise DirectionError(f"{name} is empty")
    if not np.all(np.isfinite(v)):
        raise DirectionError(f"{name} has non-finite components")
    if np.any(v < 0):
        raise DirectionError(f"{name} has negative components")
    total = v.sum()
    if total <= 0:
        raise DirectionError(f"{name} is all zero")
    out = v * (v.size / total)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Projection:
    dataset: Dataset
    theta: float
    s_plus: np.ndarray

    @property
    def moved(self) -> bool:
        return not (self.theta == 1.0 and not np.any(self.s_plus))


@dataclass(frozen=True)
class UlbmBounds:
    lower: float  # -inf when the minimisation is unbounded
    upper: float  # +inf when the maximisation is unbounded

    @property
    def dlss(self) -> bool:
        return self.lower == -math.inf

    @property
    def dsss(self) -> bool:
        return self.upper == math.inf


@dataclass(frozen=True)
class FdmValue:
    value: float
    t: float


@dataclass(frozen=True)
class DirectionalResult:
    dmu: int
    direction: Direction
    projected: bool = False
    dlss: bool = False
    dsss: bool = False
    right: Optional[float] = None
    left: Optional[float] = None
    rho_lower: Optional[float] = None
    rho_upper: Optional[float] = None
    right_congested: bool = False
    left_congested: bool = False
    t_right: Optional[float] = None
    t_left: Optional[float] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class MultiplierSolution:
    u: np.ndarray
    v: np.ndarray
    mu0: float

    def max_violation(self, d: Dataset) -> float:
        return float(np.max(self.u @ d.Y - self.v @ d.X + self.mu0))


# --------------------------------------------------------------------------
# frontier membership and projection


def _output_weights(d: Dataset, k: int) -> np.ndarray:
    y0 = d.y(k)
    scale = np.where(y0 > 0, y0, d.Y.max(axis=1))
    return 1.0 / np.where(scale > 0, scale, 1.0)


def is_strongly_efficient(d: Dataset, k: int, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """No activity of ``P`` with the same inputs produces more of any output."""
    d.check_index(k)
    n, m, s = d.n, d.m, d.s
    # [lambda (n), b (s)]
    A = np.zeros((m + s + 1, n + s))
    A[:m, :n] = d.X
    A[m:m + s, :n] = d.Y
    A[m:m + s, n:] = -np.eye(s)
    A[-1, :n] = 1.0
    rhs = np.concatenate([d.x(k), d.y(k), [1.0]])
    cost = np.concatenate([np.zeros(n), _output_weights(d, k)])
    sol = solve(LinearProgram(cost, A, (EQ,) * (m + s + 1), rhs, True), tol)
    if sol.status is not Status.OPTIMAL:
        raise SolverError(f"efficiency test LP {sol.status.value}")
    return sol.objective <= tol.classify


def project(d: Dataset, k: int, tol: Tolerances = DEFAULT_TOLERANCES) -> Projection:
    """Replace DMU ``k``'s outputs by ``theta* y + s_plus*``, inputs unchanged.

    ``theta*`` is the maximal radial output expansion at fixed inputs and the
    output slacks are then maximised, so the result is unique and lies on the
    strongly efficient frontier.
    """
    d.check_index(k)
    n, m, s = d.n, d.m, d.s
    # [lambda (n), theta, s_plus (s)]
    nv = n + 1 + s
    A = np.zeros((m + s + 1, nv))
    A[:m, :n] = d.X
    A[m:m + s, :n] = d.Y
    A[m:m + s, n] = -d.y(k)
    A[m:m + s, n + 1:] = -np.eye(s)
    A[-1, :n] = 1.0
    rhs = np.concatenate([d.x(k), np.zeros(s), [1.0]])
    cost = np.zeros(nv)
    cost[n] = 1.0
    free = np.zeros(nv, dtype=bool)
    free[n] = True
    sec = np.zeros(nv)
    sec[n + 1:] = _output_weights(d, k)
    sol = solve_lexicographic(LinearProgram(cost, A, (EQ,) * (m + s + 1), rhs, True, free), sec, tol)
    if sol.status is not Status.OPTIMAL:
        raise DirectionalError("project", f"projection LP {sol.status.value}")
    theta = float(sol.x[n])
    s_plus = sol.x[n + 1:].copy()
    if abs(theta - 1.0) <= tol.classify and np.all(s_plus * _output_weights(d, k) <= tol.classify):
        return Projection(d, 1.0, np.zeros(s))
    y_new = theta * d.y(k) + s_plus
    return Projection(d.replace_outputs(k, y_new), theta, s_plus)


def find_dominating_activity(d: Dataset, k: int, min_reduction: float = 1e-6,
                             tol: Tolerances = DEFAULT_TOLERANCES):
    """An activity of ``P`` using less of some input and making more of some output.

    Input reductions are required to total at least ``min_reduction`` in
    relative terms; the relative output gain is then maximised. Returns
    ``(x, y)`` or ``None`` when no such activity exists.
    """
    d.check_index(k)
    n, m, s = d.n, d.m, d.s
    x0 = d.x(k)
    in_w = np.where(x0 > 0, 1.0 / np.where(x0 > 0, x0, 1.0), 0.0)
    # [lambda (n), a (m), b (s)]
    A = np.zeros((m + s + 2, n + m + s))
    A[:m, :n] = d.X
    A[:m, n:n + m] = np.eye(m)
    A[m:m + s, :n] = d.Y
    A[m:m + s, n + m:] = -np.eye(s)
    A[m + s, :n] = 1.0
    A[m + s + 1, n:n + m] = in_w
    rel = (EQ,) * (m + s + 1) + (GE,)
    rhs = np.concatenate([x0, d.y(k), [1.0, min_reduction]])
    cost = np.concatenate([np.zeros(n + m), _output_weights(d, k)])
    sol = solve(LinearProgram(cost, A, rel, rhs, True), tol)
    if sol.status is not Status.OPTIMAL or sol.objective <= tol.classify:
        return None
    lam = sol.x[:n]
    return d.X @ lam, d.Y @ lam


# --------------------------------------------------------------------------
# scale-size checks


def _max_scale_step(d: Dataset, k: int, direction: Direction, sign: float,
                    tol: Tolerances) -> float:
    """Largest eta with inputs ``(1 + sign*omega*eta) x0`` still inside ``P``."""
    n, m, s = d.n, d.m, d.s
    x0, y0 = d.x(k), d.y(k)
    # [lambda (n), eta, beta]
    A = np.zeros((m + s + 1, n + 2))
    A[:m, :n] = d.X
    A[:m, n] = -sign * direction.omega * x0
    A[m:m + s, :n] = d.Y
    A[m:m + s, n + 1] = -sign * direction.delta * y0
    A[-1, :n] = 1.0
    rel = (EQ,) * m + (GE,) * s + (EQ,)
    rhs = np.concatenate([x0, y0, [1.0]])
    cost = np.zeros(n + 2)
    cost[n] = 1.0
    free = np.zeros(n + 2, dtype=bool)
    free[n + 1] = True
    sol = solve(LinearProgram(cost, A, rel, rhs, True, free), tol)
    if sol.status is Status.UNBOUNDED:
        return math.inf
    if sol.status is not Status.OPTIMAL:
        raise SolverError(f"scale-size LP {sol.status.value}")
    return sol.objective


def is_dlss(d: Dataset, k: int, direction: Direction, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """Inputs cannot be expanded along ``omega`` without leaving ``P``."""
    d.check_index(k)
    direction.check(d)
    return _max_scale_step(d, k, direction, +1.0, tol) <= tol.classify


def is_dsss(d: Dataset, k: int, direction: Direction, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """Inputs cannot be contracted along ``omega`` without leaving ``P``."""
    d.check_index(k)
    direction.check(d)
    return _max_scale_step(d, k, direction, -1.0, tol) <= tol.classify


# --------------------------------------------------------------------------
# finite differences


def _fdm_rate(d: Dataset, k: int, direction: Direction, t: float, sign: float,
              tol: Tolerances):
    """Optimal ``beta/t`` for an input step ``sign * t`` along ``omega``.

    Written in deviation coordinates ``lambda = e_k + t*mu`` so the rate is
    a variable of the LP rather than a difference of nearly equal numbers:

        X mu = sign * omega*x0,  Y mu >= sign * rate * delta*y0,
        sum mu = 0,  mu_j >= 0 (j != k),  mu_k >= -1/t

    The right side maximises the rate, the left side minimises it.
    """
    n, m, s = d.n, d.m, d.s
    x0, y0 = d.x(k), d.y(k)
    # [mu (n), rate]
    A = np.zeros((m + s + 2, n + 1))
    A[:m, :n] = d.X
    A[m:m + s, :n] = d.Y
    A[m:m + s, n] = -sign * direction.delta * y0
    A[m + s, :n] = 1.0
    A[m + s + 1, k] = 1.0
    rel = (EQ,) * m + (GE,) * s + (EQ, GE)
    rhs = np.concatenate([sign * direction.omega * x0, np.zeros(s), [0.0, -1.0 / t]])
    cost = np.zeros(n + 1)
    cost[n] = 1.0
    free = np.zeros(n + 1, dtype=bool)
    free[k] = free[n] = True
    return solve(LinearProgram(cost, A, rel, rhs, maximize=sign > 0, free=free), tol)


def supporting_ratio(d: Dataset, k: int, direction: Direction, t: float, rate: float,
                     sign: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Max of ``U.y0 + mu0`` over hyperplanes through the step point.

    The step point is ``((1 + sign*omega*t) x0, (1 + sign*delta*rate*t) y0)``.
    Hyperplanes ``U.Y - V.X + mu0 = 0`` must support every DMU and satisfy
    ``V.x0 = 1`` (or ``U.y0 = 1`` when no such hyperplane exists); the
    optimum is 1 exactly when one of them passes through both DMU ``k`` and
    the step point. Returns ``nan`` when none exists.

    The two points differ by O(t), so the LP is posed in the gap variable
    ``q = (U.y0 - V.x0 + mu0) / t`` instead of ``mu0``; the value returned is
    ``1 + t*q*``.
    """
    n, m, s = d.n, d.m, d.s
    x0, y0 = d.x(k), d.y(k)
    # [u (s), v (m), q]
    A = np.zeros((n + 2, s + m + 1))
    A[:n, :s] = (d.Y - y0[:, None]).T
    A[:n, s:s + m] = -(d.X - x0[:, None]).T
    A[:n, -1] = t
    A[n, s:s + m] = x0
    A[n + 1, :s] = sign * rate * direction.delta * y0
    A[n + 1, s:s + m] = -sign * direction.omega * x0
    A[n + 1, -1] = 1.0
    rel = (LE,) * n + (EQ, EQ)
    rhs = np.concatenate([np.zeros(n), [1.0, 0.0]])
    cost = np.zeros(s + m + 1)
    cost[-1] = 1.0
    free = np.zeros(s + m + 1, dtype=bool)
    free[s:] = True
    sol = solve(LinearProgram(cost, A, rel, rhs, True, free), tol)
    if sol.status is Status.INFEASIBLE:
        # every candidate face has V.x0 <= 0; scale by the output side instead
        A[n, s:s + m] = 0.0
        A[n, :s] = y0
        sol = solve(LinearProgram(cost, A, rel, rhs, True, free), tol)
    if sol.status is not Status.OPTIMAL:
        return math.nan
    return 1.0 + t * sol.objective


def _validate(d, k, direction, t, sign, steps, tol) -> tuple[bool, Optional[float]]:
    sol = _fdm_rate(d, k, direction, t, sign, tol)
    if sol.status is not Status.OPTIMAL:
        return False, None
    rate = sol.objective
    phi = supporting_ratio(d, k, direction, t, rate, sign, tol)
    return abs(phi - 1.0) <= steps.validation_tol, rate


def validate_step_right(d: Dataset, k: int, direction: Direction, t: float,
                        steps: StepConfig = StepConfig(), tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """True when DMU ``k`` and its right-hand step point share a supporting hyperplane."""
    direction.check(d)
    return _validate(d, k, direction, t, +1.0, steps, tol)[0]


def validate_step_left(d: Dataset, k: int, direction: Direction, t: float,
                       steps: StepConfig = StepConfig(), tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    direction.check(d)
    return _validate(d, k, direction, t, -1.0, steps, tol)[0]


def _select_and_rate(d, k, direction, sign, steps, tol) -> FdmValue:
    side = "a" if sign > 0 else "b"
    t = steps.t_initial
    for _ in range(steps.max_halvings + 1):
        ok, rate = _validate(d, k, direction, t, sign, steps, tol)
        if ok:
            return FdmValue(rate, t)
        t /= 2.0
    raise StepSelectionError(
        f"{side}-1", f"no step in [{t:.3g}, {steps.t_initial:.3g}] passed the face check")


def right_fdm(d: Dataset, k: int, direction: Direction, steps: StepConfig = StepConfig(),
              tol: Tolerances = DEFAULT_TOLERANCES) -> FdmValue:
    """Right-hand rate ``xi*`` at a validated step. DMU ``k`` must not be DLSS."""
    d.check_index(k)
    direction.check(d)
    return _select_and_rate(d, k, direction, +1.0, steps, tol)


def left_fdm(d: Dataset, k: int, direction: Direction, steps: StepConfig = StepConfig(),
             tol: Tolerances = DEFAULT_TOLERANCES) -> FdmValue:
    """Left-hand rate ``psi*`` at a validated step. DMU ``k`` must not be DSSS."""
    d.check_index(k)
    direction.check(d)
    return _select_and_rate(d, k, direction, -1.0, steps, tol)


# --------------------------------------------------------------------------
# upper and lower bounds


def _ulbm_lp(d: Dataset, k: int, direction: Direction, maximize: bool) -> LinearProgram:
    # variables [gamma (m, free), Lambda (s), tau, mu0' (free)]
    n, m, s = d.n, d.m, d.s
    x0, y0 = d.x(k), d.y(k)
    Yd = d.Y / direction.delta[:, None]
    Xw = d.X / direction.omega[:, None]
    nv = m + s + 2
    A = np.zeros((n + 3, nv))
    A[:n, :m] = -Xw.T
    A[:n, m:m + s] = Yd.T
    A[:n, -1] = 1.0
    A[n, :m] = -x0 / direction.omega
    A[n, m:m + s] = y0 / direction.delta
    A[n, -1] = 1.0
    A[n + 1, :m] = x0 / direction.omega
    A[n + 1, m + s] = -1.0
    A[n + 1, -1] = -1.0
    A[n + 2, m:m + s] = y0
    rel = (LE,) * n + (EQ, EQ, EQ)
    rhs = np.concatenate([np.zeros(n + 2), [1.0]])
    cost = np.zeros(nv)
    cost[:m] = x0
    free = np.zeros(nv, dtype=bool)
    free[:m] = True
    free[-1] = True
    return LinearProgram(cost, A, rel, rhs, maximize, free)


def ulbm_bounds(d: Dataset, k: int, direction: Direction,
                tol: Tolerances = DEFAULT_TOLERANCES) -> UlbmBounds:
    """Min and max of ``V.(omega*x0) / U.(delta*y0)`` over supporting hyperplanes at DMU ``k``.

    The fractional program is solved as an LP after the Charnes-Cooper
    change of variables, which needs every ``omega_i`` and ``delta_r`` to be
    positive. An unbounded maximum means DSSS, an unbounded minimum DLSS.
    """
    d.check_index(k)
    direction.check(d)
    if direction.omega.min() < EPS_DIRECTION or direction.delta.min() < EPS_DIRECTION:
        raise DirectionError("bounds method needs all direction components > 0; use the FDM path")
    out = []
    for maximize in (False, True):
        sol = solve(_ulbm_lp(d, k, direction, maximize), tol)
        if sol.status is Status.UNBOUNDED:
            out.append(math.inf if maximize else -math.inf)
        elif sol.status is Status.INFEASIBLE:
            raise DirectionalError("ulbm", "bounds LP infeasible: DMU is not strongly efficient")
        else:
            out.append(sol.objective)
    return UlbmBounds(out[0], out[1])


def ulbm_multipliers(d: Dataset, k: int, direction: Direction, upper: bool,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> Optional[MultiplierSolution]:
    """Recover ``(U, V, mu0)`` attaining the upper or lower bound, if finite."""
    sol = solve(_ulbm_lp(d, k, direction, upper), tol)
    if sol.status is not Status.OPTIMAL:
        return None
    m, s = d.m, d.s
    gamma, lam, tau, mu = sol.x[:m], sol.x[m:m + s], sol.x[m + s], sol.x[-1]
    return MultiplierSolution(lam / direction.delta / tau, gamma / direction.omega / tau, mu / tau)


# --------------------------------------------------------------------------
# procedure


def analyze(d: Dataset, k: int, direction: Direction, method: str = BOTH,
            steps: StepConfig = StepConfig(), tol: Tolerances = DEFAULT_TOLERANCES) -> DirectionalResult:
    """Right- and left-hand directional congestion of DMU ``k``.

    A DMU off the strongly efficient frontier is first projected onto it and
    the result describes the projection (``projected=True``). Each side is
    either "no data" (DLSS on the right, DSSS on the left) or a rate whose
    sign decides congestion.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    d.check_index(k)
    direction.check(d)
    projected = False
    if not is_strongly_efficient(d, k, tol):
        d = project(d, k, tol).dataset
        projected = True

    res = dict(dmu=k, direction=direction, projected=projected)
    bounds = None
    if method in (ULBM, BOTH):
        try:
            bounds = ulbm_bounds(d, k, direction, tol)
        except SolverError as exc:
            raise DirectionalError("ulbm", str(exc)) from exc
        res.update(rho_lower=bounds.lower, rho_upper=bounds.upper)

    if method == ULBM:
        dlss, dsss = bounds.dlss, bounds.dsss
    else:
        try:
            dlss = is_dlss(d, k, direction, tol)
        except SolverError as exc:
            raise DirectionalError("a-0", str(exc)) from exc
        try:
            dsss = is_dsss(d, k, direction, tol)
        except SolverError as exc:
            raise DirectionalError("b-0", str(exc)) from exc
    res.update(dlss=dlss, dsss=dsss)

    right = left = None
    if method in (FDM, BOTH):
        if not dlss:
            r = _side(d, k, direction, +1.0, steps, tol)
            res.update(right=r.value, t_right=r.t)
            right = r.value
        if not dsss:
            lv = _side(d, k, direction, -1.0, steps, tol)
            res.update(left=lv.value, t_left=lv.t)
            left = lv.value
    else:
        right = None if dlss else bounds.lower
        left = None if dsss else bounds.upper

    res.update(right_congested=right is not None and right < -tol.classify,
               left_congested=left is not None and left < -tol.classify)
    return DirectionalResult(**res)


def _side(d, k, direction, sign, steps, tol) -> FdmValue:
    side = "a" if sign > 0 else "b"
    try:
        val = _select_and_rate(d, k, direction, sign, steps, tol)
    except SolverError as exc:
        raise DirectionalError(f"{side}-2", str(exc)) from exc
    if not math.isfinite(val.value):
        raise DirectionalError(f"{side}-2", "finite-difference rate is not finite")
    return val


def sweep(d: Dataset, k: int, grid: Sequence[Direction], method: str = BOTH,
          steps: StepConfig = StepConfig(), tol: Tolerances = DEFAULT_TOLERANCES) -> list[DirectionalResult]:
    """:func:`analyze` over each direction in ``grid``; failures are kept in-row."""
    if len(grid) == 0:
        raise DirectionError("direction grid is empty")
    rows = []
    for direction in grid:
        try:
            rows.append(analyze(d, k, direction, method, steps, tol))
        except (DirectionalError, DirectionError, SolverError) as exc:
            rows.append(DirectionalResult(dmu=k, direction=direction, error=str(exc)))
    return rows
