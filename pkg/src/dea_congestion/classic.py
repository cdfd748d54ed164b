"""Classical congestion measures on the variable-returns-to-scale technology.

* output-oriented BCC efficiency with maximal slacks,
* the FGL weak-disposability ratio,
* CTT slack-based congestion amounts,
* the WY-TS pure technical efficiency and congestion degree, with the
  strong/weak classification test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .dataset import Dataset
from .lp import EQ, GE, LE, LinearProgram, SolverError, Status, solve, solve_lexicographic


@dataclass(frozen=True)
class BccResult:
    theta: float
    s_minus: np.ndarray
    s_plus: np.ndarray
    lam: np.ndarray


@dataclass(frozen=True)
class CongestionReport:
    theta: float
    pi: float
    phi: float
    congested: bool
    classification: str  # "No", "Weak" or "Strong"
    rho_bar: Optional[float] = None
    fgl: Optional[tuple[float, float]] = None
    ctt: Optional[np.ndarray] = None


def _require_optimal(sol, what: str):
    if sol.status is not Status.OPTIMAL:
        raise SolverError(f"{what}: LP unexpectedly {sol.status.value}")
    return sol


def bcc_output(d: Dataset, k: int, tol: Tolerances = DEFAULT_TOLERANCES) -> BccResult:
    """Max radial output expansion, then max total slack at that expansion.

    Variables are ``[lambda (n), theta, s_minus (m), s_plus (s)]``.
    """
    d.check_index(k)
    n, m, s = d.n, d.m, d.s
    nv = n + 1 + m + s
    A = np.zeros((m + s + 1, nv))
    A[:m, :n] = d.X
    A[:m, n + 1:n + 1 + m] = np.eye(m)
    A[m:m + s, :n] = d.Y
    A[m:m + s, n] = -d.y(k)
    A[m:m + s, n + 1 + m:] = -np.eye(s)
    A[-1, :n] = 1.0
    rhs = np.concatenate([d.x(k), np.zeros(s), [1.0]])
    cost = np.zeros(nv)
    cost[n] = 1.0
    free = np.zeros(nv, dtype=bool)
    free[n] = True
    lp = LinearProgram(cost, A, (EQ,) * (m + s + 1), rhs, maximize=True, free=free)
    sec = np.zeros(nv)
    sec[n + 1:] = 1.0
    sol = _require_optimal(solve_lexicographic(lp, sec, tol), "BCC model")
    x = sol.x
    return BccResult(float(x[n]), x[n + 1:n + 1 + m], x[n + 1 + m:], x[:n])


def fgl_congestion(d: Dataset, k: int, theta: float | None = None,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[float, float]:
    """Weak-disposability expansion ``beta*`` and the ratio ``beta*/theta*``."""
    d.check_index(k)
    n, m, s = d.n, d.m, d.s
    # [lambda (n), beta, tau]
    A = np.zeros((m + s + 2, n + 2))
    A[:m, :n] = d.X
    A[:m, n + 1] = -d.x(k)
    A[m:m + s, :n] = d.Y
    A[m:m + s, n] = -d.y(k)
    A[m + s, :n] = 1.0
    A[m + s + 1, n + 1] = 1.0
    rel = (EQ,) * m + (GE,) * s + (EQ, LE)
    rhs = np.concatenate([np.zeros(m + s), [1.0, 1.0]])
    cost = np.zeros(n + 2)
    cost[n] = 1.0
    free = np.zeros(n + 2, dtype=bool)
    free[n] = True
    sol = _require_optimal(solve(LinearProgram(cost, A, rel, rhs, True, free), tol), "FGL model")
    beta = sol.objective
    if theta is None:
        theta = bcc_output(d, k, tol).theta
    return beta, beta / theta


def ctt_congestion(d: Dataset, k: int, bcc: BccResult | None = None,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Per-input congestion amounts ``s_c = s_minus* - delta*``.

    ``delta`` is the largest input reduction at the BCC target that keeps
    its outputs exactly and stays within the BCC input slacks.
    """
    d.check_index(k)
    if bcc is None:
        bcc = bcc_output(d, k, tol)
    n, m, s = d.n, d.m, d.s
    x_hat = d.x(k) - bcc.s_minus
    y_hat = bcc.theta * d.y(k) + bcc.s_plus
    # [lambda (n), delta (m)]
    A = np.zeros((m + s + 1 + m, n + m))
    A[:m, :n] = d.X
    A[:m, n:] = -np.eye(m)
    A[m:m + s, :n] = d.Y
    A[m + s, :n] = 1.0
    A[m + s + 1:, n:] = np.eye(m)
    rel = (EQ,) * (m + s + 1) + (LE,) * m
    rhs = np.concatenate([x_hat, y_hat, [1.0], bcc.s_minus])
    cost = np.zeros(n + m)
    cost[n:] = 1.0
    sol = _require_optimal(solve(LinearProgram(cost, A, rel, rhs, True), tol), "CTT model")
    return np.maximum(bcc.s_minus - sol.x[n:], 0.0)


def wyts_pte(d: Dataset, k: int, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Radial output expansion with inputs held at equality (weak-disposal hull)."""
    d.check_index(k)
    n, m, s = d.n, d.m, d.s
    # [lambda (n), pi]
    A = np.zeros((m + s + 1, n + 1))
    A[:m, :n] = d.X
    A[m:m + s, :n] = d.Y
    A[m:m + s, n] = -d.y(k)
    A[-1, :n] = 1.0
    rel = (EQ,) * m + (GE,) * s + (EQ,)
    rhs = np.concatenate([d.x(k), np.zeros(s), [1.0]])
    cost = np.zeros(n + 1)
    cost[n] = 1.0
    free = np.zeros(n + 1, dtype=bool)
    free[n] = True
    sol = _require_optimal(solve(LinearProgram(cost, A, rel, rhs, True, free), tol), "PTE model")
    return sol.objective


def scale_elasticity_upper(d: Dataset, k: int, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """``rho_bar = 1 + max mu0`` over supporting hyperplanes through DMU ``k``.

    Returns ``inf`` when the maximisation is unbounded.
    """
    n, m, s = d.n, d.m, d.s
    # [u (s), v (m), mu0]
    A = np.zeros((n + 2, s + m + 1))
    A[:n, :s] = d.Y.T
    A[:n, s:s + m] = -d.X.T
    A[:n, -1] = 1.0
    A[n, :s] = d.y(k)
    A[n, s:s + m] = -d.x(k)
    A[n, -1] = 1.0
    A[n + 1, :s] = d.y(k)
    rel = (LE,) * n + (EQ, EQ)
    rhs = np.concatenate([np.zeros(n + 1), [1.0]])
    cost = np.zeros(s + m + 1)
    cost[-1] = 1.0
    free = np.zeros(s + m + 1, dtype=bool)
    free[s:] = True
    sol = solve(LinearProgram(cost, A, rel, rhs, True, free), tol)
    if sol.status is Status.UNBOUNDED:
        return math.inf
    _require_optimal(sol, "scale elasticity model")
    return 1.0 + sol.objective


def classify_congestion(d: Dataset, k: int, *, with_fgl: bool = False, with_ctt: bool = False,
                        tol: Tolerances = DEFAULT_TOLERANCES) -> CongestionReport:
    """Congestion degree ``phi = pi*/theta*`` and the strong/weak verdict.

    A DMU is congested when ``phi < 1``. The verdict is taken at the DMU's
    projection onto the strongly efficient frontier: Strong when
    ``rho_bar < 0`` there, Weak otherwise.
    """
    from .directional import project

    bcc = bcc_output(d, k, tol)
    theta = bcc.theta
    pi = wyts_pte(d, k, tol)
    phi = pi / theta
    congested = phi < 1.0 - tol.classify
    rho_bar = None
    label = "No"
    if congested:
        proj = project(d, k, tol)
        rho_bar = scale_elasticity_upper(proj.dataset, k, tol)
        label = "Strong" if rho_bar < 0 else "Weak"
    fgl = fgl_congestion(d, k, theta, tol) if with_fgl else None
    ctt = ctt_congestion(d, k, bcc, tol) if with_ctt else None
    return CongestionReport(theta, pi, phi, congested, label, rho_bar, fgl, ctt)
