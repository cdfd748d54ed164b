"""Dense two-phase simplex solver.

Every DEA model in this package is lowered onto :func:`solve` or
:func:`solve_lexicographic`. Problems here have tens of variables, so the
solver keeps a full tableau and refactors the final basis with a direct
solve to clean up round-off before reporting primal and dual values.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .config import Tolerances, DEFAULT_TOLERANCES

log = logging.getLogger(__name__)

LE, EQ, GE = "<=", "=", ">="
_RELATIONS = (LE, EQ, GE)
_FLIP = {LE: GE, GE: LE, EQ: EQ}

# consecutive degenerate pivots before switching to Bland's rule
_DEGENERATE_RUN = 10


class LPInputError(ValueError):
    """Malformed linear program (bad shape, NaN, unknown relation)."""


class SolverError(RuntimeError):
    """The simplex iteration failed to terminate or lost feasibility."""


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """``max|min cost @ x`` subject to ``A[i] @ x  rel[i]  rhs[i]``.

    Variables are nonnegative unless flagged in ``free``.
    """

    cost: np.ndarray
    A: np.ndarray
    relations: tuple[str, ...]
    rhs: np.ndarray
    maximize: bool = True
    free: np.ndarray | None = None

    def __post_init__(self):
        cost = np.asarray(self.cost, dtype=float).ravel()
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        rhs = np.asarray(self.rhs, dtype=float).ravel()
        rel = tuple(self.relations)
        n = cost.size
        if n == 0:
            raise LPInputError("linear program needs at least one variable")
        if A.shape[0] == 0:
            raise LPInputError("linear program needs at least one row")
        if A.shape[1] != n:
            raise LPInputError(f"row length {A.shape[1]} != variable count {n}")
        if rhs.size != A.shape[0] or len(rel) != A.shape[0]:
            raise LPInputError("rows, relations and right-hand sides differ in count")
        bad = [r for r in rel if r not in _RELATIONS]
        if bad:
            raise LPInputError(f"unknown relation {bad[0]!r}")
        for name, arr in (("cost", cost), ("A", A), ("rhs", rhs)):
            if not np.all(np.isfinite(arr)):
                raise LPInputError(f"non-finite entry in {name}")
        free = np.zeros(n, dtype=bool) if self.free is None else np.asarray(self.free, dtype=bool).ravel()
        if free.size != n:
            raise LPInputError("free mask length != variable count")
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "relations", rel)
        object.__setattr__(self, "free", free)

    @property
    def n_vars(self) -> int:
        return self.cost.size

    @property
    def n_rows(self) -> int:
        return self.rhs.size

    def with_row(self, coeffs, relation: str, rhs: float) -> "LinearProgram":
        return LinearProgram(
            self.cost,
            np.vstack([self.A, np.asarray(coeffs, dtype=float)]),
            self.relations + (relation,),
            np.append(self.rhs, rhs),
            self.maximize,
            self.free,
        )

    def dump(self) -> str:
        """Plain-text listing for bug reports."""
        lines = [
            f"sense {'max' if self.maximize else 'min'}",
            f"vars {self.n_vars} rows {self.n_rows}",
            "cost " + " ".join(repr(float(c)) for c in self.cost),
            "free " + " ".join(str(int(f)) for f in self.free),
        ]
        for a, r, b in zip(self.A, self.relations, self.rhs):
            lines.append("row " + " ".join(repr(float(v)) for v in a) + f" {r} {float(b)!r}")
        return "\n".join(lines) + "\n"


@dataclass
class LpSolution:
    status: Status
    objective: float = float("nan")
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    secondary_objective: float | None = None
    iterations: int = 0
    basis: tuple[int, ...] = field(default=(), repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


class _Simplex:
    """Revised simplex on the standard form ``A x = b, x >= 0`` (maximising).

    The basis is refactorised at every pivot; with the problem sizes here
    that costs little and keeps round-off from accumulating.
    """

    def __init__(self, lp: LinearProgram, tol: Tolerances):
        self.tol = tol
        A, rhs = lp.A, lp.rhs
        rel = list(lp.relations)
        m = A.shape[0]

        # free variables are split into (plus, minus) columns
        cols = []
        self.var_map: list[tuple[int, float]] = []
        for j in range(lp.n_vars):
            cols.append(A[:, j])
            self.var_map.append((j, 1.0))
            if lp.free[j]:
                cols.append(-A[:, j])
                self.var_map.append((j, -1.0))
        S = np.column_stack(cols)

        # equilibrate rows, then make rhs nonnegative
        scale = np.abs(S).max(axis=1)
        scale[scale == 0] = 1.0
        sign = np.where(rhs < 0, -1.0, 1.0)
        self.row_factor = scale * sign
        S = S / self.row_factor[:, None]
        b = rhs / self.row_factor
        rel = [_FLIP[r] if s < 0 else r for r, s in zip(rel, sign)]

        n_struct = S.shape[1]
        n_slack = sum(r != EQ for r in rel)
        n_art = sum(r != LE for r in rel)
        self.n_struct = n_struct
        self.art_start = n_struct + n_slack
        M = np.zeros((m, self.art_start + n_art))
        M[:, :n_struct] = S
        basis = []
        k_slack, k_art = n_struct, self.art_start
        for i, r in enumerate(rel):
            if r == LE:
                M[i, k_slack] = 1.0
                basis.append(k_slack)
                k_slack += 1
            else:
                if r == GE:
                    M[i, k_slack] = -1.0
                    k_slack += 1
                M[i, k_art] = 1.0
                basis.append(k_art)
                k_art += 1
        self.M = M
        self.b = b
        self.basis = basis
        self.rows = np.arange(m)  # original row ids still present
        self.iterations = 0

        self.sense = 1.0 if lp.maximize else -1.0
        self.cost_struct = np.array([self.sense * lp.cost[j] * s for j, s in self.var_map])

    @property
    def ncol(self) -> int:
        return self.M.shape[1]

    def full_cost(self, struct_cost: np.ndarray) -> np.ndarray:
        c = np.zeros(self.ncol)
        c[: self.n_struct] = struct_cost
        return c

    def factor(self):
        B = self.M[:, self.basis]
        try:
            return lu_factor(B, check_finite=False)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise SolverError("singular basis") from exc

    def primal(self, lu) -> np.ndarray:
        return lu_solve(lu, self.b, check_finite=False)

    def reduced_costs(self, lu, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        y = lu_solve(lu, c[self.basis], trans=1, check_finite=False)
        return c - y @ self.M, y

    def run(self, c: np.ndarray, allowed: np.ndarray, max_iter: int) -> Status:
        """Primal simplex on cost ``c`` over columns in ``allowed``."""
        tol = self.tol
        ctol = tol.reduced_cost * max(1.0, float(np.abs(c).max(initial=0.0)))
        degenerate = 0
        for _ in range(max_iter):
            lu = self.factor()
            xb = np.maximum(self.primal(lu), 0.0)
            d, _ = self.reduced_costs(lu, c)
            d[~allowed] = 0.0
            d[self.basis] = 0.0
            cand = np.nonzero(d > ctol)[0]
            if cand.size == 0:
                return Status.OPTIMAL
            bland = degenerate >= _DEGENERATE_RUN
            q = int(cand[0]) if bland else int(cand[np.argmax(d[cand])])
            u = lu_solve(lu, self.M[:, q], check_finite=False)
            ptol = tol.pivot * max(1.0, float(np.abs(u).max()))
            rows = np.nonzero(u > ptol)[0]
            if rows.size == 0:
                return Status.UNBOUNDED
            ratios = xb[rows] / u[rows]
            best = ratios.min()
            ties = rows[ratios <= best + tol.pivot * max(1.0, abs(best))]
            if bland:
                r = int(min(ties, key=lambda i: self.basis[i]))
            else:
                r = int(ties[np.argmax(u[ties])])
            degenerate = degenerate + 1 if best <= tol.pivot else 0
            self.basis[r] = q
            self.iterations += 1
        raise SolverError(f"simplex did not terminate within {max_iter} pivots")

    def drive_out_artificials(self) -> None:
        """Swap basic artificials for structural columns; drop redundant rows."""
        i = 0
        while i < len(self.basis):
            if self.basis[i] < self.art_start:
                i += 1
                continue
            lu = self.factor()
            e = np.zeros(len(self.basis))
            e[i] = 1.0
            row = lu_solve(lu, e, trans=1, check_finite=False) @ self.M[:, : self.art_start]
            row[[j for j in self.basis if j < self.art_start]] = 0.0
            j = int(np.argmax(np.abs(row)))
            if abs(row[j]) > self.tol.pivot * max(1.0, float(np.abs(row).max())) and abs(row[j]) > 1e-9:
                self.basis[i] = j
                i += 1
            else:
                keep = np.ones(len(self.basis), dtype=bool)
                keep[i] = False
                self.M = self.M[keep]
                self.b = self.b[keep]
                self.rows = self.rows[keep]
                del self.basis[i]


def _phase_one(sx: _Simplex, max_iter: int) -> bool:
    if sx.art_start == sx.ncol:
        return True
    c = np.zeros(sx.ncol)
    c[sx.art_start:] = -1.0
    sx.run(c, np.ones(sx.ncol, dtype=bool), max_iter)
    xb = sx.primal(sx.factor())
    art = np.array([j >= sx.art_start for j in sx.basis])
    infeas = float(np.sum(np.abs(xb[art])))
    if infeas > sx.tol.feasibility * max(1.0, float(np.abs(sx.b).max())):
        return False
    sx.drive_out_artificials()
    return True


def _finish(lp: LinearProgram, sx: _Simplex, c_primary: np.ndarray, status: Status,
            c_secondary: np.ndarray | None = None) -> LpSolution:
    if status is not Status.OPTIMAL:
        return LpSolution(status, iterations=sx.iterations)
    lu = sx.factor()
    xb = sx.primal(lu)
    if np.any(xb < -1e3 * sx.tol.feasibility * max(1.0, float(np.abs(xb).max()))):
        raise SolverError("basis lost primal feasibility")
    xb = np.maximum(xb, 0.0)
    _, y_std = sx.reduced_costs(lu, c_primary)
    x_std = np.zeros(sx.ncol)
    x_std[sx.basis] = xb
    x = np.zeros(lp.n_vars)
    for k, (j, s) in enumerate(sx.var_map):
        x[j] += s * x_std[k]
    duals = np.zeros(lp.n_rows)
    duals[sx.rows] = y_std / sx.row_factor[sx.rows]
    duals *= sx.sense
    sol = LpSolution(Status.OPTIMAL, float(lp.cost @ x), x, duals,
                     iterations=sx.iterations, basis=tuple(sx.basis))
    if c_secondary is not None:
        sol.secondary_objective = float(c_secondary @ x)
    return sol


def _max_iter(lp: LinearProgram, tol: Tolerances) -> int:
    return tol.max_pivots or 50 * (lp.n_vars + lp.n_rows) + 100


def solve(lp: LinearProgram, tol: Tolerances = DEFAULT_TOLERANCES) -> LpSolution:
    """Solve ``lp`` and classify it as optimal, infeasible or unbounded.

    Pivoting is deterministic: Dantzig's rule with lowest-index ties,
    falling back to Bland's rule after a run of degenerate pivots.
    """
    sx = _Simplex(lp, tol)
    limit = _max_iter(lp, tol)
    if not _phase_one(sx, limit):
        return LpSolution(Status.INFEASIBLE, iterations=sx.iterations)
    c = sx.full_cost(sx.cost_struct)
    allowed = np.arange(sx.ncol) < sx.art_start
    status = sx.run(c, allowed, limit)
    sol = _finish(lp, sx, c, status)
    log.debug("lp %dx%d -> %s in %d pivots", lp.n_rows, lp.n_vars, sol.status.value, sol.iterations)
    return sol


def solve_lexicographic(lp: LinearProgram, secondary_cost: Sequence[float],
                        tol: Tolerances = DEFAULT_TOLERANCES) -> LpSolution:
    """Optimise ``lp.cost`` first, then ``secondary_cost`` over the optimal face.

    Both stages use the sense of ``lp``. The second stage starts from the
    first-stage optimal basis with every column of nonzero reduced cost
    barred from entering, so the primary optimum is held exactly.
    ``objective`` and ``duals`` refer to the primary cost.
    """
    sec = np.asarray(secondary_cost, dtype=float).ravel()
    if sec.size != lp.n_vars:
        raise LPInputError(f"secondary cost length {sec.size} != variable count {lp.n_vars}")
    if not np.all(np.isfinite(sec)):
        raise LPInputError("non-finite entry in secondary cost")
    sx = _Simplex(lp, tol)
    limit = _max_iter(lp, tol)
    if not _phase_one(sx, limit):
        return LpSolution(Status.INFEASIBLE, iterations=sx.iterations)
    c1 = sx.full_cost(sx.cost_struct)
    allowed = np.arange(sx.ncol) < sx.art_start
    status = sx.run(c1, allowed, limit)
    if status is not Status.OPTIMAL:
        return LpSolution(status, iterations=sx.iterations)
    d, _ = sx.reduced_costs(sx.factor(), c1)
    ctol = tol.reduced_cost * max(1.0, float(np.abs(c1).max(initial=0.0)))
    allowed = allowed & (d >= -ctol)
    sec_struct = np.array([sx.sense * sec[j] * s for j, s in sx.var_map])
    c2 = sx.full_cost(sec_struct)
    status = sx.run(c2, allowed, limit)
    return _finish(lp, sx, c1, status, c_secondary=sec)
