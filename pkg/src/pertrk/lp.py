"""Phase-one simplex for LP feasibility problems.

Problems have the form::

    eq_A x == eq_b,   ineq_A x >= ineq_b,   x >= 0

and are small and dense (a few hundred columns at most), so the solver keeps a
full tableau.  Only feasibility is decided; there is no objective.
"""

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
NUMERICAL_FAILURE = "numerical_failure"

# phase-one objective thresholds (on equilibrated rows)
FEASIBLE_BELOW = 1e-9
INFEASIBLE_ABOVE = 1e-7

TOL_EQ = 1e-9
TOL_INEQ = 1e-9
_PIVOT_TOL = 1e-11
_COST_TOL = 1e-12


@dataclass(frozen=True)
class LPFeasibility:
    n_vars: int
    eq_A: np.ndarray = None
    eq_b: np.ndarray = None
    ineq_A: np.ndarray = None
    ineq_b: np.ndarray = None

    def __post_init__(self):
        n = int(self.n_vars)
        if n < 0:
            raise ValueError("n_vars must be nonnegative")
        object.__setattr__(self, "n_vars", n)
        for A_name, b_name in (("eq_A", "eq_b"), ("ineq_A", "ineq_b")):
            A, b = getattr(self, A_name), getattr(self, b_name)
            A = None if A is None else np.array(A, dtype=float)
            b = np.zeros(0) if b is None else np.array(b, dtype=float).ravel()
            if A is None or A.size == 0:
                A = np.zeros((0, n))
            A = np.atleast_2d(A)
            if A.shape[1] != n:
                raise ValueError(f"{A_name} must have {n} columns, got {A.shape[1]}")
            if A.shape[0] != b.shape[0]:
                raise ValueError(f"{A_name} has {A.shape[0]} rows but {b_name} has {b.shape[0]}")
            object.__setattr__(self, A_name, A)
            object.__setattr__(self, b_name, b)

    def residuals(self, x):
        """(max equality residual, most negative inequality slack, most negative x)."""
        x = np.asarray(x, dtype=float)
        eq = np.max(np.abs(self.eq_A @ x - self.eq_b), initial=0.0)
        ineq = np.min(self.ineq_A @ x - self.ineq_b, initial=0.0)
        return eq, min(ineq, 0.0), min(np.min(x, initial=0.0), 0.0)


@dataclass(frozen=True)
class LPResult:
    status: str
    x: np.ndarray = None
    phase1_objective: float = float("nan")
    iterations: int = 0

    @property
    def feasible(self):
        return self.status == FEASIBLE


def verify_certificate(problem, x, tol_eq=TOL_EQ, tol_ineq=TOL_INEQ):
    """Independent residual check of a claimed feasible point."""
    if x is None or len(x) != problem.n_vars or not np.all(np.isfinite(x)):
        return False
    eq, ineq, neg = problem.residuals(x)
    # scale-aware: compare against the size of the data
    scale_eq = 1.0 + np.max(np.abs(problem.eq_b), initial=0.0)
    scale_ineq = 1.0 + np.max(np.abs(problem.ineq_b), initial=0.0)
    return eq <= tol_eq * scale_eq and ineq >= -tol_ineq * scale_ineq and neg >= -tol_ineq


def _standard_form(problem):
    """Rows ``M y = rhs`` with ``y = (x, surplus) >= 0`` and ``rhs >= 0``."""
    n, m_e, m_i = problem.n_vars, problem.eq_A.shape[0], problem.ineq_A.shape[0]
    M = np.zeros((m_e + m_i, n + m_i))
    M[:m_e, :n] = problem.eq_A
    M[m_e:, :n] = problem.ineq_A
    M[m_e:, n:] = -np.eye(m_i)
    rhs = np.concatenate([problem.eq_b, problem.ineq_b])
    scale = np.max(np.abs(M), axis=1)
    keep = scale > 0
    if np.any(np.abs(rhs[~keep]) > TOL_EQ):
        return None, None
    M, rhs, scale = M[keep], rhs[keep], scale[keep]
    M = M / scale[:, None]
    rhs = rhs / scale
    flip = rhs < 0
    M[flip] *= -1
    rhs[flip] *= -1
    return M, rhs


def _pivot(T, row, col):
    T[row] /= T[row, col]
    col_vals = T[:, col].copy()
    col_vals[row] = 0.0
    T -= np.outer(col_vals, T[row])


def solve_feasibility(problem, max_iter=None):
    """Decide feasibility of ``problem``.

    Returns an :class:`LPResult`; a feasible result carries a certificate that
    has passed :func:`verify_certificate`.  Dantzig pricing is used until a run
    of degenerate pivots, after which Bland's rule takes over.
    """
    n = problem.n_vars
    M, rhs = _standard_form(problem)
    if M is None:
        return LPResult(INFEASIBLE, phase1_objective=float("inf"))
    m, N = M.shape
    if m == 0:
        x = np.zeros(n)
        return LPResult(FEASIBLE, x, 0.0, 0)

    # tableau: [M | I | rhs] with the phase-one cost row last
    T = np.zeros((m + 1, N + m + 1))
    T[:m, :N] = M
    T[:m, N:N + m] = np.eye(m)
    T[:m, -1] = rhs
    T[m, :N] = -M.sum(axis=0)
    T[m, -1] = -rhs.sum()
    basis = list(range(N, N + m))

    if max_iter is None:
        max_iter = 50 * (N + m) + 1000
    bland = False
    degenerate_run = 0
    it = 0
    while True:
        costs = T[m, :N + m]
        candidates = np.flatnonzero(costs < -_COST_TOL)
        if candidates.size == 0:
            break
        if it >= max_iter:
            log.warning("simplex hit the iteration cap (%d)", max_iter)
            return LPResult(NUMERICAL_FAILURE, phase1_objective=float(-T[m, -1]), iterations=it)
        col = candidates[0] if bland else candidates[np.argmin(costs[candidates])]
        column = T[:m, col]
        rows = np.flatnonzero(column > _PIVOT_TOL)
        if rows.size == 0:
            # unbounded phase-one direction cannot happen; treat as breakdown
            return LPResult(NUMERICAL_FAILURE, phase1_objective=float(-T[m, -1]), iterations=it)
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
        row = min(ties, key=lambda r: basis[r])
        if T[row, -1] <= 1e-14:
            degenerate_run += 1
            if degenerate_run > 2 * m:
                bland = True
        else:
            degenerate_run = 0
        _pivot(T, row, col)
        basis[row] = col
        it += 1

    objective = float(max(-T[m, -1], 0.0))
    y = np.zeros(N + m)
    for r, j in enumerate(basis):
        y[j] = max(T[r, -1], 0.0)
    if objective > INFEASIBLE_ABOVE:
        return LPResult(INFEASIBLE, phase1_objective=objective, iterations=it)
    if objective >= FEASIBLE_BELOW:
        log.debug("ambiguous phase-one objective %.3g", objective)
        return LPResult(NUMERICAL_FAILURE, phase1_objective=objective, iterations=it)

    x = _refine(M, rhs, basis, N, y[:N])[:n]
    if not verify_certificate(problem, x):
        x_raw = y[:n]
        if verify_certificate(problem, x_raw):
            x = x_raw
        else:
            log.debug("phase one converged but the certificate failed verification")
            return LPResult(NUMERICAL_FAILURE, phase1_objective=objective, iterations=it)
    return LPResult(FEASIBLE, x, objective, it)


def _refine(M, rhs, basis, N, y):
    """Recompute the basic solution from the original data to shed pivot drift."""
    cols = [j for j in basis if j < N]
    if not cols:
        return y
    sol, *_ = np.linalg.lstsq(M[:, cols], rhs, rcond=None)
    out = np.zeros(N)
    out[cols] = sol
    out[np.abs(out) < 1e-15] = 0.0
    if np.any(out < -TOL_INEQ):
        return y
    return np.maximum(out, 0.0)
