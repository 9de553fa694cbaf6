"""Upper bounds on the optimal perturbed radius and optimal explicit perturbations.

Two independent routes compute ``R^opt(K)`` for an explicit method:

* :func:`optimize_lp` bisects on ``r`` over the LP feasibility of a downwind
  matrix ``D`` with ``(I - 2D) alpha_r + D >= 0``, ``(I - 2D) v_r >= 0``, ``D >= 0``;
* :func:`optimize_splitting` bisects over the iterated sign splitting of
  :func:`splitting_exists`.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import lp
from . import numeric as nm
from .errors import DomainError, IterationCap, LPNumericalFailure, UnsupportedClass
from .shu_osher import (PerturbedCanonicalForm, _canonical, butcher_from_canonical,
                        canonical_form, radius_am, shift_to_e1)
from .tableau import Perturbation, embed

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
BOUND_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class OptimizationReport:
    r_opt: float
    perturbation: Perturbation
    canonical: PerturbedCanonicalForm
    algorithm: str
    bounds: dict = field(default_factory=dict)
    iterations: int = 0


def _require_explicit(method, what):
    if not method.explicit:
        raise UnsupportedClass(f"{what} handles explicit methods only, got {method.structural_class}")


# ---------------------------------------------------------------------------
# bounds


def bound_max_abs(method):
    """``1 / max |K_ij|`` over the embedded Butcher matrix (``inf`` if ``K = 0``)."""
    _require_explicit(method, "bound_max_abs")
    m = max(abs(float(x)) for x in embed(method).ravel())
    return math.inf if m == 0 else 1.0 / m


def _v_polynomials(K):
    """Coefficients (ascending in r) of each entry of ``v_r = sum_k (-rK)^k e``."""
    n = K.shape[0]
    coeffs = np.zeros((n, n))
    w = np.ones(n)
    for k in range(n):
        coeffs[:, k] = (-1) ** k * w
        w = K @ w
    return coeffs


def bound_re(method, tol=BOUND_TOL):
    """Largest ``r_e`` with ``v_rho >= 0`` for every ``rho`` in ``[0, r_e]``.

    Each entry of ``v_r`` is a polynomial in ``r`` for explicit methods; the
    first positive root where one of them changes sign is located from the
    polynomial roots and then refined by bisection on the sign predicate.
    """
    _require_explicit(method, "bound_re")
    K = nm.to_float(embed(method))
    coeffs = _v_polynomials(K)
    crossing = math.inf
    for c in coeffs:
        c = np.trim_zeros(c, "b")
        if c.size <= 1:
            continue
        roots = np.roots(c[::-1])
        cands = sorted(x.real for x in roots if abs(x.imag) <= 1e-8 * max(1.0, abs(x)) and x.real > 0)
        for t in cands:
            if t >= crossing:
                break
            eta = 1e-7 * max(1.0, t)
            if np.polyval(c[::-1], t + eta) < 0:
                crossing = t
                break
    if math.isinf(crossing):
        return math.inf

    def ok(r):
        return bool(np.all(coeffs @ (r ** np.arange(K.shape[0])) >= -nm.NONNEG_SLACK))

    lo = crossing * (1 - 1e-6)
    while lo > 0 and not ok(lo):
        lo /= 2
    hi = crossing * (1 + 1e-6)
    r, _ = nm.bisect_sup(ok, hi, tol, lo=lo)
    return r


def bound_linear_order(s, p):
    """``(s (s-1) ... (s-p+1))^(1/p)``."""
    if not (1 <= p <= s):
        raise DomainError(f"need 1 <= p <= s, got s={s}, p={p}")
    prod = math.prod(range(s - p + 1, s + 1))
    return prod ** (1.0 / p)


def bounds(method):
    return {
        "inv_max_abs": bound_max_abs(method),
        "r_e": bound_re(method),
        "linear_order_bound": bound_linear_order(method.s, method.order)
        if method.order <= method.s else math.nan,
    }


# ---------------------------------------------------------------------------
# sign splitting


def sign_split(M):
    """``(M_plus, M_minus)`` with ``M = M_plus - M_minus`` and both nonnegative."""
    M = np.asarray(M)
    zero = M * 0
    plus = np.where(M >= 0, M, zero)
    minus = np.where(M < 0, -M, zero)
    return plus, minus


# ---------------------------------------------------------------------------
# Algorithm 1: LP bisection


def _lower_index(n):
    return [(i, j) for i in range(n) for j in range(i)]


def feasibility_problem(alpha, v):
    """The LP over strictly lower triangular ``D`` for given ``alpha_r, v_r``."""
    n = v.shape[0]
    idx = _lower_index(n)
    col = {ij: k for k, ij in enumerate(idx)}
    rows, rhs = [], []
    # (I - 2D) alpha + D >= 0, entrywise on the strictly lower part
    for i, j in idx:
        row = np.zeros(len(idx))
        row[col[i, j]] += 1.0
        for k in range(j + 1, i):
            row[col[i, k]] -= 2.0 * alpha[k, j]
        rows.append(row)
        rhs.append(-alpha[i, j])
    # (I - 2D) v >= 0
    for i in range(n):
        row = np.zeros(len(idx))
        for k in range(i):
            row[col[i, k]] -= 2.0 * v[k]
        rows.append(row)
        rhs.append(-v[i])
    return lp.LPFeasibility(len(idx), ineq_A=np.array(rows), ineq_b=np.array(rhs)), idx


def lp_feasible_at(method, r):
    """A nonnegative ``alpha_down`` certificate at ``r``, or ``None``.

    Raises :class:`~pertrk.errors.LPNumericalFailure` when the LP cannot decide.
    """
    _require_explicit(method, "lp_feasible_at")
    if r <= 0:
        raise ValueError("r must be positive")
    cf = _canonical(nm.to_float(embed(method)), float(r))
    return _lp_certificate(cf)


def _lp_certificate(cf):
    if cf.is_nonnegative():
        # prefer the zero perturbation whenever the method itself suffices
        return np.zeros_like(cf.alpha)
    problem, idx = feasibility_problem(cf.alpha, cf.v)
    res = lp.solve_feasibility(problem)
    if res.status == lp.NUMERICAL_FAILURE:
        raise LPNumericalFailure(f"LP undecided at r={cf.r} (phase-one objective {res.phase1_objective:.3g})")
    if not res.feasible:
        return None
    D = np.zeros_like(cf.alpha)
    for k, (i, j) in enumerate(idx):
        D[i, j] = res.x[k]
    return D


def _form_from_down(cf, D):
    n = D.shape[0]
    L = np.eye(n) - 2 * D
    return PerturbedCanonicalForm(cf.r, L @ cf.v, L @ cf.alpha + D, D)


def optimize_lp(method, tol=DEFAULT_TOL):
    """Optimal perturbed radius by bisection over LP feasibility."""
    _require_explicit(method, "optimize_lp")
    K = nm.to_float(embed(method))
    hi = bound_max_abs(method)
    best = {}

    def feasible(r):
        if r == 0:
            return True
        cf = _canonical(K, r)
        try:
            D = _lp_certificate(cf)
        except LPNumericalFailure as exc:  # undecided LPs count as infeasible
            log.info("%s", exc)
            return False
        if D is None:
            return False
        if r >= best.get("r", -1.0):
            best["r"], best["form"] = r, _form_from_down(cf, D)
        return True

    r, probes = nm.bisect_sup(feasible, hi, tol)
    return _report(method, r, best.get("form"), "lp", probes)


def _report(method, r, form, algorithm, iterations):
    if form is None or r == 0:
        pert = Perturbation.zero(method)
        cf = canonical_form(method, 0.0)
        n = method.s + 1
        form = PerturbedCanonicalForm(0.0, cf.v, cf.alpha, np.zeros((n, n)))
    else:
        _, pert = butcher_from_canonical(form, method.order, method.name)
    return OptimizationReport(r, pert, form, algorithm, bounds(method), iterations)


# ---------------------------------------------------------------------------
# Algorithm 2: iterated splitting


def _first_negative_row(up, down, slack):
    neg = (up < -slack) | (down < -slack)
    rows = np.flatnonzero(neg.any(axis=1))
    return int(rows[0]) if rows.size else None


def _stop(up, down, j0, slack):
    """Column-one negatives that no further splitting can remove."""
    for M in (up, down):
        if M[j0, 0] < -slack and np.all(M[j0, 1:j0] >= -slack):
            return True
    return False


def splitting_exists(method, r, max_iter=None, trace=None, slack=nm.NONNEG_SLACK):
    """Iterated splitting: a nonnegative perturbed form at ``r`` or ``None``.

    Starts from ``alpha_up = alpha_r``, ``alpha_down = 0`` and alternates the
    first-column shift with a re-splitting of the negative parts.  If ``trace``
    is a list, the (shifted) state of every iteration is appended to it.
    """
    _require_explicit(method, "splitting_exists")
    if r <= 0:
        raise ValueError("r must be positive")
    cf = _canonical(nm.to_float(embed(method)), float(r))
    n = cf.v.shape[0]
    I = np.eye(n)
    form = PerturbedCanonicalForm(cf.r, cf.v.copy(), cf.alpha.copy(), np.zeros((n, n)))
    if cf.is_nonnegative():
        if trace is not None:
            trace.append(form)
        return form
    if max_iter is None:
        max_iter = 10 * method.s ** 2
    for _ in range(max_iter + 1):
        form = shift_to_e1(form)
        up, down = form.alpha_up, form.alpha_down
        if trace is not None:
            trace.append(form)
        j0 = _first_negative_row(up, down, slack)
        if j0 is None:
            return form
        if _stop(up, down, j0, slack):
            return None
        up_p, up_m = sign_split(up)
        down_p, down_m = sign_split(down)
        M = I + 2 * (up_m + down_m)
        X = np.linalg.solve(M, np.concatenate([up_p + down_m, up_m + down_p, I[:, :1]], axis=1))
        form = PerturbedCanonicalForm(cf.r, X[:, 2 * n], X[:, :n], X[:, n:2 * n])
    raise IterationCap(f"iterated splitting did not settle within {max_iter} updates at r={r}")


def optimize_splitting(method, tol=DEFAULT_TOL):
    """Optimal perturbed radius by bisection over :func:`splitting_exists`."""
    _require_explicit(method, "optimize_splitting")
    hi = bound_max_abs(method)
    best = {}

    def feasible(r):
        if r == 0:
            return True
        form = splitting_exists(method, r)
        if form is None:
            return False
        if r >= best.get("r", -1.0):
            best["r"], best["form"] = r, form
        return True

    r, probes = nm.bisect_sup(feasible, hi, tol)
    return _report(method, r, best.get("form"), "splitting", probes)


def realizing_pair(form, cf):
    """``(alpha_plus, alpha_minus)`` with ``alpha_r = alpha_plus - alpha_minus``.

    Defined by ``alpha_plus = (I - 2 a_down)^-1 a_up`` and
    ``alpha_minus = (I - 2 a_down)^-1 a_down``.
    """
    n = form.size
    L = np.eye(n) - 2 * nm.to_float(form.alpha_down)
    plus = np.linalg.solve(L, nm.to_float(form.alpha_up))
    minus = np.linalg.solve(L, nm.to_float(form.alpha_down))
    return plus, minus


def radius_lower_bound_ok(method, report, tol=1e-6):
    """Whether the report's radius is not below ``R(K)`` (sanity helper)."""
    return report.r_opt >= radius_am(method) - tol
