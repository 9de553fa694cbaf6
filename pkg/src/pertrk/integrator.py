"""Time stepping with upwind/downwind right-hand-side pairs.

Two step implementations are provided and must agree:

* :func:`step_butcher` uses ``Y = u_n e + h K F + h Kt (F - Ft)``;
* :func:`step_canonical` uses the perturbed Shu-Osher form, in which each stage
  is a combination of forward Euler steps ``Y_j + (h/r) f(Y_j)`` and downwind
  steps ``Y_j - (h/r) ft(Y_j)``.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import catalog
from . import numeric as nm
from . import optimize as opt
from .errors import UnsupportedClass, ZeroRadius
from .shu_osher import perturbed_canonical_form, radius_am
from .tableau import Perturbation, pair_matrices

MONOTONE_SLACK = 1e-12


def max_norm(u):
    return float(np.max(np.abs(u)))


def total_variation(u):
    """Periodic total variation ``sum |u_{i+1} - u_i|``."""
    return float(np.sum(np.abs(np.roll(u, -1) - u)))


def l1_norm(u):
    return float(np.sum(np.abs(u)))


NORMS = {"max-norm": max_norm, "total-variation": total_variation, "l1": l1_norm}


@dataclass
class RhsPair:
    """Upwind ``f`` and downwind ``f_tilde`` with forward Euler bound ``h0``."""

    f: Callable
    f_tilde: Callable
    h0: float = 1.0
    norm: str = "total-variation"

    def __post_init__(self):
        if self.norm not in NORMS:
            raise ValueError(f"norm must be one of {sorted(NORMS)}")

    def measure(self, u):
        return NORMS[self.norm](u)


@dataclass
class StepRecord:
    step: int
    t: float
    u: np.ndarray
    norm_value: float
    tv: float = 0.0
    max_norm: float = 0.0
    flag: bool = False


def _strictly_lower(M):
    # float resolvents leave rounding noise above the diagonal
    return not np.any(np.abs(np.triu(nm.to_float(M))) > nm.EPS_ZERO)


def step_canonical(pcf, u_n, h, rhs, return_stages=False):
    """One step in perturbed Shu-Osher form; ``f``/``f_tilde`` are only evaluated when used."""
    if not (_strictly_lower(pcf.alpha_up) and _strictly_lower(pcf.alpha_down)):
        raise UnsupportedClass("step_canonical needs strictly lower triangular coefficients")
    r = float(pcf.r)
    if r <= 0:
        raise ZeroRadius("a canonical step needs r > 0")
    up, down, gamma = (nm.to_float(X) for X in (pcf.alpha_up, pcf.alpha_down, pcf.gamma))
    n = gamma.shape[0]
    u_n = np.asarray(u_n, dtype=float)
    dt = h / r
    Y, euler_up, euler_down = [], [None] * n, [None] * n
    for i in range(n):
        y = gamma[i] * u_n
        for j in range(i):
            if up[i, j] != 0:
                if euler_up[j] is None:
                    euler_up[j] = Y[j] + dt * rhs.f(Y[j])
                y = y + up[i, j] * euler_up[j]
            if down[i, j] != 0:
                if euler_down[j] is None:
                    euler_down[j] = Y[j] - dt * rhs.f_tilde(Y[j])
                y = y + down[i, j] * euler_down[j]
        Y.append(y)
    return (Y[-1], Y) if return_stages else Y[-1]


def step_butcher(method, pert, u_n, h, rhs, return_stages=False):
    """One step of ``Y = u_n e + h K F + h Kt (F - Ft)``."""
    if not method.explicit:
        raise UnsupportedClass("step_butcher handles explicit methods only")
    K, Kt = (nm.to_float(X) for X in pair_matrices(method, pert))
    n = K.shape[0]
    u_n = np.asarray(u_n, dtype=float)
    Y, F, Ft = [], [], []
    for i in range(n):
        y = u_n.copy()
        for j in range(i):
            if K[i, j] != 0 or Kt[i, j] != 0:
                y = y + h * ((K[i, j] + Kt[i, j]) * F[j] - Kt[i, j] * Ft[j])
        Y.append(y)
        if i < n - 1:
            F.append(rhs.f(y))
            Ft.append(rhs.f_tilde(y) if np.any(Kt[:, i]) else np.zeros_like(y))
    return (Y[-1], Y) if return_stages else Y[-1]


# ---------------------------------------------------------------------------
# advection demo


def upwind_pair(n, norm="total-variation"):
    """First-order upwind/downwind differences for ``u_t + u_x = 0`` on a periodic grid."""
    dx = 1.0 / n

    def f(u):
        return -(u - np.roll(u, 1)) / dx

    def f_tilde(u):
        return -(np.roll(u, -1) - u) / dx

    return RhsPair(f, f_tilde, h0=dx, norm=norm)


def square_wave(n):
    x = (np.arange(n) + 0.5) / n
    return np.where((x >= 0.25) & (x < 0.5), 1.0, 0.0)


@dataclass
class DemoResult:
    method: str
    perturbed: bool
    r: float
    h: float
    records: list = field(default_factory=list)
    stage_violations: int = 0

    @property
    def monotone(self):
        return not any(rec.flag for rec in self.records)

    def to_csv(self):
        lines = ["step,t,tv,max_norm,flag"]
        for rec in self.records:
            lines.append(f"{rec.step},{rec.t:.12g},{rec.tv:.15g},{rec.max_norm:.15g},{int(rec.flag)}")
        return "\n".join(lines)


def advection_demo(method_name, use_optimal_pert=False, grid_points=200, cfl_multiplier=0.9,
                   steps=200, norm="total-variation"):
    """Square-wave advection with ``h = cfl * r * dx``, checking norms per step and per stage.

    ``r`` is ``R(K)`` or, with ``use_optimal_pert``, the optimal perturbed radius.  When
    ``r = 0`` the step is ``cfl * dx`` and no monotonicity is expected.
    """
    method = catalog.get(method_name).method
    rhs = upwind_pair(grid_points, norm)
    dx = rhs.h0
    if use_optimal_pert:
        report = opt.optimize_lp(method)
        r, pert = report.r_opt, report.perturbation
    else:
        r, pert = radius_am(method), Perturbation.zero(method)
    h = cfl_multiplier * (r if r > 0 else 1.0) * dx
    pcf = perturbed_canonical_form(method, pert, cfl_multiplier * r) if r > 0 else None

    u = square_wave(grid_points)
    result = DemoResult(method.name, use_optimal_pert, r, h)
    prev = rhs.measure(u)
    result.records.append(StepRecord(0, 0.0, u, prev, total_variation(u), max_norm(u)))
    for k in range(1, steps + 1):
        if pcf is not None:
            u_new, stages = step_canonical(pcf, u, h, rhs, return_stages=True)
        else:
            u_new, stages = step_butcher(method, pert, u, h, rhs, return_stages=True)
        for y in stages:
            for fn in (total_variation, max_norm):
                if fn(y) > fn(u) + MONOTONE_SLACK:
                    result.stage_violations += 1
        value = rhs.measure(u_new)
        flag = value > prev + MONOTONE_SLACK
        result.records.append(StepRecord(k, k * h, u_new, value, total_variation(u_new),
                                          max_norm(u_new), flag))
        u, prev = u_new, value
    return result
