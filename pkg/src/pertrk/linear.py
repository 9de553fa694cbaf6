"""Bivariate stability functions, linear radii and threshold-factor bounds.

A perturbed explicit method applied to ``u' = lam*u`` (upwind) and
``u' = lam_t*u`` (downwind) gives ``u_{n+1} = psi(h*lam, -h*lam_t) u_n`` with a
bivariate polynomial ``psi(z, zt)``.  Monotonicity for linear problems is
governed by the largest ``r`` for which every coefficient of ``psi`` in the
basis ``(1 + z/r)^(j-l) (1 + zt/r)^l`` is nonnegative.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import lp
from . import numeric as nm
from .errors import DomainError, UnsupportedClass
from .tableau import pair_matrices

log = logging.getLogger(__name__)

LINEAR_TOL = 1e-8


def _zero_like(x):
    return Fraction(0) if nm.is_exact(x) else 0.0


class BivariatePoly:
    """``sum mu[j, k] z^j zt^k`` with coefficients held in a dict."""

    def __init__(self, coeffs=None, degree=None):
        self.coeffs = {}
        for (j, k), c in (coeffs or {}).items():
            if j < 0 or k < 0:
                raise ValueError("exponents must be nonnegative")
            if c != 0:
                self.coeffs[(int(j), int(k))] = c
        top = max((j + k for j, k in self.coeffs), default=0)
        self.degree = top if degree is None else int(degree)
        if top > self.degree:
            raise ValueError(f"total degree {top} exceeds the bound {self.degree}")

    @classmethod
    def constant(cls, c=1):
        return cls({(0, 0): c}, 0)

    @classmethod
    def from_array(cls, C):
        C = np.asarray(C)
        return cls({(j, k): C[j, k] for j in range(C.shape[0]) for k in range(C.shape[1])})

    def to_array(self, exact=None):
        if exact is None:
            exact = all(nm.is_exact(c) for c in self.coeffs.values())
        d = self.degree
        C = nm.zeros((d + 1, d + 1), exact)
        for (j, k), c in self.coeffs.items():
            C[j, k] = c if exact else float(c)
        return C

    def __getitem__(self, jk):
        return self.coeffs.get(tuple(jk), 0)

    def __add__(self, other):
        if not isinstance(other, BivariatePoly):
            other = BivariatePoly.constant(other)
        out = dict(self.coeffs)
        for jk, c in other.coeffs.items():
            out[jk] = out.get(jk, 0) + c
        return BivariatePoly(out, max(self.degree, other.degree))

    __radd__ = __add__

    def __neg__(self):
        return BivariatePoly({jk: -c for jk, c in self.coeffs.items()}, self.degree)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, BivariatePoly):
            return BivariatePoly({jk: c * other for jk, c in self.coeffs.items()}, self.degree)
        out = {}
        for (j1, k1), c1 in self.coeffs.items():
            for (j2, k2), c2 in other.coeffs.items():
                key = (j1 + j2, k1 + k2)
                out[key] = out.get(key, 0) + c1 * c2
        return BivariatePoly(out, self.degree + other.degree)

    __rmul__ = __mul__

    def __call__(self, z, zt):
        return sum(c * z ** j * zt ** k for (j, k), c in self.coeffs.items())

    def antidiagonal(self):
        """Coefficients (ascending) of the univariate ``psi(z, -z)``."""
        out = [0] * (self.degree + 1)
        for (j, k), c in self.coeffs.items():
            out[j + k] += c * (-1) ** k
        return out

    def diagonal(self):
        """Coefficients (ascending) of the univariate ``psi(z, z)``."""
        out = [0] * (self.degree + 1)
        for (j, k), c in self.coeffs.items():
            out[j + k] += c
        return out

    def allclose(self, other, tol=1e-12):
        keys = set(self.coeffs) | set(other.coeffs)
        return all(abs(float(self[jk]) - float(other[jk])) <= tol for jk in keys)

    def __repr__(self):
        terms = " + ".join(f"{nm.fmt(c)}*z^{j}*zt^{k}" for (j, k), c in sorted(self.coeffs.items()))
        return f"BivariatePoly({terms or '0'})"


@dataclass(frozen=True)
class ShiftedExpansion:
    """``psi = sum gamma[j, l] (1 + z/r)^(j-l) (1 + zt/r)^l``, keyed by ``(j, l)``."""

    r: object
    gamma: dict

    def term(self, u_power, v_power):
        """Coefficient on ``(1 + z/r)^u_power (1 + zt/r)^v_power``."""
        return self.gamma.get((u_power + v_power, v_power), 0)

    def min_coefficient(self):
        return min((float(c) for c in self.gamma.values()), default=0.0)

    def to_poly(self):
        r = self.r
        out = {}
        for (j, l), g in self.gamma.items():
            for a in range(j - l + 1):
                for c in range(l + 1):
                    val = g * math.comb(j - l, a) * math.comb(l, c) / r ** (a + c)
                    out[(a, c)] = out.get((a, c), 0) + val
        deg = max((j for j, _ in self.gamma), default=0)
        return BivariatePoly(out, deg)


# ---------------------------------------------------------------------------
# stability function


def _shift(W, axis):
    """Multiply a stack of coefficient grids by ``z`` (axis 1) or ``zt`` (axis 2)."""
    out = W * 0
    if axis == 1:
        out[:, 1:, :] = W[:, :-1, :]
    else:
        out[:, :, 1:] = W[:, :, :-1]
    return out


def stability_function(method, pert=None):
    """Bivariate stability polynomial of an explicit pair.

    ``psi = 1 + (z b + (z+zt) bt)^T sum_{k<s} (zA + (z+zt) At)^k e``
    """
    if not method.explicit:
        raise UnsupportedClass("stability_function needs an explicit method")
    K, Kt = pair_matrices(method, pert)
    exact = nm.exact_array(K)
    s = method.s
    A, At = K[:s, :s], Kt[:s, :s]
    b, bt = K[s, :s], Kt[s, :s]
    d = s
    W = nm.zeros((s, d + 1, d + 1), exact)
    W[:, 0, 0] = 1
    total = W.copy()
    for _ in range(s - 1):
        Wz, Wzt = _shift(W, 1), _shift(W, 2)
        W = np.tensordot(A, Wz, axes=1) + np.tensordot(At, Wz + Wzt, axes=1)
        total = total + W
    Sz, Szt = _shift(total, 1), _shift(total, 2)
    psi = np.tensordot(b, Sz, axes=1) + np.tensordot(bt, Sz + Szt, axes=1)
    psi[0, 0] = psi[0, 0] + 1
    return BivariatePoly.from_array(psi)


def stability_polynomial(method):
    """Ascending coefficients of the classical stability polynomial ``phi_K``."""
    return stability_function(method).antidiagonal()


# ---------------------------------------------------------------------------
# change of basis


def _r_polys(psi):
    """``gamma[(a+c, c)]`` as ascending polynomials in ``r``.

    Substituting ``z = r(u-1)``, ``zt = r(v-1)`` turns ``mu[j, k] z^j zt^k`` into
    ``mu[j, k] r^(j+k) sum C(j,a) C(k,c) (-1)^(j-a+k-c) u^a v^c``.
    """
    d = psi.degree
    polys = {}
    for (j, k), mu in psi.coeffs.items():
        for a in range(j + 1):
            for c in range(k + 1):
                key = (a + c, c)
                p = polys.setdefault(key, [0] * (d + 1))
                p[j + k] += mu * math.comb(j, a) * math.comb(k, c) * (-1) ** (j - a + k - c)
    return polys


def shifted_expansion(psi, r):
    """Coefficients of ``psi`` in the basis ``(1 + z/r)^(j-l) (1 + zt/r)^l``."""
    if r <= 0:
        raise ValueError("r must be positive")
    gamma = {}
    for key, p in _r_polys(psi).items():
        gamma[key] = sum(c * r ** n for n, c in enumerate(p))
    return ShiftedExpansion(r, gamma)


def _normalized_ok(polys, r, slack):
    # gamma[(j, l)] / r^j keeps the test meaningful as r -> 0
    for (j, _), p in polys.items():
        val = sum(float(c) * r ** (n - j) for n, c in enumerate(p) if n >= j)
        if val < -slack:
            return False
    return True


def _positive_near_zero(polys):
    """Every ``gamma(r)`` has a positive leading term (or vanishes) as ``r -> 0``."""
    for p in polys.values():
        scale = max((abs(float(c)) for c in p), default=0.0)
        for c in p:
            if abs(float(c)) > nm.EPS_ZERO * max(1.0, scale):
                if c < 0:
                    return False
                break
    return True


def linear_radius(method, pert=None, tol=LINEAR_TOL, r_max=1e6):
    """``R_Lin``: largest ``r`` with every shifted coefficient of ``psi`` nonnegative."""
    psi = stability_function(method, pert)
    polys = _r_polys(psi)
    if not _positive_near_zero(polys):
        return 0.0

    def ok(r):
        return r == 0 or _normalized_ok(polys, r, nm.EPS_ZERO)

    lo, hi = 0.0, float(max(method.s, 1))
    while ok(hi):
        if hi >= r_max:
            return math.inf
        lo, hi = hi, 2 * hi
    r, _ = nm.bisect_sup(ok, hi, tol, lo=lo)
    return r


# ---------------------------------------------------------------------------
# threshold factors


def gamma_index(s):
    """Variable ordering ``(j, l)`` for ``0 <= l <= j <= s``."""
    return [(j, l) for j in range(s + 1) for l in range(j + 1)]


def taylor_constraint_coeffs(s, r, i):
    """Row vector of ``C_i(r, .)`` over :func:`gamma_index` variables.

    ``psi(z, -z) = sum_i C_i z^i`` where ``C_i`` is linear in ``gamma``.
    """
    if not 0 <= i <= s:
        raise DomainError(f"need 0 <= i <= s, got i={i}, s={s}")
    if r <= 0:
        raise ValueError("r must be positive")
    row = []
    for j, l in gamma_index(s):
        total = 0
        if j >= i:
            for m in range(max(0, i - l), min(i, j - l) + 1):
                total += math.comb(j - l, m) * math.comb(l, i - m) * (-1) ** (i - m)
        row.append(total / r ** i)
    return np.array(row, dtype=object if nm.is_exact(r) else float)


def threshold_problem(s, p, r):
    """LP feasibility ``gamma >= 0``, ``i! C_i(r, gamma) = 1`` for ``i <= p``."""
    A = np.array([math.factorial(i) * taylor_constraint_coeffs(s, float(r), i) for i in range(p + 1)],
                 dtype=float)
    return lp.LPFeasibility(A.shape[1], eq_A=A, eq_b=np.ones(p + 1))


def threshold_certificate(s, p, r):
    """Feasible ``gamma`` as a :class:`ShiftedExpansion`, or ``None``."""
    res = lp.solve_feasibility(threshold_problem(s, p, r))
    if res.status == lp.NUMERICAL_FAILURE:
        log.info("threshold LP undecided at s=%d p=%d r=%.12g", s, p, r)
        return None
    if not res.feasible:
        return None
    return ShiftedExpansion(float(r), dict(zip(gamma_index(s), res.x)))


def threshold_bound(s, p, tol=LINEAR_TOL):
    """Upper bound ``R~_{s,p}`` on threshold factors of ``s``-stage, linear-order ``p`` pairs."""
    if not 1 <= p <= s:
        raise DomainError(f"need 1 <= p <= s, got s={s}, p={p}")

    def ok(r):
        return r == 0 or threshold_certificate(s, p, r) is not None

    r, _ = nm.bisect_sup(ok, float(s), tol)
    return r


def optimal_second_order_poly(s):
    """The optimal order-two polynomial of degree ``s`` with radius ``sqrt(s(s-1))``."""
    if s < 2:
        raise DomainError("need s >= 2")
    r = math.sqrt(s * (s - 1))
    w = 1.0 / (2 * (s + r))
    return ShiftedExpansion(r, {(s, 0): 1 - w, (s, s): w}).to_poly()
