"""Canonical Shu-Osher forms and radii of absolute monotonicity.

For a method ``K`` and a parameter ``r >= 0`` the canonical form is::

    v_r = (I + rK)^-1 e,            alpha_r = r (I + rK)^-1 K

and for a perturbed pair ``(K, Kt)``::

    M = I + rK + 2r Kt
    gamma_r = M^-1 e,   alpha_up = r M^-1 (K + Kt),   alpha_down = r M^-1 Kt

A (perturbed) method is absolutely monotonic at ``r`` when these exist and are
componentwise nonnegative; the radius is the supremum of such ``r``.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import numeric as nm
from .errors import (IterationCap, PreconditionViolation, SingularResolvent,
                     ZeroRadius)
from .tableau import (DIRK, EXPLICIT, Perturbation, RKMethod, embed,
                      infer_class, pair_matrices)

RADIUS_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    r: object
    v: np.ndarray
    alpha: np.ndarray

    def is_nonnegative(self):
        return nm.nonneg(self.v) and nm.nonneg(self.alpha)


@dataclass(frozen=True, eq=False)
class PerturbedCanonicalForm:
    r: object
    gamma: np.ndarray
    alpha_up: np.ndarray
    alpha_down: np.ndarray

    @property
    def size(self):
        return self.gamma.shape[0]

    @property
    def exact(self):
        return all(nm.exact_array(X) for X in (self.gamma, self.alpha_up, self.alpha_down))

    def is_nonnegative(self, slack=nm.NONNEG_SLACK):
        return (nm.nonneg(self.gamma, slack) and nm.nonneg(self.alpha_up, slack)
                and nm.nonneg(self.alpha_down, slack))

    def gamma_residual(self):
        """``max |gamma - (I - alpha_up - alpha_down) e|``."""
        e = np.ones(self.size, dtype=self.gamma.dtype)
        res = self.gamma - (e - (self.alpha_up + self.alpha_down) @ e)
        return max(abs(float(x)) for x in res)

    def as_float(self):
        return PerturbedCanonicalForm(float(self.r), nm.to_float(self.gamma),
                                      nm.to_float(self.alpha_up), nm.to_float(self.alpha_down))


def _ones(n, exact):
    return np.array([Fraction(1)] * n, dtype=object) if exact else np.ones(n)


def canonical_form(method, r):
    """Canonical Shu-Osher coefficients ``(v_r, alpha_r)`` of ``method`` at ``r``."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    K = embed(method)
    return _canonical(K, r)


def _canonical(K, r):
    exact = nm.exact_array(K)
    r = nm.scalar_like(r, K)
    if not nm.is_exact(r):
        K = nm.to_float(K)
        exact = False
    n = K.shape[0]
    M = nm.identity(n, exact) + r * K
    v = nm.solve(M, _ones(n, exact))
    alpha = r * nm.solve(M, K)
    return CanonicalForm(r, v, alpha)


def perturbed_canonical_form(method, pert, r):
    """Canonical Shu-Osher-like coefficients of the pair ``(method, pert)`` at ``r``."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    K, Kt = pair_matrices(method, pert)
    return _perturbed(K, Kt, r)


def _perturbed(K, Kt, r):
    exact = nm.exact_array(K)
    r = nm.scalar_like(r, K)
    if not nm.is_exact(r):
        K, Kt = nm.to_float(K), nm.to_float(Kt)
        exact = False
    n = K.shape[0]
    M = nm.identity(n, exact) + r * K + 2 * r * Kt
    gamma = nm.solve(M, _ones(n, exact))
    X = nm.solve(M, np.concatenate([K + Kt, Kt], axis=1))
    return PerturbedCanonicalForm(r, gamma, r * X[:, :n], r * X[:, n:])


def _upper_bracket(method):
    if method.explicit:
        m = max(abs(float(x)) for x in embed(method).ravel())
        return math.inf if m == 0 else 1.0 / m
    return 10.0 * method.s


def _am_at(K, Kt, r):
    try:
        if Kt is None:
            return _canonical(K, r).is_nonnegative()
        return _perturbed(K, Kt, r).is_nonnegative()
    except SingularResolvent:
        return False


def radius_am(method, tol=RADIUS_TOL):
    """Radius of absolute monotonicity ``R(K)`` by bisection."""
    K = nm.to_float(embed(method))
    hi = _upper_bracket(method)
    if math.isinf(hi):
        return math.inf
    # near r = 0 the negative entries are O(r^2) and hide below the slack;
    # the incidence criterion decides R > 0 exactly
    if not has_positive_radius(method, Perturbation.zero(method)):
        return 0.0
    r, _ = nm.bisect_sup(lambda x: _am_at(K, None, x), hi, tol)
    return r


def radius_am_perturbed(method, pert, tol=RADIUS_TOL):
    """Radius of absolute monotonicity ``R(K, Kt)`` of a perturbed pair."""
    K, Kt = (nm.to_float(X) for X in pair_matrices(method, pert))
    hi = _upper_bracket(method)
    if math.isinf(hi):
        return math.inf
    if not has_positive_radius(method, pert):
        return 0.0
    if not np.any(Kt):
        r, _ = nm.bisect_sup(lambda x: _am_at(K, None, x), hi, tol)
    else:
        r, _ = nm.bisect_sup(lambda x: _am_at(K, Kt, x), hi, tol)
    return r


def is_zero_well_defined(pcf):
    """True iff ``I - 2 alpha_down`` is regular."""
    D = pcf.alpha_down
    exact = nm.exact_array(D)
    d = nm.det(nm.identity(D.shape[0], exact) - 2 * D)
    return d != 0 if exact else abs(d) > nm.EPS_ZERO


def verify_perturbation_of(pcf, cf, tol=1e-10):
    """Check ``(I - 2 a_down) alpha_r = a_up - a_down`` and ``(I - 2 a_down) v_r = gamma``."""
    if pcf.size != cf.v.shape[0]:
        return False
    up, down, gamma, alpha, v = nm.common_mode(pcf.alpha_up, pcf.alpha_down, pcf.gamma,
                                               cf.alpha, cf.v)
    exact = nm.exact_array(up)
    L = nm.identity(pcf.size, exact) - 2 * down
    r1 = L @ alpha - (up - down)
    r2 = L @ v - gamma
    if exact:
        return all(x == 0 for x in r1.ravel()) and all(x == 0 for x in r2)
    return bool(np.max(np.abs(r1)) <= tol and np.max(np.abs(r2)) <= tol)


def shift_to_e1(pcf):
    """Move ``gamma`` into the first column so that ``gamma = e_1``.

    Half of each ``gamma_i`` (``i >= 2``) is added to both ``alpha_up[i, 0]`` and
    ``alpha_down[i, 0]``.  Requires a first stage equal to ``u_n``.
    """
    up, down, gamma = pcf.alpha_up, pcf.alpha_down, pcf.gamma
    first_row = list(up[0]) + list(down[0])
    if not all(nm.is_zero(x) for x in first_row) or not nm.is_zero(gamma[0] - 1):
        raise PreconditionViolation("first stage is not u_n; the first-column shift needs a zero first row")
    up, down, gamma = up.copy(), down.copy(), gamma.copy()
    half = gamma[1:] / 2
    up[1:, 0] = up[1:, 0] + half
    down[1:, 0] = down[1:, 0] + half
    gamma[1:] = gamma[1:] * 0
    gamma[0] = gamma[0] * 0 + 1
    return PerturbedCanonicalForm(pcf.r, gamma, up, down)


def _clean(M):
    if nm.exact_array(M):
        return M
    M = M.copy()
    M[np.abs(M) < nm.EPS_ZERO] = 0.0
    return M


def butcher_from_canonical(pcf, order=1, name=""):
    """Recover ``(RKMethod, Perturbation)`` from a perturbed canonical form."""
    if pcf.r == 0:
        raise ZeroRadius("Butcher coefficients cannot be recovered at r = 0")
    if not is_zero_well_defined(pcf):
        raise SingularResolvent("perturbation is not zero-well-defined")
    up, down = nm.common_mode(pcf.alpha_up, pcf.alpha_down)
    exact = nm.exact_array(up)
    r = nm.scalar_like(pcf.r, up) if exact else float(pcf.r)
    n = pcf.size
    L = nm.identity(n, exact) - up - down
    X = nm.solve(L, np.concatenate([up - down, down], axis=1))
    K = _clean(X[:, :n] / r)
    Kt = _clean(X[:, n:] / r)
    s = n - 1
    if any(not nm.is_zero(x) for x in K[:, s]) or any(not nm.is_zero(x) for x in Kt[:, s]):
        raise PreconditionViolation("recovered coefficients have a nonzero last column")
    cls = _wider(infer_class(K[:s, :s]), infer_class(Kt[:s, :s]))
    method = RKMethod(K[:s, :s], K[s, :s], cls, order, name)
    pert = Perturbation(Kt[:s, :s], Kt[s, :s], cls)
    return method, pert


def _wider(c1, c2):
    order = [EXPLICIT, DIRK]
    for c in (c1, c2):
        if c not in order:
            return c
    return order[max(order.index(c1), order.index(c2))]


# ---------------------------------------------------------------------------
# positive-radius feasibility


def _incidence(M):
    if nm.exact_array(M):
        return np.array([[x != 0 for x in row] for row in M], dtype=bool)
    return np.abs(nm.to_float(M)) > nm.EPS_ZERO


def has_positive_radius(method, pert):
    """Sign and incidence conditions equivalent to ``R(K, Kt) > 0``."""
    K, Kt = pair_matrices(method, pert)
    S = K + Kt
    if not (nm.nonneg(S, nm.EPS_ZERO) and nm.nonneg(Kt, nm.EPS_ZERO)):
        return False
    B = K + 2 * Kt
    ok1 = _incidence(B @ S) <= _incidence(S)
    ok2 = _incidence(B @ Kt) <= _incidence(Kt)
    return bool(np.all(ok1) and np.all(ok2))


def _allowed_pattern(s, structural_class):
    P = np.zeros((s + 1, s + 1), dtype=bool)
    for i in range(s + 1):
        for j in range(s):
            if i == s or structural_class not in (EXPLICIT, DIRK):
                P[i, j] = True
            elif structural_class == EXPLICIT:
                P[i, j] = j < i
            else:
                P[i, j] = j <= i
    return P


def construct_positive_perturbation(method, minimal=True, max_c=1e12):
    """A perturbation of the same class with ``has_positive_radius`` true.

    Every allowed entry of ``Kt`` is set to one constant ``c``, which is grown
    until the sign and incidence conditions hold.  With ``minimal`` the zero
    perturbation is returned when it already works.
    """
    if minimal and has_positive_radius(method, Perturbation.zero(method)):
        return Perturbation.zero(method)
    K = embed(method)
    exact = method.exact
    P = _allowed_pattern(method.s, method.structural_class)
    c = max(0.0, max(-float(x) for x in K.ravel())) + 1.0
    c = Fraction(math.ceil(c)) if exact else c
    while c <= max_c:
        Kt = nm.zeros(K.shape, exact)
        Kt[P] = c
        pert = Perturbation.from_embedded(Kt, method.structural_class)
        if has_positive_radius(method, pert):
            return pert
        c = 2 * c
    raise IterationCap(f"no positive-radius perturbation found with entries up to {max_c:g}")
