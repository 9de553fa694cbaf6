"""Scalar policy, coefficient parsing and small dense linear algebra.

Coefficients are either exact rationals (:class:`fractions.Fraction`, held in
``dtype=object`` arrays) or doubles (``float64`` arrays).  Which one a method
uses is decided once, when it is built, by the global numeric policy:

``auto``      exact when every coefficient is rational, float otherwise
``rational``  exact only; irrational input is an error
``float``     everything is converted to double

The policy is read from the ``PERTRK_NUMERIC`` environment variable and can be
changed at runtime with :func:`set_policy`.
"""

import ast
import math
import os
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import SingularResolvent

EPS_ZERO = 1e-12
NONNEG_SLACK = 1e-11

POLICIES = ("auto", "rational", "float")
_policy = os.environ.get("PERTRK_NUMERIC", "auto").strip().lower() or "auto"
if _policy not in POLICIES:
    raise ValueError(f"PERTRK_NUMERIC must be one of {POLICIES}, got {_policy!r}")


def get_policy():
    return _policy


def set_policy(policy):
    """Set the global numeric policy and return the previous one."""
    global _policy
    if policy not in POLICIES:
        raise ValueError(f"unknown numeric policy {policy!r}")
    old, _policy = _policy, policy
    return old


# ---------------------------------------------------------------------------
# scalar parsing

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
}


def _sqrt(x):
    if isinstance(x, Fraction) and x >= 0:
        n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
        if n * n == x.numerator and d * d == x.denominator:
            return Fraction(n, d)
    return math.sqrt(float(x))


def _eval_expr(text):
    text = text.strip()

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and type(node.value) in (int, float):
            # decimal literals are read from their source text to stay exact
            return Fraction(ast.get_source_segment(text, node))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id == "sqrt" and len(node.args) == 1 and not node.keywords):
            return _sqrt(ev(node.args[0]))
        raise ValueError(f"unsupported coefficient expression {text!r}")

    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError:
        raise ValueError(f"unparseable coefficient {text!r}") from None
    return ev(tree)


def parse_scalar(value):
    """Parse one coefficient into a Fraction (exact) or a float.

    Accepts ints, floats, Fractions and strings such as ``"3"``, ``"0.25"``,
    ``"-1/6"``, ``"sqrt(7)"`` or ``"(1+sqrt(7))/3"``.  Decimal strings are read
    exactly; a JSON/Python float stays a float.
    """
    if isinstance(value, bool):
        raise ValueError("booleans are not coefficients")
    if isinstance(value, np.integer):
        return Fraction(int(value))
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError:
            pass
        result = _eval_expr(value)
        if isinstance(result, Fraction):
            return result
        return float(result)
    raise TypeError(f"cannot interpret {value!r} as a coefficient")


def is_exact(x):
    return isinstance(x, Rational)


# ---------------------------------------------------------------------------
# arrays


def exact_array(M):
    return isinstance(M, np.ndarray) and M.dtype == object


def make_array(values, exact=None):
    """Build an array from (nested) coefficient values under the current policy.

    ``exact`` overrides the policy decision; ``None`` means decide from the data.
    """
    raw = np.array(values, dtype=object)
    flat = [parse_scalar(v) for v in raw.ravel()]
    all_exact = all(is_exact(v) for v in flat)
    if exact is None:
        if _policy == "float":
            exact = False
        elif _policy == "rational":
            if not all_exact:
                raise ValueError("irrational coefficient under the 'rational' numeric policy")
            exact = True
        else:
            exact = all_exact
    if exact:
        if not all_exact:
            raise ValueError("irrational coefficient cannot be held exactly")
        out = np.empty(len(flat), dtype=object)
        out[:] = flat
        return out.reshape(raw.shape)
    return np.array([float(v) for v in flat], dtype=float).reshape(raw.shape)


def to_float(M):
    return np.asarray(M, dtype=float)


def to_exact(M):
    M = np.asarray(M)
    out = np.empty(M.shape, dtype=object)
    out.ravel()[:] = [v if isinstance(v, Fraction) else _as_fraction(v) for v in M.ravel()]
    return out


def _as_fraction(v):
    # numpy integers would leak into numerator/denominator and overflow later
    if isinstance(v, np.integer):
        return Fraction(int(v))
    if isinstance(v, np.floating):
        return Fraction(float(v))
    return Fraction(v)


def common_mode(*arrays):
    """Return the arrays in one representation: exact only if all are exact."""
    if all(exact_array(M) for M in arrays):
        return arrays
    return tuple(to_float(M) for M in arrays)


def scalar_like(r, M):
    """Coerce ``r`` to the representation of ``M`` (Fraction for exact arrays)."""
    if exact_array(M) and is_exact(r):
        return Fraction(r)
    return float(r)


def identity(n, exact):
    if exact:
        I = np.empty((n, n), dtype=object)
        I[...] = Fraction(0)
        for i in range(n):
            I[i, i] = Fraction(1)
        return I
    return np.eye(n)


def zeros(shape, exact):
    if exact:
        Z = np.empty(shape, dtype=object)
        Z[...] = Fraction(0)
        return Z
    return np.zeros(shape)


def _exact_solve(M, B):
    n = M.shape[0]
    vec = B.ndim == 1
    rhs = B.reshape(n, -1)
    aug = np.empty((n, n + rhs.shape[1]), dtype=object)
    aug[:, :n] = M
    aug[:, n:] = rhs
    for col in range(n):
        piv = next((i for i in range(col, n) if aug[i, col] != 0), None)
        if piv is None:
            raise SingularResolvent("matrix is singular")
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        p = aug[col, col]
        aug[col] = aug[col] / p
        for i in range(n):
            if i != col and aug[i, col] != 0:
                aug[i] = aug[i] - aug[i, col] * aug[col]
    X = aug[:, n:]
    return X.reshape(B.shape) if vec else X


def solve(M, B):
    """Solve ``M X = B``; exact when both operands are exact."""
    M, B = common_mode(np.asarray(M), np.asarray(B))
    if exact_array(M):
        return _exact_solve(M, B)
    try:
        X = np.linalg.solve(M, B)
    except np.linalg.LinAlgError as exc:
        raise SingularResolvent(str(exc)) from None
    if not np.all(np.isfinite(X)) or np.linalg.cond(M) > 1e14:
        raise SingularResolvent("matrix is numerically singular")
    return X


def inv(M):
    M = np.asarray(M)
    return solve(M, identity(M.shape[0], exact_array(M)))


def det(M):
    """Determinant; exact for exact input, partial-pivot elimination otherwise."""
    M = np.asarray(M)
    n = M.shape[0]
    if exact_array(M):
        a = M.copy()
        d = Fraction(1)
        for col in range(n):
            piv = next((i for i in range(col, n) if a[i, col] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != col:
                a[[col, piv]] = a[[piv, col]]
                d = -d
            d *= a[col, col]
            for i in range(col + 1, n):
                if a[i, col] != 0:
                    a[i] = a[i] - (a[i, col] / a[col, col]) * a[col]
        return d
    return float(np.linalg.det(M))


def is_zero(x, exact=None):
    if exact is None:
        exact = is_exact(x)
    return x == 0 if exact else abs(float(x)) <= EPS_ZERO


def nonneg(M, slack=NONNEG_SLACK):
    """Componentwise ``M >= 0``; exact arrays are compared without slack."""
    M = np.asarray(M)
    if M.size == 0:
        return True
    if exact_array(M):
        return all(v >= 0 for v in M.ravel())
    return bool(np.all(M >= -slack))


def fmt(x):
    """Render a scalar for the method file format."""
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return float(x)


def bisect_sup(feasible, hi, tol, lo=0.0):
    """Largest verified-feasible probe in ``[lo, hi]`` for an interval-shaped set.

    ``feasible(lo)`` is assumed true.  ``hi`` itself is tried first so an
    attained upper bound is returned exactly.  Returns ``(r, probes)``.
    """
    probes = 1
    if feasible(hi):
        return hi, probes
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # no representable point left between lo and hi
            break
        probes += 1
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo, probes
