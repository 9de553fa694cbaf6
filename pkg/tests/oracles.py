"""Independent reference computations used by the tests.

Nothing here imports the package's numerical code; each helper recomputes a
quantity from first principles (rooted trees, sympy, scipy).
"""

import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np
import sympy as sp


# ---------------------------------------------------------------------------
# rooted trees and order conditions


@lru_cache(maxsize=None)
def trees(n):
    """All rooted trees with ``n`` vertices as sorted tuples of children."""
    if n == 1:
        return ((),)
    out = set()
    for parts in _partitions(n - 1):
        pools = [trees(k) for k in parts]
        for combo in _product_sorted(pools, parts):
            out.add(tuple(sorted(combo)))
    return tuple(sorted(out))


def _partitions(n, maxpart=None):
    maxpart = maxpart or n
    if n == 0:
        yield ()
        return
    for k in range(min(n, maxpart), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def _product_sorted(pools, parts):
    # children of equal size are chosen as multisets to avoid duplicates
    groups = {}
    for k in parts:
        groups[k] = groups.get(k, 0) + 1
    chosen = [[]]
    for k, cnt in groups.items():
        new = []
        for combo in combinations_with_replacement(trees(k), cnt):
            for c in chosen:
                new.append(c + list(combo))
        chosen = new
    return [tuple(c) for c in chosen]


def tree_order(t):
    return 1 + sum(tree_order(c) for c in t)


def tree_density(t):
    return tree_order(t) * math.prod(tree_density(c) for c in t)


def _stage_weights(A, t):
    s = A.shape[0]
    w = np.array([Fraction(1)] * s, dtype=object)
    for c in t:
        w = w * A.dot(_stage_weights(A, c))
    return w


def order_defects(A, b, p):
    """``b . Phi(t) - 1/gamma(t)`` for every tree up to order ``p`` (exact)."""
    A = np.array([[Fraction(x) for x in row] for row in A], dtype=object)
    b = np.array([Fraction(x) for x in b], dtype=object)
    out = {}
    for n in range(1, p + 1):
        for t in trees(n):
            out[t] = b.dot(_stage_weights(A, t)) - Fraction(1, tree_density(t))
    return out


# ---------------------------------------------------------------------------
# stability polynomials via sympy


def stability_poly_sympy(A, b):
    """Ascending coefficients of ``1 + z b^T (I - zA)^-1 e`` (exact)."""
    z = sp.symbols("z")
    s = len(b)
    Am = sp.Matrix(s, s, lambda i, j: sp.Rational(str(A[i][j])))
    bm = sp.Matrix(1, s, lambda i, j: sp.Rational(str(b[j])))
    e = sp.ones(s, 1)
    expr = 1 + z * (bm * (sp.eye(s) - z * Am).inv() * e)[0, 0]
    poly = sp.Poly(sp.series(sp.simplify(expr), z, 0, s + 1).removeO(), z)
    coeffs = poly.all_coeffs()[::-1]
    return [Fraction(int(sp.fraction(c)[0]), int(sp.fraction(c)[1])) for c in coeffs]


def bivariate_sympy(A, b, At, bt):
    """Coefficient dict of ``1 + (z b + (z+zt) bt)^T (I - zA - (z+zt) At)^-1 e``."""
    z, zt = sp.symbols("z zt")
    s = len(b)
    M = sp.Matrix(s, s, lambda i, j: z * sp.nsimplify(A[i][j]) + (z + zt) * sp.nsimplify(At[i][j]))
    row = sp.Matrix(1, s, lambda i, j: z * sp.nsimplify(b[j]) + (z + zt) * sp.nsimplify(bt[j]))
    e = sp.ones(s, 1)
    # explicit: the resolvent is a finite Neumann sum
    S, P = sp.eye(s), sp.eye(s)
    for _ in range(s - 1):
        P = P * M
        S = S + P
    expr = sp.expand(1 + (row * S * e)[0, 0])
    poly = sp.Poly(expr, z, zt)
    return {k: v for k, v in zip(poly.monoms(), poly.coeffs())}


# ---------------------------------------------------------------------------
# canonical-form oracles


def canonical_numpy(K, r):
    n = K.shape[0]
    M = np.eye(n) + r * K
    return np.linalg.solve(M, np.ones(n)), r * np.linalg.solve(M, K)


def brute_radius(K, hi, n=4000, slack=1e-11):
    """Largest grid point ``r`` in ``[0, hi]`` with the canonical form nonnegative on the prefix."""
    best = 0.0
    for r in np.linspace(0, hi, n + 1)[1:]:
        v, a = canonical_numpy(K, r)
        if np.all(v >= -slack) and np.all(a >= -slack):
            best = r
        else:
            break
    return best


def real_positive_root(coeffs):
    """The unique real positive root of a polynomial (descending coefficients)."""
    roots = [x.real for x in np.roots(coeffs) if abs(x.imag) < 1e-10 and x.real > 0]
    assert len(roots) == 1, roots
    return float(sp.nsolve(sp.Poly(coeffs, sp.Symbol("x")).as_expr(), roots[0]))
