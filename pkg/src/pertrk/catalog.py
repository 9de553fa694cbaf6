"""Named Runge-Kutta methods with published reference values.

Reference values are stored as the truncated decimal strings in which they are
usually quoted (``"0.732"``), so the number of digits is part of the data.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from . import numeric as nm
from .errors import UnknownMethod
from .tableau import RKMethod

REFERENCE_KEYS = ("R_K", "R_opt", "bound_max_abs", "bound_linear_order", "property_c")


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    name: str
    method: RKMethod
    reference: dict = field(default_factory=dict)
    source: str = ""
    note: str = ""


def two_stage(alpha, name=None):
    """Two-stage second-order method ``a21 = alpha``, ``b = (1 - 1/(2 alpha), 1/(2 alpha))``.

    ``alpha`` may be a number or a coefficient expression such as ``"(sqrt(7)-1)/2"``.
    """
    if isinstance(alpha, str):
        a = f"({alpha})"
        b = [f"1-1/(2*{a})", f"1/(2*{a})"]
    else:
        a = alpha if isinstance(alpha, float) else Fraction(alpha)
        if a == 0:
            raise ValueError("alpha must be nonzero")
        b = [1 - 1 / (2 * a), 1 / (2 * a)]
    return RKMethod([[0, 0], [a, 0]], b, order=2, name=name or f"two-stage({alpha})")


def _lower(rows):
    """Square strictly lower triangular matrix from its nonempty rows."""
    s = len(rows) + 1
    A = [[0] * s for _ in range(s)]
    for i, row in enumerate(rows, start=1):
        A[i][:len(row)] = row
    return A


def _ref(R_K, R_opt, bmax, blin, prop_c):
    return dict(zip(REFERENCE_KEYS, (R_K, R_opt, bmax, blin, prop_c)))


def _forward_euler():
    return RKMethod([[0]], [1], order=1, name="forward-euler")


def _heun33():
    A = _lower([["1/3"], [0, "2/3"]])
    return RKMethod(A, ["1/4", 0, "3/4"], order=3, name="heun33")


def _ssp33():
    A = _lower([[1], ["1/4", "1/4"]])
    return RKMethod(A, ["1/6", "1/6", "2/3"], order=3, name="ssp33")


def _rk44():
    A = _lower([["1/2"], [0, "1/2"], [0, 0, 1]])
    return RKMethod(A, ["1/6", "1/3", "1/3", "1/6"], order=4, name="rk44")


def _merson45():
    A = _lower([["1/3"], ["1/6", "1/6"], ["1/8", 0, "3/8"], ["1/2", 0, "-3/2", 2]])
    return RKMethod(A, ["1/6", 0, 0, "2/3", "1/6"], order=4, name="merson45")


def _ssp104():
    s = 10
    A = [[0] * s for _ in range(s)]
    for i in range(1, 5):
        for j in range(i):
            A[i][j] = "1/6"
    for i in range(5, s):
        for j in range(5):
            A[i][j] = "1/15"
        for j in range(5, i):
            A[i][j] = "1/6"
    return RKMethod(A, ["1/10"] * s, order=4, name="ssp104")


def _fehlberg45():
    A = _lower([
        ["1/4"],
        ["3/32", "9/32"],
        ["1932/2197", "-7200/2197", "7296/2197"],
        ["439/216", -8, "3680/513", "-845/4104"],
        ["-8/27", 2, "-3544/2565", "1859/4104", "-11/40"],
    ])
    b = ["16/135", 0, "6656/12825", "28561/56430", "-9/50", "2/55"]
    return RKMethod(A, b, order=5, name="fehlberg45")


def _dormand_prince5():
    b = ["35/384", 0, "500/1113", "125/192", "-2187/6784", "11/84"]
    A = _lower([
        ["1/5"],
        ["3/40", "9/40"],
        ["44/45", "-56/15", "32/9"],
        ["19372/6561", "-25360/2187", "64448/6561", "-212/729"],
        ["9017/3168", "-355/33", "46732/5247", "49/176", "-5103/18656"],
        b,
    ])
    return RKMethod(A, b + [0], order=5, name="dormand-prince5")


def _bogacki5():
    b = ["587/8064", 0, "4440339/15491840", "24353/124800", "387/44800", "2152/5985", "7267/94080"]
    A = _lower([
        ["1/6"],
        ["2/27", "4/27"],
        ["183/1372", "-162/343", "1053/1372"],
        ["68/297", "-4/11", "42/143", "1960/3861"],
        ["597/22528", "81/352", "63099/585728", "58653/366080", "4617/20480"],
        ["174197/959244", "-30942/79937", "8152137/19744439", "666106/1039181",
         "-29421/29068", "482048/414219"],
        b,
    ])
    return RKMethod(A, b + [0], order=5, name="bogacki5")


# name -> (builder, reference, source, note)
_ENTRIES = {
    "forward-euler": (_forward_euler, _ref("1", "1", "1", "1", True), "", ""),
    "midpoint": (lambda: two_stage(Fraction(1, 2), "midpoint"),
                 _ref("0", "0.732", "1", "1.414", True), "two-stage family, alpha = 1/2", ""),
    "minimal-trunc-2": (lambda: two_stage(Fraction(2, 3), "minimal-trunc-2"),
                        _ref("0.5", "1", "1.333", "1.414", True),
                        "two-stage family, alpha = 2/3",
                        "alpha = 2/3 is the only family member with R(K) = 0.5 and "
                        "1/max|K| = 4/3 once the weights b are included in K"),
    "ssp22": (lambda: two_stage(1, "ssp22"), _ref("1", "1", "1", "1.414", True),
              "Shu & Osher (1988)", ""),
    "ssp22star": (lambda: two_stage("(sqrt(7)-1)/2", "ssp22star"),
                  _ref("0.784", "1.215", "1.215", "1.414", True),
                  "two-stage family, alpha = (sqrt(7)-1)/2",
                  "irrational coefficients; held in floating point"),
    "heun33": (_heun33, _ref("0", "0.776", "1.333", "1.817", False), "Heun (1900)", ""),
    "ssp33": (_ssp33, _ref("1", "1", "1", "1.817", True), "Shu & Osher (1988)", ""),
    "rk44": (_rk44, _ref("0", "0.685", "1", "2.213", False), "Kutta (1901)", ""),
    "merson45": (_merson45, _ref("0", "0.242", "0.5", "3.309", False), "Merson (1957)",
                 "propagating fourth-order weights"),
    "ssp104": (_ssp104, _ref("6", "6", "6", "8.425", False),
               "ten-stage fourth-order SSP method, from its low-storage Shu-Osher form", ""),
    "fehlberg45": (_fehlberg45, _ref("0", "0.057", "0.125", "3.727", False), "Fehlberg (1969)",
                   "fifth-order weights"),
    "dormand-prince5": (_dormand_prince5, _ref("0", "0.040", "0.086", "4.789", False),
                        "Dormand & Prince (1980)", "fifth-order weights (FSAL row)"),
    "bogacki5": (_bogacki5, _ref("0", "0.313", "0.859", "5.827", False),
                 "Bogacki & Shampine (1996)", "fifth-order weights (FSAL row)"),
}

_cache = {}


def names():
    """Catalog labels in a stable order."""
    return list(_ENTRIES)


def get(name):
    """Look up a catalog entry by label; ``two-stage(<alpha>)`` builds a family member."""
    key = name.strip().lower()
    if key.startswith("two-stage(") and key.endswith(")"):
        alpha = key[len("two-stage("):-1]
        return CatalogEntry(key, two_stage(alpha, key), {}, "two-stage family", "")
    if key not in _ENTRIES:
        raise UnknownMethod(f"unknown method {name!r}; try one of: {', '.join(_ENTRIES)}")
    # entries depend on the numeric policy in force when they are built
    ck = (key, nm.get_policy())
    if ck not in _cache:
        builder, ref, source, note = _ENTRIES[key]
        _cache[ck] = CatalogEntry(key, builder(), dict(ref), source, note)
    return _cache[ck]


def methods():
    return [get(n).method for n in names()]


# Published upper bounds on threshold factors, rows s = 1..10, columns p = 1..s.
THRESHOLD_REFERENCE = {
    1: ["1.00"],
    2: ["2.00", "1.41"],
    3: ["3.00", "2.45", "1.60"],
    4: ["4.00", "3.46", "2.49", "2.00"],
    5: ["5.00", "4.47", "3.20", "2.94", "2.18"],
    6: ["6.00", "5.48", "4.00", "3.65", "3.11", "2.58"],
    7: ["7.00", "6.48", "4.86", "4.45", "3.88", "3.55", "2.76"],
    8: ["8.00", "7.48", "5.77", "5.31", "4.57", "4.32", "3.72", "3.15"],
    9: ["9.00", "8.49", "6.62", "6.22", "5.24", "5.02", "4.52", "4.14", "3.33"],
    10: ["10.00", "9.49", "7.42", "7.09", "5.95", "5.70", "5.25", "4.96", "4.32", "3.73"],
}


def threshold_reference(s, p):
    return float(THRESHOLD_REFERENCE[s][p - 1])
