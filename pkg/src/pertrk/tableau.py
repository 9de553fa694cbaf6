"""Runge-Kutta methods, downwind perturbations and the method file format."""

import json
from dataclasses import dataclass

import numpy as np

from . import numeric as nm
from .errors import ShapeMismatch, StructureViolation

EXPLICIT = "explicit"
DIRK = "diagonally-implicit"
IMPLICIT = "fully-implicit"
CLASSES = (EXPLICIT, DIRK, IMPLICIT)


def infer_class(A):
    """Tightest structural class that ``A`` fits into."""
    A = np.asarray(A)
    s = A.shape[0]
    if all(nm.is_zero(A[i, j]) for i in range(s) for j in range(i, s)):
        return EXPLICIT
    if all(nm.is_zero(A[i, j]) for i in range(s) for j in range(i + 1, s)):
        return DIRK
    return IMPLICIT


def _check_structure(A, structural_class, what="A"):
    if structural_class not in CLASSES:
        raise ValueError(f"unknown structural class {structural_class!r}")
    s = A.shape[0]
    first = {EXPLICIT: 0, DIRK: 1, IMPLICIT: None}[structural_class]
    if first is None:
        return
    for i in range(s):
        for j in range(i + first, s):
            if not nm.is_zero(A[i, j]):
                raise StructureViolation(
                    f"{what}[{i}][{j}] = {A[i, j]} is not allowed in a {structural_class} method")


def _coefficients(A, b):
    A_raw = np.array(A, dtype=object)
    b_raw = np.array(b, dtype=object)
    if A_raw.ndim != 2 or A_raw.shape[0] != A_raw.shape[1]:
        raise ShapeMismatch(f"A must be square, got shape {A_raw.shape}")
    if b_raw.ndim != 1 or b_raw.shape[0] != A_raw.shape[0]:
        raise ShapeMismatch(f"b must have length {A_raw.shape[0]}, got shape {b_raw.shape}")
    s = A_raw.shape[0]
    if s < 1:
        raise ShapeMismatch("a method needs at least one stage")
    both = nm.make_array(list(A_raw.ravel()) + list(b_raw))
    A_arr, b_arr = both[: s * s].reshape(s, s), both[s * s:]
    A_arr.setflags(write=False)
    b_arr.setflags(write=False)
    return A_arr, b_arr


def _embed(A, b):
    s = A.shape[0]
    K = nm.zeros((s + 1, s + 1), nm.exact_array(A))
    K[:s, :s] = A
    K[s, :s] = b
    return K


def _same(X, Y):
    return (X.shape == Y.shape and nm.exact_array(X) == nm.exact_array(Y)
            and all(x == y for x, y in zip(X.ravel(), Y.ravel())))


@dataclass(frozen=True, eq=False)
class RKMethod:
    """Butcher tableau ``(A, b)``.

    Coefficients may be given as numbers or strings (``"1/6"``, ``"sqrt(7)"``);
    they are stored exactly when the numeric policy allows it.  The structural
    class is inferred when not given, and checked when it is.
    """

    A: np.ndarray
    b: np.ndarray
    structural_class: str = None
    order: int = 1
    name: str = ""

    def __post_init__(self):
        A, b = _coefficients(self.A, self.b)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if self.structural_class is None:
            object.__setattr__(self, "structural_class", infer_class(A))
        if int(self.order) < 1:
            raise ValueError("declared order must be a positive integer")
        object.__setattr__(self, "order", int(self.order))
        validate(self)

    @property
    def s(self):
        return self.A.shape[0]

    @property
    def exact(self):
        return nm.exact_array(self.A)

    @property
    def explicit(self):
        return self.structural_class == EXPLICIT

    @property
    def K(self):
        return embed(self)

    def __eq__(self, other):
        if not isinstance(other, RKMethod):
            return NotImplemented
        return (_same(self.A, other.A) and _same(self.b, other.b)
                and self.structural_class == other.structural_class
                and self.order == other.order and self.name == other.name)

    def __repr__(self):
        return f"RKMethod(name={self.name!r}, s={self.s}, class={self.structural_class}, order={self.order})"


@dataclass(frozen=True, eq=False)
class Perturbation:
    """Downwind coefficients ``(A_tilde, b_tilde)``."""

    A_tilde: np.ndarray
    b_tilde: np.ndarray
    structural_class: str = None

    def __post_init__(self):
        A, b = _coefficients(self.A_tilde, self.b_tilde)
        object.__setattr__(self, "A_tilde", A)
        object.__setattr__(self, "b_tilde", b)
        if self.structural_class is None:
            object.__setattr__(self, "structural_class", infer_class(A))
        _check_structure(A, self.structural_class, "A_tilde")

    @classmethod
    def zero(cls, method):
        s = method.s
        z = nm.zeros((s,), method.exact)
        return cls(nm.zeros((s, s), method.exact), z, method.structural_class)

    @classmethod
    def from_embedded(cls, Kt, structural_class=None):
        """Build from an ``(s+1)x(s+1)`` matrix whose last column is zero."""
        Kt = np.asarray(Kt)
        s = Kt.shape[0] - 1
        if any(not nm.is_zero(x) for x in Kt[:, s]):
            raise ShapeMismatch("last column of an embedded perturbation must vanish")
        return cls(Kt[:s, :s], Kt[s, :s], structural_class)

    @property
    def s(self):
        return self.A_tilde.shape[0]

    @property
    def exact(self):
        return nm.exact_array(self.A_tilde)

    @property
    def K(self):
        return _embed(self.A_tilde, self.b_tilde)

    def is_zero(self):
        return all(nm.is_zero(x) for x in self.K.ravel())

    def __eq__(self, other):
        if not isinstance(other, Perturbation):
            return NotImplemented
        return (_same(self.A_tilde, other.A_tilde) and _same(self.b_tilde, other.b_tilde)
                and self.structural_class == other.structural_class)


def validate(method):
    """Check shapes and structural-class triangularity; return True or raise."""
    A, b = method.A, method.b
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeMismatch(f"A must be square, got shape {A.shape}")
    if b.shape != (A.shape[0],):
        raise ShapeMismatch(f"b must have length {A.shape[0]}, got shape {b.shape}")
    _check_structure(A, method.structural_class)
    return True


def check_pair(method, pert):
    """Validate a method together with its perturbation."""
    validate(method)
    if pert.s != method.s:
        raise ShapeMismatch(f"perturbation has {pert.s} stages, method has {method.s}")
    _check_structure(pert.A_tilde, method.structural_class, "A_tilde")
    return True


def embed(method):
    """The ``(s+1)x(s+1)`` matrix ``K = [[A, 0], [b^T, 0]]``."""
    return _embed(method.A, method.b)


def pair_matrices(method, pert=None):
    """``K`` and ``K_tilde`` in a common numeric representation."""
    if pert is None:
        pert = Perturbation.zero(method)
    check_pair(method, pert)
    return nm.common_mode(embed(method), pert.K)


def has_property_c(method, pert):
    """True iff no column carries nonzero entries in both ``K`` and ``K_tilde``."""
    K, Kt = pair_matrices(method, pert)
    for j in range(K.shape[1]):
        if any(not nm.is_zero(x) for x in Kt[:, j]) and any(not nm.is_zero(x) for x in K[:, j]):
            return False
    return True


# ---------------------------------------------------------------------------
# method file format


def _rows(M):
    M = np.asarray(M)
    if M.ndim == 1:
        return [nm.fmt(x) for x in M]
    return [[nm.fmt(x) for x in row] for row in M]


def to_dict(method, pert=None):
    d = {
        "name": method.name,
        "class": method.structural_class,
        "order": method.order,
        "A": _rows(method.A),
        "b": _rows(method.b),
    }
    if pert is not None:
        d["A_tilde"] = _rows(pert.A_tilde)
        d["b_tilde"] = _rows(pert.b_tilde)
    return d


def from_dict(d):
    """Parse a method document; returns ``(method, perturbation or None)``."""
    missing = [k for k in ("A", "b") if k not in d]
    if missing:
        raise ValueError(f"method document lacks {missing}")
    method = RKMethod(d["A"], d["b"], d.get("class"), d.get("order", 1), d.get("name", ""))
    pert = None
    if "A_tilde" in d or "b_tilde" in d:
        s = method.s
        At = d.get("A_tilde", [[0] * s for _ in range(s)])
        bt = d.get("b_tilde", [0] * s)
        pert = Perturbation(At, bt, method.structural_class)
        check_pair(method, pert)
    return method, pert


def render(method, pert=None, indent=2):
    return json.dumps(to_dict(method, pert), indent=indent)


def parse(text):
    return from_dict(json.loads(text))


def load(path):
    with open(path) as fh:
        return parse(fh.read())


def dump(path, method, pert=None):
    with open(path, "w") as fh:
        fh.write(render(method, pert) + "\n")
