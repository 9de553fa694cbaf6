import math
from fractions import Fraction

import numpy as np
import pytest

from oracles import order_defects, trees
from pertrk import catalog
from pertrk.errors import UnknownMethod
from pertrk.optimize import bound_linear_order, bound_max_abs
from pertrk.shu_osher import radius_am
from pertrk.tableau import from_dict, to_dict, validate

F = Fraction
NAMES = catalog.names()


def within_truncation(value, ref):
    """``value`` truncates to the quoted decimal string ``ref``."""
    digits = len(ref.split(".")[1]) if "." in ref else 0
    lo = float(ref)
    return lo - 1e-9 <= value < lo + 10.0 ** -digits


def test_tree_counts():
    assert [len(trees(n)) for n in range(1, 7)] == [1, 1, 2, 4, 9, 20]


def test_listing():
    assert "rk44" in NAMES
    assert len(NAMES) >= 13
    assert catalog.names() == NAMES
    assert len(catalog.methods()) == len(NAMES)


@pytest.mark.parametrize("name", NAMES)
def test_entries_validate(name):
    e = catalog.get(name)
    assert validate(e.method)
    assert e.method.explicit
    assert set(e.reference) <= set(catalog.REFERENCE_KEYS)


@pytest.mark.parametrize("name", NAMES)
def test_order_conditions(name):
    m = catalog.get(name).method
    p = m.order
    if m.exact:
        defects = order_defects(m.A, m.b, p)
        assert all(d == 0 for d in defects.values()), name
        # the order is not higher than claimed for the low-order families
        if name in ("midpoint", "ssp22", "minimal-trunc-2", "rk44", "ssp33", "heun33"):
            assert any(d != 0 for d in order_defects(m.A, m.b, p + 1).values())
    else:
        A = np.asarray(m.A, dtype=float)
        b = np.asarray(m.b, dtype=float)
        A = [[F(x) for x in row] for row in A]
        b = [F(x) for x in b]
        assert max(abs(float(d)) for d in order_defects(A, b, p).values()) < 1e-14


def test_expected_orders():
    orders = {n: catalog.get(n).method.order for n in NAMES}
    assert orders["rk44"] == 4 and orders["ssp104"] == 4 and orders["dormand-prince5"] == 5
    assert orders["bogacki5"] == 5 and orders["fehlberg45"] == 5 and orders["merson45"] == 4


@pytest.mark.parametrize("name", NAMES)
def test_bound_column_checksum(name):
    e = catalog.get(name)
    assert within_truncation(bound_max_abs(e.method), e.reference["bound_max_abs"])
    m = e.method
    if "bound_linear_order" in e.reference and m.order <= m.s:
        assert within_truncation(bound_linear_order(m.s, m.order), e.reference["bound_linear_order"])


@pytest.mark.parametrize("name", NAMES)
def test_radius_column(name):
    e = catalog.get(name)
    R = radius_am(e.method)
    ref = e.reference["R_K"]
    assert within_truncation(R, ref) or abs(R - float(ref)) < 1e-9


def test_fehlberg_largest_entry():
    A = np.asarray(catalog.get("fehlberg45").method.A, dtype=float)
    assert np.max(np.abs(A)) == 8


def test_named_examples():
    ssp22 = catalog.get("ssp22").method
    assert ssp22.A[1, 0] == 1 and list(ssp22.b) == [F(1, 2), F(1, 2)]
    star = catalog.get("ssp22star").method
    assert float(star.A[1, 0]) == pytest.approx((math.sqrt(7) - 1) / 2, abs=1e-15)
    rk44 = catalog.get("rk44").method
    assert [list(r) for r in rk44.A] == [[0, 0, 0, 0], [F(1, 2), 0, 0, 0], [0, F(1, 2), 0, 0], [0, 0, 1, 0]]
    assert list(rk44.b) == [F(1, 6), F(1, 3), F(1, 3), F(1, 6)]


@pytest.mark.parametrize("alpha", [F(1, 3), F(-2), F(5, 7), F(3)])
def test_two_stage_family(alpha):
    m = catalog.two_stage(alpha)
    assert m.A[1, 0] == alpha
    assert list(m.b) == [1 - 1 / (2 * alpha), 1 / (2 * alpha)]
    assert m.order == 2
    assert all(d == 0 for d in order_defects(m.A, m.b, 2).values())


def test_two_stage_by_name():
    e = catalog.get("two-stage(3/4)")
    assert e.method.A[1, 0] == F(3, 4)
    assert catalog.get("two-stage((sqrt(7)-1)/2)").method.A[1, 0] == pytest.approx(
        float(catalog.get("ssp22star").method.A[1, 0]), abs=1e-15)
    with pytest.raises(ValueError):
        catalog.two_stage(0)


def test_unknown_method():
    with pytest.raises(UnknownMethod):
        catalog.get("rk99")
    with pytest.raises(KeyError):
        catalog.get("")


@pytest.mark.parametrize("name", NAMES)
def test_entries_export_round_trip(name):
    m = catalog.get(name).method
    m2, pert = from_dict(to_dict(m))
    assert m2 == m and pert is None


def test_threshold_reference_table():
    cells = [(s, p) for s in range(1, 11) for p in range(1, s + 1)]
    assert len(cells) == 55
    assert all(catalog.threshold_reference(s, 1) == s for s in range(1, 11))
    assert catalog.threshold_reference(10, 10) == 3.73
