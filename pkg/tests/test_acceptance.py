"""Acceptance criteria, one test per criterion.

Each test appends a PASS/FAIL line to the session summary before asserting.
Run standalone with ``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oracles import real_positive_root
from pertrk import catalog
from pertrk.integrator import RhsPair, advection_demo, step_butcher, step_canonical
from pertrk.linear import linear_radius, stability_function, threshold_bound
from pertrk.optimize import (bound_linear_order, bound_max_abs, bound_re, optimize_lp,
                             optimize_splitting)
from pertrk.shu_osher import (construct_positive_perturbation, has_positive_radius, radius_am,
                              radius_am_perturbed)
from pertrk.tableau import Perturbation, RKMethod

NAMES = catalog.names()
SQ7 = math.sqrt(7)


def report(n, title, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {title}" + (f"  ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def lp_reports():
    return {n: optimize_lp(catalog.get(n).method) for n in NAMES}


@pytest.fixture(scope="module")
def splitting_reports():
    return {n: optimize_splitting(catalog.get(n).method) for n in NAMES}


def two_stage_radius(a):
    if a <= 0.5:
        return 0.0
    return (2 * a - 1) / a if a <= 1 else 1 / a


def two_stage_r_opt(a):
    if a <= -(1 + SQ7) / 2 or a >= (SQ7 - 1) / 2:
        return 1 / abs(a)
    return 2 * abs(a) / (math.sqrt(3 * a * a - 2 * a + 1) + 1 - a)


def test_criterion_01_radii():
    expected = [1, 0, 0.5, 1, 0.784, 0, 1, 0, 0, 6, 0, 0, 0]
    t0 = time.perf_counter()
    got = [radius_am(catalog.get(n).method) for n in NAMES]
    dt = time.perf_counter() - t0
    bad = [n for n, g, e in zip(NAMES, got, expected)
           if (e == 0 and g != 0) or abs(g - e) > 1e-3]
    report(1, "unperturbed radii", not bad and dt < 1, f"{dt:.2f} s, mismatches {bad}")


def test_criterion_02_optimal_radii():
    expected = {"midpoint": 0.732, "minimal-trunc-2": 1.000, "ssp22star": 1.215, "heun33": 0.776,
                "rk44": 0.685, "merson45": 0.242, "ssp104": 6.000, "fehlberg45": 0.057,
                "dormand-prince5": 0.040, "bogacki5": 0.313}
    t0 = time.perf_counter()
    got = {n: optimize_lp(catalog.get(n).method).r_opt for n in expected}
    dt = time.perf_counter() - t0
    bad = {n: round(got[n], 6) for n in expected if abs(got[n] - expected[n]) > 1e-3}
    report(2, "optimal perturbed radii (LP)", not bad and dt < 30, f"{dt:.2f} s, mismatches {bad}")


def test_criterion_03_algorithm_agreement(lp_reports, splitting_reports):
    diffs = {n: abs(lp_reports[n].r_opt - splitting_reports[n].r_opt) for n in NAMES}
    worst = max(diffs.values())
    report(3, "LP and iterated splitting agree", worst <= 1e-6, f"max difference {worst:.2e}")


def test_criterion_04_exact_roots(lp_reports):
    m = catalog.get("rk44").method
    d_opt = abs(lp_reports["rk44"].r_opt - real_positive_root([1, 2, 4, -4]))
    d_re = abs(bound_re(m) - real_positive_root([1, -2, 4, -4]))
    report(4, "RK44 cubic roots", d_opt <= 1e-6 and d_re <= 1e-6,
           f"r_opt off by {d_opt:.1e}, r_e off by {d_re:.1e}")


def test_criterion_05_threshold_table():
    t0 = time.perf_counter()
    cells = {(s, p): threshold_bound(s, p) for s in range(1, 11) for p in range(1, s + 1)}
    dt = time.perf_counter() - t0
    bad = [c for c, v in cells.items() if abs(v - catalog.threshold_reference(*c)) > 0.01]
    sharp = max(abs(cells[(s, 2)] - math.sqrt(s * (s - 1))) for s in range(2, 11))
    report(5, "threshold factor table", len(cells) == 55 and not bad and sharp <= 1e-4 and dt < 300,
           f"{dt:.1f} s, mismatches {bad}, p=2 error {sharp:.1e}")


def test_criterion_06_linear_radii():
    star = catalog.get("ssp22star").method
    r1 = linear_radius(star, Perturbation([[0, 0], [0, 0]], ["(sqrt(7)-2)/3", 0]))
    root = real_positive_root([15, -4, -12, -24, -24])
    r = root
    fam = Perturbation([[0, 0, 0, 0], [0, 0, 0, 0], [r - 1, 0, 0, 0],
                        [(5 * r * r - 6 * r - 2) / 2, 0, 0, 0]],
                       [(7 * r ** 3 - 2 * r * r - 6 * r - 12) / 12, 0, 0, 0])
    r2 = linear_radius(catalog.get("rk44").method, fam)
    e1, e2 = abs(r1 - (1 + SQ7) / 3), abs(r2 - root)
    report(6, "linear radii of known perturbations", e1 <= 1e-6 and e2 <= 1e-6,
           f"errors {e1:.1e}, {e2:.1e}")


def test_criterion_07_two_stage_sweep():
    rng = np.random.default_rng(2024)
    alphas = rng.uniform(-3, 3, 100)
    alphas = alphas[np.abs(alphas) > 1e-9]
    err_r = err_opt = 0.0
    for a in alphas:
        m = catalog.two_stage(float(a))
        err_r = max(err_r, abs(radius_am(m) - two_stage_radius(a)))
        err_opt = max(err_opt, abs(optimize_lp(m).r_opt - two_stage_r_opt(a)))
    report(7, "two-stage family closed forms", len(alphas) == 100 and err_r <= 1e-5 and err_opt <= 1e-5,
           f"max errors {err_r:.1e}, {err_opt:.1e}")


def test_criterion_08_bound_chain(lp_reports, splitting_reports):
    slack = 1e-8
    bad = []
    for n in NAMES:
        m = catalog.get(n).method
        R = radius_am(m)
        cap = min(bound_max_abs(m), bound_re(m))
        top = bound_linear_order(m.s, m.order)
        for rep in (lp_reports[n], splitting_reports[n]):
            Rp = radius_am_perturbed(m, rep.perturbation)
            RL = linear_radius(m, rep.perturbation)
            if not (R <= Rp + slack and Rp <= RL + slack and RL <= top + slack
                    and rep.r_opt <= cap + slack):
                bad.append((n, rep.algorithm))
    report(8, "bound chain", not bad, f"violations {bad}")


def _bounded_problem(rng):
    a, b, c, d = rng.uniform(-1, 1, 4)
    return RhsPair(lambda u: a * np.sin(u) + b * np.cos(2 * u),
                   lambda u: c * np.tanh(u) + d * np.sin(3 * u))


def test_criterion_09_representation_equivalence(lp_reports):
    worst_nl = worst_lin = 0.0
    for k, n in enumerate(NAMES):
        m = catalog.get(n).method
        rep = lp_reports[n]
        rng = np.random.default_rng(k)
        for _ in range(50):
            rhs = _bounded_problem(rng)
            u0 = rng.uniform(-1, 1, 1)
            h = rng.uniform(0.01, 0.2)
            a = step_butcher(m, rep.perturbation, u0, h, rhs)
            b = step_canonical(rep.canonical, u0, h, rhs)
            worst_nl = max(worst_nl, abs(a[0] - b[0]))
        psi = stability_function(m, rep.perturbation)
        for _ in range(10):
            lam, lam_t = rng.uniform(-2, 1, 2)
            h = rng.uniform(0.01, 0.3)
            lin = RhsPair(lambda u: lam * u, lambda u: lam_t * u)
            got = step_butcher(m, rep.perturbation, np.array([1.0]), h, lin)[0]
            worst_lin = max(worst_lin, abs(got - float(psi(h * lam, -h * lam_t))))
    report(9, "representation equivalence", worst_nl <= 1e-12 and worst_lin <= 1e-12,
           f"nonlinear {worst_nl:.1e}, linear {worst_lin:.1e}")


def _nonincreasing(values):
    return all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


def test_criterion_10_monotonicity_demo():
    t0 = time.perf_counter()
    bad = []
    for name, perturbed in (("ssp22", False), ("ssp33", False), ("ssp104", False), ("rk44", True)):
        res = advection_demo(name, use_optimal_pert=perturbed, grid_points=200,
                             cfl_multiplier=0.9, steps=200)
        ok = (res.h == pytest.approx(0.9 * res.r / 200) and len(res.records) == 201
              and _nonincreasing([x.tv for x in res.records])
              and _nonincreasing([x.max_norm for x in res.records]))
        if not ok:
            bad.append(name)
    dt = time.perf_counter() - t0
    report(10, "monotone advection demo", not bad and dt < 10, f"{dt:.2f} s, failures {bad}")


def test_criterion_11_positive_radius_construction():
    trap = RKMethod([[0, 0], ["1/2", "1/2"]], ["1/2", "1/2"])
    bad = []
    for name in ("rk44", "merson45", "fehlberg45"):
        m = catalog.get(name).method
        pert = construct_positive_perturbation(m)
        if not (has_positive_radius(m, pert) and radius_am_perturbed(m, pert) > 1e-4):
            bad.append(name)
    if not has_positive_radius(trap, construct_positive_perturbation(trap, minimal=False)):
        bad.append("trapezoid")
    report(11, "positive-radius perturbations exist", not bad, f"failures {bad}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
