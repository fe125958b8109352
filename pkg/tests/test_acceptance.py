"""One test per acceptance criterion, each printing a single PASS/FAIL line.

The lines are printed as the tests run (visible with ``-s``) and repeated in
the terminal summary so they also appear in captured ``pytest -v`` output.
Run ``python3 tests/test_acceptance.py`` to get only the seven lines.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from contactskyrme.analysis import bound_report, check_properties, pointwise_coupling, suspension_coupling
from contactskyrme.curlspec import eigenspace, norm_constancy, spectrum
from contactskyrme.flow import FlowOptions, Profile, minimize
from contactskyrme.maps import (fd_richardson_slope, fourier_test_map, identity_map, right_translate,
                               suspension_map)
from contactskyrme.poly import SpherePoly, monomial_exponents, sphere_integral
from contactskyrme.s3geom import build_grid, quadrature, random_points
from contactskyrme.selftest import run_selftest

BOUND = 4.0 * math.pi**2
RES = (32, 24, 24)


def report(n, passed, detail):
    line = f"criterion {n}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[n] = line
    print(line)
    return passed


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def criterion_1():
    rep, dt = _timed(lambda: spectrum(3))
    mults = {k + 2: rep.multiplicity(k + 2) for k in range(4)}
    want = {k + 2: (k + 1) * (k + 3) for k in range(4)}
    total = sum(m for _, m in rep.clusters)
    ok = (mults == want and rep.max_integer_deviation < 1e-9 and total == rep.rank_G == 90 and dt < 30)
    return ok, (f"multiplicities {mults}, max |mu - round(mu)| {rep.max_integer_deviation:.1e}, "
                f"total {total}, rank G {rep.rank_G}, {dt:.1f} s")


def criterion_2():
    def run():
        grid = build_grid(*RES)
        return bound_report(identity_map(), 2.0, grid), check_properties(identity_map(), 2.0, grid)
    (rep, props), dt = _timed(run)
    e_rel = abs(rep.E - BOUND) / BOUND
    ok = e_rel < 1e-3 and abs(rep.deg - 1) < 1e-8 and rep.defect < 1e-5 and props.passed and dt < 10
    n_pass = sum(ch.passed for ch in props.checks)
    return ok, (f"E rel err {e_rel:.1e}, |deg-1| {abs(rep.deg - 1):.1e}, defect {rep.defect:.1e}, "
                f"checks {n_pass}/{len(props.checks)}, {dt:.1f} s")


def criterion_3():
    grid = build_grid(*RES)
    rows, ok = [], True
    for a in (0.5, 2.0, 5.0):
        phi = suspension_map(a)
        c = suspension_coupling(a)
        pc = pointwise_coupling(phi, grid.points)
        live = ~pc.critical
        want = c(grid.points)
        c_err = float(np.max(np.abs(pc.c_pt[live] - want[live]) / want[live]))
        br = bound_report(phi, c, grid)
        props = check_properties(phi, c, grid)
        eig = props["eigenvalue_identity"].residual
        div = props["divergence_identity"].residual
        conf = props["conformal_rescale"].residual
        good = (c_err < 1e-5 and abs(br.deg - 1) < 1e-6 and eig < 1e-5 and abs(br.ratio - 1) < 2e-3
                and div < 1e-4 and conf < 1e-4)
        ok &= good
        rows.append(f"a={a:g}: c {c_err:.0e} deg {abs(br.deg - 1):.0e} eig {eig:.0e} "
                    f"ratio-1 {br.ratio - 1:.0e} div {div:.0e} conf {conf:.0e}")
    return ok, "; ".join(rows)


def criterion_4():
    grid = build_grid(*RES)
    worst_margin, worst_completion, ok = math.inf, 0.0, True
    for seed in range(20):
        rep = bound_report(fourier_test_map(seed), 2.0, grid)
        margin = (rep.E - (BOUND * rep.deg - 1e-3 * BOUND)) / BOUND
        worst_margin = min(worst_margin, margin)
        worst_completion = max(worst_completion, rep.completion_residual)
        ok &= margin >= 0 and rep.completion_residual < 1e-3
    return ok, f"20 maps, min (E - bound + slack)/4pi^2 {worst_margin:.3f}, max completion residual {worst_completion:.1e}"


def criterion_5():
    flat = [norm_constancy(v)[1] for v in eigenspace(3, 2)]
    twisted = [norm_constancy(v)[1] for v in eigenspace(3, 3)]
    ok = max(flat) < 1e-10 and min(twisted) > 0.05
    return ok, (f"mu=2: {len(flat)} fields, max deviation {max(flat):.1e}; "
                f"mu=3: {len(twisted)} fields, min deviation {min(twisted):.2f}")


def criterion_6():
    t0 = time.perf_counter()
    p1 = Profile.from_function(lambda s: s + 0.3 * np.sin(2 * s), 1)
    r1 = minimize(p1, 2.0, FlowOptions(max_iter=60))
    dt = time.perf_counter() - t0
    e_rel = abs(r1.E - BOUND) / BOUND
    dist = r1.profile.sup_distance(lambda s: s)
    p2 = Profile.from_function(lambda s: 2 * s + 0.3 * np.sin(2 * s), 2)
    r2 = minimize(p2, 2.0, FlowOptions(max_iter=60))
    ratio2 = r2.E / (2 * BOUND)
    ok = e_rel < 5e-3 and dist < 1e-2 and dt < 300 and abs(r2.deg - 2) < 1e-4 and ratio2 > 1 + 1e-3
    return ok, (f"B=1: E rel err {e_rel:.1e}, sup |alpha - s| {dist:.1e}, {dt:.0f} s ({r1.status}); "
                f"B=2: E/8pi^2 {ratio2:.4f} ({r2.status})")


def criterion_7():
    pts = random_points(64, seed=7)
    # the identity is linear, so its difference quotient is exact and has no order; use curved maps
    curved = (suspension_map(2.0), fourier_test_map(3), right_translate((0.6, 0.0, 0.8, 0.0), suspension_map(0.5)))
    slopes = [fd_richardson_slope(phi, pts) for phi in curved]
    grid = build_grid(*RES)
    quad_err = max(abs(quadrature(grid, SpherePoly.monomial(e)) - float(sphere_integral(SpherePoly.monomial(e))))
                   for e in monomial_exponents(6))
    inv = run_selftest()
    failed = [i.name for i in inv if not i.passed]
    ok = all(1.8 <= s <= 2.2 for s in slopes) and quad_err < 1e-10 and not failed
    return ok, (f"Richardson slopes {', '.join(f'{s:.3f}' for s in slopes)}, "
                f"monomial quadrature err {quad_err:.1e}, selftest {len(inv) - len(failed)}/{len(inv)}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7]


@pytest.mark.parametrize("n", [pytest.param(k + 1, marks=[pytest.mark.slow] if k == 5 else [])
                               for k in range(len(CRITERIA))])
def test_criterion(n):
    passed, detail = CRITERIA[n - 1]()
    assert report(n, passed, detail), detail


if __name__ == "__main__":
    for k, fn in enumerate(CRITERIA, start=1):
        report(k, *fn())
