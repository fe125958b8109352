"""Exact symbolic invariants of the frame calculus, run by ``contactskyrme selftest``.

Every check here is a rational identity, so a pass means equality, not
agreement within a tolerance.  The only exception is the orientation check,
which samples ``*d eta = 2 eta`` in floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List

import numpy as np

from .curlspec import assemble
from .poly import (FRAME_NAMES, SpherePoly, frame_derive, inner_product, monomial_integral,
                   random_poly, restriction_equal)
from .s3geom import (PolyVectorField, curl_frame, div_frame, field_inner_product,
                     structure_constants, verify_orientation)

# [X1, X2] = -2 xi, [X2, xi] = -2 X1, [xi, X1] = -2 X2, written as C[a, b, c]
EXPECTED_BRACKETS = {(1, 2): (-2, 0, 0), (2, 0): (0, -2, 0), (0, 1): (0, 0, -2)}


@dataclass
class Invariant:
    name: str
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def _random_field(rng, degree: int) -> PolyVectorField:
    return PolyVectorField(*(random_poly(rng, degree) for _ in range(3)))


def check_structure_constants(rng) -> Invariant:
    C = structure_constants()
    for (a, b), row in EXPECTED_BRACKETS.items():
        if tuple(int(x) for x in C[a, b]) != row or tuple(int(x) for x in C[b, a]) != tuple(-x for x in row):
            return Invariant("structure_constants", False, f"bracket ({a},{b}) = {C[a, b].tolist()}")
    if any(C[a, a].any() for a in range(3)):
        return Invariant("structure_constants", False, "[e_a, e_a] != 0")
    # the constants must reproduce commutators on arbitrary polynomials
    for _ in range(4):
        f = random_poly(rng, 3)
        for a in range(3):
            for b in range(3):
                lhs = (frame_derive(frame_derive(f, FRAME_NAMES[b]), FRAME_NAMES[a])
                       - frame_derive(frame_derive(f, FRAME_NAMES[a]), FRAME_NAMES[b]))
                rhs = SpherePoly()
                for c in range(3):
                    if C[a, b, c]:
                        rhs = rhs + frame_derive(f, FRAME_NAMES[c]).scale(int(C[a, b, c]))
                if lhs != rhs:
                    return Invariant("structure_constants", False, f"commutator ({a},{b}) on {f!r}")
    return Invariant("structure_constants", True, "[X1,X2]=-2xi, [X2,xi]=-2X1, [xi,X1]=-2X2")


def check_leibniz(rng) -> Invariant:
    for _ in range(6):
        f, g = random_poly(rng, 3), random_poly(rng, 3)
        for name in FRAME_NAMES:
            if frame_derive(f * g, name) != frame_derive(f, name) * g + f * frame_derive(g, name):
                return Invariant("leibniz", False, f"frame field {name}")
    return Invariant("leibniz", True)


def check_integration_by_parts(rng) -> Invariant:
    for _ in range(6):
        f, g = random_poly(rng, 4), random_poly(rng, 4)
        for name in FRAME_NAMES:
            lhs = inner_product(frame_derive(f, name), g)
            rhs = -inner_product(f, frame_derive(g, name))
            if lhs != rhs:
                return Invariant("integration_by_parts", False, f"frame field {name}: {lhs} vs {rhs}")
    return Invariant("integration_by_parts", True)


def check_curl_self_adjoint(rng) -> Invariant:
    for _ in range(4):
        u, v = _random_field(rng, 3), _random_field(rng, 3)
        lhs = field_inner_product(curl_frame(u), v)
        rhs = field_inner_product(u, curl_frame(v))
        if lhs != rhs:
            return Invariant("curl_self_adjoint", False, f"{lhs} vs {rhs}")
    return Invariant("curl_self_adjoint", True)


def check_div_curl(rng) -> Invariant:
    for _ in range(4):
        u = _random_field(rng, 4)
        d = div_frame(curl_frame(u))
        if not restriction_equal(d, SpherePoly()):
            return Invariant("div_curl_zero", False, repr(d))
    return Invariant("div_curl_zero", True)


def check_frame_curl(rng) -> Invariant:
    one, zero = SpherePoly.const(1), SpherePoly()
    for k in range(3):
        comps = [zero, zero, zero]
        comps[k] = one
        v = PolyVectorField(*comps)
        if curl_frame(v) != v.scale(2):
            return Invariant("frame_curl_eigen", False, f"curl {FRAME_NAMES[k]} != 2 {FRAME_NAMES[k]}")
    return Invariant("frame_curl_eigen", True, "curl xi = 2 xi, curl X1 = 2 X1, curl X2 = 2 X2")


def check_volume(rng) -> Invariant:
    ok = monomial_integral((0, 0, 0, 0)) == 2 and monomial_integral((2, 0, 0, 0)) == Fraction(1, 2)
    ok = ok and monomial_integral((2, 2, 0, 0)) == Fraction(1, 12)
    return Invariant("sphere_integrals", ok, "vol = 2 pi^2, int x1^2 = pi^2/2, int x1^2 y1^2 = pi^2/12")


def check_pencil(rng) -> Invariant:
    p = assemble(2)
    n = p.size
    sym = all(p.C[i][j] == p.C[j][i] for i in range(n) for j in range(i))
    base = assemble(0)
    g0 = all(base.G[i][j] == (2 if i == j else 0) for i in range(3) for j in range(3))
    return Invariant("pencil_symmetry", sym and g0, "C = C^T exactly at K=2; G = 2 I (pi^2 units) at K=0")


def check_orientation(rng) -> Invariant:
    try:
        err = verify_orientation()
    except RuntimeError as exc:  # pragma: no cover - import would already have failed
        return Invariant("orientation", False, str(exc))
    return Invariant("orientation", True, f"*d eta = 2 eta, max residual {err:.3e}")


CHECKS: List[Callable] = [
    check_structure_constants, check_leibniz, check_integration_by_parts,
    check_curl_self_adjoint, check_div_curl, check_frame_curl, check_volume,
    check_pencil, check_orientation,
]


def run_selftest(seed: int = 0) -> List[Invariant]:
    rng = np.random.default_rng(seed)
    return [check(rng) for check in CHECKS]
