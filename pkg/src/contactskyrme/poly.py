"""Exact polynomial algebra on R^4 restricted to the unit 3-sphere.

A :class:`SpherePoly` is a sparse map ``exponent tuple -> coefficient`` in the
ambient variables ``(x1, y1, x2, y2)``.  Coefficients are
:class:`fractions.Fraction` unless a caller deliberately mixes in floats (the
eigenspace routines do, after the exact assembly is finished).

Two polynomials that differ by a multiple of ``x1^2 + y1^2 + x2^2 + y2^2 - 1``
describe the same function on S^3.  No canonical reduction modulo that ideal
is attempted; :func:`restriction_equal` decides equality on the sphere from the
exact L^2 norm of the difference.

Sphere integrals are returned as :class:`SphereScalar`, the rational factor
``q`` of ``q * pi^2``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Dict, Iterable, Iterator, Tuple, Union

import numpy as np

Exponent = Tuple[int, int, int, int]
Coefficient = Union[Fraction, float]

VARIABLES = ("x1", "y1", "x2", "y2")
FRAME_NAMES = ("xi", "X1", "X2")

# Coefficient functions of the frame fields, one (sign, variable) pair per
# partial derivative d/dx1, d/dy1, d/dx2, d/dy2:
#   xi = -y1 d_x1 + x1 d_y1 - y2 d_x2 + x2 d_y2
#   X1 = -x2 d_x1 + y2 d_y1 + x1 d_x2 - y1 d_y2
#   X2 = -y2 d_x1 - x2 d_y1 + y1 d_x2 + x1 d_y2
FRAME_COEFFICIENTS = {
    "xi": ((-1, 1), (1, 0), (-1, 3), (1, 2)),
    "X1": ((-1, 2), (1, 3), (1, 0), (-1, 1)),
    "X2": ((-1, 3), (-1, 2), (1, 1), (1, 0)),
}


def _coerce(value) -> Coefficient:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("boolean is not a polynomial coefficient")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, (float, np.floating)):
        return float(value)
    raise TypeError(f"unsupported coefficient type {type(value).__name__}")


def _frame_index(which) -> str:
    if isinstance(which, str):
        if which not in FRAME_COEFFICIENTS:
            raise ValueError(f"unknown frame field {which!r}; expected one of {FRAME_NAMES}")
        return which
    return FRAME_NAMES[int(which)]


class SpherePoly:
    """Sparse polynomial in (x1, y1, x2, y2), viewed as a function on S^3.

    Instances are immutable; arithmetic returns new objects.  Zero
    coefficients are never stored, so ``SpherePoly()`` is the zero polynomial.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Dict[Exponent, object] | None = None):
        clean: Dict[Exponent, Coefficient] = {}
        if terms:
            for exp, coeff in terms.items():
                exp = tuple(int(e) for e in exp)
                if len(exp) != 4 or min(exp) < 0:
                    raise ValueError(f"invalid exponent tuple {exp}")
                c = _coerce(coeff)
                if c != 0:
                    clean[exp] = clean.get(exp, 0) + c
                    if clean[exp] == 0:
                        del clean[exp]
        self._terms = clean

    # -- constructors -----------------------------------------------------

    @classmethod
    def const(cls, value=1) -> "SpherePoly":
        return cls({(0, 0, 0, 0): value})

    @classmethod
    def var(cls, name) -> "SpherePoly":
        idx = VARIABLES.index(name) if isinstance(name, str) else int(name)
        exp = [0, 0, 0, 0]
        exp[idx] = 1
        return cls({tuple(exp): 1})

    @classmethod
    def monomial(cls, exponent: Iterable[int], coeff=1) -> "SpherePoly":
        return cls({tuple(exponent): coeff})

    @classmethod
    def _raw(cls, terms: Dict[Exponent, Coefficient]) -> "SpherePoly":
        obj = cls.__new__(cls)
        obj._terms = {e: c for e, c in terms.items() if c != 0}
        return obj

    # -- inspection -------------------------------------------------------

    @property
    def terms(self) -> Dict[Exponent, Coefficient]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[Exponent, Coefficient]]:
        return iter(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self._terms.values())

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, SpherePoly):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction, float)):
            return self == SpherePoly.const(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        if not self._terms:
            return "SpherePoly(0)"
        parts = []
        for exp in sorted(self._terms, key=lambda e: (sum(e), e)):
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(VARIABLES, exp) if k
            )
            coeff = self._terms[exp]
            parts.append(f"{coeff}" + (f"*{mono}" if mono else ""))
        return "SpherePoly(" + " + ".join(parts) + ")"

    # -- arithmetic -------------------------------------------------------

    def __neg__(self) -> "SpherePoly":
        return SpherePoly._raw({e: -c for e, c in self._terms.items()})

    def __add__(self, other) -> "SpherePoly":
        if not isinstance(other, SpherePoly):
            try:
                other = SpherePoly.const(other)
            except TypeError:
                return NotImplemented
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return SpherePoly._raw(out)

    __radd__ = __add__

    def __sub__(self, other) -> "SpherePoly":
        if not isinstance(other, SpherePoly):
            try:
                other = SpherePoly.const(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "SpherePoly":
        return (-self) + other

    def __mul__(self, other) -> "SpherePoly":
        if not isinstance(other, SpherePoly):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        out: Dict[Exponent, Coefficient] = {}
        for ea, ca in self._terms.items():
            for eb, cb in other._terms.items():
                e = (ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3])
                out[e] = out.get(e, 0) + ca * cb
        return SpherePoly._raw(out)

    def __rmul__(self, other) -> "SpherePoly":
        return self.__mul__(other)

    def scale(self, factor) -> "SpherePoly":
        factor = _coerce(factor)
        return SpherePoly._raw({e: c * factor for e, c in self._terms.items()})

    def __pow__(self, n: int) -> "SpherePoly":
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        out = SpherePoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def to_float(self) -> "SpherePoly":
        return SpherePoly._raw({e: float(c) for e, c in self._terms.items()})

    # -- evaluation -------------------------------------------------------

    def __call__(self, points) -> np.ndarray:
        """Evaluate at points of shape (..., 4)."""
        pts = np.asarray(points, dtype=float)
        out = np.zeros(pts.shape[:-1])
        for exp, coeff in self._terms.items():
            term = np.full(pts.shape[:-1], float(coeff))
            for k, e in enumerate(exp):
                if e:
                    term = term * pts[..., k] ** e
            out = out + term
        return out


def poly_arith(p: SpherePoly, q: SpherePoly | None, op: str, factor=None) -> SpherePoly:
    """Functional front end to the SpherePoly operators (``add``, ``sub``, ``mul``, ``scale``)."""
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    if op == "scale":
        return p.scale(factor)
    raise ValueError(f"unknown operation {op!r}")


def frame_derive(p: SpherePoly, which) -> SpherePoly:
    """Directional derivative of ``p`` along one of the frame fields xi, X1, X2."""
    table = FRAME_COEFFICIENTS[_frame_index(which)]
    out: Dict[Exponent, Coefficient] = {}
    for exp, coeff in p.items():
        for k, (sign, var) in enumerate(table):
            ek = exp[k]
            if not ek:
                continue
            e = list(exp)
            e[k] -= 1
            e[var] += 1
            e = tuple(e)
            out[e] = out.get(e, 0) + sign * ek * coeff
    return SpherePoly._raw(out)


def frame_laplacian(p: SpherePoly) -> SpherePoly:
    """``xi(xi p) + X1(X1 p) + X2(X2 p)``, the Laplace-Beltrami operator on S^3."""
    out = SpherePoly()
    for name in FRAME_NAMES:
        out = out + frame_derive(frame_derive(p, name), name)
    return out


def gradient(p: SpherePoly) -> Tuple[SpherePoly, SpherePoly, SpherePoly]:
    """Frame components ``(xi p, X1 p, X2 p)`` of the sphere gradient."""
    return tuple(frame_derive(p, name) for name in FRAME_NAMES)


@lru_cache(maxsize=None)
def _odd_double_factorial(n: int) -> int:
    # (2i-1)!! with (-1)!! = 1
    out = 1
    for k in range(n, 0, -2):
        out *= k
    return out


@lru_cache(maxsize=None)
def monomial_integral(exponent: Exponent) -> Fraction:
    """Rational ``q`` with ``integral over S^3 of x^exponent = q * pi^2``.

    Zero unless every exponent is even.  For exponents ``(2i, 2j, 2k, 2l)``
    and ``m = i + j + k + l`` the value is
    ``2 (2i-1)!! (2j-1)!! (2k-1)!! (2l-1)!! / (2^m (m+1)!)``.
    """
    if any(e % 2 for e in exponent):
        return Fraction(0)
    halves = [e // 2 for e in exponent]
    m = sum(halves)
    num = 2
    for h in halves:
        num *= _odd_double_factorial(2 * h - 1)
    return Fraction(num, 2**m * math.factorial(m + 1))


@dataclass(frozen=True)
class SphereScalar:
    """The real number ``value * pi^2``."""

    value: Coefficient

    def __add__(self, other: "SphereScalar") -> "SphereScalar":
        return SphereScalar(self.value + other.value)

    def __sub__(self, other: "SphereScalar") -> "SphereScalar":
        return SphereScalar(self.value - other.value)

    def __neg__(self) -> "SphereScalar":
        return SphereScalar(-self.value)

    def scale(self, factor) -> "SphereScalar":
        return SphereScalar(self.value * _coerce(factor))

    def __float__(self) -> float:
        return float(self.value) * math.pi**2

    def __eq__(self, other) -> bool:
        if isinstance(other, SphereScalar):
            return self.value == other.value
        return NotImplemented

    def __hash__(self):
        return hash(self.value)


def sphere_integral(p: SpherePoly) -> SphereScalar:
    """Exact integral of ``p`` over the unit 3-sphere."""
    total = Fraction(0)
    for exp, coeff in p.items():
        total = total + coeff * monomial_integral(exp)
    return SphereScalar(total)


def inner_product(p: SpherePoly, q: SpherePoly) -> SphereScalar:
    """L^2(S^3) inner product, computed without forming the full product."""
    total = Fraction(0)
    for ea, ca in p.items():
        for eb, cb in q.items():
            w = monomial_integral((ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]))
            if w:
                total = total + ca * cb * w
    return SphereScalar(total)


def restriction_equal(p: SpherePoly, q: SpherePoly) -> bool:
    """True iff ``p`` and ``q`` agree as functions on S^3."""
    d = p - q
    return inner_product(d, d).value == 0


def sphere_ideal() -> SpherePoly:
    """``x1^2 + y1^2 + x2^2 + y2^2 - 1``, which vanishes on S^3."""
    x1, y1, x2, y2 = (SpherePoly.var(v) for v in VARIABLES)
    return x1 * x1 + y1 * y1 + x2 * x2 + y2 * y2 - 1


def monomial_exponents(max_degree: int) -> list[Exponent]:
    """All exponent tuples of total degree <= max_degree, graded then lexicographic."""
    out = []
    for d in range(max_degree + 1):
        degree_d = [e for e in itertools.product(range(d + 1), repeat=4) if sum(e) == d]
        out.extend(sorted(degree_d, reverse=True))
    return out


def random_poly(rng: np.random.Generator, max_degree: int, n_terms: int = 6, max_coeff: int = 5) -> SpherePoly:
    """Random exact polynomial, used by property tests and the selftest."""
    exps = monomial_exponents(max_degree)
    terms = {}
    for _ in range(n_terms):
        e = exps[int(rng.integers(len(exps)))]
        terms[e] = Fraction(int(rng.integers(-max_coeff, max_coeff + 1)), int(rng.integers(1, 4)))
    return SpherePoly(terms)
