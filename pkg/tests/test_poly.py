import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from contactskyrme.poly import (FRAME_NAMES, SphereScalar, SpherePoly, frame_derive, frame_laplacian,
                                gradient, inner_product, monomial_exponents, monomial_integral,
                                poly_arith, random_poly, restriction_equal, sphere_ideal,
                                sphere_integral)
from contactskyrme.s3geom import frame_at, random_points

from conftest import sphere_polys

x1, y1, x2, y2 = (SpherePoly.var(v) for v in ("x1", "y1", "x2", "y2"))


def gamma_oracle(exponent):
    """Sphere moment from the Gaussian integral over R^4, in units of pi^2."""
    if any(e % 2 for e in exponent):
        return 0.0
    num = 2.0 * math.prod(math.gamma((e + 1) / 2) for e in exponent)
    return num / math.gamma((sum(exponent) + 4) / 2) / math.pi**2


class TestArithmetic:
    def test_zero_and_constants(self):
        assert SpherePoly().is_zero()
        assert SpherePoly().degree == -1
        assert SpherePoly.const(3).degree == 0
        assert SpherePoly.const(0).is_zero()

    def test_cancellation_drops_terms(self):
        p = x1 * y1 - y1 * x1
        assert p.is_zero() and len(p) == 0

    def test_pow_and_mul(self):
        assert (x1 + y1) ** 2 == x1 * x1 + 2 * x1 * y1 + y1 * y1
        assert (x1 ** 0) == SpherePoly.const(1)
        with pytest.raises(ValueError):
            x1 ** -1

    def test_fraction_coefficients_stay_exact(self):
        p = x1.scale(Fraction(1, 3)) + SpherePoly.const(Fraction(2, 7))
        assert p.is_exact()
        assert not p.to_float().is_exact()

    def test_poly_arith_front_end(self):
        assert poly_arith(x1, y1, "add") == x1 + y1
        assert poly_arith(x1, y1, "sub") == x1 - y1
        assert poly_arith(x1, y1, "mul") == x1 * y1
        assert poly_arith(x1, None, "scale", 3) == x1 * 3
        with pytest.raises(ValueError):
            poly_arith(x1, y1, "div")

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            SpherePoly({(1, 0, 0): 1})
        with pytest.raises(TypeError):
            SpherePoly.const(True)
        with pytest.raises(ValueError):
            frame_derive(x1, "X3")

    def test_evaluation(self):
        p = 2 * x1 * x1 * y2 - 3 * y1 + SpherePoly.const(Fraction(1, 2))
        pts = random_points(50, seed=3)
        want = 2 * pts[:, 0] ** 2 * pts[:, 3] - 3 * pts[:, 1] + 0.5
        np.testing.assert_allclose(p(pts), want, rtol=0, atol=1e-14)

    def test_monomial_exponents_count(self):
        # number of monomials in 4 variables of degree <= K is C(K + 4, 4)
        for K in range(5):
            assert len(monomial_exponents(K)) == math.comb(K + 4, 4)


class TestIntegrals:
    def test_volume_and_second_moment(self):
        assert monomial_integral((0, 0, 0, 0)) == 2
        assert monomial_integral((2, 0, 0, 0)) == Fraction(1, 2)
        assert float(sphere_integral(SpherePoly.const(1))) == pytest.approx(2 * math.pi**2, rel=1e-15)

    @pytest.mark.parametrize("exponent", [e for e in monomial_exponents(8)])
    def test_monomials_match_gamma_oracle(self, exponent):
        assert float(monomial_integral(exponent)) == pytest.approx(gamma_oracle(exponent), rel=1e-13, abs=1e-300)

    def test_odd_exponents_vanish(self):
        assert monomial_integral((1, 2, 0, 0)) == 0
        assert monomial_integral((3, 1, 1, 1)) == 0

    def test_ideal_integrates_to_zero_against_anything(self, rng):
        for _ in range(5):
            p = random_poly(rng, 3)
            assert sphere_integral(sphere_ideal() * p).value == 0
            assert restriction_equal(sphere_ideal() * p, SpherePoly())

    def test_restriction_equal_detects_difference(self):
        assert restriction_equal(x1 * x1 + y1 * y1 + x2 * x2 + y2 * y2, SpherePoly.const(1))
        assert not restriction_equal(x1 * x1, SpherePoly.const(Fraction(1, 4)))

    def test_sphere_scalar(self):
        a, b = SphereScalar(Fraction(1, 2)), SphereScalar(Fraction(1, 3))
        assert (a + b).value == Fraction(5, 6)
        assert (a - b).value == Fraction(1, 6)
        assert (-a).value == Fraction(-1, 2)
        assert a.scale(4).value == 2
        assert float(a) == pytest.approx(math.pi**2 / 2)


class TestFrameDerivatives:
    def test_frame_on_coordinates(self):
        # xi(q) = iq: xi(x1) = -y1, xi(y1) = x1, xi(x2) = -y2, xi(y2) = x2
        assert frame_derive(x1, "xi") == -y1
        assert frame_derive(y1, "xi") == x1
        assert frame_derive(x2, "xi") == -y2
        assert frame_derive(y2, "xi") == x2
        assert frame_derive(x1, 1) == -x2
        assert frame_derive(x1, 2) == -y2

    def test_frame_kills_the_ideal(self):
        for name in FRAME_NAMES:
            assert frame_derive(sphere_ideal(), name).is_zero()

    def test_matches_numerical_directional_derivative(self, rng):
        p = random_poly(rng, 4, n_terms=8)
        pts = random_points(20, seed=5)
        F = frame_at(pts)
        h = 1e-5
        for k, name in enumerate(FRAME_NAMES):
            fd = (p(pts + h * F[:, k]) - p(pts - h * F[:, k])) / (2 * h)
            np.testing.assert_allclose(frame_derive(p, name)(pts), fd, atol=1e-7)

    def test_gradient_components(self):
        g = gradient(x1)
        assert g == (-y1, -x2, -y2)

    def test_laplacian_of_harmonics(self):
        # restrictions of harmonic homogeneous polynomials of degree k: -k(k+2)
        assert frame_laplacian(x1) == x1.scale(-3)
        h2 = x1 * y1
        assert restriction_equal(frame_laplacian(h2), h2.scale(-8))
        h3 = x1 ** 3 - 3 * x1 * y1 * y1
        assert restriction_equal(frame_laplacian(h3), h3.scale(-15))


@given(sphere_polys(), sphere_polys(), st.sampled_from(FRAME_NAMES))
def test_leibniz(f, g, name):
    assert frame_derive(f * g, name) == frame_derive(f, name) * g + f * frame_derive(g, name)


@given(sphere_polys(), sphere_polys(), st.sampled_from(FRAME_NAMES))
def test_integration_by_parts(f, g, name):
    assert inner_product(frame_derive(f, name), g) == -inner_product(f, frame_derive(g, name))


@given(sphere_polys())
def test_commutators(f):
    def d(p, n):
        return frame_derive(p, n)
    assert d(d(f, "X2"), "X1") - d(d(f, "X1"), "X2") == d(f, "xi").scale(-2)
    assert d(d(f, "xi"), "X2") - d(d(f, "X2"), "xi") == d(f, "X1").scale(-2)
    assert d(d(f, "X1"), "xi") - d(d(f, "xi"), "X1") == d(f, "X2").scale(-2)


@given(sphere_polys(), sphere_polys())
def test_laplacian_symmetric_and_nonpositive(f, g):
    assert inner_product(frame_laplacian(f), g) == inner_product(f, frame_laplacian(g))
    assert inner_product(frame_laplacian(f), f).value <= 0


@given(sphere_polys(), sphere_polys())
def test_inner_product_is_integral_of_product(f, g):
    assert inner_product(f, g) == sphere_integral(f * g)
