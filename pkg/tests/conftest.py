import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from contactskyrme.poly import SpherePoly, monomial_exponents
from contactskyrme.s3geom import PolyVectorField, build_grid

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

BOUND = 4.0 * math.pi**2

_EXPONENTS = {d: monomial_exponents(d) for d in range(5)}


def sphere_polys(max_degree=3, max_terms=5):
    exps = st.sampled_from(_EXPONENTS[max_degree])
    coeffs = st.fractions(min_value=-4, max_value=4, max_denominator=6)
    return st.dictionaries(exps, coeffs, max_size=max_terms).map(SpherePoly)


def poly_fields(max_degree=2):
    p = sphere_polys(max_degree, 4)
    return st.builds(PolyVectorField, p, p, p)


@pytest.fixture(scope="session")
def grid_default():
    return build_grid(32, 24, 24)


@pytest.fixture(scope="session")
def grid_small():
    return build_grid(16, 12, 12)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance lines collected by test_acceptance.py and echoed after the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
