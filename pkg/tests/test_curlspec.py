import math
from fractions import Fraction

import numpy as np
import pytest

from contactskyrme.curlspec import (PolyVectorField, assemble, curl_residual, divergence_residual,
                                    eigenspace, laplacian_residual, norm_constancy, spectrum)
from contactskyrme.errors import NotFoundError, ResourceError
from contactskyrme.poly import SpherePoly, restriction_equal
from contactskyrme.s3geom import curl_frame


def expected_multiplicity(k):
    return (k + 1) * (k + 3)


def clusters(rep):
    return {round(v): m for v, m in rep.clusters}


class TestAssembly:
    def test_k0(self):
        p = assemble(0)
        assert p.size == 3 and p.rank == 3
        assert [list(r) for r in p.G] == [[2, 0, 0], [0, 2, 0], [0, 0, 2]]
        assert [list(r) for r in p.C] == [[4, 0, 0], [0, 4, 0], [0, 0, 4]]

    @pytest.mark.parametrize("K", [1, 2, 3])
    def test_exact_symmetry(self, K):
        p = assemble(K)
        n = p.size
        assert all(isinstance(p.C[i][j], Fraction) for i in range(n) for j in range(n))
        assert all(p.C[i][j] == p.C[j][i] for i in range(n) for j in range(i))
        assert all(p.G[i][j] == p.G[j][i] for i in range(n) for j in range(i))

    @pytest.mark.parametrize("K", range(5))
    def test_rank_is_three_times_harmonic_dimension(self, K):
        assert assemble(K).rank == 3 * sum((k + 1) ** 2 for k in range(K + 1))

    def test_gram_positive_definite_on_pivots(self):
        _, G = assemble(3).float_blocks()
        assert np.linalg.eigvalsh(G).min() > 0

    def test_size_cap(self):
        with pytest.raises(ResourceError):
            assemble(7)
        with pytest.raises(ValueError):
            assemble(-1)


class TestSpectrum:
    def test_k1(self):
        rep = spectrum(1)
        assert clusters(rep) == {0: 4, 2: 3, 3: 8}
        assert rep.rank_G == 15 and rep.gradient_count == 4

    def test_k2(self):
        rep = spectrum(2)
        c = clusters(rep)
        assert c[2] == 3 and c[3] == 8 and c[4] == 15 and c[-2] == 3
        assert rep.gradient_count == 13
        assert sum(c.values()) == rep.rank_G == 42

    @pytest.mark.parametrize("K", [3, 4, 5])
    def test_positive_family(self, K):
        rep = spectrum(K)
        c = clusters(rep)
        for k in range(K + 1):
            assert c[k + 2] == expected_multiplicity(k)
        # the negative family -(k+2) needs component degree k+2
        for k in range(K - 1):
            assert c[-(k + 2)] == expected_multiplicity(k)
        assert rep.max_integer_deviation < 1e-9
        assert sum(c.values()) == rep.rank_G
        assert set(c) - {0} <= {s * m for m in range(2, K + 3) for s in (1, -1)}

    def test_multiplicity_lookup_and_dict(self):
        rep = spectrum(2)
        assert rep.multiplicity(4) == 15
        assert rep.multiplicity(7) == 0
        d = rep.as_dict()
        assert d["rankG"] == 42 and {"mu": pytest.approx(4), "multiplicity": 15} in d["clusters"]


class TestEigenspaces:
    def test_mu2_spans_frame(self):
        E = eigenspace(0, 2)
        assert len(E) == 3
        for v in E:
            assert v.exact_field.degree == 0
            assert curl_frame(v.exact_field) == v.exact_field.scale(2)

    @pytest.mark.parametrize("mu", [0, 2, 3, 4, -2])
    def test_exact_eigenfields(self, mu):
        E = eigenspace(2, mu)
        for v in E:
            ex = v.exact_field
            assert ex.components[0].is_exact()
            lhs = curl_frame(ex)
            assert all(restriction_equal(a, b.scale(mu)) for a, b in zip(lhs.components, ex.components))

    def test_mu3_is_degree_one_and_harmonic(self):
        E = eigenspace(1, 3)
        assert len(E) == 8
        for v in E:
            assert v.exact_field.degree == 1
            assert laplacian_residual(v.field, 1) < 1e-12
            assert divergence_residual(v.field) < 1e-12
            assert curl_residual(v.field, 3) < 1e-12

    def test_g_orthonormal(self):
        E = eigenspace(2, 4)
        _, G = assemble(2).float_blocks()
        W = np.array([v.weights for v in E])
        np.testing.assert_allclose(W @ G @ W.T, np.eye(len(E)), atol=1e-12)

    def test_not_found(self):
        with pytest.raises(NotFoundError):
            eigenspace(1, 4)
        with pytest.raises(NotFoundError):
            eigenspace(2, 2.5)

    def test_evaluation(self):
        v = eigenspace(0, 2)[0]
        pts = np.array([[1.0, 0, 0, 0], [0, 0, 0, 1.0]])
        np.testing.assert_allclose(v(pts), v.field(pts))


class TestNormConstancy:
    def test_explicit_combination(self):
        v = PolyVectorField(SpherePoly.const(3), SpherePoly(), SpherePoly.const(4))
        assert norm_constancy(v) == (25.0, 0.0)

    def test_mu2_constant_mu3_not(self):
        for v in eigenspace(1, 2):
            mean, dev = norm_constancy(v)
            assert mean == pytest.approx(0.5) and dev < 1e-10
        for v in eigenspace(1, 3):
            mean, dev = norm_constancy(v)
            assert mean == pytest.approx(0.5) and dev > 0.05
