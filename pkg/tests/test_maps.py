import math

import numpy as np
import pytest

from contactskyrme.errors import ConfigurationError
from contactskyrme.maps import (ArctanProfile, TableProfile, conjugation_map, constant_map, differential,
                                fd_richardson_slope, fourier_test_map, identity_map, make_map,
                                pullback_deta, pullback_eta, push_vectors, quat_mul,
                                random_unit_quaternion, read_profile_csv, right_multiplication_matrix,
                                right_translate, sample_forms, strain, suspension_map)
from contactskyrme.s3geom import frame_at, random_points

PTS = random_points(300, seed=21)


class TestQuaternions:
    def test_basis_products(self):
        one, i, j, k = np.eye(4)
        np.testing.assert_allclose(quat_mul(i, j), k)
        np.testing.assert_allclose(quat_mul(j, k), i)
        np.testing.assert_allclose(quat_mul(k, i), j)
        np.testing.assert_allclose(quat_mul(i, i), -one)

    def test_right_multiplication_is_orthogonal(self, rng):
        u = random_unit_quaternion(rng)
        R = right_multiplication_matrix(u)
        np.testing.assert_allclose(R @ R.T, np.eye(4), atol=1e-14)
        q = random_points(5, seed=2)
        np.testing.assert_allclose(q @ R.T, quat_mul(q, u), atol=1e-14)


class TestFamilies:
    def test_identity_pullback(self):
        np.testing.assert_allclose(pullback_eta(identity_map(), PTS), np.tile([1.0, 0, 0], (len(PTS), 1)), atol=1e-14)
        np.testing.assert_allclose(pullback_deta(identity_map(), PTS), np.tile([2.0, 0, 0], (len(PTS), 1)), atol=1e-14)

    def test_right_translation_preserves_eta(self, rng):
        u = random_unit_quaternion(rng)
        phi = right_translate(u, identity_map())
        np.testing.assert_allclose(pullback_eta(phi, PTS), pullback_eta(identity_map(), PTS), atol=1e-13)
        with pytest.raises(ConfigurationError):
            right_translate([1.0, 1.0, 0, 0], identity_map())

    def test_left_translation_does_not_preserve_eta(self, rng):
        # left translations q -> u q rotate the Reeb field, unlike right translations
        u = random_unit_quaternion(rng)
        L = np.stack([quat_mul(u, e) for e in np.eye(4)], axis=1)
        from contactskyrme.maps import linear_map
        beta = pullback_eta(linear_map(L, "left"), PTS)
        assert np.max(np.abs(beta - [1.0, 0, 0])) > 0.1

    def test_conjugation_reverses_orientation(self):
        J = differential(conjugation_map(), PTS)
        np.testing.assert_allclose(np.linalg.det(J), -1.0, atol=1e-12)

    def test_constant_map_has_zero_differential(self):
        J = differential(constant_map(), PTS[:10])
        assert np.all(J == 0)

    def test_suspension_a1_is_identity(self):
        phi = suspension_map(1.0)
        np.testing.assert_allclose(phi(PTS), PTS, atol=1e-14)
        np.testing.assert_allclose(differential(phi, PTS), np.broadcast_to(np.eye(3), (len(PTS), 3, 3)), atol=1e-12)

    @pytest.mark.parametrize("a", [0.5, 2.0, 5.0])
    def test_suspension_is_conformal(self, a):
        lam, _ = strain(suspension_map(a), PTS)
        np.testing.assert_allclose(lam[:, 0], lam[:, 2], rtol=1e-10)

    def test_arctan_profile(self):
        prof = ArctanProfile(3.0)
        assert prof(0.0) == 0.0
        assert prof(math.pi) == pytest.approx(math.pi)
        s = np.linspace(0.1, 3.0, 7)
        h = 1e-6
        np.testing.assert_allclose(prof.derivative(s), (prof(s + h) - prof(s - h)) / (2 * h), rtol=1e-8)
        with pytest.raises(ConfigurationError):
            ArctanProfile(-1.0)

    def test_table_profile_validation(self):
        s = np.linspace(0, math.pi, 5)
        TableProfile(s, s)
        with pytest.raises(ConfigurationError):
            TableProfile(s, s + 0.1)
        with pytest.raises(ConfigurationError):
            TableProfile(s, 1.5 * s)
        with pytest.raises(ConfigurationError):
            TableProfile(s[::-1], s)

    def test_profile_csv_roundtrip(self, tmp_path):
        s = np.linspace(0, math.pi, 9)
        path = tmp_path / "prof.csv"
        path.write_text("s,alpha\n" + "".join(f"{float(a)!r},{float(b)!r}\n" for a, b in zip(s, 2 * s)))
        prof = read_profile_csv(path)
        assert prof.B == 2
        np.testing.assert_allclose(prof(s), 2 * s)
        bad = tmp_path / "bad.csv"
        bad.write_text("s,alpha\n")
        with pytest.raises(ConfigurationError):
            read_profile_csv(bad)

    def test_fourier_map_is_deterministic_and_bounded(self):
        a = fourier_test_map(4)(PTS)
        b = fourier_test_map(4)(PTS)
        np.testing.assert_array_equal(a, b)
        np.testing.assert_allclose(np.linalg.norm(a, axis=1), 1.0)
        with pytest.raises(ConfigurationError):
            fourier_test_map(0, amplitude=1.5)

    def test_make_map(self, tmp_path):
        assert make_map("identity").label == "identity"
        assert make_map("suspension", a=2.0).label.startswith("suspension")
        assert make_map("right_translate", u=[0, 1, 0, 0]).label.startswith("right_translate")
        with pytest.raises(ConfigurationError):
            make_map("nonesuch")
        with pytest.raises(ConfigurationError):
            make_map("profile_suspension")


class TestDifferentials:
    @pytest.mark.parametrize("phi", [suspension_map(2.0), fourier_test_map(1),
                                     right_translate([0.5, 0.5, 0.5, 0.5], suspension_map(5.0))],
                             ids=["suspension", "fourier", "right_translate"])
    def test_richardson_slope(self, phi):
        assert 1.8 <= fd_richardson_slope(phi, PTS) <= 2.2

    def test_fd_matches_analytic(self):
        phi = fourier_test_map(2)
        J_fd = differential(phi.without_differential(), PTS)
        np.testing.assert_allclose(J_fd, differential(phi, PTS), atol=1e-7)

    def test_pushed_vectors_are_tangent(self):
        phi = fourier_test_map(5)
        q, P = push_vectors(phi.without_differential(), PTS, frame_at(PTS))
        np.testing.assert_allclose(np.einsum("nkd,nd->nk", P, q), 0.0, atol=1e-13)

    def test_zero_vector_pushes_to_zero(self):
        V = np.zeros((3, 1, 4))
        _, P = push_vectors(fourier_test_map(0).without_differential(), PTS[:3], V)
        assert np.all(P == 0)

    def test_sample_forms_consistent(self):
        s = sample_forms(suspension_map(2.0), PTS)
        np.testing.assert_array_equal(s.xi_hat, s.beta)
        assert s.omega.shape == (len(PTS), 3)

    def test_strain_eigen_decomposition(self):
        lam, vecs = strain(fourier_test_map(3), PTS[:20])
        assert np.all(np.diff(lam, axis=1) >= 0)
        np.testing.assert_allclose(np.einsum("nij,nik->njk", vecs, vecs),
                                   np.broadcast_to(np.eye(3), (20, 3, 3)), atol=1e-12)
