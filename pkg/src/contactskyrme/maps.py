"""Maps S^3 -> S^3 with differentials, pullbacks of the contact structure and strain.

A :class:`MapS3` wraps a vectorized evaluator ``(N, 4) -> (N, 4)`` and,
optionally, an analytic pushforward ``push(points, vectors)`` taking tangent
vectors of shape ``(N, k, 4)`` at the points to their images.  Without an
analytic pushforward, differentials come from central differences along
great circles.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import kernels
from .errors import ConfigurationError
from .s3geom import as_points, frame_at, reeb

FD_STEP = 1e-4


def _project_tangent(q: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Remove the component of each ``V[:, k]`` along ``q``."""
    return V - np.einsum("nkd,nd->nk", V, q)[..., None] * q[:, None, :]


@dataclass(frozen=True, eq=False)
class MapS3:
    evaluator: Callable[[np.ndarray], np.ndarray]
    push: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    label: str = "map"

    def __call__(self, points) -> np.ndarray:
        return self.evaluator(as_points(points))

    @property
    def has_analytic_differential(self) -> bool:
        return self.push is not None

    def without_differential(self) -> "MapS3":
        return MapS3(self.evaluator, None, self.label + "[fd]")


# ---------------------------------------------------------------------------
# quaternion helpers; coordinates (x1, y1, x2, y2) = (w, i, j, k)


def quat_mul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ], axis=-1)


def right_multiplication_matrix(u) -> np.ndarray:
    """Matrix ``R`` with ``R @ q = q * u``."""
    return np.stack([quat_mul(e, u) for e in np.eye(4)], axis=1)


def random_unit_quaternion(rng: np.random.Generator) -> np.ndarray:
    u = rng.normal(size=4)
    return u / np.linalg.norm(u)


# ---------------------------------------------------------------------------
# families


def identity_map() -> MapS3:
    return MapS3(lambda p: p.copy(), lambda p, V: V.copy(), "identity")


def linear_map(matrix, label: str) -> MapS3:
    M = np.asarray(matrix, dtype=float)
    return MapS3(lambda p: p @ M.T, lambda p, V: V @ M.T, label)


def conjugation_map() -> MapS3:
    return linear_map(np.diag([1.0, -1.0, -1.0, -1.0]), "conjugation")


def constant_map(point=(1.0, 0.0, 0.0, 0.0)) -> MapS3:
    q0 = as_points(point)[0]
    return MapS3(lambda p: np.broadcast_to(q0, p.shape).copy(),
                 lambda p, V: np.zeros_like(V), "constant")


def right_translate(u, phi: MapS3) -> MapS3:
    """``p -> phi(p) * u``; right translations preserve the contact form."""
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > 1e-12:
        raise ConfigurationError("right translation needs a unit quaternion")
    R = right_multiplication_matrix(u)
    push = None
    if phi.push is not None:
        push = lambda p, V: phi.push(p, V) @ R.T
    return MapS3(lambda p: phi.evaluator(p) @ R.T, push, f"right_translate({phi.label})")


class SuspensionProfile:
    """Radial profile ``alpha`` of a suspension map, with derivative."""

    def __call__(self, s):
        raise NotImplementedError

    def derivative(self, s):
        raise NotImplementedError


class ArctanProfile(SuspensionProfile):
    """``alpha(s) = 2 arctan(a tan(s/2))``, continued so that ``alpha(pi) = pi``."""

    def __init__(self, a: float):
        if not (a > 0 and math.isfinite(a)):
            raise ConfigurationError(f"suspension parameter must be positive, got {a}")
        self.a = float(a)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return 2.0 * np.arctan2(self.a * np.sin(0.5 * s), np.cos(0.5 * s))

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        return self.a / (np.cos(0.5 * s) ** 2 + self.a**2 * np.sin(0.5 * s) ** 2)

    def coupling(self, s):
        """Coupling for which the suspension map solves the Bogomol'nyi equation."""
        a = self.a
        return 4.0 * a / (1.0 + a * a + (1.0 - a * a) * np.cos(s))


class TableProfile(SuspensionProfile):
    """Monotone cubic (PCHIP) interpolant through ``(s_i, alpha_i)``."""

    def __init__(self, s, alpha):
        s = np.asarray(s, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        if s.ndim != 1 or s.shape != alpha.shape or s.size < 2:
            raise ConfigurationError("profile table needs two equal-length columns")
        if np.any(np.diff(s) <= 0):
            raise ConfigurationError("profile s values must be strictly increasing")
        if s[0] != 0.0 or abs(s[-1] - math.pi) > 1e-12:
            raise ConfigurationError("profile table must span s in [0, pi]")
        if abs(alpha[0]) > 1e-12:
            raise ConfigurationError("profile must satisfy alpha(0) = 0")
        winding = alpha[-1] / math.pi
        if abs(winding - round(winding)) > 1e-9:
            raise ConfigurationError("profile must end at an integer multiple of pi")
        if not np.all(np.isfinite(alpha)):
            raise ConfigurationError("profile values must be finite")
        self.s = s
        self.alpha = alpha
        self.B = int(round(winding))
        self._interp = PchipInterpolator(s, alpha)
        self._deriv = self._interp.derivative()

    def __call__(self, s):
        return self._interp(np.asarray(s, dtype=float))

    def derivative(self, s):
        return self._deriv(np.asarray(s, dtype=float))


def read_profile_csv(path) -> TableProfile:
    """Read a two-column ``s, alpha`` CSV (header row optional)."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                if rows:
                    raise ConfigurationError(f"malformed profile row {row!r} in {path}")
    if not rows:
        raise ConfigurationError(f"no profile rows in {path}")
    s, alpha = np.array(rows).T
    return TableProfile(s, alpha)


def suspension_from_profile(profile: SuspensionProfile, label: str = "suspension") -> MapS3:
    """``(cos s, n sin s) -> (cos alpha(s), n sin alpha(s))`` with analytic differential."""

    def split(p):
        w = p[:, 1:]
        sin_s = np.linalg.norm(w, axis=1)
        s = np.arctan2(sin_s, p[:, 0])
        return s, sin_s, w

    def evaluate(p):
        s, sin_s, w = split(p)
        alpha = profile(s)
        safe = np.where(sin_s > 0, sin_s, 1.0)
        n = w / safe[:, None]
        out = np.empty_like(p)
        out[:, 0] = np.cos(alpha)
        out[:, 1:] = n * np.sin(alpha)[:, None]
        return out

    def push(p, V):
        s, sin_s, w = split(p)
        alpha = profile(s)
        dalpha = profile.derivative(s)
        pole = sin_s < 1e-12
        safe = np.where(pole, 1.0, sin_s)
        n = w / safe[:, None]
        ds = -V[..., 0] / safe[:, None]
        Vw = V[..., 1:]
        dn = (Vw - np.einsum("nkd,nd->nk", Vw, n)[..., None] * n[:, None, :]) / safe[:, None, None]
        out = np.empty_like(V)
        out[..., 0] = -np.sin(alpha)[:, None] * dalpha[:, None] * ds
        out[..., 1:] = (n[:, None, :] * (np.cos(alpha) * dalpha)[:, None, None] * ds[..., None]
                        + np.sin(alpha)[:, None, None] * dn)
        if np.any(pole):
            # near a pole the map is the dilation v -> alpha'(pole) v on the tangent space
            sign = np.where(p[pole, 0] > 0, 1.0, np.cos(alpha[pole]) * -1.0)
            lim = V[pole].copy()
            lim[..., 0] = 0.0
            out[pole] = lim * (dalpha[pole] * sign)[:, None, None]
        return out

    return MapS3(evaluate, push, label)


def suspension_map(a: float) -> MapS3:
    prof = ArctanProfile(a)
    m = suspension_from_profile(prof, f"suspension(a={a:g})")
    return m


def profile_suspension(profile: TableProfile) -> MapS3:
    return suspension_from_profile(profile, f"profile_suspension(B={profile.B})")


def fourier_test_map(seed: int, amplitude: float = 0.2, n_modes: int = 3,
                     max_wavenumber: int = 2, reference: MapS3 | None = None) -> MapS3:
    """Smooth map ``p -> normalize(ref(p) + eps * sum_m A_m sin(k_m . p + phase_m))``.

    The perturbation has sup-norm below ``amplitude`` < 1, so the straight-line
    homotopy to ``ref`` never passes through zero and the degree is that of
    ``ref`` (the identity by default).
    """
    if not (0.0 <= amplitude < 1.0):
        raise ConfigurationError("fourier_test amplitude must lie in [0, 1)")
    ref = reference or identity_map()
    if ref.push is None:
        raise ConfigurationError("fourier_test reference needs an analytic differential")
    rng = np.random.default_rng(seed)
    K = rng.integers(-max_wavenumber, max_wavenumber + 1, size=(n_modes, 4)).astype(float)
    A = rng.normal(size=(n_modes, 4))
    A *= amplitude / np.sum(np.linalg.norm(A, axis=1))
    phase = rng.uniform(0, 2 * math.pi, size=n_modes)

    def raw(p):
        arg = p @ K.T + phase
        return ref.evaluator(p) + np.sin(arg) @ A, arg

    def evaluate(p):
        F, _ = raw(p)
        return F / np.linalg.norm(F, axis=1, keepdims=True)

    def push(p, V):
        F, arg = raw(p)
        nF = np.linalg.norm(F, axis=1)
        q = F / nF[:, None]
        kv = np.einsum("md,nkd->nkm", K, V)
        dF = ref.push(p, V) + np.einsum("nkm,nm,md->nkd", kv, np.cos(arg), A)
        return _project_tangent(q, dF) / nF[:, None, None]

    return MapS3(evaluate, push, f"fourier_test(seed={seed})")


def make_map(family: str, **params) -> MapS3:
    """Build a named map family.

    ``identity``, ``conjugation``, ``constant``, ``suspension`` (``a``),
    ``right_translate`` (``u``, ``base``), ``profile_suspension``
    (``profile`` or ``csv``), ``fourier_test`` (``seed``, ``amplitude``).
    """
    if family == "identity":
        return identity_map()
    if family == "conjugation":
        return conjugation_map()
    if family == "constant":
        return constant_map(params.get("point", (1.0, 0.0, 0.0, 0.0)))
    if family == "suspension":
        return suspension_map(float(params.get("a", 1.0)))
    if family == "right_translate":
        base = params.get("base") or identity_map()
        return right_translate(params["u"], base)
    if family == "profile_suspension":
        prof = params.get("profile")
        if prof is None:
            if "csv" not in params:
                raise ConfigurationError("profile_suspension needs a profile or a csv path")
            prof = read_profile_csv(params["csv"])
        return profile_suspension(prof)
    if family == "fourier_test":
        return fourier_test_map(int(params.get("seed", 0)), float(params.get("amplitude", 0.2)))
    raise ConfigurationError(f"unknown map family {family!r}")


# ---------------------------------------------------------------------------
# differentials and pullbacks


def push_vectors(phi: MapS3, points, vectors, h: float = FD_STEP):
    """Images of points and of tangent vectors ``(N, k, 4)`` under ``phi``.

    Without an analytic differential: ``[phi(cos h p + sin h v) - phi(cos h p - sin h v)] / (2 sin h)``
    for unit ``v`` (rescaled for other lengths), projected onto the tangent
    space at ``phi(p)``.
    """
    p = as_points(points)
    V = np.asarray(vectors, dtype=float)
    q = phi.evaluator(p)
    if phi.push is not None:
        return q, _project_tangent(q, phi.push(p, V))
    n, k = V.shape[:2]
    lengths = np.linalg.norm(V, axis=-1)
    safe = np.where(lengths > 0, lengths, 1.0)
    unit = V / safe[..., None]
    ch, sh = math.cos(h), math.sin(h)
    plus = (ch * p[:, None, :] + sh * unit).reshape(-1, 4)
    minus = (ch * p[:, None, :] - sh * unit).reshape(-1, 4)
    diff = (phi.evaluator(plus) - phi.evaluator(minus)).reshape(n, k, 4) / (2.0 * sh)
    diff *= lengths[..., None]
    return q, _project_tangent(q, diff)


def push_frame(phi: MapS3, points, h: float = FD_STEP):
    """``(phi(p), dphi(e_j))`` for the domain frame ``e = (xi, X1, X2)``."""
    p = as_points(points)
    return push_vectors(phi, p, frame_at(p), h)


def differential(phi: MapS3, points, h: float = FD_STEP) -> np.ndarray:
    """Jacobian in frames: ``J[:, i, j] = <dphi(e_j), e~_i(phi(p))>``, shape (N, 3, 3)."""
    q, P = push_frame(phi, points, h)
    return np.einsum("nid,njd->nij", frame_at(q), P)


@dataclass(frozen=True, eq=False)
class FormSample:
    """Pulled-back contact data at a batch of points."""

    points: np.ndarray
    images: np.ndarray
    pushed: np.ndarray
    beta: np.ndarray
    omega: np.ndarray

    @property
    def xi_hat(self) -> np.ndarray:
        # orthonormal frame: the dual vector has the same components
        return self.beta


def sample_forms(phi: MapS3, points, h: float = FD_STEP) -> FormSample:
    p = as_points(points)
    q, P = push_frame(phi, p, h)
    beta, omega = kernels.pullback_components(q, P)
    return FormSample(p, q, P, beta, omega)


def pullback_eta(phi: MapS3, points, h: float = FD_STEP) -> np.ndarray:
    """Frame components of ``phi^* eta``, shape (N, 3)."""
    return sample_forms(phi, points, h).beta


def pullback_deta(phi: MapS3, points, h: float = FD_STEP) -> np.ndarray:
    """Frame components of ``phi^* d eta`` (cyclic convention), shape (N, 3)."""
    return sample_forms(phi, points, h).omega


def strain(phi: MapS3, points, h: float = FD_STEP):
    """Eigenvalues (ascending) and eigenvectors of ``J^T J`` in the domain frame."""
    J = differential(phi, points, h)
    lam, vecs = np.linalg.eigh(np.einsum("nki,nkj->nij", J, J))
    return lam, vecs


def fd_richardson_slope(phi: MapS3, points, steps=(4e-2, 2e-2, 1e-2)) -> float:
    """Observed order of the finite-difference Jacobian against the analytic one.

    Fits ``log(max error)`` against ``log(h)``; a central difference should
    give a slope close to 2.
    """
    if phi.push is None:
        raise ConfigurationError("the Richardson check needs an analytic differential")
    exact = differential(phi, points)
    fd = phi.without_differential()
    errors = [float(np.max(np.abs(differential(fd, points, h) - exact))) for h in steps]
    slope, _ = np.polyfit(np.log(steps), np.log(errors), 1)
    return float(slope)
