"""Round geometry of S^3 in the frame (xi, X1, X2).

Orientation is fixed by declaring ``(xi, X1, X2)`` positively oriented.  With
that choice the contact form ``eta = <xi, .>`` satisfies ``*d eta = 2 eta``;
:func:`verify_orientation` checks this at import time and refuses to continue
if the sign comes out wrong.

1-forms and 2-forms are stored by their components in the orthonormal
coframe.  A 2-form ``w`` is stored as ``(w(X1, X2), w(X2, xi), w(xi, X1))`` so
that the Hodge star acts as the identity on component triples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from scipy.special import roots_legendre

from . import kernels
from .errors import ConfigurationError
from .poly import (FRAME_NAMES, SpherePoly, frame_derive, inner_product,
                   sphere_integral)

VOLUME = 2.0 * math.pi**2
MIN_RESOLUTION = 4


# ---------------------------------------------------------------------------
# points and frames


def as_points(points) -> np.ndarray:
    """Coerce to a float array of shape (N, 4) renormalized onto S^3."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    if p.shape[-1] != 4:
        raise ValueError(f"points must have 4 coordinates, got shape {p.shape}")
    return p / np.linalg.norm(p, axis=-1, keepdims=True)


def frame_at(points) -> np.ndarray:
    """Frame vectors ``(xi, X1, X2)`` in R^4 at each point, shape (N, 3, 4)."""
    return kernels.frame_vectors(as_points(points))


def reeb(points) -> np.ndarray:
    """The Reeb field xi at each point, shape (N, 4)."""
    p = as_points(points)
    return np.stack([-p[:, 1], p[:, 0], -p[:, 3], p[:, 2]], axis=1)


def contact_eval(q, v) -> np.ndarray:
    """``eta_q(v) = <xi(q), v>``."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    return np.einsum("nk,nk->n", reeb(q), v)


def deta_eval(q, u, v) -> np.ndarray:
    """``d eta_q(u, v)`` with ``d eta = 2 (dx1 ^ dy1 + dx2 ^ dy2)``; independent of q."""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    return 2.0 * (u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0] + u[:, 2] * v[:, 3] - u[:, 3] * v[:, 2])


def deta_frame(points) -> np.ndarray:
    """Frame components of ``d eta`` at each point, shape (N, 3)."""
    F = frame_at(points)
    return np.stack([
        deta_eval(None, F[:, 1], F[:, 2]),
        deta_eval(None, F[:, 2], F[:, 0]),
        deta_eval(None, F[:, 0], F[:, 1]),
    ], axis=1)


def eta_frame(points) -> np.ndarray:
    """Frame components of ``eta`` at each point, shape (N, 3)."""
    p = as_points(points)
    F = frame_at(p)
    return np.stack([contact_eval(p, F[:, j]) for j in range(3)], axis=1)


# ---------------------------------------------------------------------------
# structure constants, derived from the frame coefficient functions


@lru_cache(maxsize=None)
def structure_constants() -> np.ndarray:
    """``C[a, b, c]`` with ``[e_a, e_b] = sum_c C[a, b, c] e_c`` for ``e = (xi, X1, X2)``.

    Derived symbolically: the commutator is applied to the four coordinate
    functions and matched against the frame, and the match is checked to hold
    as a polynomial identity (so the constants really are constant).
    """
    coords = [SpherePoly.var(k) for k in range(4)]
    frame_polys = [[frame_derive(x, name) for x in coords] for name in FRAME_NAMES]
    C = np.zeros((3, 3, 3), dtype=int)
    base = np.array([1.0, 0.0, 0.0, 0.0])
    for a, na in enumerate(FRAME_NAMES):
        for b, nb in enumerate(FRAME_NAMES):
            comm = [frame_derive(frame_derive(x, nb), na) - frame_derive(frame_derive(x, na), nb)
                    for x in coords]
            # at p = (1,0,0,0) the frame is the standard basis of the last three axes
            vec = np.array([poly(base[None, :])[0] for poly in comm])
            coeffs = [int(round(v)) for v in vec[1:]]
            for k in range(4):
                rebuilt = SpherePoly()
                for c, n in enumerate(coeffs):
                    rebuilt = rebuilt + frame_polys[c][k].scale(n)
                if rebuilt != comm[k]:
                    raise RuntimeError(f"[{na}, {nb}] is not a constant combination of the frame")
            C[a, b] = coeffs
    return C


# ---------------------------------------------------------------------------
# symbolic vector fields


@dataclass(frozen=True)
class PolyVectorField:
    """``f xi + f1 X1 + f2 X2`` with polynomial components."""

    f: SpherePoly = field(default_factory=SpherePoly)
    f1: SpherePoly = field(default_factory=SpherePoly)
    f2: SpherePoly = field(default_factory=SpherePoly)

    @property
    def components(self) -> Tuple[SpherePoly, SpherePoly, SpherePoly]:
        return (self.f, self.f1, self.f2)

    @classmethod
    def from_components(cls, comps) -> "PolyVectorField":
        return cls(*comps)

    def __add__(self, other: "PolyVectorField") -> "PolyVectorField":
        return PolyVectorField(*(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "PolyVectorField") -> "PolyVectorField":
        return PolyVectorField(*(a - b for a, b in zip(self.components, other.components)))

    def scale(self, factor) -> "PolyVectorField":
        return PolyVectorField(*(a.scale(factor) for a in self.components))

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self.components)

    @property
    def degree(self) -> int:
        return max(a.degree for a in self.components)

    def norm_squared(self) -> SpherePoly:
        return self.f * self.f + self.f1 * self.f1 + self.f2 * self.f2

    def __call__(self, points) -> np.ndarray:
        """Frame components at points, shape (N, 3)."""
        return np.stack([a(points) for a in self.components], axis=-1)


def gradient_field(p: SpherePoly) -> PolyVectorField:
    return PolyVectorField(*(frame_derive(p, name) for name in FRAME_NAMES))


def curl_frame(X: PolyVectorField) -> PolyVectorField:
    """Curl of a polynomial field in frame components.

    ``(curl X)_c = e_a(X_b) - e_b(X_a) - sum_d C[a, b, d] X_d`` for each cyclic
    ``(a, b, c)``; with the derived structure constants this is
    ``(2f + X1 f2 - X2 f1) xi + (2f1 + X2 f - xi f2) X1 + (2f2 + xi f1 - X1 f) X2``.
    """
    C = structure_constants()
    comps = X.components
    out = []
    for c in range(3):
        a, b = (c + 1) % 3, (c + 2) % 3
        term = frame_derive(comps[b], FRAME_NAMES[a]) - frame_derive(comps[a], FRAME_NAMES[b])
        for d in range(3):
            if C[a, b, d]:
                term = term - comps[d].scale(int(C[a, b, d]))
        out.append(term)
    return PolyVectorField(*out)


def div_frame(X: PolyVectorField) -> SpherePoly:
    """``xi(f) + X1(f1) + X2(f2)``; the frame fields are divergence free."""
    out = SpherePoly()
    for comp, name in zip(X.components, FRAME_NAMES):
        out = out + frame_derive(comp, name)
    return out


def field_inner_product(u: PolyVectorField, v: PolyVectorField):
    """Exact L^2 inner product of two fields (orthonormal frame)."""
    total = inner_product(u.f, v.f)
    total = total + inner_product(u.f1, v.f1)
    return total + inner_product(u.f2, v.f2)


# ---------------------------------------------------------------------------
# sampled forms


def curl_from_derivatives(beta: np.ndarray, D: np.ndarray) -> np.ndarray:
    """``*d beta`` in frame components from sampled derivatives.

    ``D[:, i, j] = e_i(beta_j)``.  Uses
    ``d beta(e_a, e_b) = e_a(beta_b) - e_b(beta_a) - beta([e_a, e_b])``.
    """
    C = structure_constants().astype(float)
    out = np.empty_like(beta)
    for c in range(3):
        a, b = (c + 1) % 3, (c + 2) % 3
        out[:, c] = D[:, a, b] - D[:, b, a] - beta @ C[a, b]
    return out


def div_from_derivatives(D: np.ndarray) -> np.ndarray:
    return D[:, 0, 0] + D[:, 1, 1] + D[:, 2, 2]


def hodge_star(components, degree: int, conformal_factor=1.0) -> np.ndarray:
    """Hodge star on 1- and 2-forms in the orthonormal coframe.

    For the metric ``c^2 g`` the star on 1-forms multiplies the component
    triple by ``c`` and on 2-forms by ``1/c``.
    """
    comp = np.asarray(components, dtype=float)
    c = np.asarray(conformal_factor, dtype=float)
    if comp.ndim == 2 and c.ndim == 1:
        c = c[:, None]
    if degree == 1:
        return comp * c
    if degree == 2:
        return comp / c
    raise ValueError("hodge_star is defined here for degree 1 and 2 only")


def verify_orientation(n_points: int = 16, seed: int = 0, tol: float = 1e-12) -> float:
    """Check ``*d eta = 2 eta`` at random points; raise if the sign is wrong."""
    rng = np.random.default_rng(seed)
    pts = as_points(rng.normal(size=(n_points, 4)))
    star = hodge_star(deta_frame(pts), 2)
    err = float(np.max(np.abs(star - 2.0 * eta_frame(pts))))
    if err > tol:
        raise RuntimeError(
            f"orientation check failed: *d eta != 2 eta (max deviation {err:.3e}); "
            "the frame order (xi, X1, X2) does not match vol = eta ^ d eta / 2"
        )
    return err


verify_orientation()


# ---------------------------------------------------------------------------
# quadrature


def hyperspherical_point(s, theta, psi) -> np.ndarray:
    """``(cos s, sin s sin th cos psi, sin s sin th sin psi, sin s cos th)``."""
    s, theta, psi = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (s, theta, psi)))
    ss = np.sin(s)
    return np.stack([np.cos(s), ss * np.sin(theta) * np.cos(psi),
                     ss * np.sin(theta) * np.sin(psi), ss * np.cos(theta)], axis=-1)


@dataclass(frozen=True, eq=False)
class GridS3:
    """Tensor-product quadrature grid in hyperspherical coordinates."""

    resolution: Tuple[int, int, int]
    s: np.ndarray
    theta: np.ndarray
    psi: np.ndarray
    points: np.ndarray
    weights: np.ndarray

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.resolution

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def to_config(self) -> dict:
        n_s, n_t, n_p = self.resolution
        return {"n_s": n_s, "n_theta": n_t, "n_psi": n_p}

    @classmethod
    def from_config(cls, cfg) -> "GridS3":
        if isinstance(cfg, dict):
            return build_grid(cfg["n_s"], cfg["n_theta"], cfg["n_psi"])
        return build_grid(*cfg)


def _gauss_on_interval(n: int, a: float, b: float):
    x, w = roots_legendre(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def _tensor_grid(s, ws, n_theta: int, n_psi: int, resolution) -> GridS3:
    th, wt = _gauss_on_interval(n_theta, 0.0, math.pi)
    psi = 2.0 * math.pi * np.arange(n_psi) / n_psi
    wp = np.full(n_psi, 2.0 * math.pi / n_psi)
    S, T, P = np.meshgrid(s, th, psi, indexing="ij")
    W = (ws * np.sin(s) ** 2)[:, None, None] * (wt * np.sin(th))[None, :, None] * wp[None, None, :]
    pts = hyperspherical_point(S, T, P).reshape(-1, 4)
    return GridS3(resolution, s, th, psi, pts, W.reshape(-1))


def build_grid(n_s: int, n_theta: int, n_psi: int) -> GridS3:
    """Gauss-Legendre in s and theta (densities sin^2 s and sin theta), uniform in psi."""
    res = tuple(int(n) for n in (n_s, n_theta, n_psi))
    if min(res) < MIN_RESOLUTION:
        raise ConfigurationError(f"grid resolution {res} below the minimum {MIN_RESOLUTION} per axis")
    s, ws = _gauss_on_interval(res[0], 0.0, math.pi)
    return _tensor_grid(s, ws, res[1], res[2], res)


def build_composite_grid(s_breaks, per_cell: int, n_theta: int, n_psi: int) -> GridS3:
    """Like :func:`build_grid` but composite Gauss-Legendre in s between ``s_breaks``.

    Placing the breaks at the knots of a piecewise-polynomial profile makes
    the s-integrand smooth on every cell.
    """
    b = np.asarray(s_breaks, dtype=float)
    if b.ndim != 1 or b.size < 2 or np.any(np.diff(b) <= 0) or b[0] < 0 or b[-1] > math.pi:
        raise ConfigurationError("s_breaks must increase strictly within [0, pi]")
    if per_cell < 1 or min(n_theta, n_psi) < MIN_RESOLUTION:
        raise ConfigurationError("composite grid needs per_cell >= 1 and angular axes >= 4")
    parts = [_gauss_on_interval(per_cell, lo, hi) for lo, hi in zip(b[:-1], b[1:])]
    s = np.concatenate([p[0] for p in parts])
    ws = np.concatenate([p[1] for p in parts])
    return _tensor_grid(s, ws, int(n_theta), int(n_psi), (s.size, int(n_theta), int(n_psi)))


def quadrature(grid: GridS3, integrand) -> float:
    """Sum of ``weight * integrand(node)``.

    ``integrand`` may be an array of node values, a callable on an (N, 4)
    point array, a :class:`SpherePoly`, or a constant.
    """
    if isinstance(integrand, SpherePoly) or callable(integrand):
        values = np.asarray(integrand(grid.points), dtype=float)
    else:
        values = np.asarray(integrand, dtype=float)
    values = np.broadcast_to(values, grid.weights.shape)
    return float(np.sum(grid.weights * values))


def l2_norm(grid: GridS3, values) -> float:
    """L^2(S^3) norm of sampled scalar or vector values (last axis summed)."""
    v = np.asarray(values, dtype=float)
    sq = v * v if v.ndim == 1 else np.sum(v * v, axis=tuple(range(1, v.ndim)))
    return math.sqrt(max(quadrature(grid, sq), 0.0))


def exact_integral(p: SpherePoly) -> float:
    return float(sphere_integral(p))


def random_points(n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return as_points(rng.normal(size=(n, 4)))
