"""Energy, degree, Bogomol'nyi defect and Beltrami-map property checks.

All quantities are sampled on a :class:`~contactskyrme.s3geom.GridS3`.
Derivatives of the pulled-back form ``beta = phi^* eta`` along the frame are
taken with a five-point central stencil along the great circles
``t -> cos t p + sin t e_i(p)``, which are the integral curves of the frame
fields.  ``d beta`` is then assembled with the commutator correction from
:func:`~contactskyrme.s3geom.curl_from_derivatives`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import kernels
from .errors import EvaluationError, InputError
from .maps import MapS3, push_frame, push_vectors, sample_forms
from .s3geom import (GridS3, as_points, build_grid, curl_from_derivatives, div_from_derivatives,
                     frame_at, hodge_star, l2_norm, quadrature, reeb)

TARGET_VOLUME = 2.0 * math.pi**2
BOUND_UNIT = 2.0 * TARGET_VOLUME  # 4 pi^2, the bound per unit of degree
CRITICAL_BETA = 1e-10
RANK_THRESHOLD = 1e-8

INNER_STEP = 1e-4
OUTER_STEP = 1e-3
CHUNK = 1024

# f'(0) ~ sum_k w_k f(t_k h) / h, fourth order
_D1 = ((2.0, -1.0 / 12.0), (1.0, 8.0 / 12.0), (-1.0, -8.0 / 12.0), (-2.0, 1.0 / 12.0))
# f''(0) ~ sum_k w_k f(t_k h) / h^2, fourth order
_D2 = ((2.0, -1.0 / 12.0), (1.0, 16.0 / 12.0), (0.0, -30.0 / 12.0), (-1.0, 16.0 / 12.0), (-2.0, -1.0 / 12.0))

DEFAULT_TOLERANCES = {
    "collinearity": 1e-6,
    "strain_eigenpair": 1e-6,
    "eigenvalue_identity": 1e-5,
    "confoliation": 1e-8,
    "laplacian_eigenform": 1e-4,
    "divergence_identity": 1e-4,
    "conformal_rescale": 1e-4,
    "rank_histogram": 0.0,
    "tension_identity": 1e-4,
    "determinant_sign": 1e-8,
}


# ---------------------------------------------------------------------------
# couplings


@dataclass(frozen=True)
class Coupling:
    """A positive coupling, constant or given pointwise."""

    label: str
    value: Optional[float] = None
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @property
    def is_constant(self) -> bool:
        return self.value is not None

    def __call__(self, points) -> np.ndarray:
        p = as_points(points)
        if self.value is not None:
            return np.full(p.shape[0], self.value)
        return np.asarray(self.func(p), dtype=float)


def suspension_coupling(a: float) -> Coupling:
    """``c = 4a / (1 + a^2 + (1 - a^2) cos s)`` with ``cos s = x1``."""
    a = float(a)
    return Coupling(f"pointwise(suspension a={a:g})",
                    func=lambda p: 4.0 * a / (1.0 + a * a + (1.0 - a * a) * p[:, 0]))


def resolve_coupling(c, phi: MapS3 | None = None) -> Coupling:
    """Accept a number, a :class:`Coupling`, a callable, or ``"pointwise"``.

    ``"pointwise"`` uses the measured ratio ``<*d beta, beta> / |beta|^2`` of
    ``phi`` itself.
    """
    if isinstance(c, Coupling):
        return c
    if isinstance(c, str):
        if c != "pointwise":
            raise InputError(f"unknown coupling mode {c!r}")
        if phi is None:
            raise InputError("pointwise coupling needs the map")
        return Coupling("pointwise(measured)", func=lambda p: pointwise_coupling(phi, p).c_pt)
    if callable(c):
        return Coupling("pointwise", func=c)
    value = float(c)
    return Coupling(f"constant({value:g})", value=value)


def _coupling_on(c: Coupling, points) -> np.ndarray:
    vals = c(points)
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        raise InputError("coupling must be positive and finite at every node")
    return vals


# ---------------------------------------------------------------------------
# frame derivatives


def _geodesic_points(p: np.ndarray, F: np.ndarray, offsets, h: float) -> np.ndarray:
    """Points ``cos(t h) p + sin(t h) e_i`` for every node, direction and offset: (N, 3, K, 4)."""
    t = np.array([o for o, _ in offsets]) * h
    return (np.cos(t)[None, None, :, None] * p[:, None, None, :]
            + np.sin(t)[None, None, :, None] * F[:, :, None, :])


def frame_derivatives(fun, points, h: float):
    """``D[:, i, ...] = e_i(fun)`` by the five-point stencil along frame geodesics."""
    p = as_points(points)
    F = frame_at(p)
    pts = _geodesic_points(p, F, _D1, h)
    n = p.shape[0]
    vals = np.asarray(fun(pts.reshape(-1, 4)))
    vals = vals.reshape((n, 3, len(_D1)) + vals.shape[1:])
    w = np.array([wk for _, wk in _D1]) / h
    return np.einsum("nik...,k->ni...", vals, w)


@dataclass(frozen=True, eq=False)
class CurlSample:
    """``beta``, ``omega``, ``*d beta`` (from FD) and the derivative table at nodes."""

    points: np.ndarray
    images: np.ndarray
    pushed: np.ndarray
    beta: np.ndarray
    omega: np.ndarray
    dbeta: np.ndarray  # D[:, i, j] = e_i(beta_j)
    curl: np.ndarray

    @property
    def divergence(self) -> np.ndarray:
        return div_from_derivatives(self.dbeta)


def curl_sample(phi: MapS3, points, h: float = INNER_STEP) -> CurlSample:
    p = as_points(points)
    s = sample_forms(phi, p)
    D = frame_derivatives(lambda x: sample_forms(phi, x).beta, p, h)
    return CurlSample(p, s.images, s.pushed, s.beta, s.omega, D, curl_from_derivatives(s.beta, D))


def _beta_and_curl(phi: MapS3, h: float):
    def fun(x):
        cs = curl_sample(phi, x, h)
        return np.concatenate([cs.beta, cs.curl], axis=1)
    return fun


def _tension_along_xi(phi: MapS3, p: np.ndarray, images: np.ndarray) -> np.ndarray:
    """``<tau(phi), xi(phi(p))>`` with ``tau`` the tangential part of ``sum_i e_i(e_i(phi))``."""
    F = frame_at(p)
    n = p.shape[0]
    if phi.push is not None:
        # derivative of dphi(e_i) along the integral curve of e_i
        pts = _geodesic_points(p, F, _D1, OUTER_STEP)
        flat = pts.reshape(-1, 4)
        tang = frame_at(flat).reshape(n, 3, len(_D1), 3, 4)
        vec = np.stack([tang[:, i, :, i, :] for i in range(3)], axis=1).reshape(-1, 1, 4)
        _, W = push_vectors(phi, flat, vec)
        W = W.reshape(n, 3, len(_D1), 4)
        w = np.array([wk for _, wk in _D1]) / OUTER_STEP
    else:
        pts = _geodesic_points(p, F, _D2, OUTER_STEP)
        W = phi.evaluator(pts.reshape(-1, 4)).reshape(n, 3, len(_D2), 4)
        w = np.array([wk for _, wk in _D2]) / OUTER_STEP**2
    lap = np.einsum("nikd,k->nd", W, w)
    tau = lap - np.einsum("nd,nd->n", lap, images)[:, None] * images
    return np.einsum("nd,nd->n", tau, reeb(images))


# ---------------------------------------------------------------------------
# energy, degree, defect


def energy_and_degree(phi: MapS3, c, grid: GridS3):
    """``(E, deg)`` in one pass over the grid."""
    cc = resolve_coupling(c, phi)
    q, P = push_frame(phi, grid.points)
    cvals = _coupling_on(cc, grid.points)
    e, d = kernels.energy_degree(q, P, cvals, grid.weights)
    if not (math.isfinite(e) and math.isfinite(d)):
        raise EvaluationError(f"non-finite energy for {phi.label}")
    return e, d / BOUND_UNIT


def energy(phi: MapS3, c, grid: GridS3) -> float:
    """``0.5 * integral of (c |phi^* eta|^2 + |phi^* d eta|^2 / c)``."""
    return energy_and_degree(phi, c, grid)[0]


def degree(phi: MapS3, grid: GridS3) -> float:
    """``(1 / 4 pi^2) * integral of phi^*(eta ^ d eta)``."""
    q, P = push_frame(phi, grid.points)
    _, d = kernels.energy_degree(q, P, 1.0, grid.weights)
    return d / BOUND_UNIT


def _chunks(n: int, size: int = CHUNK):
    for start in range(0, n, size):
        yield slice(start, min(n, start + size))


def _curl_on_grid(phi: MapS3, grid: GridS3, h: float = INNER_STEP):
    parts = [curl_sample(phi, grid.points[sl], h) for sl in _chunks(grid.size)]
    return CurlSample(*(np.concatenate([getattr(cs, f) for cs in parts])
                        for f in ("points", "images", "pushed", "beta", "omega", "dbeta", "curl")))


def bps_defect(phi: MapS3, c, grid: GridS3, h: float = INNER_STEP) -> float:
    """L^2 norm of ``*d beta - c beta``."""
    cc = resolve_coupling(c, phi)
    cs = _curl_on_grid(phi, grid, h)
    cvals = _coupling_on(cc, grid.points)
    return l2_norm(grid, cs.curl - cvals[:, None] * cs.beta)


@dataclass(frozen=True, eq=False)
class PointwiseCoupling:
    c_pt: np.ndarray
    residual: np.ndarray
    critical: np.ndarray  # True where |beta| is below the critical threshold


def pointwise_coupling(phi: MapS3, points, h: float = INNER_STEP) -> PointwiseCoupling:
    """``c_pt = <*d beta, beta> / |beta|^2`` and ``|*d beta - c_pt beta|``.

    At critical points (``|beta| < 1e-10``) ``c_pt`` is NaN and ``critical``
    is set.
    """
    cs = curl_sample(phi, points, h)
    b2 = np.einsum("nj,nj->n", cs.beta, cs.beta)
    critical = np.sqrt(b2) < CRITICAL_BETA
    safe = np.where(critical, 1.0, b2)
    c_pt = np.einsum("nj,nj->n", cs.curl, cs.beta) / safe
    res = np.linalg.norm(cs.curl - c_pt[:, None] * cs.beta, axis=1)
    c_pt = np.where(critical, np.nan, c_pt)
    res = np.where(critical, np.nan, res)
    return PointwiseCoupling(c_pt, res, critical)


# ---------------------------------------------------------------------------
# property checks


@dataclass
class CheckResult:
    name: str
    residual: float
    tolerance: float
    passed: bool
    skipped: bool = False
    detail: Dict[str, object] = field(default_factory=dict)


@dataclass
class PropertyReport:
    map_label: str
    coupling: str
    resolution: tuple
    checks: List[CheckResult]
    critical_nodes: int
    rank_histogram: Dict[int, int]

    @property
    def passed(self) -> bool:
        return all(ch.passed for ch in self.checks if not ch.skipped)

    def __getitem__(self, name: str) -> CheckResult:
        for ch in self.checks:
            if ch.name == name:
                return ch
        raise KeyError(name)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["resolution"] = list(self.resolution)
        out["rank_histogram"] = {str(k): v for k, v in self.rank_histogram.items()}
        out["passed"] = self.passed
        return out


def _node_quantities(phi: MapS3, p: np.ndarray, constant_c: Optional[float]):
    """Everything the ten checks need at one chunk of nodes."""
    cs = curl_sample(phi, p, INNER_STEP)
    beta, curl = cs.beta, cs.curl
    b2 = np.einsum("nj,nj->n", beta, beta)
    critical = np.sqrt(b2) < CRITICAL_BETA
    safe = np.where(critical, 1.0, b2)
    bc = np.einsum("nj,nj->n", beta, curl)
    c_pt = bc / safe

    # second level: derivatives of (beta, *d beta) with the outer step
    D2 = frame_derivatives(_beta_and_curl(phi, INNER_STEP), p, OUTER_STEP)
    d_beta, d_curl = D2[:, :, :3], D2[:, :, 3:]
    curlcurl = curl_from_derivatives(curl, d_curl)
    # e_i(c_pt) by the quotient rule
    d_bc = np.einsum("nij,nj->ni", d_beta, curl) + np.einsum("nj,nij->ni", beta, d_curl)
    d_b2 = 2.0 * np.einsum("nij,nj->ni", d_beta, beta)
    d_c = (d_bc * safe[:, None] - bc[:, None] * d_b2) / (safe**2)[:, None]
    xi_hat_c = np.einsum("nj,nj->n", beta, d_c)

    q = cs.images
    J = np.einsum("nid,njd->nij", frame_at(q), cs.pushed)
    tension = _tension_along_xi(phi, p, q)
    return dict(beta=beta, omega=cs.omega, curl=curl, b2=b2, critical=critical, c_pt=c_pt,
                div=cs.divergence, curlcurl=curlcurl, xi_hat_c=xi_hat_c, images=q,
                pushed=cs.pushed, J=J, tension=tension)


def _collect(phi: MapS3, grid: GridS3, constant_c):
    parts = [_node_quantities(phi, grid.points[sl], constant_c) for sl in _chunks(grid.size)]
    return {k: np.concatenate([part[k] for part in parts]) for k in parts[0]}


def _strain_terms(J, beta, b2, critical, cluster_tol=1e-6):
    """Per node: eigenvalue mismatch, subspace angle, and ``(lam1^2, lam2^2 lam3^2)``.

    ``lam1^2`` is the eigenvalue of ``J^T J`` closest to ``|beta|^2``.  The
    angle is between ``beta`` and the full eigenspace of that eigenvalue, so it
    is well defined at degenerate eigenvalues.
    """
    M = np.einsum("nki,nkj->nij", J, J)
    lam, vecs = np.linalg.eigh(M)
    k = np.argmin(np.abs(lam - b2[:, None]), axis=1)
    lam1 = lam[np.arange(lam.shape[0]), k]
    others = np.prod(lam, axis=1) / np.where(np.abs(lam1) > 0, lam1, 1.0)
    mismatch = np.abs(lam1 - b2)
    in_space = np.abs(lam - lam1[:, None]) <= cluster_tol * np.maximum(1.0, np.abs(lam1))[:, None]
    coords = np.einsum("nji,nj->ni", vecs, beta)
    proj = np.sqrt(np.sum(np.where(in_space, coords**2, 0.0), axis=1))
    norm = np.sqrt(np.where(critical, 1.0, b2))
    angle = np.arccos(np.clip(proj / norm, -1.0, 1.0))
    angle = np.where(critical, 0.0, angle)
    return lam, mismatch, angle, lam1, others


def check_properties(phi: MapS3, c, grid: GridS3, tolerances: Optional[dict] = None) -> PropertyReport:
    """Run the ten Beltrami-map checks over the grid.

    Failed checks are findings, not exceptions.  The Laplacian eigenform
    check needs a constant coupling and is skipped otherwise.
    """
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    cc = resolve_coupling(c, phi)
    Q = _collect(phi, grid, cc.value)
    beta, b2, crit = Q["beta"], Q["b2"], Q["critical"]
    live = ~crit
    n_crit = int(np.count_nonzero(crit))
    checks = []

    def add(name, residual, detail=None, skipped=False, passed=None):
        residual = float(residual)
        if passed is None:
            passed = bool(np.isfinite(residual) and residual <= tol[name])
        checks.append(CheckResult(name, residual, tol[name], passed and not skipped, skipped, detail or {}))

    # (a) dphi(xi_hat) = |beta|^2 xi(phi)
    push_xi_hat = np.einsum("nj,njd->nd", beta, Q["pushed"])
    coll = np.linalg.norm(push_xi_hat - b2[:, None] * reeb(Q["images"]), axis=1)
    add("collinearity", coll.max())

    # (b) xi_hat is an eigenvector of J^T J with eigenvalue |beta|^2
    lam, mismatch, angle, lam1, others = _strain_terms(Q["J"], beta, b2, crit)
    add("strain_eigenpair", max(mismatch.max(), angle.max()),
        {"max_eigenvalue_mismatch": float(mismatch.max()), "max_angle": float(angle.max())})

    # (c) 4 lam2^2 lam3^2 = c^2 lam1^2
    ident = np.abs(4.0 * others - Q["c_pt"] ** 2 * lam1)
    add("eigenvalue_identity", ident[live].max() if live.any() else 0.0)

    # (d) beta ^ d beta >= 0
    conf = np.einsum("nj,nj->n", beta, Q["curl"])
    add("confoliation", max(0.0, -conf.min()), {"min_beta_wedge_dbeta": float(conf.min())})

    # (e) curl curl beta = c^2 beta (constant c only)
    if cc.is_constant:
        add("laplacian_eigenform", l2_norm(grid, Q["curlcurl"] - cc.value**2 * beta))
    else:
        add("laplacian_eigenform", 0.0, {"reason": "coupling not constant"}, skipped=True)

    # (f) div xi_hat + xi_hat(c) / c = 0
    c_safe = np.where(live, Q["c_pt"], 1.0)
    div_res = np.where(live, Q["div"] + Q["xi_hat_c"] / c_safe, 0.0)
    add("divergence_identity", l2_norm(grid, div_res),
        {"divergence_l2": l2_norm(grid, Q["div"])})

    # (g) the conformally rescaled star gives a 1-Beltrami form
    rescaled = hodge_star(Q["curl"], 2, conformal_factor=c_safe) - beta
    rescaled[crit] = 0.0
    add("conformal_rescale", l2_norm(grid, rescaled))

    # (h) rank histogram; strong Beltrami maps have no rank-2 points
    sv = np.linalg.svd(Q["J"], compute_uv=False)
    ranks = np.sum(sv > RANK_THRESHOLD, axis=1)
    hist = {r: int(np.count_nonzero(ranks == r)) for r in range(4)}
    add("rank_histogram", hist[2], {"histogram": {str(k): v for k, v in hist.items()}})

    # (i) div xi_hat = <tau(phi), xi o phi>
    add("tension_identity", l2_norm(grid, Q["div"] - Q["tension"]),
        {"tension_xi_l2": l2_norm(grid, Q["tension"])})

    # (j) non-negative Jacobian
    det = np.linalg.det(Q["J"])
    add("determinant_sign", max(0.0, -det.min()), {"min_det": float(det.min())})

    return PropertyReport(phi.label, cc.label, tuple(grid.resolution), checks, n_crit, hist)


# ---------------------------------------------------------------------------
# bound


@dataclass
class EnergyReport:
    E: float
    deg: float
    bound: float
    ratio: float
    defect: float
    c_used: str
    completion_residual: float
    unresolved_degree: bool
    bound_holds: bool

    def as_dict(self) -> dict:
        return asdict(self)


def bound_report(phi: MapS3, c, grid: GridS3, slack: float = 1e-3) -> EnergyReport:
    """Energy against the bound ``4 pi^2 |deg|`` with the Bogomol'nyi completion.

    ``E = (1/2) integral c |beta - sign * *d beta / c|^2 + sign * 4 pi^2 deg``
    is checked as a relative residual; ``bound_holds`` allows ``slack * 4 pi^2``.
    """
    cc = resolve_coupling(c, phi)
    E, deg = energy_and_degree(phi, cc, grid)
    cs = _curl_on_grid(phi, grid)
    cvals = _coupling_on(cc, grid.points)
    defect = l2_norm(grid, cs.curl - cvals[:, None] * cs.beta)
    k = int(round(deg))
    unresolved = abs(deg - k) > 1e-3
    sign = -1.0 if deg < 0 else 1.0
    bound = BOUND_UNIT * abs(k)
    resid = cs.beta - sign * cs.curl / cvals[:, None]
    completed = 0.5 * quadrature(grid, cvals * np.sum(resid * resid, axis=1)) + sign * BOUND_UNIT * deg
    completion = abs(E - completed) / max(abs(E), BOUND_UNIT * 1e-12)
    ratio = E / bound if bound > 0 else math.inf
    holds = (not unresolved) and E >= bound - slack * BOUND_UNIT
    return EnergyReport(E, deg, bound, ratio, defect, cc.label, completion, unresolved, holds)


# ---------------------------------------------------------------------------
# per-s profiles for suspension maps


def suspension_profile_table(phi: MapS3, grid: GridS3) -> dict:
    """Shell averages over (theta, psi) of ``|beta|^2``, ``c_pt`` and strain eigenvalues.

    The ``spread`` columns give the max deviation within each shell, which
    is zero up to round-off for an equivariant map.
    """
    n_s = grid.resolution[0]
    pc = pointwise_coupling(phi, grid.points)
    s = sample_forms(phi, grid.points)
    J = np.einsum("nid,njd->nij", frame_at(s.images), s.pushed)
    lam = np.linalg.eigvalsh(np.einsum("nki,nkj->nij", J, J))
    b2 = np.einsum("nj,nj->n", s.beta, s.beta)
    cols = {"beta_sq": b2, "c_pt": pc.c_pt, "lambda1_sq": lam[:, 0], "lambda2_sq": lam[:, 1],
            "lambda3_sq": lam[:, 2]}
    out = {"s": grid.s.tolist()}
    for name, vals in cols.items():
        shell = vals.reshape(n_s, -1)
        out[name] = np.nanmean(shell, axis=1).tolist()
        out[name + "_spread"] = np.nanmax(np.abs(shell - np.nanmean(shell, axis=1)[:, None]), axis=1).tolist()
    return out


# ---------------------------------------------------------------------------
# resolution study


def _observed_order(errors, sizes, floor: float):
    """``log(e_i / e_{i+1}) / log(n_{i+1} / n_i)`` for successive levels, None below ``floor``."""
    orders = []
    for (e1, e2), (n1, n2) in zip(zip(errors, errors[1:]), zip(sizes, sizes[1:])):
        if e1 <= floor or e2 <= floor:
            orders.append(None)
        else:
            orders.append(math.log(e1 / e2) / math.log(n2 / n1))
    return orders


def convergence_study(phi: MapS3, c, resolutions, reference_energy: Optional[float] = None) -> dict:
    """Energy and degree at several resolutions with observed convergence orders.

    Degree errors are measured against the nearest integer.  Energy errors are
    measured against ``reference_energy`` when given, else against the finest
    level (which then has no error of its own).  An order is ``None`` when an
    error has reached round-off (relative ``1e-12``), where the ratio carries
    no information.
    """
    levels = sorted((tuple(int(n) for n in r) for r in resolutions), key=lambda r: r[0])
    rows = []
    for res in levels:
        E, deg = energy_and_degree(phi, c, build_grid(*res))
        rows.append({"resolution": list(res), "E": E, "deg": deg})
    sizes = [r[0] for r in levels]
    ref = reference_energy if reference_energy is not None else rows[-1]["E"]
    e_err = [abs(r["E"] - ref) for r in rows]
    d_err = [abs(r["deg"] - round(r["deg"])) for r in rows]
    if reference_energy is None:
        e_err, e_sizes = e_err[:-1], sizes[:-1]
    else:
        e_sizes = sizes
    floor = 1e-12 * max(abs(ref), 1.0)
    for r, e in zip(rows, e_err):
        r["E_error"] = e
    for r, d in zip(rows, d_err):
        r["deg_error"] = d
    return {
        "levels": rows,
        "E_reference": ref,
        "E_reference_kind": "exact" if reference_energy is not None else "finest",
        "E_order": _observed_order(e_err, e_sizes, floor),
        "deg_order": _observed_order(d_err, sizes, 1e-12),
    }
