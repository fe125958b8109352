"""Gradient-flow minimisation of the energy within the suspension ansatz.

A map is described by its profile ``alpha`` on uniform interior nodes of
``(0, pi)`` with fixed ends ``alpha(0) = 0`` and ``alpha(pi) = B pi``.  The
energy is always evaluated on the full three-dimensional grid through
:func:`contactskyrme.analysis.energy`; the equivariance of the ansatz is used
only to choose the parametrisation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
import scipy.linalg

from .analysis import EnergyReport, bound_report, energy, energy_and_degree
from .errors import ConfigurationError, EvaluationError
from .maps import MapS3, TableProfile, profile_suspension
from .s3geom import GridS3, build_composite_grid, build_grid

__all__ = ["Profile", "FlowOptions", "FlowResult", "reduced_energy", "minimize", "flow_grid",
           "DEFAULT_GRID"]

DEFAULT_GRID = (32, 24, 24)
DEFAULT_NODES = 64
# knot-aligned flow grid: Gauss points per profile cell, then theta and psi counts
FLOW_GRID = (3, 12, 4)


@dataclass(frozen=True, eq=False)
class Profile:
    """Interior profile values ``alpha(s_i)``; the end values are implied by ``B``."""

    s_nodes: np.ndarray
    alpha: np.ndarray
    B: int

    def __post_init__(self):
        s = np.asarray(self.s_nodes, dtype=float)
        a = np.asarray(self.alpha, dtype=float)
        if s.ndim != 1 or s.shape != a.shape:
            raise ConfigurationError("s_nodes and alpha must be 1-D arrays of equal length")
        if s.size and (s[0] <= 0.0 or s[-1] >= math.pi or np.any(np.diff(s) <= 0)):
            raise ConfigurationError("s_nodes must increase strictly inside (0, pi)")
        if not np.all(np.isfinite(a)):
            raise ConfigurationError("profile values must be finite")
        if self.B < 0:
            raise ConfigurationError("B must be non-negative")
        object.__setattr__(self, "s_nodes", s)
        object.__setattr__(self, "alpha", a)

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], B: int,
                      n_nodes: int = DEFAULT_NODES) -> "Profile":
        s = np.arange(1, n_nodes + 1) * (math.pi / (n_nodes + 1))
        return cls(s, np.asarray(fn(s), dtype=float), B)

    def with_alpha(self, alpha: np.ndarray) -> "Profile":
        return Profile(self.s_nodes, alpha, self.B)

    def full_table(self):
        s = np.concatenate([[0.0], self.s_nodes, [math.pi]])
        a = np.concatenate([[0.0], self.alpha, [self.B * math.pi]])
        return s, a

    def to_table(self) -> TableProfile:
        return TableProfile(*self.full_table())

    def to_map(self) -> MapS3:
        return profile_suspension(self.to_table())

    def sup_distance(self, fn: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.max(np.abs(self.alpha - fn(self.s_nodes))))


def _grid(grid) -> GridS3:
    if grid is None:
        return build_grid(*DEFAULT_GRID)
    if isinstance(grid, GridS3):
        return grid
    return build_grid(*grid)


def flow_grid(prof: Profile, per_cell: int = FLOW_GRID[0], n_theta: int = FLOW_GRID[1],
              n_psi: int = FLOW_GRID[2]) -> GridS3:
    """Composite grid with breaks at the profile knots.

    The spline is a cubic on each cell, so the integrand in s is smooth
    between breaks and the degree integral is resolved to rounding error.
    """
    return build_composite_grid(prof.full_table()[0], per_cell, n_theta, n_psi)


def reduced_energy(prof: Profile, c, grid=None) -> float:
    """Energy of the suspension map built from ``prof`` on the full 3D grid."""
    E = energy(prof.to_map(), c, _grid(grid))
    if not math.isfinite(E):
        raise EvaluationError("energy is not finite; the profile is too rough")
    return float(E)


@dataclass(frozen=True)
class FlowOptions:
    step: float = 1.0
    max_iter: int = 200
    grad_tol: float = 1e-7
    # stop once an accepted step lowers E by less than this relative amount
    energy_rtol: float = 1e-10
    fd_step: float = 1e-5
    armijo: float = 1e-4
    min_step: float = 1e-12
    # H^1 smoothing length of the descent direction; 0 gives plain gradient descent
    sobolev_length: float = 0.5
    # trial profiles whose grid degree drifts from B by more than this are rejected
    degree_tol: float = 1e-4
    workers: int = 1


@dataclass
class FlowResult:
    profile: Profile
    energy_trace: List[float]
    E: float
    deg: float
    defect: float
    converged: bool
    iterations: int
    status: str
    report: Optional[EnergyReport] = field(default=None, repr=False)

    def as_dict(self) -> dict:
        s, a = self.profile.full_table()
        return {
            "B": self.profile.B,
            "E": self.E,
            "deg": self.deg,
            "defect": self.defect,
            "ratio": self.report.ratio if self.report else None,
            "converged": self.converged,
            "iterations": self.iterations,
            "status": self.status,
            "energy_trace": list(self.energy_trace),
            "profile": {"s": s.tolist(), "alpha": a.tolist()},
        }


def _sobolev_matrix(s_nodes: np.ndarray, length: float):
    """Banded form of ``I - length^2 d^2/ds^2`` with zero Dirichlet ends."""
    n = s_nodes.size
    ds = math.pi / (n + 1)
    k = (length / ds) ** 2
    ab = np.zeros((3, n))
    ab[0, 1:] = -k
    ab[1, :] = 1.0 + 2.0 * k
    ab[2, :-1] = -k
    return ab


def _guarded_energy(prof: Profile, c, grid: GridS3, degree_tol: float) -> float:
    """Energy, or ``inf`` when the grid no longer resolves the winding of ``prof``."""
    try:
        E, deg = energy_and_degree(prof.to_map(), c, grid)
    except ConfigurationError:
        return math.inf
    if not (math.isfinite(E) and abs(deg - prof.B) <= degree_tol):
        return math.inf
    return float(E)


def fd_gradient(prof: Profile, c, grid: GridS3, h: float = 1e-5, workers: int = 1) -> np.ndarray:
    """Central-difference gradient of :func:`reduced_energy` in the interior node values."""
    a0 = prof.alpha

    def component(i: int) -> float:
        ap = a0.copy()
        am = a0.copy()
        ap[i] += h
        am[i] -= h
        return (reduced_energy(prof.with_alpha(ap), c, grid)
                - reduced_energy(prof.with_alpha(am), c, grid)) / (2.0 * h)

    idx = range(a0.size)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.array(list(pool.map(component, idx)))
    return np.array([component(i) for i in idx])


def minimize(prof0: Profile, c, opts: FlowOptions | None = None, grid=None,
             callback: Callable[[int, float, float], None] | None = None) -> FlowResult:
    """Backtracking descent on the interior profile values.

    Each iteration takes the (optionally ``H^1``-smoothed) negative gradient
    and halves the trial step until the Armijo condition holds.  After an
    accepted step the trial step doubles for the next iteration.  A trial step
    below ``opts.min_step`` stops the flow with ``converged=False``.
    """
    opts = opts or FlowOptions()
    if prof0.B < 1:
        raise ConfigurationError("minimize needs B >= 1")
    if opts.step <= 0:
        raise ConfigurationError("step must be positive")
    g3 = flow_grid(prof0) if grid is None else _grid(grid)
    prof = prof0
    E = reduced_energy(prof, c, g3)
    trace = [E]
    ab = _sobolev_matrix(prof.s_nodes, opts.sobolev_length) if opts.sobolev_length > 0 else None
    t = opts.step
    converged = False
    status = "max_iter"
    it = 0
    for it in range(1, opts.max_iter + 1):
        g = fd_gradient(prof, c, g3, opts.fd_step, opts.workers)
        gnorm = float(np.max(np.abs(g)))
        if gnorm < opts.grad_tol:
            converged, status, it = True, "grad_tol", it - 1
            break
        p = scipy.linalg.solve_banded((1, 1), ab, g) if ab is not None else g
        slope = float(g @ p)
        while True:
            trial = prof.with_alpha(prof.alpha - t * p)
            E_new = _guarded_energy(trial, c, g3, opts.degree_tol)
            if E_new <= E - opts.armijo * t * slope:
                break
            t *= 0.5
            if t < opts.min_step:
                break
        if t < opts.min_step:
            status = "stagnation"
            it -= 1
            break
        decrease = E - E_new
        prof, E = trial, E_new
        trace.append(E)
        if callback is not None:
            callback(it, E, gnorm)
        if decrease <= opts.energy_rtol * abs(E):
            converged, status = True, "energy_rtol"
            break
        t = min(2.0 * t, 1e6 * opts.step)
    rep = bound_report(prof.to_map(), c, g3)
    return FlowResult(prof, trace, rep.E, rep.deg, rep.defect, converged, it, status, rep)
