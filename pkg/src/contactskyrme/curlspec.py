"""Exact assembly of curl on polynomial vector fields and its spectrum on S^3.

The trial space holds all fields whose frame components are polynomials of
degree <= K.  The frame fields map degree-k polynomials to degree-k
polynomials, so curl preserves this space and the Galerkin pencil
``C x = mu G x`` has exactly the eigenvalues of curl restricted to it.

``C`` and ``G`` are assembled as exact rationals (the common factor pi^2
cancels).  The kernel of ``G`` (fields vanishing on the sphere) is removed by
exact elimination before the floating-point eigensolve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import ClusterAmbiguityError, NotFoundError, ResourceError
from .poly import (SpherePoly, frame_laplacian, inner_product, monomial_exponents,
                   monomial_integral, sphere_integral)
from .s3geom import PolyVectorField, curl_frame, div_frame, random_points

__all__ = [
    "PolyVectorField", "OperatorPencil", "SpectrumReport", "EigenField",
    "assemble", "spectrum", "eigenspace", "norm_constancy",
]

MAX_DEGREE_CAP = 6
CLUSTER_TOL = 1e-6
INTEGER_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class OperatorPencil:
    """``C_ab = <curl v_a, v_b>`` and ``G_ab = <v_a, v_b>`` in units of pi^2."""

    K: int
    exponents: Tuple[Tuple[int, int, int, int], ...]
    C: Tuple[Tuple[Fraction, ...], ...]
    G: Tuple[Tuple[Fraction, ...], ...]
    pivots: Tuple[int, ...]  # basis indices spanning the range of G

    @property
    def size(self) -> int:
        return len(self.C)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def basis_field(self, index: int) -> PolyVectorField:
        m = len(self.exponents)
        comp, k = divmod(index, m)
        comps = [SpherePoly(), SpherePoly(), SpherePoly()]
        comps[comp] = SpherePoly.monomial(self.exponents[k])
        return PolyVectorField(*comps)

    def float_blocks(self):
        idx = list(self.pivots)
        C = np.array([[float(self.C[i][j]) for j in idx] for i in idx])
        G = np.array([[float(self.G[i][j]) for j in idx] for i in idx])
        return C, G


def _pair_integral(ea, eb) -> Fraction:
    return monomial_integral((ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]))


def _independent_columns(G: Sequence[Sequence[Fraction]]) -> List[int]:
    """Pivot columns of an exact symmetric PSD matrix, by fraction-exact elimination.

    Rows are processed in blocks of indices that couple through nonzero
    entries (parity classes of the exponents), which keeps the elimination
    small.
    """
    n = len(G)
    seen = [False] * n
    pivots = []
    for start in range(n):
        if seen[start]:
            continue
        block, stack = [], [start]
        seen[start] = True
        while stack:
            i = stack.pop()
            block.append(i)
            for j in range(n):
                if not seen[j] and G[i][j] != 0:
                    seen[j] = True
                    stack.append(j)
        block.sort()
        rows = [[G[i][j] for j in block] for i in block]
        r = 0
        for col in range(len(block)):
            piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            for i in range(len(rows)):
                if i != r and rows[i][col] != 0:
                    f = rows[i][col] / rows[r][col]
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
            pivots.append(block[col])
            r += 1
    return sorted(pivots)


@lru_cache(maxsize=None)
def assemble(K: int, max_degree: int = MAX_DEGREE_CAP) -> OperatorPencil:
    """Exact pencil over the ``3 * #monomials(deg <= K)`` monomial-component fields."""
    if K < 0:
        raise ValueError("K must be non-negative")
    if K > max_degree:
        raise ResourceError(f"K={K} exceeds the configured cap {max_degree}")
    exps = tuple(monomial_exponents(K))
    m = len(exps)
    index = {e: i for i, e in enumerate(exps)}
    Gs = [[_pair_integral(a, b) for b in exps] for a in exps]
    n = 3 * m
    zero = Fraction(0)
    G = [[zero] * n for _ in range(n)]
    for comp in range(3):
        off = comp * m
        for i in range(m):
            G[off + i][off:off + m] = Gs[i]
    C = [[zero] * n for _ in range(n)]
    for a in range(n):
        comp, k = divmod(a, m)
        comps = [SpherePoly(), SpherePoly(), SpherePoly()]
        comps[comp] = SpherePoly.monomial(exps[k])
        curl = curl_frame(PolyVectorField(*comps))
        row = C[a]
        for c_comp, poly in enumerate(curl.components):
            off = c_comp * m
            for e, coeff in poly.items():
                if e not in index:
                    raise RuntimeError("curl raised the polynomial degree")
                # <curl v_a, v_b> for every b in component c_comp
                for j, eb in enumerate(exps):
                    w = _pair_integral(e, eb)
                    if w:
                        row[off + j] += coeff * w
    scalar_pivots = _independent_columns(Gs)
    pivots = tuple(comp * m + i for comp in range(3) for i in scalar_pivots)
    return OperatorPencil(K, exps, tuple(map(tuple, C)), tuple(map(tuple, G)), pivots)


@dataclass(frozen=True)
class SpectrumReport:
    K: int
    clusters: Tuple[Tuple[float, int], ...]  # (eigenvalue, multiplicity), ascending
    rank_G: int
    gradient_count: int
    cluster_tol: float
    integer_tol: float
    max_integer_deviation: float
    raw: Tuple[float, ...]

    def multiplicity(self, mu: float) -> int:
        for value, mult in self.clusters:
            if abs(value - mu) <= 1e3 * self.cluster_tol:
                return mult
        return 0

    def as_dict(self) -> dict:
        return {
            "K": self.K,
            "clusters": [{"mu": v, "multiplicity": m} for v, m in self.clusters],
            "rankG": self.rank_G,
            "gradient_count": self.gradient_count,
            "cluster_tol": self.cluster_tol,
            "integer_tol": self.integer_tol,
            "max_integer_deviation": self.max_integer_deviation,
        }


def _solve(K: int):
    pencil = assemble(K)
    C, G = pencil.float_blocks()
    mu, X = scipy.linalg.eigh(C, G)
    return pencil, mu, X


def _cluster(values: np.ndarray, tol: float):
    groups: List[List[int]] = []
    for i, v in enumerate(values):
        if groups and abs(v - values[groups[-1][-1]]) <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def spectrum(K: int, tol: float = INTEGER_TOL, cluster_tol: float = CLUSTER_TOL) -> SpectrumReport:
    """Eigenvalue clusters of curl on fields with degree <= K components.

    The zero cluster (gradients of non-constant functions) is listed among
    the clusters and counted separately as ``gradient_count``.
    """
    pencil, mu, _ = _solve(K)
    groups = _cluster(mu, cluster_tol)
    means = [float(np.mean(mu[g])) for g in groups]
    for a, b in zip(means, means[1:]):
        if b - a < 10 * cluster_tol:
            raise ClusterAmbiguityError(f"clusters at {a} and {b} are closer than {10 * cluster_tol}",
                                        raw_eigenvalues=mu.tolist())
    clusters = []
    zero = 0
    max_dev = 0.0
    for g, value in zip(groups, means):
        if abs(value) <= cluster_tol:
            zero = len(g)
            clusters.append((0.0, len(g)))
            max_dev = max(max_dev, float(np.max(np.abs(mu[g]))))
            continue
        clusters.append((value, len(g)))
        max_dev = max(max_dev, float(np.max(np.abs(mu[g] - np.round(mu[g])))))
    return SpectrumReport(K, tuple(clusters), pencil.rank, zero, cluster_tol, tol, max_dev,
                          tuple(float(x) for x in mu))


@dataclass(frozen=True, eq=False)
class EigenField:
    """A unit-norm eigenfield ``scale * sum_a exact_weights[a] * basis[a]``.

    ``basis`` holds exact monomial-component fields and ``exact_weights`` are
    rationals, so :attr:`exact_field` is a field with rational coefficients;
    only the normalising ``scale`` is floating point.
    """

    mu: float
    basis: Tuple[PolyVectorField, ...]
    exact_weights: Tuple[Fraction, ...]
    scale: float

    @property
    def weights(self) -> np.ndarray:
        return np.array([float(w) for w in self.exact_weights]) * self.scale

    @property
    def exact_field(self) -> PolyVectorField:
        comps = [SpherePoly(), SpherePoly(), SpherePoly()]
        for w, v in zip(self.exact_weights, self.basis):
            if w:
                comps = [c + part.scale(w) for c, part in zip(comps, v.components)]
        return PolyVectorField(*comps)

    @property
    def field(self) -> PolyVectorField:
        ex = self.exact_field
        return PolyVectorField(*(c.to_float().scale(self.scale) for c in ex.components))

    def __call__(self, points) -> np.ndarray:
        return self.field(points)


def _nullspace(M: List[List[Fraction]]) -> List[List[Fraction]]:
    """Exact nullspace basis of a rational matrix via reduced row echelon form."""
    rows = [list(r) for r in M]
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    pivot_cols = []
    r = 0
    for col in range(n_cols):
        piv = next((i for i in range(r, n_rows) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][col]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(n_rows):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivot_cols.append(col)
        r += 1
        if r == n_rows:
            break
    free = [c for c in range(n_cols) if c not in set(pivot_cols)]
    basis = []
    for fc in free:
        x = [Fraction(0)] * n_cols
        x[fc] = Fraction(1)
        for i, pc in enumerate(pivot_cols):
            x[pc] = -rows[i][fc]
        basis.append(x)
    return basis


def _bilinear(G, x, y) -> Fraction:
    total = Fraction(0)
    for i, xi in enumerate(x):
        if xi:
            row = G[i]
            total += xi * sum((row[j] * yj for j, yj in enumerate(y) if yj), Fraction(0))
    return total


@lru_cache(maxsize=None)
def _exact_eigenspace(K: int, mu: int):
    pencil = assemble(K)
    idx = pencil.pivots
    C = [[pencil.C[i][j] for j in idx] for i in idx]
    G = [[pencil.G[i][j] for j in idx] for i in idx]
    M = [[C[i][j] - mu * G[i][j] for j in range(len(idx))] for i in range(len(idx))]
    vecs = _nullspace(M)
    ortho: List[Tuple[List[Fraction], Fraction]] = []
    for v in vecs:  # Gram-Schmidt in the G inner product, exactly
        w = list(v)
        for u, uu in ortho:
            f = _bilinear(G, u, w) / uu
            w = [a - f * b for a, b in zip(w, u)]
        ortho.append((w, _bilinear(G, w, w)))
    return pencil, tuple((tuple(w), norm) for w, norm in ortho)


def eigenspace(K: int, mu: float, cluster_tol: float = CLUSTER_TOL) -> List[EigenField]:
    """G-orthonormal basis of the ``mu`` eigenspace of curl at degree bound ``K``.

    Eigenvalues of curl here are integers, so the eigenspace is computed as the
    exact nullspace of ``C - mu G`` followed by exact Gram-Schmidt.  The basis is
    normalised with ``x^T G x = 1`` where G is measured in units of pi^2.
    """
    target = int(round(mu))
    if abs(mu - target) > cluster_tol:
        raise NotFoundError(f"eigenvalue {mu} not in the spectrum at K={K}")
    pencil, vecs = _exact_eigenspace(K, target)
    if not vecs:
        raise NotFoundError(f"eigenvalue {mu} not in the spectrum at K={K}")
    basis = tuple(pencil.basis_field(i) for i in pencil.pivots)
    return [EigenField(float(target), basis, w, 1.0 / math.sqrt(float(norm))) for w, norm in vecs]


def norm_constancy(v, n_samples: int = 10_000, seed: int = 0):
    """``(mean, max deviation)`` of ``|v|^2`` over S^3.

    The mean is the exact sphere average of ``|v|^2``; the deviation is taken
    over ``n_samples`` random points.
    """
    field = v.field if isinstance(v, EigenField) else v
    sq = field.norm_squared()
    mean = float(sphere_integral(sq).value) / 2.0  # divide by the volume 2 pi^2
    pts = random_points(n_samples, seed)
    dev = float(np.max(np.abs(sq(pts) - mean)))
    return mean, dev


# ---------------------------------------------------------------------------
# diagnostics used by tests and the selftest


def laplacian_residual(v: PolyVectorField, k: int) -> float:
    """Relative L^2 residual of ``frame_laplacian(f) + k(k+2) f`` over the components."""
    num = 0.0
    den = 0.0
    for comp in v.components:
        r = frame_laplacian(comp) + comp.scale(float(k * (k + 2)))
        num += float(inner_product(r, r).value)
        den += float(inner_product(comp, comp).value)
    return math.sqrt(max(num, 0.0) / den) if den > 0 else 0.0


def divergence_residual(v: PolyVectorField) -> float:
    d = div_frame(v)
    return math.sqrt(max(float(inner_product(d, d).value), 0.0))


def curl_residual(v: PolyVectorField, mu: float) -> float:
    r = curl_frame(v) - v.scale(float(mu))
    return math.sqrt(max(sum(float(inner_product(c, c).value) for c in r.components), 0.0))
