"""Pure numpy implementations of the per-node kernels.

These are the reference versions; ``_ckernels.pyx`` mirrors them one to one.
Point arrays are ``(N, 4)`` in the coordinate order ``(x1, y1, x2, y2)``.
"""

import numpy as np


def frame_vectors(points):
    """Frame ``(xi, X1, X2)`` at each point, shape ``(N, 3, 4)``."""
    p = np.asarray(points, dtype=float)
    x1, y1, x2, y2 = p[:, 0], p[:, 1], p[:, 2], p[:, 3]
    out = np.empty((p.shape[0], 3, 4))
    out[:, 0] = np.stack([-y1, x1, -y2, x2], axis=1)
    out[:, 1] = np.stack([-x2, y2, x1, -y1], axis=1)
    out[:, 2] = np.stack([-y2, -x2, y1, x1], axis=1)
    return out


def _deta(u, v):
    return 2.0 * (u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
                  + u[..., 2] * v[..., 3] - u[..., 3] * v[..., 2])


def pullback_components(images, pushed):
    """Frame components of the pulled-back contact form and its differential.

    ``pushed[:, j]`` is the image of the j-th domain frame vector under the
    differential.  Returns ``beta`` with ``beta_j = eta(pushed_j)`` and
    ``omega`` with ``omega_0 = deta(pushed_1, pushed_2)`` and cyclic.
    """
    q = np.asarray(images, dtype=float)
    P = np.asarray(pushed, dtype=float)
    xi = np.stack([-q[:, 1], q[:, 0], -q[:, 3], q[:, 2]], axis=1)
    beta = np.einsum("nk,njk->nj", xi, P)
    omega = np.stack([
        _deta(P[:, 1], P[:, 2]),
        _deta(P[:, 2], P[:, 0]),
        _deta(P[:, 0], P[:, 1]),
    ], axis=1)
    return beta, omega


def energy_degree(images, pushed, coupling, weights):
    """Quadrature sums ``(0.5 * sum w (c|beta|^2 + |omega|^2/c), sum w beta.omega)``."""
    beta, omega = pullback_components(images, pushed)
    c = np.broadcast_to(np.asarray(coupling, dtype=float), weights.shape)
    b2 = np.einsum("nj,nj->n", beta, beta)
    w2 = np.einsum("nj,nj->n", omega, omega)
    bw = np.einsum("nj,nj->n", beta, omega)
    energy = 0.5 * np.sum(weights * (c * b2 + w2 / c))
    degree = np.sum(weights * bw)
    return float(energy), float(degree)
