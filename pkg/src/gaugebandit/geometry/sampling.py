"""Random points in a body, on its boundary, and in its polar.

Directions are Gaussian and normalised by the relevant gauge; radii are
uniform in gauge-radius, i.e. ``gauge(sample) ~ U[0, 1]``.  The inequality
samplers in ``verify`` and the modulus calibration draw from mixtures of
these laws plus a few adversarial families that concentrate on the
configurations where the inequalities are tight.
"""

from __future__ import annotations

import numpy as np

from .bodies import ConvexBody


def _directions(rng, size, dim):
    g = rng.standard_normal((size, dim))
    # a zero row has probability 0 but would break normalisation
    g[~np.any(g != 0, axis=1), 0] = 1.0
    return g


def _support_masks(rng, size, dim):
    # half the rows are confined to 1-3 random coordinates: the worst cases of
    # coordinate-structured bodies live on low-dimensional faces
    mask = np.ones((size, dim), dtype=bool)
    if dim > 2:
        rows = np.flatnonzero(rng.random(size) < 0.5)
        keep = rng.integers(1, 4, rows.size)
        order = np.argsort(rng.random((rows.size, dim)), axis=1)
        mask[rows] = np.argsort(order, axis=1) < keep[:, None]
    return mask


def _sparse_directions(rng, size, dim, mask=None):
    g = _directions(rng, size, dim)
    mask = _support_masks(rng, size, dim) if mask is None else mask
    g[~mask] = 0.0
    g[~np.any(g != 0, axis=1), 0] = 1.0
    return g


def boundary_points(body: ConvexBody, rng, size: int, sparse: bool = False) -> np.ndarray:
    g = (_sparse_directions if sparse else _directions)(rng, size, body.dim)
    return g / body.gauge(g)[:, None]


def ball_points(body: ConvexBody, rng, size: int) -> np.ndarray:
    return boundary_points(body, rng, size) * rng.random(size)[:, None]


def polar_boundary_points(body: ConvexBody, rng, size: int) -> np.ndarray:
    g = _directions(rng, size, body.dim)
    return g / body.polar_gauge(g)[:, None]


def polar_ball_points(body: ConvexBody, rng, size: int) -> np.ndarray:
    return polar_boundary_points(body, rng, size) * rng.random(size)[:, None]


def _split(size, k):
    base = [size // k] * k
    for i in range(size - sum(base)):
        base[i] += 1
    return base


def _outward(body, m, rng):
    # point of K most aligned with the outer normal at m: the steepest way out
    nz = np.any(m != 0, axis=1)
    out = boundary_points(body, rng, m.shape[0])
    out[nz] = body.polar_gauge_grad(body.gauge_grad(m[nz]))
    return out


def uniform_convexity_triples(body: ConvexBody, rng, size: int):
    """Triples ``(x, y, z, gamma)`` for the set uniform-convexity inequality.

    Four equal-weight families: everything uniform in gauge-radius; all three
    points on the boundary; close boundary pairs with ``z`` pointing along the
    outer normal at the midpoint; far boundary pairs with that same ``z``.
    """
    n = body.dim
    sizes = _split(size, 4)
    xs, ys, zs, gs = [], [], [], []

    k = sizes[0]
    xs.append(ball_points(body, rng, k))
    ys.append(ball_points(body, rng, k))
    zs.append(ball_points(body, rng, k))
    gs.append(rng.random(k))

    k = sizes[1]
    xs.append(boundary_points(body, rng, k))
    ys.append(boundary_points(body, rng, k))
    zs.append(boundary_points(body, rng, k))
    gs.append(rng.random(k))

    k = sizes[2]
    mask = _support_masks(rng, k, n)
    x = _sparse_directions(rng, k, n, mask)
    x = x / body.gauge(x)[:, None]
    scale = 10.0 ** rng.uniform(-3.0, 0.0, k)
    y = x + scale[:, None] * _sparse_directions(rng, k, n, mask) / np.sqrt(mask.sum(1))[:, None]
    y = y / body.gauge(y)[:, None]
    g = rng.random(k)
    m = g[:, None] * x + (1 - g)[:, None] * y
    xs.append(x)
    ys.append(y)
    zs.append(_outward(body, m, rng))
    gs.append(g)

    k = sizes[3]
    x = boundary_points(body, rng, k, sparse=True)
    y = boundary_points(body, rng, k, sparse=True)
    g = rng.random(k)
    m = g[:, None] * x + (1 - g)[:, None] * y
    xs.append(x)
    ys.append(y)
    zs.append(_outward(body, m, rng))
    gs.append(g)

    return np.vstack(xs), np.vstack(ys), np.vstack(zs), np.concatenate(gs)


def scaling_pairs(body: ConvexBody, rng, size: int):
    """Pairs ``(x, y)`` with ``x ∈ K`` and ``y ∈ ∂K`` for the scaling inequality."""
    n = body.dim
    k1, k2, k3 = _split(size, 3)
    y = boundary_points(body, rng, size)
    y[k1:] = boundary_points(body, rng, size - k1, sparse=True)
    x1 = ball_points(body, rng, k1)
    x2 = boundary_points(body, rng, k2, sparse=True)
    # boundary points close to y, where the inequality is tightest
    mask = _support_masks(rng, k3, n)
    y3 = _sparse_directions(rng, k3, n, mask)
    y3 = y3 / body.gauge(y3)[:, None]
    y[k1 + k2:] = y3
    scale = 10.0 ** rng.uniform(-3.0, 0.0, k3)
    x3 = y3 + scale[:, None] * _sparse_directions(rng, k3, n, mask) / np.sqrt(mask.sum(1))[:, None]
    x3 = x3 / np.maximum(body.gauge(x3), 1.0)[:, None]
    return np.vstack([x1, x2, x3]), y


def polar_pairs(body: ConvexBody, rng, size: int):
    """Pairs ``(u, v)`` in ``K° \\ {0}`` for the Bregman / Hölder bounds.

    Mixes independent points, close pairs and pairs whose base point has some
    zeroed coordinates (where ``1/2 ||.||^2_{K°}`` can be least regular).
    """
    n = body.dim
    k1, k2, k3 = _split(size, 3)
    u1 = polar_ball_points(body, rng, k1)
    v1 = polar_ball_points(body, rng, k1)

    v2 = polar_ball_points(body, rng, k2)
    scale = 10.0 ** rng.uniform(-4.0, 0.0, k2)
    u2 = v2 + scale[:, None] * polar_boundary_points(body, rng, k2)
    u2 = u2 / np.maximum(body.polar_gauge(u2), 1.0)[:, None]

    v3 = _directions(rng, k3, n)
    if n > 1:
        mask = rng.random((k3, n)) < 0.5
        mask[np.arange(k3), rng.integers(0, n, k3)] = False
        v3[mask] = 0.0
    v3 = v3 / body.polar_gauge(v3)[:, None] * rng.random(k3)[:, None]
    scale = 10.0 ** rng.uniform(-4.0, 0.0, k3)
    u3 = v3 + scale[:, None] * polar_boundary_points(body, rng, k3)
    u3 = u3 / np.maximum(body.polar_gauge(u3), 1.0)[:, None]

    u = np.vstack([u1, u2, u3])
    v = np.vstack([v1, v2, v3])
    keep = np.any(v != 0, axis=1)
    return u[keep], v[keep]
