"""The gauge barrier ``F(x) = -ln(1 - ||x||_K) - ||x||_K`` and its conjugate.

``F`` is a function of the gauge alone, ``F = g(||x||_K)`` with
``g(s) = -ln(1 - s) - s``, so its conjugate is ``g*`` of the polar gauge:
``F*(d) = ||d||_{K°} - ln(1 + ||d||_{K°})``.  Both gradients are the scalar
derivative times the gradient of the corresponding gauge, and both extend
continuously by zero at the origin.

All functions accept either a single vector or a stack of vectors (last axis
is the coordinate axis).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances
from .errors import DomainError
from .geometry.bodies import ConvexBody


@dataclass(frozen=True)
class BarrierPoint:
    """An interior point ``||x||_K < 1`` with its cached gauge."""

    coords: np.ndarray
    gauge_value: float

    @classmethod
    def of(cls, body: ConvexBody, coords) -> "BarrierPoint":
        x = np.asarray(coords, dtype=float)
        if not np.all(np.isfinite(x)):
            raise DomainError("non-finite coordinates")
        g = float(body.gauge(x))
        if g >= 1.0:
            raise DomainError(f"point is not interior (gauge {g!r} >= 1)")
        return cls(x, g)


@dataclass(frozen=True)
class DualPoint:
    """A point of the dual (mirror) space; the conjugate's domain is all of R^n."""

    coords: np.ndarray


def _coords(v) -> np.ndarray:
    if isinstance(v, (BarrierPoint, DualPoint)):
        v = v.coords
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise DomainError("non-finite coordinates")
    return v


def _interior_gauge(body, x):
    g = body.gauge(x)
    if np.any(g >= 1.0):
        raise DomainError(f"barrier evaluated outside the open body (gauge {np.max(g)!r})")
    return g


def scaled_gradient(grad, v, scale):
    """``scale * grad(v)`` rowwise, with the value 0 wherever ``scale == 0``."""
    v2 = np.atleast_2d(v)
    s = np.atleast_1d(scale)
    out = np.zeros_like(v2)
    nz = s > 0
    if np.any(nz):
        out[nz] = s[nz, None] * grad(v2[nz])
    return out.reshape(np.shape(v))


def barrier_value(body: ConvexBody, x):
    g = _interior_gauge(body, _coords(x))
    val = -np.log1p(-g) - g
    return float(val) if np.ndim(val) == 0 else val


def barrier_grad(body: ConvexBody, x) -> np.ndarray:
    """``(||x|| / (1 - ||x||)) * grad ||.||_K(x)``; zero at the origin."""
    x = _coords(x)
    g = _interior_gauge(body, x)
    return scaled_gradient(body.gauge_grad, x, g / (1.0 - g))


def conjugate_value(body: ConvexBody, d):
    s = body.polar_gauge(_coords(d))
    val = s - np.log1p(s)
    return float(val) if np.ndim(val) == 0 else val


def conjugate_grad(body: ConvexBody, d) -> np.ndarray:
    """``(||d||° / (1 + ||d||°)) * grad ||.||_{K°}(d)``; always lands inside K."""
    d = _coords(d)
    s = body.polar_gauge(d)
    return scaled_gradient(body.polar_gauge_grad, d, s / (1.0 + s))


def bregman_divergence(f_value, f_grad, x, y):
    """``D_f(x, y) = f(x) - f(y) - <x - y, grad f(y)>`` (rowwise for stacks)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return f_value(x) - f_value(y) - np.sum((x - y) * f_grad(y), axis=-1)


def barrier_divergence(body: ConvexBody, x, y):
    return bregman_divergence(lambda v: barrier_value(body, v), lambda v: barrier_grad(body, v), x, y)


def conjugate_divergence(body: ConvexBody, u, v):
    return bregman_divergence(lambda w: conjugate_value(body, w), lambda w: conjugate_grad(body, w), u, v)


def bregman_project_shrunken(body: ConvexBody, z, gamma: float) -> np.ndarray:
    """Bregman projection of ``z`` onto ``(1 - gamma) K`` w.r.t. the barrier.

    The barrier is constant on gauge level sets, so once ``z`` lies outside
    ``(1 - gamma) K`` the minimiser of ``D_F(., z)`` sits on the boundary and
    maximises ``<grad ||.||_K(z), y>`` there; by the Euler identity that is the
    radial rescaling ``(1 - gamma) z / ||z||_K``.  Points already inside are
    returned unchanged.
    """
    if not (0.0 < gamma < 1.0):
        raise ValueError(f"gamma must lie in (0, 1), got {gamma!r}")
    z = _coords(z)
    g = body.gauge(z)
    scale = np.where(g > 1.0 - gamma, (1.0 - gamma) / np.where(g > 0, g, 1.0), 1.0)
    return z * np.asarray(scale)[..., None]


def clamp_interior(body: ConvexBody, x, gamma: float) -> np.ndarray:
    """Pull ``x`` back to gauge ``1 - gamma - CLAMP`` if rounding pushed it out."""
    x = np.asarray(x, dtype=float)
    limit = 1.0 - gamma - tolerances.CLAMP
    g = body.gauge(x)
    scale = np.where(g > limit, limit / np.where(g > 0, g, 1.0), 1.0)
    return x * np.asarray(scale)[..., None]
