"""Centrally symmetric convex bodies described through their gauge functions.

Every body exposes four vectorised primitives acting on the last axis of an
array: the gauge ``||x||_K``, its gradient, the polar gauge
``||d||_{K°} = sigma_K(d)`` and the polar gradient (the maximiser of
``<x, d>`` over K).  They do no input validation; the checked public entry
points are the module-level functions at the bottom of this file.
"""

from __future__ import annotations

import abc
import math
from typing import Callable

import numpy as np

from .. import tolerances
from ..errors import DomainError, PreconditionError


def _pnorm(x: np.ndarray, p: float) -> np.ndarray:
    # scaled by the max entry so large p cannot overflow
    a = np.abs(x)
    m = a.max(axis=-1, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    return ((a / safe) ** p).sum(axis=-1) ** (1.0 / p) * m[..., 0]


def _pnorm_grad(x: np.ndarray, p: float) -> np.ndarray:
    nrm = _pnorm(x, p)[..., None]
    return np.sign(x) * (np.abs(x) / nrm) ** (p - 1.0)


class ConvexBody(abc.ABC):
    """Base class: a compact, centrally symmetric convex body in R^n.

    Subclasses fill in the four primitives plus the radii
    ``inner_radius_l1`` (r1, ``l1(r1) ⊆ K``), ``outer_radius_linf``
    (R, ``K ⊆ linf(R)``) and ``inner_radius_lq`` (r, ``lq(r) ⊆ K`` for
    ``q = uc_power``).  The uniform-convexity modulus is looked up in the
    frozen golden table (or derived numerically when the body is not listed)
    unless it is passed explicitly.
    """

    kind: str = "abstract"
    smooth: bool = True
    strictly_convex: bool = True

    def __init__(self, dim: int, alpha: float | None = None):
        if int(dim) != dim or dim < 1:
            raise ValueError(f"dim must be a positive integer, got {dim!r}")
        self.dim = int(dim)
        self._alpha = None if alpha is None else float(alpha)

    # -- primitives -------------------------------------------------------
    @abc.abstractmethod
    def gauge(self, x: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def gauge_grad(self, x: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def polar_gauge(self, d: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def polar_gauge_grad(self, d: np.ndarray) -> np.ndarray: ...

    # -- geometry constants ----------------------------------------------
    @property
    @abc.abstractmethod
    def uc_power(self) -> float: ...

    @property
    @abc.abstractmethod
    def inner_radius_lq(self) -> float: ...

    @property
    def inner_radius_l1(self) -> float:
        # l1(r) = conv{±r e_i}, so l1(r) ⊆ K iff every r e_i has gauge <= 1
        return float(1.0 / self.gauge(np.eye(self.dim)).max())

    @property
    def outer_radius_linf(self) -> float:
        return float(self.polar_gauge(np.eye(self.dim)).max())

    @property
    def uc_modulus(self) -> float:
        if self._alpha is not None:
            return self._alpha
        from .golden import lookup_alpha

        return lookup_alpha(self)

    @property
    def holder_exponent(self) -> float:
        """Conjugate exponent p of ``uc_power`` (1/p + 1/q = 1)."""
        q = self.uc_power
        return q / (q - 1.0)

    def with_alpha(self, alpha: float) -> "ConvexBody":
        """Copy of this body declaring a different modulus (negative controls)."""
        clone = object.__new__(type(self))
        clone.__dict__.update(self.__dict__)
        clone._alpha = float(alpha)
        return clone

    @property
    @abc.abstractmethod
    def params(self) -> dict: ...

    @property
    def key(self) -> str:
        """Golden-table key; invariant under rescaling of the body."""
        parts = [self.kind] + [f"{k}={v}" for k, v in self._alpha_params().items()]
        parts.append(f"dim={self.dim}")
        return "|".join(parts)

    def _alpha_params(self) -> dict:
        return self.params

    def contains(self, x: np.ndarray, tol: float = 0.0) -> np.ndarray:
        return self.gauge(x) <= 1.0 + tol

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            **self.params,
            "r1": self.inner_radius_l1,
            "r_q": self.inner_radius_lq,
            "R": self.outer_radius_linf,
            "q": self.uc_power,
        }

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}(dim={self.dim}, {args})"


class LpBall(ConvexBody):
    """``radius * {x : ||x||_p <= 1}`` for ``1 < p < inf``."""

    kind = "lp"

    def __init__(self, dim: int, p: float, radius: float = 1.0, alpha: float | None = None):
        super().__init__(dim, alpha)
        if not (1.0 < p < math.inf):
            raise ValueError(f"p must lie in (1, inf), got {p!r}")
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.p = float(p)
        self.p_dual = self.p / (self.p - 1.0)
        self.radius = float(radius)

    @property
    def params(self) -> dict:
        d = {"p": self.p}
        if self.radius != 1.0:
            d["radius"] = self.radius
        return d

    def _alpha_params(self) -> dict:
        return {"p": self.p}

    def gauge(self, x):
        return _pnorm(x, self.p) / self.radius

    def gauge_grad(self, x):
        return _pnorm_grad(x, self.p) / self.radius

    def polar_gauge(self, d):
        return self.radius * _pnorm(d, self.p_dual)

    def polar_gauge_grad(self, d):
        return self.radius * _pnorm_grad(d, self.p_dual)

    @property
    def inner_radius_l1(self) -> float:
        return self.radius

    @property
    def outer_radius_linf(self) -> float:
        return self.radius

    @property
    def uc_power(self) -> float:
        return max(2.0, self.p)

    def inscribed_lq_radius(self, q: float) -> float:
        """Largest r with ``lq(r) ⊆ K``; shrinks with dim when p < q."""
        if self.p >= q:
            return self.radius
        return self.radius * self.dim ** (1.0 / q - 1.0 / self.p)

    @property
    def inner_radius_lq(self) -> float:
        return self.inscribed_lq_radius(self.uc_power)


class Ellipsoid(ConvexBody):
    """Axis-aligned ellipsoid ``{x : sum x_i^2 / a_i^2 <= 1}``."""

    kind = "ellipsoid"

    def __init__(self, axis_scales, alpha: float | None = None):
        a = np.asarray(axis_scales, dtype=float).ravel()
        super().__init__(a.size, alpha)
        if not np.all(a > 0) or not np.all(np.isfinite(a)):
            raise ValueError("axis_scales must be positive and finite")
        self.axis_scales = a
        self._a2 = a * a

    @property
    def params(self) -> dict:
        return {"axis_scales": [float(v) for v in self.axis_scales]}

    def _alpha_params(self) -> dict:
        # the modulus only depends on axis ratios
        rel = self.axis_scales / self.axis_scales.max()
        return {"axes": ",".join(f"{v:.12g}" for v in rel)}

    def gauge(self, x):
        return np.sqrt(np.sum((x / self.axis_scales) ** 2, axis=-1))

    def gauge_grad(self, x):
        return (x / self._a2) / self.gauge(x)[..., None]

    def polar_gauge(self, d):
        return np.sqrt(np.sum((d * self.axis_scales) ** 2, axis=-1))

    def polar_gauge_grad(self, d):
        return (d * self._a2) / self.polar_gauge(d)[..., None]

    @property
    def inner_radius_l1(self) -> float:
        return float(self.axis_scales.min())

    @property
    def outer_radius_linf(self) -> float:
        return float(self.axis_scales.max())

    @property
    def uc_power(self) -> float:
        return 2.0

    @property
    def inner_radius_lq(self) -> float:
        return float(self.axis_scales.min())


class Cube(ConvexBody):
    """``radius * linf`` ball: neither smooth nor strictly convex.

    Only used as a negative control.  The gradients return one element of the
    subdifferential (resp. one maximising vertex).
    """

    kind = "cube"
    smooth = False
    strictly_convex = False

    def __init__(self, dim: int, radius: float = 1.0):
        super().__init__(dim, alpha=0.0)
        self.radius = float(radius)

    @property
    def params(self) -> dict:
        return {"radius": self.radius}

    def gauge(self, x):
        return np.abs(x).max(axis=-1) / self.radius

    def gauge_grad(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.abs(x).argmax(axis=-1)
        g = np.zeros_like(x)
        np.put_along_axis(g, idx[..., None], np.take_along_axis(np.sign(x), idx[..., None], -1), -1)
        return g / self.radius

    def polar_gauge(self, d):
        return self.radius * np.abs(d).sum(axis=-1)

    def polar_gauge_grad(self, d):
        return self.radius * np.sign(d)

    @property
    def inner_radius_l1(self) -> float:
        return self.radius

    @property
    def outer_radius_linf(self) -> float:
        return self.radius

    @property
    def uc_power(self) -> float:
        return 2.0

    @property
    def inner_radius_lq(self) -> float:
        return self.radius


def bisect_gauge(
    contains: Callable[[np.ndarray], bool],
    x,
    rtol: float = tolerances.BISECTION_RTOL,
    max_iter: int = tolerances.BISECTION_MAX_ITER,
) -> float:
    """Gauge of ``x`` from a membership oracle alone.

    Bisects ``lam`` on the predicate ``x / lam ∈ K``.  Intended for bodies
    without a closed-form gauge.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("gauge of a non-finite vector")
    if not np.any(x):
        return 0.0
    hi = 1.0
    for _ in range(max_iter):
        if contains(x / hi):
            break
        hi *= 2.0
    lo = hi / 2.0
    for _ in range(max_iter):
        if not contains(x / lo):
            break
        lo /= 2.0
    for _ in range(max_iter):
        if hi - lo <= rtol * hi:
            break
        mid = 0.5 * (lo + hi)
        if contains(x / mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# -- checked public operations -------------------------------------------

def _as_vector(body: ConvexBody, v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[-1:] != (body.dim,):
        raise DomainError(f"{name} must have trailing dimension {body.dim}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DomainError(f"{name} has non-finite entries")
    return v


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def gauge_eval(body: ConvexBody, x):
    """``||x||_K``; zero exactly at the origin."""
    return _scalar(body.gauge(_as_vector(body, x, "x")))


def gauge_grad(body: ConvexBody, x) -> np.ndarray:
    """Gradient of the gauge away from the origin (unit polar norm)."""
    x = _as_vector(body, x, "x")
    if np.any(~np.any(x != 0, axis=-1)):
        raise DomainError("the gauge is not differentiable at the origin")
    return body.gauge_grad(x)


def polar_gauge_eval(body: ConvexBody, d):
    """Support function ``sigma_K(d) = sup_{x in K} <x, d>``."""
    return _scalar(body.polar_gauge(_as_vector(body, d, "d")))


def polar_gauge_grad(body: ConvexBody, d) -> np.ndarray:
    """The unique maximiser of ``<x, d>`` over K (a boundary point)."""
    d = _as_vector(body, d, "d")
    if np.any(~np.any(d != 0, axis=-1)):
        raise DomainError("the polar gauge is not differentiable at the origin")
    return body.polar_gauge_grad(d)


def normal_direction(body: ConvexBody, y) -> np.ndarray:
    """Unit-polar-norm outer normal at a boundary point ``y``.

    For smooth bodies the normal cone at ``y`` meets ``∂K°`` in the single
    point ``gauge_grad(y)``.
    """
    y = _as_vector(body, y, "y")
    g = body.gauge(y)
    if np.any(np.abs(g - 1.0) > tolerances.BOUNDARY):
        raise PreconditionError(f"y is not on the boundary (gauge {g})")
    return body.gauge_grad(y)
