"""Convex bodies, their gauges and polar gauges, samplers and calibrated constants."""

from .bodies import (
    ConvexBody,
    Cube,
    Ellipsoid,
    LpBall,
    bisect_gauge,
    gauge_eval,
    gauge_grad,
    normal_direction,
    polar_gauge_eval,
    polar_gauge_grad,
)
from .calibration import derive_alpha
from .golden import certified_bodies, lookup_alpha


def make_body(kind: str, dim: int | None = None, **params) -> ConvexBody:
    """Build a body from a flat key-value description (as used by the CLI)."""
    if kind == "lp":
        return LpBall(int(dim), float(params["p"]), float(params.get("radius", 1.0)))
    if kind == "ellipsoid":
        axes = params["axis_scales"]
        if dim is not None and len(axes) != int(dim):
            raise ValueError(f"axis_scales has {len(axes)} entries but dim={dim}")
        return Ellipsoid(axes)
    if kind == "cube":
        return Cube(int(dim), float(params.get("radius", 1.0)))
    raise ValueError(f"unknown body kind {kind!r}")


__all__ = [
    "ConvexBody", "Cube", "Ellipsoid", "LpBall", "bisect_gauge", "certified_bodies",
    "derive_alpha", "gauge_eval", "gauge_grad", "lookup_alpha", "make_body",
    "normal_direction", "polar_gauge_eval", "polar_gauge_grad",
]
