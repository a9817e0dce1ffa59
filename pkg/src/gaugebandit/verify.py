"""Randomised certification of the inequalities behind the regret analysis.

Each check draws samples, computes a per-sample margin (non-negative when the
inequality holds) and summarises them in a ``CheckReport``.  A sample is a
violation when its margin is below ``-tolerance``.

Samplers live in ``geometry.sampling``: uniform-in-gauge-radius points mixed
with families that concentrate near the tight configurations (close
boundary pairs, sparse supports).  The inequalities quantify over all
points; sampling is the approximation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import tolerances
from .bandit import Trajectory, max_stable_eta, one_term_rhs
from .barrier import barrier_grad, clamp_interior, conjugate_divergence
from .errors import ConfigError, PreconditionError
from .geometry.bodies import ConvexBody
from .geometry.sampling import polar_pairs, scaling_pairs, uniform_convexity_triples

DEFAULT_SAMPLES = 100_000
CHUNK = 20_000
REPORT_COLUMNS = ("check_name", "body", "samples", "violations", "worst_margin", "tolerance")


@dataclass(frozen=True)
class CheckReport:
    check_name: str
    samples: int
    violations: int
    worst_margin: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.violations == 0

    @classmethod
    def from_margins(cls, name: str, margins, tolerance: float) -> "CheckReport":
        m = np.asarray(margins, dtype=float)
        bad = ~(m >= -tolerance)  # NaN counts as a violation
        worst = float(np.min(np.where(np.isnan(m), -np.inf, m))) if m.size else math.inf
        return cls(name, int(m.size), int(bad.sum()), worst, tolerance)

    @classmethod
    def merge(cls, reports) -> "CheckReport":
        reports = list(reports)
        r0 = reports[0]
        return cls(r0.check_name, sum(r.samples for r in reports), sum(r.violations for r in reports),
                   min(r.worst_margin for r in reports), r0.tolerance)

    def row(self, body_label: str) -> tuple:
        return (self.check_name, body_label, self.samples, self.violations,
                "%.17g" % self.worst_margin, "%.17g" % self.tolerance)


def write_reports(reports, body_label: str, fh, header: bool = True) -> None:
    w = csv.writer(fh, lineterminator="\n")
    if header:
        w.writerow(REPORT_COLUMNS)
    for r in reports:
        w.writerow(r.row(body_label))


def _chunks(samples):
    done = 0
    while done < samples:
        k = min(CHUNK, samples - done)
        yield k
        done += k


def holder_constant(body: ConvexBody, alpha: float | None = None) -> float:
    """``L = 2p (1 + (q / (2 alpha))^(1/(q-1)))``; equals ``4 (alpha+1)/alpha`` when q = 2."""
    alpha = body.uc_modulus if alpha is None else alpha
    q = body.uc_power
    p = q / (q - 1.0)
    return 2.0 * p * (1.0 + (q / (2.0 * alpha)) ** (1.0 / (q - 1.0)))


# -- set-level inequalities --------------------------------------------------

def uniform_convexity_margins(body, x, y, z, g, alpha, q):
    m = g[:, None] * x + (1.0 - g)[:, None] * y
    infl = (alpha / q) * g * (1.0 - g) * body.gauge(x - y) ** q
    return 1.0 - body.gauge(m + infl[:, None] * z)


def check_uniform_convexity(body: ConvexBody, alpha: float | None = None, q: float | None = None,
                            samples: int = DEFAULT_SAMPLES, seed: int = 0) -> CheckReport:
    """``gamma x + (1-gamma) y + (alpha/q) gamma (1-gamma) ||x-y||^q z`` stays in K."""
    alpha = body.uc_modulus if alpha is None else alpha
    q = body.uc_power if q is None else q
    rng = np.random.default_rng(seed)
    margins = []
    for k in _chunks(samples):
        x, y, z, g = uniform_convexity_triples(body, rng, k)
        margins.append(uniform_convexity_margins(body, x, y, z, g, alpha, q))
    return CheckReport.from_margins("uniform_convexity", np.concatenate(margins), tolerances.IDENTITY)


def scaling_margins(body, x, y, alpha, q):
    d = body.gauge_grad(y)
    lhs = np.sum(d * (y - x), axis=-1)
    return lhs - (alpha / q) * body.gauge(x - y) ** q * body.polar_gauge(d)


def check_scaling_inequality(body: ConvexBody, alpha: float | None = None, q: float | None = None,
                             samples: int = DEFAULT_SAMPLES, seed: int = 0) -> CheckReport:
    """``<d, y - x> >= (alpha/q) ||x - y||^q ||d||°`` for ``y ∈ ∂K``, ``d`` the normal at ``y``."""
    if not body.smooth:
        raise PreconditionError("the scaling inequality needs a smooth body")
    alpha = body.uc_modulus if alpha is None else alpha
    q = body.uc_power if q is None else q
    rng = np.random.default_rng(seed)
    margins = []
    for k in _chunks(samples):
        x, y = scaling_pairs(body, rng, k)
        margins.append(scaling_margins(body, x, y, alpha, q))
    return CheckReport.from_margins("scaling_inequality", np.concatenate(margins), tolerances.IDENTITY)


# -- dual-side smoothness of 1/2 ||.||_{K°}^2 --------------------------------

def half_square_divergence(body: ConvexBody, u, v):
    """``D(u, v)`` of ``f = 1/2 ||.||°^2``, using ``grad f(v) = ||v||° grad ||.||°(v)``."""
    su = body.polar_gauge(u)
    sv = body.polar_gauge(v)
    grad = np.zeros_like(v)
    nz = sv > 0
    grad[nz] = sv[nz, None] * body.polar_gauge_grad(v[nz])
    return 0.5 * su ** 2 - 0.5 * sv ** 2 - np.sum(grad * (u - v), axis=-1)


def _smoothness_check(name, body, samples, seed, coefficient):
    p = body.holder_exponent
    rng = np.random.default_rng(seed)
    margins = []
    for k in _chunks(samples):
        u, v = polar_pairs(body, rng, k)
        d = half_square_divergence(body, u, v)
        margins.append(coefficient * body.polar_gauge(u - v) ** p - d)
    return CheckReport.from_margins(name, np.concatenate(margins), tolerances.IDENTITY)


def check_bregman_upper_bound(body: ConvexBody, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                              constant: float | None = None) -> CheckReport:
    """``D_{1/2||.||°^2}(u, v) <= L ||u - v||°^p`` on ``K°``.

    ``constant`` replaces ``L`` (negative controls: over-claiming the modulus
    only shrinks ``L`` towards ``2p``, which never breaks the bound).
    """
    L = holder_constant(body) if constant is None else constant
    return _smoothness_check("bregman_upper_bound", body, samples, seed, L)


def check_holder_smoothness(body: ConvexBody, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                            constant: float | None = None) -> CheckReport:
    """``f(u) - f(v) - <grad f(v), u - v> <= (L/p) ||u - v||°^p`` for ``f = 1/2||.||°^2`` on ``K°``."""
    L = holder_constant(body) if constant is None else constant
    return _smoothness_check("holder_smoothness", body, samples, seed, L / body.holder_exponent)


# -- per-round bounds along a trajectory -------------------------------------

def decomposition_gap(body: ConvexBody, u, v):
    """``|D_{F*}(u, v) - rewriting|`` where the rewriting is

    ``Theta - ln(1 + Theta) - (||u||° - ||v||°)^2 / (2 (1 + ||v||°)) + D_{1/2||.||°^2}(u, v) / (1 + ||v||°)``
    with ``Theta = (||u||° - ||v||°) / (1 + ||v||°)``.
    """
    su = body.polar_gauge(u)
    sv = body.polar_gauge(v)
    theta = (su - sv) / (1.0 + sv)
    rewritten = (theta - np.log1p(theta) - 0.5 * (su - sv) ** 2 / (1.0 + sv)
                 + half_square_divergence(body, u, v) / (1.0 + sv))
    return np.abs(conjugate_divergence(body, u, v) - rewritten)


def check_decomposition_identity(body: ConvexBody, samples: int = 10_000, seed: int = 0,
                                 scale: float = 5.0) -> CheckReport:
    """The rewriting identity for ``D_{F*}`` on random dual pairs (``v != 0``)."""
    rng = np.random.default_rng(seed)
    n = body.dim
    v = rng.standard_normal((samples, n)) * (scale * rng.random(samples))[:, None]
    v[~np.any(v != 0, axis=1), 0] = 1.0
    u = v + rng.standard_normal((samples, n)) * (10.0 ** rng.uniform(-6, 0.5, samples))[:, None]
    return CheckReport.from_margins("decomposition_identity", -decomposition_gap(body, u, v),
                                    tolerances.IDENTITY)


def _trajectory_dual(body: ConvexBody, traj: Trajectory):
    if traj.eta > max_stable_eta(body) * (1.0 + 1e-12):
        raise ConfigError(f"eta <= r1/(2nR) violated: eta = {traj.eta:.6g} > {max_stable_eta(body):.6g}",
                          key="eta")
    xc = clamp_interior(body, traj.x, traj.gamma)
    v = barrier_grad(body, xc)
    u = v - traj.eta * traj.estimator
    return xc, u, v


def check_theta_bound(body: ConvexBody, traj: Trajectory) -> CheckReport:
    """``Theta >= -eta n R / r1`` at every round."""
    _, u, v = _trajectory_dual(body, traj)
    su, sv = body.polar_gauge(u), body.polar_gauge(v)
    theta = (su - sv) / (1.0 + sv)
    floor = -traj.eta * body.dim * body.outer_radius_linf / body.inner_radius_l1
    return CheckReport.from_margins("theta_lower_bound", theta - floor, tolerances.IDENTITY)


def check_one_term_bound(body: ConvexBody, traj: Trajectory) -> CheckReport:
    """Per-round ``D_{F*}(grad F(x) - eta c~, grad F(x))`` against its upper bound.

    Quadratic bound on strongly convex bodies, ``p``-power bound otherwise.
    Recomputed from the recorded iterates and estimates through the generic
    Bregman divergence, independently of the engine's own diagnostics.
    """
    xc, u, v = _trajectory_dual(body, traj)
    lhs = conjugate_divergence(body, u, v)
    rhs = one_term_rhs(body, traj.eta, body.gauge(xc), body.polar_gauge(traj.estimator))
    return CheckReport.from_margins("one_term_bound", rhs - lhs, tolerances.IDENTITY)


def check_trajectory_decomposition(body: ConvexBody, traj: Trajectory) -> CheckReport:
    _, u, v = _trajectory_dual(body, traj)
    return CheckReport.from_margins("decomposition_identity", -decomposition_gap(body, u, v),
                                    tolerances.IDENTITY)


def trajectory_reports(body: ConvexBody, traj: Trajectory) -> list[CheckReport]:
    return [check_theta_bound(body, traj), check_one_term_bound(body, traj),
            check_trajectory_decomposition(body, traj)]


# -- differentiability via grid search on the polar boundary -----------------

def polar_boundary_grid(body: ConvexBody, resolution: int | None = None):
    """Grid on ``∂K°`` and its pitch (largest nearest-neighbour spacing).

    ``n = 2``: equally spaced angles.  ``n = 3``: a Fibonacci sphere.  Both
    are pushed radially onto ``∂K°``.
    """
    n = body.dim
    if n == 2:
        m = 800 if resolution is None else resolution
        a = 2.0 * np.pi * np.arange(m) / m
        dirs = np.column_stack([np.cos(a), np.sin(a)])
    elif n == 3:
        m = 20_000 if resolution is None else resolution
        k = np.arange(m) + 0.5
        z = 1.0 - 2.0 * k / m
        phi = np.pi * (1.0 + 5.0 ** 0.5) * k
        rho = np.sqrt(1.0 - z * z)
        dirs = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    else:
        raise PreconditionError("grid search needs n = 2 or n = 3")
    pts = dirs / body.polar_gauge(dirs)[:, None]
    dist, _ = cKDTree(pts).query(pts, k=2)
    return pts, float(dist[:, 1].max())


def _diameter(pts):
    if len(pts) <= 2000:
        diff = pts[:, None, :] - pts[None, :, :]
        return float(np.sqrt((diff ** 2).sum(-1)).max())
    # lower bound, enough to expose a fat support set
    return float(np.linalg.norm(pts - pts[0], axis=1).max())


def check_gauge_differentiability(body: ConvexBody, samples: int = 2_000, seed: int = 0,
                                  resolution: int | None = None, level: float = 1e-6) -> CheckReport:
    """The support set ``argmax_{d ∈ K°} <d, x>`` is a single point and equals ``gauge_grad(x)``.

    For each probe ``x`` (random directions plus the sign vectors, which hit
    the faces of polyhedral bodies) the grid points within ``level`` of the
    maximum must span at most 4 pitches, and the best grid point must be
    within 2 pitches of ``gauge_grad(x)``.  The margin is the smaller slack.
    """
    pts, pitch = polar_boundary_grid(body, resolution)
    rng = np.random.default_rng(seed)
    n = body.dim
    signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * n)).reshape(n, -1).T
    probes = np.vstack([signs, rng.standard_normal((max(samples - len(signs), 0), n))])[:samples]
    probes = probes / body.gauge(probes)[:, None]
    margins = np.empty(len(probes))
    for lo in range(0, len(probes), 200):
        xs = probes[lo:lo + 200]
        vals = xs @ pts.T
        top = vals.max(axis=1)
        best = pts[vals.argmax(axis=1)]
        grads = body.gauge_grad(xs)
        for j in range(len(xs)):
            near = pts[vals[j] >= top[j] - level]
            spread = 4.0 * pitch - _diameter(near)
            match = 2.0 * pitch - float(np.linalg.norm(best[j] - grads[j]))
            margins[lo + j] = min(spread, match)
    return CheckReport.from_margins("gauge_differentiability", margins, tolerances.GRID)


# -- full suite --------------------------------------------------------------

def run_suite(body: ConvexBody, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> list[CheckReport]:
    """Every applicable check on ``body`` (the ``verify`` subcommand)."""
    reports = [check_uniform_convexity(body, samples=samples, seed=seed)]
    if body.smooth:
        reports.append(check_scaling_inequality(body, samples=samples, seed=seed))
    if body.uc_modulus > 0:
        reports.append(check_bregman_upper_bound(body, samples=samples, seed=seed))
        reports.append(check_holder_smoothness(body, samples=samples, seed=seed))
    reports.append(check_decomposition_identity(body, samples=min(samples, 10_000), seed=seed))
    if body.dim in (2, 3):
        reports.append(check_gauge_differentiability(body, samples=min(samples, 2_000), seed=seed))
    return reports
