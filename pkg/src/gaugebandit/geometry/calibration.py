"""Numerical derivation of uniform-convexity moduli.

For a sample ``(x, y, z, gamma)`` write ``m = gamma x + (1 - gamma) y`` and
``w = gamma (1 - gamma) ||x - y||_K^q z / q``.  The largest modulus that the
sample tolerates is the exit time ``s* = max{s : ||m + s w||_K <= 1}`` of the
ray ``m + s w``.  The body's modulus is estimated as the minimum exit time
over many samples, then shrunk by a safety factor before being frozen.
"""

from __future__ import annotations

import math

import numpy as np

from .bodies import ConvexBody
from .sampling import uniform_convexity_triples

SAFETY = 0.9
DEFAULT_SAMPLES = 100_000


def ray_exit(body: ConvexBody, m: np.ndarray, w: np.ndarray, iters: int = 80) -> np.ndarray:
    """Largest ``s >= 0`` with ``gauge(m + s w) <= 1`` for each row (vectorised bisection)."""
    gm = body.gauge(m)
    gw = body.gauge(w)
    out = np.full(m.shape[0], np.inf)
    live = gw > 0
    m, w, gm, gw = m[live], w[live], gm[live], gw[live]
    lo = np.zeros(m.shape[0])
    # triangle inequality: gauge(m + s w) >= s gw - gm > 1 beyond this
    hi = (1.0 + gm) / gw * (1.0 + 1e-12)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inside = body.gauge(m + mid[:, None] * w) <= 1.0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    out[live] = lo
    return out


# below this inflation size the exit time is dominated by rounding in the gauge
MIN_INFLATION = 1e-7


def modulus_samples(body: ConvexBody, rng, size: int, q: float | None = None) -> np.ndarray:
    """Per-sample largest tolerated modulus (``inf`` for degenerate samples)."""
    q = body.uc_power if q is None else q
    x, y, z, g = uniform_convexity_triples(body, rng, size)
    m = g[:, None] * x + (1.0 - g)[:, None] * y
    w = (g * (1.0 - g) * body.gauge(x - y) ** q / q)[:, None] * z
    s = ray_exit(body, m, w)
    s[body.gauge(w) < MIN_INFLATION] = np.inf
    return s


def derive_alpha(body: ConvexBody, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                 q: float | None = None) -> dict:
    """Estimate the body's ``(alpha, q)`` modulus.

    Returns ``alpha_sampled`` (the sample minimum, an over-estimate of the
    true infimum) and ``alpha`` = ``SAFETY * alpha_sampled`` rounded down to
    four significant digits, the value that gets frozen.
    """
    rng = np.random.default_rng(seed)
    a = modulus_samples(body, rng, samples, q)
    a_min = float(np.min(a[np.isfinite(a)]))
    frozen = _round_down(SAFETY * a_min, 4)
    return {
        "alpha_sampled": a_min,
        "alpha": frozen,
        "q": float(body.uc_power if q is None else q),
        "samples": int(samples),
        "seed": int(seed),
    }


def _round_down(v: float, digits: int) -> float:
    if v <= 0:
        return 0.0
    e = math.floor(math.log10(v)) - digits + 1
    return round(math.floor(v / 10.0 ** e) * 10.0 ** e, 12)
