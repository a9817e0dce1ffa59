import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from gaugebandit.barrier import (
    BarrierPoint, barrier_divergence, barrier_grad, barrier_value, bregman_divergence,
    bregman_project_shrunken, clamp_interior, conjugate_divergence, conjugate_grad, conjugate_value,
)
from gaugebandit.errors import DomainError
from gaugebandit.geometry import Ellipsoid, LpBall
from gaugebandit.geometry.sampling import ball_points

L2 = LpBall(2, 2.0)
L15 = LpBall(2, 1.5)
BODIES = [LpBall(3, 2.0), LpBall(3, 1.5), LpBall(4, 3.0), Ellipsoid([2.0, 1.0]), Ellipsoid([1.0, 1.5, 3.0])]


def unit(body, v):
    v = np.asarray(v, float)
    return v / np.asarray(body.gauge(v))[..., None]


# -- barrier value / gradient --------------------------------------------------

def test_barrier_value_examples():
    for body in BODIES:
        assert barrier_value(body, np.zeros(body.dim)) == 0.0
    assert barrier_value(L2, [0.5, 0.0]) == pytest.approx(-math.log(0.5) - 0.5, abs=1e-15)
    assert -math.log(0.5) - 0.5 == pytest.approx(0.1931472, abs=1e-7)
    gamma = 0.01
    x = (1 - gamma) * unit(L2, [1.0, 2.0])
    assert barrier_value(L2, x) <= math.log(1 / gamma)


def test_barrier_value_monotone_and_blows_up():
    s = np.linspace(0, 1 - 1e-9, 200)
    vals = np.array([barrier_value(L2, [t, 0.0]) for t in s])
    assert np.all(np.diff(vals) > 0)
    assert vals[-1] > 19


def test_barrier_domain_errors():
    with pytest.raises(DomainError):
        barrier_value(L2, [1.0, 0.0])
    with pytest.raises(DomainError):
        barrier_grad(L2, [0.8, 0.8])
    with pytest.raises(DomainError):
        BarrierPoint.of(L2, [1.0, 0.0])
    with pytest.raises(DomainError):
        conjugate_value(L2, [np.nan, 0.0])
    p = BarrierPoint.of(L2, [0.3, 0.4])
    assert p.gauge_value == pytest.approx(0.5, abs=1e-12)


def test_barrier_grad_examples(rng):
    np.testing.assert_allclose(barrier_grad(L2, [0.3, 0.4]), [0.6, 0.8], atol=1e-12)
    np.testing.assert_array_equal(barrier_grad(L15, np.zeros(2)), np.zeros(2))
    body = LpBall(3, 1.5)
    for x in ball_points(body, rng, 20) * 0.95:
        fd = np.array([(barrier_value(body, x + h) - barrier_value(body, x - h)) / 2e-6
                       for h in 1e-6 * np.eye(3)])
        np.testing.assert_allclose(barrier_grad(body, x), fd, atol=1e-6)


def test_barrier_grad_blows_up():
    d = unit(L15, [1.0, 0.3])
    for k in range(1, 10):
        x = (1 - 10.0 ** -k) * d
        # 1 - (1 - 10^-k) loses digits as k grows, so compare relatively
        assert L15.polar_gauge(barrier_grad(L15, x)) >= (10.0 ** k - 1) * (1 - 1e-6)


def test_scalar_identity(rng):
    for body in BODIES:
        x = ball_points(body, rng, 1000)
        s = body.polar_gauge(barrier_grad(body, x))
        np.testing.assert_allclose(1 / (1 + s), 1 - body.gauge(x), atol=1e-9)


# -- conjugate -------------------------------------------------------------------

def test_conjugate_examples():
    assert conjugate_value(L2, [0.0, 0.0]) == 0.0
    assert conjugate_value(L2, [0.6, 0.8]) == pytest.approx(1 - math.log(2), abs=1e-15)
    assert 1 - math.log(2) == pytest.approx(0.3068528, abs=1e-7)
    np.testing.assert_allclose(conjugate_grad(L2, [0.6, 0.8]), [0.3, 0.4], atol=1e-15)
    np.testing.assert_array_equal(conjugate_grad(L2, [0.0, 0.0]), [0.0, 0.0])


@pytest.mark.parametrize("body", BODIES, ids=lambda b: b.key)
def test_conjugate_matches_fenchel_supremum(body, rng):
    # F*(d) = sup_x <x, d> - F(x); the sup lies along the maximiser of <., d> on dK
    for d in rng.standard_normal((10, body.dim)) * 3:
        direction = body.polar_gauge_grad(d)
        res = minimize_scalar(lambda t: -(t * direction @ d - barrier_value(body, t * direction)),
                              bounds=(0.0, 1.0 - 1e-12), method="bounded", options={"xatol": 1e-13})
        assert conjugate_value(body, d) == pytest.approx(-res.fun, abs=1e-6)
    # and no other direction does better
    d = rng.standard_normal(body.dim)
    x = ball_points(body, rng, 20_000)
    assert np.max(x @ d - barrier_value(body, x)) <= conjugate_value(body, d) + 1e-12


@pytest.mark.parametrize("body", BODIES, ids=lambda b: b.key)
def test_legendre_inverse(body, rng):
    x = ball_points(body, rng, 1000)
    np.testing.assert_allclose(conjugate_grad(body, barrier_grad(body, x)), x, atol=1e-8)
    d = rng.standard_normal((1000, body.dim)) * rng.lognormal(0, 2, (1000, 1))
    np.testing.assert_allclose(barrier_grad(body, conjugate_grad(body, d)), d, rtol=1e-7, atol=1e-9)
    assert np.all(body.gauge(conjugate_grad(body, d)) < 1)


def test_strict_convexity_midpoint(rng):
    for body in BODIES:
        x, y = ball_points(body, rng, 500), ball_points(body, rng, 500)
        mid = barrier_value(body, 0.5 * (x + y))
        assert np.all(mid < 0.5 * (barrier_value(body, x) + barrier_value(body, y)))


# -- Bregman divergences -----------------------------------------------------------

def test_bregman_divergence_examples():
    f = lambda v: 0.5 * np.sum(np.asarray(v) ** 2, axis=-1)
    g = lambda v: np.asarray(v)
    assert bregman_divergence(f, g, [1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0)
    assert bregman_divergence(f, g, [0.2, 0.7], [0.2, 0.7]) == 0.0


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_barrier_divergences_nonnegative(seed):
    rng = np.random.default_rng(seed)
    body = LpBall(3, 1.5)
    x, y = ball_points(body, rng, 2)
    assert barrier_divergence(body, x, y) >= -1e-12
    u, v = rng.standard_normal((2, 3)) * 4
    assert conjugate_divergence(body, u, v) >= -1e-12
    assert conjugate_divergence(body, u, u) == 0.0


# -- projection ----------------------------------------------------------------------

def test_projection_examples():
    z = 0.3 * unit(L15, [1.0, 2.0])
    np.testing.assert_array_equal(bregman_project_shrunken(L15, z, 0.1), z)
    np.testing.assert_allclose(bregman_project_shrunken(L2, [0.99, 0.0], 0.01), [0.99, 0.0], atol=1e-15)
    z = 0.995 * unit(L15, [1.0, -0.4])
    p = bregman_project_shrunken(L15, z, 0.01)
    assert L15.gauge(p) == pytest.approx(0.99, abs=1e-14)
    np.testing.assert_allclose(p / np.linalg.norm(p), z / np.linalg.norm(z), atol=1e-14)


def test_projection_rejects_bad_gamma():
    for g in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            bregman_project_shrunken(L2, [0.1, 0.1], g)


@pytest.mark.parametrize("body", BODIES, ids=lambda b: b.key)
def test_projection_beats_random_feasible_points(body, rng):
    gamma = 0.05
    for _ in range(20):
        z = (1 - gamma * rng.random()) * unit(body, rng.standard_normal(body.dim))
        p = bregman_project_shrunken(body, z, gamma)
        y = ball_points(body, rng, 1000) * (1 - gamma)
        y[:100] = (1 - gamma) * unit(body, z + 0.05 * rng.standard_normal((100, body.dim)))
        best = barrier_divergence(body, p, z)
        assert np.all(barrier_divergence(body, y, z) - best >= -1e-9)


def test_clamp_interior():
    x = np.array([0.7, 0.0])
    np.testing.assert_array_equal(clamp_interior(L2, x, 0.2), x)
    c = clamp_interior(L2, np.array([0.999, 0.0]), 0.01)
    assert L2.gauge(c) == pytest.approx(0.99 - 1e-12, abs=1e-15)
