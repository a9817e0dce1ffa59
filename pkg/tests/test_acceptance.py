"""Acceptance criteria, one test per criterion.

Each criterion prints a single ``[PASS]`` / ``[FAIL]`` line with the measured
quantities; the lines are also repeated in the pytest terminal summary.
Run standalone with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import filecmp
import math
import time

import numpy as np
import pytest
from scipy.optimize import minimize

from gaugebandit.adversary import make_adversary
from gaugebandit.bandit import PendingRound, estimate_loss, schedule_params, simulate
from gaugebandit.barrier import barrier_grad, bregman_project_shrunken, conjugate_grad
from gaugebandit.config import build, parse_text
from gaugebandit.geometry import Cube, Ellipsoid, LpBall, certified_bodies
from gaugebandit.geometry.sampling import ball_points, polar_ball_points
from gaugebandit.harness import loglog_fit, run_experiment
from gaugebandit import verify

RESULTS: list[str] = []


def _record(number, title, passed, detail, seconds, budget):
    timing_ok = seconds <= budget
    verdict = "PASS" if passed and timing_ok else "FAIL"
    line = f"[{verdict}] criterion {number}: {title} | {detail} | {seconds:.1f}s (limit {budget:.0f}s)"
    print(line)
    RESULTS.append(line)
    return passed and timing_ok


# 1 ---------------------------------------------------------------------------

def criterion_1():
    rng = np.random.default_rng(101)
    worst = 0.0
    for n in (2, 5, 10):
        bodies = [LpBall(n, 2.0), LpBall(n, 1.5), LpBall(n, 3.0), Ellipsoid(np.linspace(1.0, 2.5, n))]
        for body in bodies:
            r1 = body.inner_radius_l1
            xs = ball_points(body, rng, 100)
            cs = polar_ball_points(body, rng, 100)
            for x, c in zip(xs, cs):
                g = float(body.gauge(x))
                expect = np.zeros(n)
                # xi = 1: probability g, estimator is zero whatever the action
                a1 = x / g if g > 0 else np.zeros(n)
                expect += g * estimate_loss(PendingRound(x, g, 1, 0, 1, a1), c, body)
                for i in range(n):
                    for eps in (-1, 1):
                        a = np.zeros(n)
                        a[i] = r1 * eps
                        est = estimate_loss(PendingRound(x, g, 0, i, eps, a), c, body)
                        expect += (1.0 - g) / (2 * n) * est
                worst = max(worst, float(np.max(np.abs(expect - c))))
    return worst <= 1e-12, f"max |E c~ - c|_inf = {worst:.3e} (tol 1e-12) over 1200 pairs"


# 2 ---------------------------------------------------------------------------

def criterion_2():
    rng = np.random.default_rng(202)
    inv, ident = 0.0, 0.0
    for body in certified_bodies():
        x = ball_points(body, rng, 1000)
        # push a tenth of the points close to the boundary
        x[:100] *= (1.0 - 10.0 ** rng.uniform(-8, -1, 100))[:, None] / body.gauge(x[:100])[:, None]
        d = barrier_grad(body, x)
        inv = max(inv, float(np.max(np.abs(conjugate_grad(body, d) - x))))
        lhs = 1.0 / (1.0 + body.polar_gauge(d))
        ident = max(ident, float(np.max(np.abs(lhs - (1.0 - body.gauge(x))))))
    ok = inv <= 1e-8 and ident <= 1e-9
    return ok, f"inverse err {inv:.3e} (tol 1e-8), scalar identity err {ident:.3e} (tol 1e-9), {len(certified_bodies())} bodies"


# 3 ---------------------------------------------------------------------------

def _boundary_param(body, angles):
    if body.dim == 2:
        u = np.array([np.cos(angles[0]), np.sin(angles[0])])
    else:
        th, ph = angles
        u = np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    return u / body.gauge(u)


def _angles_of(y):
    if y.size == 2:
        return np.array([math.atan2(y[1], y[0])])
    r = np.linalg.norm(y)
    return np.array([math.acos(np.clip(y[2] / r, -1, 1)), math.atan2(y[1], y[0])])


def projection_oracle(body, z, gamma):
    """Numeric argmin of D_F(., z) over (1 - gamma) K, independent of the closed form.

    Feasible points are parametrised as ``(1 - gamma) t u(angles)`` with
    ``t in [0, 1]`` and ``u`` the boundary point in the given direction, and
    the objective ``F(y) - <y, grad F(z)>`` (``D_F(., z)`` up to a constant)
    is minimised with L-BFGS-B, then polished with Nelder-Mead: over the
    angles alone when ``t = 1`` is active, over ``(t, angles)`` otherwise.
    """
    grad_z = barrier_grad(body, z)
    lim = 1.0 - gamma

    def y_of(w):
        return lim * min(max(w[0], 0.0), 1.0) * _boundary_param(body, w[1:])

    def obj(w):
        y = y_of(w)
        g = float(body.gauge(y))
        return -math.log1p(-g) - g - float(np.dot(y, grad_z))

    w0 = np.concatenate([[0.5], _angles_of(z)])
    bounds = [(0.0, 1.0)] + [(None, None)] * (body.dim - 1)
    res = minimize(obj, w0, method="L-BFGS-B", bounds=bounds,
                   options={"ftol": 1e-16, "gtol": 1e-13, "maxiter": 5000})
    w = res.x
    nm = {"xatol": 1e-13, "fatol": 1e-17, "maxiter": 40000, "maxfev": 40000}
    if w[0] >= 1.0 - 1e-7:
        a = minimize(lambda ang: obj(np.concatenate([[1.0], ang])), w[1:], method="Nelder-Mead",
                     options=nm).x
        return lim * _boundary_param(body, a)
    return y_of(minimize(obj, w, method="Nelder-Mead", options=nm).x)


def criterion_3():
    rng = np.random.default_rng(303)
    worst, count, boundary_cases, interior_cases = 0.0, 0, 0, 0
    bodies = [LpBall(2, 2.0), LpBall(3, 2.0), LpBall(2, 1.5), LpBall(3, 1.5),
              Ellipsoid([2.0, 1.0]), Ellipsoid([1.0, 1.5, 3.0])]
    per_body = _split(200, len(bodies))
    for body, k in zip(bodies, per_body):
        for j in range(k):
            gamma = float(rng.uniform(0.005, 0.2))
            g = rng.standard_normal(body.dim)
            g /= body.gauge(g)
            if j % 5 == 0:
                target = rng.uniform(0.05, 1.0 - gamma - 1e-3)  # interior branch
                interior_cases += 1
            else:
                target = 1.0 - gamma * rng.uniform(0.0, 1.0) ** 3  # boundary branch
                boundary_cases += 1
            z = target * g
            closed = bregman_project_shrunken(body, z, gamma)
            oracle = projection_oracle(body, z, gamma)
            worst = max(worst, float(np.max(np.abs(closed - oracle))))
            count += 1
    ok = worst <= 1e-6
    return ok, f"max |closed - oracle|_inf = {worst:.3e} (tol 1e-6) on {count} instances " \
               f"({boundary_cases} boundary, {interior_cases} interior)"


def _split(size, k):
    base = [size // k] * k
    for i in range(size - sum(base)):
        base[i] += 1
    return base


# 4 ---------------------------------------------------------------------------

CHECK_SAMPLES = 100_000


def criterion_4():
    failures, lines = [], 0
    worst = {}
    for body in certified_bodies():
        reports = [
            verify.check_uniform_convexity(body, samples=CHECK_SAMPLES, seed=1),
            verify.check_scaling_inequality(body, samples=CHECK_SAMPLES, seed=2),
            verify.check_bregman_upper_bound(body, samples=CHECK_SAMPLES, seed=3),
            verify.check_holder_smoothness(body, samples=CHECK_SAMPLES, seed=4),
        ]
        if body.dim in (2, 3):
            reports.append(verify.check_gauge_differentiability(body, samples=2000, seed=5))
        for r in reports:
            lines += 1
            worst[r.check_name] = min(worst.get(r.check_name, math.inf), r.worst_margin)
            if r.violations:
                failures.append(f"{body.key}:{r.check_name}={r.violations}")
        # negative controls: the inflated modulus must be caught
        inflated = body.with_alpha(10.0 * body.uc_modulus)
        L = verify.holder_constant(body)
        controls = [
            verify.check_uniform_convexity(inflated, samples=10_000, seed=6),
            verify.check_scaling_inequality(inflated, samples=10_000, seed=7),
            # a larger modulus only shrinks L towards 2p, so the smoothness
            # checks get their control through an undersized constant
            verify.check_bregman_upper_bound(body, samples=10_000, seed=8, constant=L / 100.0),
            verify.check_holder_smoothness(body, samples=10_000, seed=9, constant=L / 100.0),
        ]
        for r in controls:
            if r.violations == 0:
                failures.append(f"{body.key}:control:{r.check_name} has no violations")
    cube = verify.check_gauge_differentiability(Cube(2), samples=500, seed=10)
    cube3 = verify.check_gauge_differentiability(Cube(3), samples=500, seed=10)
    if cube.violations == 0 or cube3.violations == 0:
        failures.append("cube control passed")
    detail = (f"{lines} reports over {len(certified_bodies())} bodies, "
              f"worst margins {', '.join(f'{k}={v:.2e}' for k, v in worst.items())}; "
              f"controls caught, cube violations {cube.violations}+{cube3.violations}")
    if failures:
        detail += "; FAILURES: " + "; ".join(failures[:6])
    return not failures, detail


# 5 ---------------------------------------------------------------------------

def criterion_5():
    body = LpBall(4, 2.0)
    T = 10_000
    s = schedule_params(body, T, "strongly_convex")
    floor = -s.eta * body.dim * body.outer_radius_linf / body.inner_radius_l1
    seeds = list(range(20))
    theta_v = one_v = dec_v = 0
    worst_one = math.inf
    min_theta, worst_gap = math.inf, 0.0
    engine_ok = True
    # the constant stream never shrinks ||v||, the other two do
    families = {"constant": {}, "stochastic": {"noise": 2.0}, "rotating": {"period": 250}}
    for kind, kw in families.items():
        advs = [make_adversary(kind, body, k, **kw) for k in seeds]
        res = simulate(body, T, s.eta, s.gamma, seeds, advs, record=True)
        for traj in res.trajectories:
            th, one, dec = verify.trajectory_reports(body, traj)
            theta_v += th.violations
            one_v += one.violations
            dec_v += dec.violations
            worst_one = min(worst_one, one.worst_margin)
            worst_gap = max(worst_gap, -dec.worst_margin)
            min_theta = min(min_theta, float(traj.theta.min()))
        # the engine's own per-round diagnostics must agree
        engine_ok &= bool(res.worst_theta_margin.min() >= -1e-9 and res.worst_one_term_margin.min() >= -1e-9
                          and res.max_decomposition_gap.max() <= 1e-9)
    ok = theta_v == one_v == dec_v == 0 and engine_ok
    return ok, (f"3 adversaries x 20 seeds x {T} rounds: theta violations {theta_v} "
                f"(min theta {min_theta:.3e} vs floor {floor:.3e}), one-term violations {one_v} "
                f"(worst margin {worst_one:.3e}), decomposition max gap {worst_gap:.3e}")


# 6 ---------------------------------------------------------------------------

def criterion_6():
    T = 20_000
    seeds = list(range(20))
    parts, ok = [], True
    for n in (2, 4, 8, 16):
        body = LpBall(n, 2.0)
        s = schedule_params(body, T, "strongly_convex")
        res = simulate(body, T, s.eta, s.gamma, seeds,
                       [make_adversary("constant", body, k) for k in seeds], diagnostics=False)
        regret = res.conditional_cum_loss + body.polar_gauge(-res.loss_sum)
        alpha = body.uc_modulus
        L = (5 * alpha + 4) / alpha
        bound = math.sqrt(T) + math.sqrt(n * T) * math.log(T) / 2 + L * math.sqrt(n * T)
        assert abs(bound - s.bound) <= 1e-9 * bound
        ok &= regret.mean() <= bound
        parts.append(f"n={n}: {regret.mean():.1f} <= {bound:.1f}")
    return ok, "; ".join(parts)


# 7 ---------------------------------------------------------------------------

L2_T_LADDER = (5_000, 10_000, 20_000, 40_000, 80_000)
L2_N_LADDER = (2, 4, 8, 16)
L3_T_LADDER = (40_000, 80_000, 160_000, 320_000, 640_000)


def _mean_regret(body, T, mode, S):
    s = schedule_params(body, T, mode)
    seeds = list(range(S))
    res = simulate(body, T, s.eta, s.gamma, seeds, [make_adversary("constant", body, k) for k in seeds],
                   diagnostics=False)
    return float(np.mean(res.conditional_cum_loss + body.polar_gauge(-res.loss_sum)))


def _exponents(S):
    t2 = loglog_fit(L2_T_LADDER, [_mean_regret(LpBall(2, 2.0), T, "strongly_convex", S) for T in L2_T_LADDER])[0]
    n2 = loglog_fit(L2_N_LADDER, [_mean_regret(LpBall(n, 2.0), 20_000, "strongly_convex", S) for n in L2_N_LADDER])[0]
    t3 = loglog_fit(L3_T_LADDER, [_mean_regret(LpBall(2, 3.0), T, "uniformly_convex", S) for T in L3_T_LADDER])[0]
    ok = 0.45 <= t2 <= 0.65 and n2 <= 0.65 and 0.57 <= t3 <= 0.77
    return ok, t2, n2, t3


def criterion_7():
    ok, t2, n2, t3 = _exponents(20)
    note = "20 seeds"
    if not ok:
        ok, t2, n2, t3 = _exponents(40)
        note = "re-run with 40 seeds"
    return ok, (f"l2 T-exponent {t2:.4f} in [0.45, 0.65]; l2 n-exponent {n2:.4f} <= 0.65; "
                f"l3 T-exponent {t3:.4f} in [0.57, 0.77] ({note})")


# 8 ---------------------------------------------------------------------------

def criterion_8(tmp_path):
    text = "\n".join([
        "body.kind = lp", "body.dim = 3", "body.p = 1.5", "horizon = 5000",
        "schedule = strongly_convex", "seed = 987654321", "adversary.kind = stochastic",
    ])
    paths = []
    for k in range(2):
        values = parse_text(text + f"\noutput.dir = {tmp_path / f'run{k}'}\n")
        cfg = build(values)
        run_experiment(cfg)
        paths.append(tmp_path / f"run{k}" / "trajectory.csv")
    same = filecmp.cmp(paths[0], paths[1], shallow=False)
    rows = sum(1 for _ in open(paths[0])) - 1
    return same, f"two executions, {rows} rows each: {'bit-identical' if same else 'DIFFERENT'}"


# -- pytest wrappers -----------------------------------------------------------

def _run(number, title, fn, budget, *args):
    t0 = time.perf_counter()
    passed, detail = fn(*args)
    return _record(number, title, passed, detail, time.perf_counter() - t0, budget)


def test_criterion_1_estimator_unbiasedness():
    assert _run(1, "estimator unbiasedness (exact enumeration)", criterion_1, 10)


def test_criterion_2_legendre_inverse():
    assert _run(2, "Legendre inverse and scalar identity", criterion_2, 10)


def test_criterion_3_projection_oracle():
    assert _run(3, "closed-form projection vs numeric minimiser", criterion_3, 120)


def test_criterion_4_inequality_suite():
    assert _run(4, "inequality suite zero violations + negative controls", criterion_4, 300)


def test_criterion_5_trajectory_bounds():
    assert _run(5, "trajectory Theta / one-term bounds / decomposition", criterion_5, 60)


def test_criterion_6_regret_bound():
    assert _run(6, "mean pseudo-regret below the strongly convex bound", criterion_6, 300)


def test_criterion_7_scaling_exponents():
    assert _run(7, "log-log scaling exponents", criterion_7, 900)


def test_criterion_8_determinism(tmp_path):
    assert _run(8, "bit-identical trajectory CSV", criterion_8, 60, tmp_path)


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    budgets = {1: 10, 2: 10, 3: 120, 4: 300, 5: 60, 6: 300, 7: 900, 8: 60}
    fns = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7]
    for k, fn in enumerate(fns, 1):
        _run(k, fn.__name__, fn, budgets[k])
    with tempfile.TemporaryDirectory() as d:
        _run(8, "criterion_8", criterion_8, 60, Path(d))
