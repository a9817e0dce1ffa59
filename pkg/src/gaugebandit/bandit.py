"""Bandit mirror descent with the gauge barrier.

One round, for the current iterate ``x`` (gauge ``g``):

1. draw ``xi ~ Ber(g)``, ``i ~ Uniform[n]``, ``eps ~ Rademacher``;
2. play ``a = x / g`` if ``xi == 1``, else ``a = r1 * eps * e_i``;
3. observe only the scalar ``<c, a>`` and form the unbiased estimate
   ``c~ = (n / r1^2) (1 - xi) <c, a> / (1 - g) * a``;
4. step ``x <- Proj_{(1-gamma)K}(grad F*(grad F(x) - eta c~))``.

Randomness comes from a counter-based Philox generator keyed on the run seed;
round ``t`` always consumes the same three uniforms, so a trajectory is a pure
function of (config, seed) and independent runs are decorrelated by key.

``simulate`` advances a batch of independent runs in lock-step (one numpy
row per seed), which is how sweeps stay cheap; ``run_bmd`` is the single-run
wrapper that returns a full trajectory.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import tolerances
from .adversary import Adversary
from .barrier import BarrierPoint, barrier_grad, bregman_project_shrunken, clamp_interior, conjugate_grad
from .errors import ConfigError, DomainError
from .geometry.bodies import ConvexBody

SCHEDULES = ("manual", "strongly_convex", "uniformly_convex")

CSV_COLUMNS = ("t", "xi", "arm", "eps", "scalar_loss", "gauge_x", "theta", "one_term_lhs", "one_term_rhs")


# -- schedules ---------------------------------------------------------------

@dataclass(frozen=True)
class Schedule:
    mode: str
    eta: float
    gamma: float
    min_horizon: float
    L: float
    bound: float


def max_stable_eta(body: ConvexBody) -> float:
    """``r1 / (2 n R)``: the step size below which the one-term bounds apply."""
    return body.inner_radius_l1 / (2.0 * body.dim * body.outer_radius_linf)


def theoretical_bound(body: ConvexBody, horizon: int, mode: str) -> float:
    return schedule_params(body, horizon, mode, check=False).bound


def schedule_params(body: ConvexBody, horizon: int, mode: str, check: bool = True) -> Schedule:
    """Step size, shrink factor and pseudo-regret bound for a theory schedule.

    ``strongly_convex``: ``eta = 1/sqrt(nT)``, ``gamma = 1/sqrt(T)``, valid for
    ``T >= 4n(R/r)^2`` with ``r`` the inscribed l2 radius.
    ``uniformly_convex``: ``eta = 1/(n^(1/q) T^(1/p))``, ``gamma = 1/sqrt(T)``,
    valid for ``T >= 2^p n (R/r)^p`` with ``r`` the inscribed lq radius.
    """
    n, T = body.dim, int(horizon)
    R, r = body.outer_radius_linf, body.inner_radius_lq
    alpha, q = body.uc_modulus, body.uc_power
    if mode == "strongly_convex":
        if q != 2.0:
            raise ConfigError(f"strongly_convex schedule needs a strongly convex body (q = {q})",
                              key="schedule")
        min_T = 4.0 * n * (R / r) ** 2
        if check and T < min_T:
            raise ConfigError(f"T >= 4n(R/r)^2 violated: T = {T} < {min_T:.6g}", key="horizon")
        eta, gamma = 1.0 / math.sqrt(n * T), 1.0 / math.sqrt(T)
        L = (R / r) ** 2 * (5.0 * alpha + 4.0) / alpha
        rt = math.sqrt(n * T)
        bound = math.sqrt(T) + rt * math.log(T) / 2.0 + L * rt
    elif mode == "uniformly_convex":
        p = q / (q - 1.0)
        min_T = 2.0 ** p * n * (R / r) ** p
        if check and T < min_T:
            raise ConfigError(f"T >= 2^p n (R/r)^p violated: T = {T} < {min_T:.6g}", key="horizon")
        scale = n ** (1.0 / q) * T ** (1.0 / p)
        eta, gamma = 1.0 / scale, 1.0 / math.sqrt(T)
        L = 2.0 * p * (1.0 + (q / (2.0 * alpha)) ** (1.0 / (q - 1.0)))
        bound = (math.sqrt(T) + scale * math.log(T) / 2.0
                 + (0.5 ** (2.0 - p) + L) * (R / r) ** p * scale)
    else:
        raise ConfigError(f"schedule {mode!r} has no derived parameters", key="schedule")
    cap = max_stable_eta(body)
    if check and eta > cap * (1.0 + 1e-12):
        raise ConfigError(f"eta <= r1/(2nR) violated: eta = {eta:.6g} > {cap:.6g}", key="eta")
    if check and not (0.0 < gamma < 1.0):
        raise ConfigError(f"gamma = {gamma} outside (0, 1)", key="horizon")
    return Schedule(mode, eta, gamma, min_T, L, bound)


@dataclass(frozen=True)
class BmdConfig:
    body: ConvexBody
    horizon: int
    eta: float
    gamma: float
    seed: int = 0
    schedule: str = "manual"

    def __post_init__(self):
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ConfigError("horizon must be a positive integer", key="horizon")
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ConfigError("eta must be positive", key="eta")
        if not (0.0 < self.gamma < 1.0):
            raise ConfigError("gamma must lie in (0, 1)", key="gamma")
        if int(self.seed) != self.seed or not (0 <= self.seed < 2 ** 64):
            raise ConfigError("seed must be an integer in [0, 2^64)", key="seed")
        if self.schedule not in SCHEDULES:
            raise ConfigError(f"unknown schedule {self.schedule!r}", key="schedule")

    @classmethod
    def scheduled(cls, body: ConvexBody, horizon: int, mode: str, seed: int = 0) -> "BmdConfig":
        s = schedule_params(body, horizon, mode)
        return cls(body, int(horizon), s.eta, s.gamma, seed, mode)


# -- single-round operations -------------------------------------------------

def round_uniforms(seed: int, horizon: int) -> np.ndarray:
    """The ``(horizon, 3)`` uniforms driving (xi, arm, eps) for every round."""
    return np.random.Generator(np.random.Philox(key=int(seed))).random((int(horizon), 3))


def _actions(x, g, u, r1, n):
    xi = u[:, 0] < g
    arm = np.minimum((u[:, 1] * n).astype(np.int64), n - 1)
    eps = np.where(u[:, 2] < 0.5, -1.0, 1.0)
    action = np.zeros_like(x)
    action[np.arange(x.shape[0]), arm] = r1 * eps
    if np.any(xi):
        action[xi] = x[xi] / g[xi, None]
    return xi, arm, eps, action


def sample_action(x, body: ConvexBody, rng: np.random.Generator):
    """Draw the bandit action at interior point ``x``.

    Returns ``(xi, arm, eps, action)``.  ``Ber(0)`` never fires, so the
    origin always plays a signed scaled basis vector.
    """
    pt = x if isinstance(x, BarrierPoint) else BarrierPoint.of(body, x)
    u = rng.random((1, 3))
    xi, arm, eps, action = _actions(pt.coords[None, :], np.array([pt.gauge_value]), u,
                                    body.inner_radius_l1, body.dim)
    return int(xi[0]), int(arm[0]), int(eps[0]), action[0]


@dataclass(frozen=True)
class PendingRound:
    """A round whose action is fixed but whose loss estimate is not yet formed."""

    x: np.ndarray
    gauge_x: float
    xi: int
    arm: int
    eps: int
    action: np.ndarray


def _estimator(action, xi, scalar, g, r1, n):
    w = np.where(xi, 0.0, (n / r1 ** 2) * scalar / (1.0 - g))
    return w[:, None] * action


def estimate_loss(pending: PendingRound, c, body: ConvexBody) -> np.ndarray:
    """Unbiased estimate of ``c`` that reads only the scalar ``<a, c>``."""
    if pending.gauge_x >= 1.0:
        raise DomainError("estimate requested at a non-interior point")
    scalar = float(np.dot(pending.action, np.asarray(getattr(c, "coords", c), dtype=float)))
    return _estimator(pending.action[None, :], np.array([bool(pending.xi)]), np.array([scalar]),
                      np.array([pending.gauge_x]), body.inner_radius_l1, body.dim)[0]


def bmd_step(x, estimator, cfg: BmdConfig) -> np.ndarray:
    """``Proj_{(1-gamma)K}(grad F*(grad F(x) - eta * estimator))``."""
    body = cfg.body
    x = np.asarray(getattr(x, "coords", x), dtype=float)
    xc = clamp_interior(body, x, cfg.gamma)
    d = barrier_grad(body, xc) - cfg.eta * np.asarray(estimator, dtype=float)
    return bregman_project_shrunken(body, conjugate_grad(body, d), cfg.gamma)


# -- trajectories ------------------------------------------------------------

@dataclass(frozen=True)
class RoundRecord:
    t: int
    x: np.ndarray
    gauge_x: float
    xi: int
    arm: int
    eps: int
    action: np.ndarray
    scalar_loss: float
    estimator: np.ndarray


@dataclass
class Trajectory:
    """Everything recorded along one run; arrays are indexed by round ``t - 1``."""

    body: ConvexBody
    eta: float
    gamma: float
    seed: int
    x: np.ndarray
    gauge_x: np.ndarray
    xi: np.ndarray
    arm: np.ndarray
    eps: np.ndarray
    action: np.ndarray
    scalar_loss: np.ndarray
    estimator: np.ndarray
    loss: np.ndarray
    theta: np.ndarray
    one_term_lhs: np.ndarray
    one_term_rhs: np.ndarray
    decomposition_gap: np.ndarray

    @property
    def horizon(self) -> int:
        return self.x.shape[0]

    @property
    def average_action(self) -> np.ndarray:
        # returned by the algorithm; no guarantee is attached to it
        return self.action.mean(axis=0)

    def records(self) -> Iterator[RoundRecord]:
        for k in range(self.horizon):
            yield RoundRecord(k + 1, self.x[k], float(self.gauge_x[k]), int(self.xi[k]),
                              int(self.arm[k]), int(self.eps[k]), self.action[k],
                              float(self.scalar_loss[k]), self.estimator[k])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            f = _fmt
            for k in range(self.horizon):
                w.writerow((k + 1, int(self.xi[k]), int(self.arm[k]), int(self.eps[k]),
                            f(self.scalar_loss[k]), f(self.gauge_x[k]), f(self.theta[k]),
                            f(self.one_term_lhs[k]), f(self.one_term_rhs[k])))


def _fmt(v) -> str:
    return "%.17g" % v


@dataclass
class BatchResult:
    """Per-run summaries of a batch of independent runs (row ``i`` is ``seeds[i]``)."""

    seeds: list
    horizon: int
    eta: float
    gamma: float
    sampled_cum_loss: np.ndarray
    conditional_cum_loss: np.ndarray
    loss_sum: np.ndarray
    regret_curve: np.ndarray
    worst_theta_margin: np.ndarray
    worst_one_term_margin: np.ndarray
    max_decomposition_gap: np.ndarray
    max_gauge: np.ndarray
    trajectories: list = field(default_factory=list)


def one_term_rhs(body: ConvexBody, eta: float, gauge_x, estimator_polar):
    """Per-round upper bound on ``D_{F*}(grad F(x) - eta c~, grad F(x))``.

    Quadratic form for strongly convex bodies, the ``p``-power form otherwise.
    """
    alpha, q = body.uc_modulus, body.uc_power
    if q == 2.0:
        return (1.0 - gauge_x) * (1.0 + 4.0 * (alpha + 1.0) / alpha) * (eta * estimator_polar) ** 2
    p = q / (q - 1.0)
    L = 2.0 * p * (1.0 + (q / (2.0 * alpha)) ** (1.0 / (q - 1.0)))
    return (1.0 - gauge_x) * (eta * estimator_polar) ** p * (0.5 ** (2.0 - p) + L)


LOSS_BLOCK = 1024


def _scaled(grad, v, scale):
    # rowwise scale * grad(v), skipping the rows where scale == 0 (v = 0)
    nz = scale > 0
    if nz.all():
        return scale[:, None] * grad(v)
    out = np.zeros_like(v)
    if nz.any():
        out[nz] = scale[nz, None] * grad(v[nz])
    return out


def simulate(body: ConvexBody, horizon: int, eta: float, gamma: float, seeds: Sequence[int],
             adversaries: Sequence[Adversary], record: bool = False,
             diagnostics: bool = True) -> BatchResult:
    """Run ``len(seeds)`` independent BMD runs side by side.

    ``adversaries[i]`` drives run ``i``.  With ``record=True`` full per-round
    trajectories are kept (memory grows as ``runs * horizon * dim``).
    ``diagnostics=False`` skips the per-round one-term quantities (their
    summary fields are then NaN); it is ignored when recording.
    """
    diagnostics = diagnostics or record
    S, T, n = len(seeds), int(horizon), body.dim
    if len(adversaries) != S:
        raise ValueError("need one adversary per seed")
    for s in seeds:
        BmdConfig(body, T, eta, gamma, s)
    r1, R = body.inner_radius_l1, body.outer_radius_linf
    theta_floor = -eta * n * R / r1
    U = np.stack([round_uniforms(s, T) for s in seeds])
    adaptive = [(i, a) for i, a in enumerate(adversaries) if not a.oblivious]

    x = np.zeros((S, n))
    sampled = np.zeros(S)
    cond = np.zeros(S)
    csum = np.zeros((S, n))
    curve = np.empty((S, T))
    worst_theta = np.full(S, np.inf)
    worst_rhs = np.full(S, np.inf)
    max_gap = np.zeros(S)
    max_g = np.zeros(S)
    if record:
        rec = {k: np.empty((S, T, n)) for k in ("x", "action", "estimator", "loss")}
        rec.update({k: np.empty((S, T)) for k in ("gauge_x", "scalar_loss", "theta", "lhs", "rhs", "gap")})
        rec.update({"xi": np.empty((S, T), dtype=np.int8), "arm": np.empty((S, T), dtype=np.int64),
                    "eps": np.empty((S, T), dtype=np.int8)})

    limit = 1.0 - gamma - tolerances.CLAMP
    block = None
    for k in range(T):
        g = body.gauge(x)
        if g.max() > 1.0 - gamma + tolerances.CLAMP:
            raise RuntimeError(f"iterate left (1-gamma)K at round {k + 1}: gauge {g.max()!r}")
        np.maximum(max_g, g, out=max_g)
        xi, arm, eps, action = _actions(x, g, U[:, k], r1, n)
        if adaptive:
            c = np.stack([adv.next_loss(k + 1).coords for adv in adversaries])
        else:
            j = k % LOSS_BLOCK
            if j == 0:
                m = min(LOSS_BLOCK, T - k)
                block = np.stack([adv.loss_block(k + 1, m) for adv in adversaries], axis=1)
            c = block[j]
        scalar = np.einsum("ij,ij->i", action, c)
        est = _estimator(action, xi, scalar, g, r1, n)
        for i, adv in adaptive:
            adv.observe(action[i])

        cond += np.einsum("ij,ij->i", c, x)
        sampled += scalar
        csum += c
        curve[:, k] = cond + body.polar_gauge(-csum)

        # mirror step, i.e. bmd_step with the gauges it needs known in closed
        # form: clamping and projection are radial, gauge_grad is scale free
        gc = np.minimum(g, limit)
        v = _scaled(body.gauge_grad, x, gc / (1.0 - gc))
        u = v - eta * est
        su = body.polar_gauge(u)
        gz = su / (1.0 + su)
        z = _scaled(body.polar_gauge_grad, u, gz)
        x_next = z * np.where(gz > 1.0 - gamma, (1.0 - gamma) / np.where(gz > 0, gz, 1.0), 1.0)[:, None]

        if not diagnostics:
            x = x_next
            continue

        # one-term diagnostics at (u, v)
        sv = body.polar_gauge(v)
        grad_v = _scaled(body.polar_gauge_grad, v, (sv > 0).astype(float))
        du = u - v
        lhs = (su - np.log1p(su)) - (sv - np.log1p(sv)) - (sv / (1.0 + sv)) * np.einsum("ij,ij->i", grad_v, du)
        theta = (su - sv) / (1.0 + sv)
        d_half = 0.5 * su ** 2 - 0.5 * sv ** 2 - sv * np.einsum("ij,ij->i", grad_v, du)
        decomposed = theta - np.log1p(theta) - 0.5 * (su - sv) ** 2 / (1.0 + sv) + d_half / (1.0 + sv)
        gap = np.abs(lhs - decomposed)
        rhs = one_term_rhs(body, eta, gc, body.polar_gauge(est))
        np.minimum(worst_theta, theta - theta_floor, out=worst_theta)
        np.minimum(worst_rhs, rhs - lhs, out=worst_rhs)
        np.maximum(max_gap, gap, out=max_gap)

        if record:
            rec["x"][:, k] = x
            rec["gauge_x"][:, k] = g
            rec["xi"][:, k] = xi
            rec["arm"][:, k] = arm
            rec["eps"][:, k] = eps
            rec["action"][:, k] = action
            rec["scalar_loss"][:, k] = scalar
            rec["estimator"][:, k] = est
            rec["loss"][:, k] = c
            rec["theta"][:, k] = theta
            rec["lhs"][:, k] = lhs
            rec["rhs"][:, k] = rhs
            rec["gap"][:, k] = gap
        x = x_next

    if not diagnostics:
        worst_theta[:] = worst_rhs[:] = max_gap[:] = np.nan
    trajectories = []
    if record:
        for i, s in enumerate(seeds):
            trajectories.append(Trajectory(
                body, eta, gamma, int(s), rec["x"][i], rec["gauge_x"][i], rec["xi"][i], rec["arm"][i],
                rec["eps"][i], rec["action"][i], rec["scalar_loss"][i], rec["estimator"][i],
                rec["loss"][i], rec["theta"][i], rec["lhs"][i], rec["rhs"][i], rec["gap"][i]))
    return BatchResult(list(seeds), T, eta, gamma, sampled, cond, csum, curve, worst_theta,
                       worst_rhs, max_gap, max_g, trajectories)


def run_bmd(cfg: BmdConfig, adversary: Adversary) -> Trajectory:
    """Run one full trajectory.  ``x_1`` is the origin, the barrier's minimiser."""
    return simulate(cfg.body, cfg.horizon, cfg.eta, cfg.gamma, [cfg.seed], [adversary], record=True).trajectories[0]
