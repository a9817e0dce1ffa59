"""Loss-sequence generators that respect the bounded scalar loss assumption.

Every emitted loss ``c`` lies in the polar body: ``<c, a> <= 1`` for all
``a ∈ K``.  Raw candidates are mapped into ``K°`` by dividing by
``max(1, polar_gauge(candidate))``, which keeps their direction.

Adversaries are per-run objects.  ``next_loss(t)`` is called before the
round-``t`` action is drawn and ``observe(action)`` after it, so an adaptive
adversary only ever sees past actions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances
from .errors import ConfigError, DomainError
from .geometry.bodies import ConvexBody

KINDS = ("constant", "stochastic", "rotating", "best-response-to-history", "zero")


@dataclass(frozen=True)
class LossVector:
    coords: np.ndarray
    polar_norm: float

    @classmethod
    def of(cls, body: ConvexBody, coords) -> "LossVector":
        c = np.asarray(coords, dtype=float)
        if not np.all(np.isfinite(c)):
            raise DomainError("loss vector has non-finite entries")
        s = float(body.polar_gauge(c))
        if s > 1.0 + tolerances.POLAR_SLACK:
            raise DomainError(f"loss vector outside the polar body (polar gauge {s!r})")
        return cls(c, s)


def into_polar(body: ConvexBody, candidate) -> LossVector:
    c = np.asarray(candidate, dtype=float)
    s = float(body.polar_gauge(c))
    if s > 1.0:
        c = c / s
        s = float(body.polar_gauge(c))
    return LossVector(c, s)


def polar_boundary(body: ConvexBody, direction) -> np.ndarray:
    d = np.asarray(direction, dtype=float)
    return d / body.polar_gauge(d)


def _adversary_rng(seed: int) -> np.random.Generator:
    # separate entropy from the learner's stream, which is keyed on the bare seed
    return np.random.default_rng(np.random.SeedSequence([int(seed), 0xAD]))


class Adversary:
    oblivious = True

    def __init__(self, body: ConvexBody):
        self.body = body

    def next_loss(self, t: int) -> LossVector:
        raise NotImplementedError

    def loss_block(self, t: int, count: int) -> np.ndarray:
        """Coordinates of ``c_t, ..., c_{t+count-1}`` (oblivious kinds only)."""
        return np.stack([self.next_loss(t + k).coords for k in range(count)])

    def observe(self, action) -> None:
        pass


class ConstantAdversary(Adversary):
    def __init__(self, body, direction):
        super().__init__(body)
        self.loss = into_polar(body, direction)

    def next_loss(self, t):
        return self.loss

    def loss_block(self, t, count):
        return np.broadcast_to(self.loss.coords, (count, self.body.dim))


class StochasticAdversary(Adversary):
    """I.i.d. Gaussian candidates ``mean + noise * N(0, I) / (sqrt(n) R)``.

    Draws are made in fixed-size blocks in round order, so ``c_t`` depends on
    the seed and ``t`` only.  Rounds must be requested in increasing order.
    """

    block = 1024

    def __init__(self, body, mean, noise: float, seed: int):
        super().__init__(body)
        self.mean = np.asarray(mean, dtype=float)
        self.scale = noise / (np.sqrt(body.dim) * body.outer_radius_linf)
        self.rng = _adversary_rng(seed)
        self._block_index = -1
        self._buf = None

    def _fill(self):
        fresh = self.mean + self.scale * self.rng.standard_normal((self.block, self.body.dim))
        s = np.maximum(self.body.polar_gauge(fresh), 1.0)
        self._buf = fresh / s[:, None]
        self._norms = self.body.polar_gauge(self._buf)
        self._block_index += 1

    def next_loss(self, t):
        k, i = divmod(t - 1, self.block)
        if k < self._block_index:
            raise ValueError("stochastic adversary rounds must be requested in order")
        while self._block_index < k:
            self._fill()
        return LossVector(self._buf[i], float(self._norms[i]))

    def loss_block(self, t, count):
        out = []
        while count > 0:
            k, i = divmod(t - 1, self.block)
            self.next_loss(t)
            m = min(count, self.block - i)
            out.append(self._buf[i:i + m])
            t += m
            count -= m
        return np.vstack(out)


class RotatingAdversary(Adversary):
    """Alternates between ``c_a`` and its cyclic coordinate shift every ``period`` rounds."""

    def __init__(self, body, direction, period: int):
        super().__init__(body)
        if period < 1:
            raise ConfigError("adversary.period must be a positive integer", key="adversary.period")
        a = polar_boundary(body, direction)
        b = polar_boundary(body, np.roll(direction, 1))
        self.losses = (LossVector.of(body, a), LossVector.of(body, b))
        self.period = int(period)

    def next_loss(self, t):
        return self.losses[((t - 1) // self.period) % 2]

    def loss_block(self, t, count):
        phase = ((np.arange(t, t + count) - 1) // self.period) % 2
        return np.stack([self.losses[0].coords, self.losses[1].coords])[phase]


class BestResponseAdversary(Adversary):
    """Plays the unit polar vector that maximises the loss of the mean past action."""

    oblivious = False

    def __init__(self, body, direction):
        super().__init__(body)
        self.default = into_polar(body, direction)
        self._sum = np.zeros(body.dim)
        self._count = 0

    def next_loss(self, t):
        if self._count == 0 or not np.any(self._sum):
            return self.default
        g = self.body.gauge_grad(self._sum / self._count)
        return into_polar(self.body, g)

    def observe(self, action):
        self._sum += action
        self._count += 1


def make_adversary(kind: str, body: ConvexBody, seed: int = 0, direction=None,
                   period: int | None = None, noise: float | None = None) -> Adversary:
    """Build an adversary; every loss it emits lies in ``K°``.

    Without ``direction`` the constant, stochastic and best-response kinds use
    the all-ones direction scaled onto ``∂K°``; the rotating kind uses
    ``e_1`` (paired with ``e_2``).
    """
    n = body.dim
    if direction is not None:
        direction = np.asarray(direction, dtype=float)
        if direction.shape != (n,):
            raise ConfigError(f"adversary.direction must have {n} entries", key="adversary.direction")
    if kind == "constant":
        d = polar_boundary(body, np.ones(n)) if direction is None else direction
        return ConstantAdversary(body, d)
    if kind == "stochastic":
        d = polar_boundary(body, np.ones(n)) if direction is None else direction
        return StochasticAdversary(body, d, 1.0 if noise is None else float(noise), seed)
    if kind == "rotating":
        d = np.eye(n)[0] if direction is None else direction
        return RotatingAdversary(body, d, 1 if period is None else int(period))
    if kind == "zero":
        return ZeroAdversary(body)
    if kind in ("best-response-to-history", "best-response"):
        d = polar_boundary(body, np.ones(n)) if direction is None else direction
        return BestResponseAdversary(body, d)
    raise ConfigError(f"unknown adversary kind {kind!r} (expected one of {', '.join(KINDS)})",
                      key="adversary.kind")


class ZeroAdversary(Adversary):
    def next_loss(self, t):
        return LossVector(np.zeros(self.body.dim), 0.0)

    def loss_block(self, t, count):
        return np.zeros((count, self.body.dim))
