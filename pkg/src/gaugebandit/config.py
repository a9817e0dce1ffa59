"""Flat ``key = value`` run configuration.

One assignment per line; ``#`` starts a comment; vectors and lists are
comma separated.  Unknown keys, duplicates and malformed values are errors
that name the offending key (the first one, in file order).

    body.kind = lp
    body.dim = 4
    body.p = 2
    horizon = 10000
    schedule = strongly_convex
    adversary.kind = constant
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bandit import SCHEDULES, BmdConfig, schedule_params
from .adversary import KINDS as ADVERSARY_KINDS
from .errors import ConfigError
from .geometry import make_body
from .geometry.bodies import ConvexBody

OUTPUT_ENV = "GAUGEBANDIT_OUTPUT_DIR"
BODY_KINDS = ("lp", "ellipsoid")


def _int(key, text, lo=None):
    try:
        v = int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}", key=key) from None
    if lo is not None and v < lo:
        raise ConfigError(f"{key}: must be >= {lo}, got {v}", key=key)
    return v


def _float(key, text, positive=False):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}", key=key) from None
    if not np.isfinite(v) or (positive and v <= 0):
        raise ConfigError(f"{key}: expected a {'positive ' if positive else ''}finite number, got {text!r}",
                          key=key)
    return v


def _list(key, text, item):
    parts = [t.strip() for t in text.strip().strip("[]").split(",")]
    if not parts or any(t == "" for t in parts):
        raise ConfigError(f"{key}: expected a comma separated list, got {text!r}", key=key)
    return [item(key, t) for t in parts]


def _choice(key, text, allowed):
    if text not in allowed:
        raise ConfigError(f"{key}: {text!r} is not one of {', '.join(allowed)}", key=key)
    return text


PARSERS = {
    "body.kind": lambda k, t: _choice(k, t, BODY_KINDS),
    "body.dim": lambda k, t: _int(k, t, 1),
    "body.p": lambda k, t: _float(k, t, True),
    "body.axis_scales": lambda k, t: _list(k, t, lambda kk, tt: _float(kk, tt, True)),
    "body.radius": lambda k, t: _float(k, t, True),
    "horizon": lambda k, t: _int(k, t, 1),
    "schedule": lambda k, t: _choice(k, t, SCHEDULES),
    "eta": lambda k, t: _float(k, t, True),
    "gamma": lambda k, t: _float(k, t, True),
    "seed": lambda k, t: _int(k, t, 0),
    "adversary.kind": lambda k, t: _choice(k, t, ADVERSARY_KINDS + ("best-response",)),
    "adversary.direction": lambda k, t: _list(k, t, _float),
    "adversary.period": lambda k, t: _int(k, t, 1),
    "adversary.noise": lambda k, t: _float(k, t),
    "output.dir": lambda k, t: t,
    # sweep-only keys
    "sweep.dims": lambda k, t: _list(k, t, lambda kk, tt: _int(kk, tt, 1)),
    "sweep.horizons": lambda k, t: _list(k, t, lambda kk, tt: _int(kk, tt, 2)),
    "sweep.seeds": lambda k, t: _int(k, t, 1),
    "sweep.workers": lambda k, t: _int(k, t, 1),
}


def parse_text(text: str) -> dict:
    """Raw ``key -> parsed value`` mapping, validated key by key in file order."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}",
                              key=line.split()[0])
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in PARSERS:
            raise ConfigError(f"unknown key {key!r} (line {lineno})", key=key)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (line {lineno})", key=key)
        values[key] = PARSERS[key](key, value)
    return values


@dataclass
class RunConfig:
    """A validated configuration; ``values`` echoes the parsed document."""

    values: dict
    body_kind: str
    body_params: dict
    horizon: int
    schedule: str
    eta: float | None
    gamma: float | None
    seed: int
    adversary_kind: str
    adversary_direction: list | None
    adversary_period: int | None
    adversary_noise: float | None
    output_dir: Path
    sweep_dims: list = field(default_factory=list)
    sweep_horizons: list = field(default_factory=list)
    sweep_seeds: int = 20
    sweep_workers: int = 1

    def body(self, dim: int | None = None) -> ConvexBody:
        params = dict(self.body_params)
        if dim is not None:
            params["dim"] = dim
        try:
            return make_body(self.body_kind, **params)
        except (ValueError, KeyError) as exc:
            key = "body.axis_scales" if self.body_kind == "ellipsoid" else "body.dim"
            raise ConfigError(f"{key}: {exc}", key=key) from None

    def bmd(self, body: ConvexBody | None = None, horizon: int | None = None,
            seed: int | None = None) -> BmdConfig:
        body = self.body() if body is None else body
        T = self.horizon if horizon is None else horizon
        seed = self.seed if seed is None else seed
        if self.schedule == "manual":
            return BmdConfig(body, T, self.eta, self.gamma, seed, "manual")
        return BmdConfig.scheduled(body, T, self.schedule, seed)


def _require(values, key, why=""):
    if key not in values:
        raise ConfigError(f"missing required key {key!r}{why}", key=key)
    return values[key]


def build(values: dict, sweep: bool = False) -> RunConfig:
    """Cross-key validation on top of ``parse_text``."""
    kind = _require(values, "body.kind")
    if kind == "lp":
        for k in ("body.axis_scales",):
            if k in values:
                raise ConfigError(f"{k} does not apply to body.kind = lp", key=k)
        if not sweep:
            _require(values, "body.dim")
        elif "body.dim" not in values and "sweep.dims" not in values:
            raise ConfigError("missing required key 'sweep.dims' (or body.dim)", key="sweep.dims")
        params = {"p": _require(values, "body.p"), "radius": values.get("body.radius", 1.0)}
        if "body.dim" in values:
            params["dim"] = values["body.dim"]
        if params["p"] <= 1.0:
            raise ConfigError("body.p must be > 1", key="body.p")
    else:
        for k in ("body.p", "body.radius"):
            if k in values:
                raise ConfigError(f"{k} does not apply to body.kind = ellipsoid", key=k)
        axes = _require(values, "body.axis_scales")
        if "body.dim" in values and values["body.dim"] != len(axes):
            raise ConfigError(f"body.dim = {values['body.dim']} but body.axis_scales has {len(axes)} entries",
                              key="body.dim")
        if sweep and "sweep.dims" in values:
            raise ConfigError("sweep.dims cannot be used with an ellipsoid body", key="sweep.dims")
        params = {"axis_scales": axes}

    schedule = values.get("schedule")
    if schedule is None:
        schedule = "manual" if "eta" in values else "auto"
    if schedule == "manual":
        eta = _require(values, "eta", " for schedule = manual")
        gamma = _require(values, "gamma", " for schedule = manual")
        if not gamma < 1.0:
            raise ConfigError("gamma must lie in (0, 1)", key="gamma")
    else:
        for k in ("eta", "gamma"):
            if k in values:
                raise ConfigError(f"{k} is only accepted with schedule = manual", key=k)
        eta = gamma = None

    adv = values.get("adversary.kind", "constant")
    if "adversary.period" in values and adv != "rotating":
        raise ConfigError("adversary.period only applies to the rotating adversary", key="adversary.period")
    if "adversary.noise" in values and adv != "stochastic":
        raise ConfigError("adversary.noise only applies to the stochastic adversary", key="adversary.noise")

    if not sweep:
        horizon = _require(values, "horizon")
        for k in ("sweep.dims", "sweep.horizons", "sweep.seeds", "sweep.workers"):
            if k in values:
                raise ConfigError(f"{k} is only accepted by the sweep subcommand", key=k)
    else:
        horizon = values.get("horizon", 0)
        if "sweep.horizons" not in values and "horizon" not in values:
            raise ConfigError("missing required key 'sweep.horizons'", key="sweep.horizons")

    out = os.environ.get(OUTPUT_ENV) or values.get("output.dir", "out")
    cfg = RunConfig(
        values=values, body_kind=kind, body_params=params, horizon=horizon, schedule=schedule,
        eta=eta, gamma=gamma, seed=values.get("seed", 0), adversary_kind=adv,
        adversary_direction=values.get("adversary.direction"),
        adversary_period=values.get("adversary.period"), adversary_noise=values.get("adversary.noise"),
        output_dir=Path(out),
        sweep_dims=values.get("sweep.dims", [params["dim"]] if "dim" in params else [len(params.get("axis_scales", []))]),
        sweep_horizons=values.get("sweep.horizons", [horizon] if horizon else []),
        sweep_seeds=values.get("sweep.seeds", 20), sweep_workers=values.get("sweep.workers", 1),
    )
    if cfg.schedule == "auto":
        cfg.schedule = "strongly_convex" if cfg.body(cfg.sweep_dims[0] if sweep and kind == "lp" else None).uc_power == 2.0 \
            else "uniformly_convex"
    if not sweep:
        body = cfg.body()
        if cfg.adversary_direction is not None and len(cfg.adversary_direction) != body.dim:
            raise ConfigError(f"adversary.direction must have {body.dim} entries", key="adversary.direction")
        if cfg.schedule != "manual":
            schedule_params(body, horizon, cfg.schedule)
        else:
            cfg.bmd(body)
    return cfg


def load(path, sweep: bool = False) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}", key="<file>") from None
    return build(parse_text(text), sweep=sweep)
