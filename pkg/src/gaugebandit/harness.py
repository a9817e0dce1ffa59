"""Experiment runs, sweeps, regret accounting and plots.

Pseudo-regret is accounted with the conditional expectation of the loss,
``sum_t <c_t, x_t>`` (``E[a_t | x_t] = x_t``), against the closed-form
comparator ``min_{a in K} <sum_t c_t, a> = -||-sum_t c_t||_{K°}``.  For an
oblivious adversary this is an unbiased estimate of the pseudo-regret with
the action sampling noise removed.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .adversary import make_adversary
from .bandit import BatchResult, Trajectory, schedule_params, simulate
from .config import RunConfig
from .errors import ConfigError
from .geometry.bodies import ConvexBody

log = logging.getLogger(__name__)


@dataclass
class RegretReport:
    config: dict
    body: dict
    seed: int
    horizon: int
    eta: float
    gamma: float
    sampled_cum_loss: float
    conditional_cum_loss: float
    comparator_loss: float
    pseudo_regret: float
    theoretical_bound: float | None
    oblivious: bool = True

    @property
    def within_bound(self) -> bool:
        return self.theoretical_bound is None or self.pseudo_regret <= self.theoretical_bound

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, Path):
        return str(v)
    raise TypeError(type(v))


def comparator_loss(body: ConvexBody, loss_sum) -> float:
    """``min_{a in K} <loss_sum, a>``, attained at ``-polar_gauge_grad(-loss_sum)``."""
    return -float(body.polar_gauge(-np.asarray(loss_sum, dtype=float)))


def _adversary(cfg: RunConfig, body: ConvexBody, seed: int):
    return make_adversary(cfg.adversary_kind, body, seed, direction=cfg.adversary_direction,
                          period=cfg.adversary_period, noise=cfg.adversary_noise)


def _bound(body, horizon, schedule):
    return None if schedule == "manual" else schedule_params(body, horizon, schedule).bound


def report_from(cfg_values: dict, body: ConvexBody, res: BatchResult, i: int, schedule: str,
                oblivious: bool) -> RegretReport:
    comp = comparator_loss(body, res.loss_sum[i])
    return RegretReport(
        config=dict(cfg_values), body=body.describe() | {"alpha": body.uc_modulus}, seed=int(res.seeds[i]),
        horizon=res.horizon, eta=res.eta, gamma=res.gamma,
        sampled_cum_loss=float(res.sampled_cum_loss[i]),
        conditional_cum_loss=float(res.conditional_cum_loss[i]),
        comparator_loss=comp, pseudo_regret=float(res.conditional_cum_loss[i]) - comp,
        theoretical_bound=_bound(body, res.horizon, schedule), oblivious=oblivious)


def run_experiment(cfg: RunConfig, write: bool = True) -> tuple[RegretReport, Trajectory]:
    """One seeded run; writes ``trajectory.csv``, ``report.json`` and ``regret.svg``."""
    bmd = cfg.bmd()
    body = bmd.body
    adv = _adversary(cfg, body, bmd.seed)
    res = simulate(body, bmd.horizon, bmd.eta, bmd.gamma, [bmd.seed], [adv], record=True)
    report = report_from(cfg.values, body, res, 0, cfg.schedule, adv.oblivious)
    traj = res.trajectories[0]
    if write:
        out = cfg.output_dir
        out.mkdir(parents=True, exist_ok=True)
        traj.write_csv(out / "trajectory.csv")
        (out / "report.json").write_text(report.to_json())
        plot_regret_curve(res.regret_curve[0], report.theoretical_bound, out / "regret.svg",
                          title=f"{body.key}, seed {bmd.seed}")
    return report, traj


# -- sweeps ------------------------------------------------------------------

@dataclass
class Cell:
    dim: int
    horizon: int
    seeds: int
    eta: float
    gamma: float
    mean_regret: float
    std_regret: float
    bound: float | None
    regrets: list = field(repr=False, default_factory=list)

    @property
    def within_bound(self) -> bool:
        return self.bound is None or self.mean_regret <= self.bound


@dataclass
class Fit:
    variable: str  # "T" or "n"
    fixed: int
    exponent: float
    intercept: float
    points: int


@dataclass
class SweepResult:
    body_kind: str
    schedule: str
    cells: list
    skipped: list
    fits: list

    def fit(self, variable: str, fixed: int | None = None) -> Fit:
        fs = [f for f in self.fits if f.variable == variable and (fixed is None or f.fixed == fixed)]
        if not fs:
            raise KeyError(f"no {variable}-fit" + ("" if fixed is None else f" at {fixed}"))
        return fs[0]


def _run_cell(job):
    cfg, dim, horizon, seeds = job
    body = cfg.body(dim if cfg.body_kind == "lp" else None)
    s = schedule_params(body, horizon, cfg.schedule) if cfg.schedule != "manual" else None
    eta, gamma = (s.eta, s.gamma) if s else (cfg.eta, cfg.gamma)
    advs = [_adversary(cfg, body, k) for k in seeds]
    res = simulate(body, horizon, eta, gamma, seeds, advs, diagnostics=False)
    comp = -body.polar_gauge(-res.loss_sum)
    regrets = res.conditional_cum_loss - comp
    return Cell(body.dim, horizon, len(seeds), eta, gamma, float(regrets.mean()),
                float(regrets.std(ddof=1)) if len(seeds) > 1 else 0.0,
                s.bound if s else None, regrets.tolist())


def _feasible(cfg: RunConfig, dim: int, horizon: int):
    try:
        body = cfg.body(dim if cfg.body_kind == "lp" else None)
        if cfg.schedule == "manual":
            cfg.bmd(body, horizon)
        else:
            schedule_params(body, horizon, cfg.schedule)
    except ConfigError as exc:
        return str(exc)
    return None


def loglog_fit(xs, ys) -> tuple[float, float]:
    slope, intercept = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope), float(intercept)


def scaling_fits(cells) -> list[Fit]:
    fits = []
    for var, fixed_attr, x_attr in (("T", "dim", "horizon"), ("n", "horizon", "dim")):
        groups: dict = {}
        for c in cells:
            groups.setdefault(getattr(c, fixed_attr), []).append(c)
        for fixed, cs in sorted(groups.items()):
            cs = [c for c in cs if c.mean_regret > 0]
            if len({getattr(c, x_attr) for c in cs}) < 2:
                continue
            slope, icpt = loglog_fit([getattr(c, x_attr) for c in cs], [c.mean_regret for c in cs])
            fits.append(Fit(var, fixed, slope, icpt, len(cs)))
    return fits


def run_sweep(cfg: RunConfig, seeds: int | None = None, write: bool = True) -> SweepResult:
    """Mean +- std pseudo-regret over a (dim x horizon) grid, plus log-log fits.

    Cells that violate their schedule preconditions are skipped and reported.
    Seeds ``cfg.seed, cfg.seed + 1, ...`` are shared by every cell.
    """
    S = cfg.sweep_seeds if seeds is None else seeds
    seed_list = [cfg.seed + k for k in range(S)]
    jobs, skipped = [], []
    for dim in cfg.sweep_dims:
        for T in cfg.sweep_horizons:
            why = _feasible(cfg, dim, T)
            if why:
                log.warning("skipping cell n=%d T=%d: %s", dim, T, why)
                skipped.append((dim, T, why))
            else:
                jobs.append((cfg, dim, T, seed_list))
    if cfg.sweep_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(cfg.sweep_workers) as pool:
            cells = list(pool.map(_run_cell, jobs))
    else:
        cells = [_run_cell(j) for j in jobs]
    result = SweepResult(cfg.body_kind, cfg.schedule, cells, skipped, scaling_fits(cells))
    if write:
        write_sweep(result, cfg.output_dir, seed_list)
    return result


def _f(v):
    return "" if v is None else "%.17g" % v


def write_sweep(result: SweepResult, out: Path, seed_list) -> None:
    out.mkdir(parents=True, exist_ok=True)
    cells_dir = out / "cells"
    cells_dir.mkdir(exist_ok=True)
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("dim", "horizon", "status", "seeds", "eta", "gamma", "mean_regret", "std_regret",
                    "bound", "within_bound"))
        for c in result.cells:
            w.writerow((c.dim, c.horizon, "ok", c.seeds, _f(c.eta), _f(c.gamma), _f(c.mean_regret),
                        _f(c.std_regret), _f(c.bound), int(c.within_bound)))
        for dim, T, why in result.skipped:
            w.writerow((dim, T, f"skipped: {why}", 0, "", "", "", "", "", ""))
    for c in result.cells:
        with open(cells_dir / f"n{c.dim}_T{c.horizon}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("seed", "pseudo_regret"))
            for s, r in zip(seed_list, c.regrets):
                w.writerow((s, _f(r)))
    with open(out / "fits.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("variable", "fixed", "exponent", "intercept", "points"))
        for f in result.fits:
            w.writerow((f.variable, f.fixed, _f(f.exponent), _f(f.intercept), f.points))
    if result.cells:
        plot_sweep(result, out / "sweep.svg")


# -- plots -------------------------------------------------------------------

def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # stable SVG ids so identical runs give identical files
    plt.rcParams["svg.hashsalt"] = "gaugebandit"
    return plt


def plot_regret_curve(curve, bound, path, title: str = "") -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    t = np.arange(1, len(curve) + 1)
    ax.plot(t, curve, lw=1.2, label="pseudo-regret (conditional)")
    if bound is not None and math.isfinite(bound):
        ax.axhline(bound, color="C3", ls="--", lw=1, label="theoretical bound at T")
    ax.set_xlabel("round t")
    ax.set_ylabel("regret")
    ax.set_title(title, fontsize=9)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_sweep(result: SweepResult, path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    by_dim: dict = {}
    for c in result.cells:
        by_dim.setdefault(c.dim, []).append(c)
    for k, (dim, cs) in enumerate(sorted(by_dim.items())):
        cs.sort(key=lambda c: c.horizon)
        T = [c.horizon for c in cs]
        ax.errorbar(T, [c.mean_regret for c in cs], yerr=[c.std_regret for c in cs],
                    color=f"C{k % 10}", marker="o", ms=3, lw=1, label=f"n = {dim}")
        if all(c.bound is not None for c in cs):
            ax.plot(T, [c.bound for c in cs], color=f"C{k % 10}", ls="--", lw=0.8)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("horizon T")
    ax.set_ylabel("mean pseudo-regret (dashed: bound)")
    ax.set_title(f"{result.body_kind}, {result.schedule}", fontsize=9)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
