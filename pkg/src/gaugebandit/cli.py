"""Command line entry point.

    gaugebandit run <config>
    gaugebandit sweep <config> [--seeds N] [--workers W]
    gaugebandit verify <body> [--samples N] [--seed S]

``<body>`` is either a config file (its ``body.*`` keys are used) or an
inline description such as ``lp:dim=3,p=3`` or ``ellipsoid:axis_scales=2/1``.

Exit codes: 0 success, 1 a threshold failed (regret above its bound, or a
check reported violations), 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import config as config_mod
from .errors import ConfigError
from .geometry import make_body

EXIT_OK, EXIT_THRESHOLD, EXIT_CONFIG = 0, 1, 2


def parse_body(spec: str):
    """Body from a config file path or an inline ``kind:key=value,...`` string."""
    path = Path(spec)
    if path.is_file():
        values = config_mod.parse_text(path.read_text())
        kind = values.get("body.kind")
        if kind is None:
            raise ConfigError("missing required key 'body.kind'", key="body.kind")
        params = {k[5:]: v for k, v in values.items() if k.startswith("body.") and k != "body.kind"}
        return _make(kind, params)
    kind, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        key = key.strip()
        if not eq:
            raise ConfigError(f"body.{key}: expected key=value in {spec!r}", key=f"body.{key}")
        if key == "axis_scales":
            params[key] = [_number(f"body.{key}", v) for v in value.replace(";", "/").split("/")]
        elif key == "dim":
            params[key] = int(_number("body.dim", value))
        elif key in ("p", "radius"):
            params[key] = _number(f"body.{key}", value)
        else:
            raise ConfigError(f"unknown key 'body.{key}'", key=f"body.{key}")
    return _make(kind, params)


def _number(key, text):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}", key=key) from None


def _make(kind, params):
    if kind not in ("lp", "ellipsoid", "cube"):
        raise ConfigError(f"body.kind: {kind!r} is not one of lp, ellipsoid, cube", key="body.kind")
    try:
        return make_body(kind, **params)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"body parameters incomplete for {kind}: {exc}", key="body.kind") from None
    except ValueError as exc:
        raise ConfigError(str(exc), key="body.kind") from None


def cmd_run(args) -> int:
    from .harness import run_experiment

    cfg = config_mod.load(args.config)
    report, _ = run_experiment(cfg)
    bound = "n/a" if report.theoretical_bound is None else f"{report.theoretical_bound:.6g}"
    print(f"body            {report.body['kind']} dim={report.body['dim']} "
          f"r1={report.body['r1']:.6g} r={report.body['r_q']:.6g} R={report.body['R']:.6g} "
          f"alpha={report.body['alpha']:.6g} q={report.body['q']:g}")
    print(f"schedule        {cfg.schedule} eta={report.eta:.6g} gamma={report.gamma:.6g} T={report.horizon}")
    print(f"sampled loss    {report.sampled_cum_loss:.6g}")
    print(f"conditional     {report.conditional_cum_loss:.6g}")
    print(f"comparator      {report.comparator_loss:.6g}")
    print(f"pseudo-regret   {report.pseudo_regret:.6g}")
    print(f"bound           {bound}")
    print(f"output          {cfg.output_dir}")
    return EXIT_OK if report.within_bound else EXIT_THRESHOLD


def cmd_sweep(args) -> int:
    from .harness import run_sweep

    cfg = config_mod.load(args.config, sweep=True)
    if args.workers is not None:
        cfg.sweep_workers = args.workers
    result = run_sweep(cfg, seeds=args.seeds)
    print(f"{'n':>4} {'T':>8} {'mean':>12} {'std':>10} {'bound':>12}  ok")
    for c in result.cells:
        b = "n/a" if c.bound is None else f"{c.bound:.6g}"
        print(f"{c.dim:>4} {c.horizon:>8} {c.mean_regret:>12.6g} {c.std_regret:>10.4g} {b:>12}  "
              f"{'yes' if c.within_bound else 'NO'}")
    for dim, T, why in result.skipped:
        print(f"skipped n={dim} T={T}: {why}")
    for f in result.fits:
        at = "n" if f.variable == "T" else "T"
        print(f"fit {f.variable}-exponent at {at}={f.fixed}: {f.exponent:.4f} ({f.points} points)")
    print(f"output {cfg.output_dir}")
    return EXIT_OK if all(c.within_bound for c in result.cells) else EXIT_THRESHOLD


def cmd_verify(args) -> int:
    from .verify import run_suite, write_reports

    if args.samples < 1:
        raise ConfigError("--samples must be positive", key="--samples")
    body = parse_body(args.body)
    reports = run_suite(body, samples=args.samples, seed=args.seed)
    write_reports(reports, body.key, sys.stdout)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_THRESHOLD


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gaugebandit",
                                 description="Bandit mirror descent with the gauge barrier.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one seeded run: report, trajectory CSV, regret plot")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="grid over dims and horizons with log-log fits")
    p.add_argument("config")
    p.add_argument("--seeds", type=int, default=None, help="seeds per cell (overrides sweep.seeds)")
    p.add_argument("--workers", type=int, default=None, help="worker processes (overrides sweep.workers)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the inequality checks on a body, CSV to stdout")
    p.add_argument("body", help="config file or inline spec, e.g. lp:dim=3,p=3")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        key = getattr(exc, "key", None)
        print(f"config error [{key}]: {exc}" if key else f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
