"""Frozen table of calibrated body constants.

Regenerate with ``python -m gaugebandit.geometry.golden``.  Entries are keyed
by ``ConvexBody.key`` (kind, shape parameters, dim).  Bodies missing from the
table get their modulus derived on first use, with a logged warning.
"""

from __future__ import annotations

import functools
import json
import logging
from importlib import resources

from .bodies import ConvexBody, Ellipsoid, LpBall
from .calibration import DEFAULT_SAMPLES, SAFETY, derive_alpha

log = logging.getLogger(__name__)

TABLE_VERSION = 1
TABLE_FILE = "golden_bodies.json"


def certified_bodies() -> list[ConvexBody]:
    bodies: list[ConvexBody] = []
    bodies += [LpBall(n, 2.0) for n in (2, 3, 4, 5, 8, 10, 16)]
    bodies += [LpBall(n, 1.5) for n in (2, 3, 4, 5, 8, 10)]
    bodies += [LpBall(n, 3.0) for n in (2, 3, 4, 5, 8, 10, 16)]
    bodies += [LpBall(n, 4.0) for n in (2, 3, 4)]
    bodies += [Ellipsoid([2.0, 1.0]), Ellipsoid([1.0, 1.5, 3.0])]
    return bodies


@functools.lru_cache(maxsize=1)
def load_table() -> dict:
    text = resources.files(__package__).joinpath("data", TABLE_FILE).read_text()
    table = json.loads(text)
    if table.get("version") != TABLE_VERSION:
        raise RuntimeError(f"golden table version {table.get('version')} != {TABLE_VERSION}")
    return table


def entry(body: ConvexBody) -> dict | None:
    return load_table()["entries"].get(body.key)


_derived: dict[str, float] = {}


def lookup_alpha(body: ConvexBody) -> float:
    e = entry(body)
    if e is not None:
        return float(e["alpha"])
    key = body.key
    if key not in _derived:
        log.warning("no golden modulus for %s; deriving it now", key)
        _derived[key] = derive_alpha(body)["alpha"]
    return _derived[key]


def build_table(samples: int = DEFAULT_SAMPLES, seed: int = 20240601) -> dict:
    entries = {}
    for body in certified_bodies():
        d = derive_alpha(body, samples=samples, seed=seed)
        d.update(r1=body.inner_radius_l1, r_q=body.inner_radius_lq, R=body.outer_radius_linf)
        entries[body.key] = d
        log.info("%s: alpha=%s (sampled %.9f)", body.key, d["alpha"], d["alpha_sampled"])
    return {
        "version": TABLE_VERSION,
        "safety": SAFETY,
        "samples": samples,
        "seed": seed,
        "entries": entries,
    }


if __name__ == "__main__":
    import pathlib

    logging.basicConfig(level=logging.INFO, format="%(message)s")
    out = pathlib.Path(__file__).with_name("data") / TABLE_FILE
    out.write_text(json.dumps(build_table(), indent=2, sort_keys=True) + "\n")
    print(f"wrote {out}")
