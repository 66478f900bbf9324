"""Thresholds used by the acceptance checks, fixed by a high-resolution pilot.

The pilot runs the relevant computations at four times the default
resolution and records both the thresholds and what it measured. The file
is canonical JSON (sorted keys, no timestamps) and carries an ``id`` that
hashes the rest of the payload, so a rerun with the same seed reproduces
it byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path

import numpy as np

SCHEMA = "npball-calibration/1"
DEFAULT_SEED = 20240229
RESOLUTION = 4


class CalibrationError(ValueError):
    """The calibration file is missing, malformed or fails its hash."""


def default_path() -> Path:
    return Path(str(resources.files("npball") / "data" / "calibration.json"))


def dumps(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _with_id(payload: dict) -> dict:
    body = {k: v for k, v in payload.items() if k != "id"}
    digest = hashlib.sha256(dumps(body).encode()).hexdigest()
    return {**body, "id": digest[:16]}


def planned(seed: int = DEFAULT_SEED) -> dict:
    """The fixed thresholds, before the pilot adds measured values."""
    return {
        "schema": SCHEMA,
        "seed": int(seed),
        "resolution": RESOLUTION,
        "np0": {"p": 1.0, "eps_decay": 0.05, "eps_dilation": 0.1, "decreasing_from": 3},
        "carleson": {"p": 1.0, "eps_vanishing": 0.05},
        "transform": {"p": 1.0, "s": 1.0, "eps": 0.05},
        "gap": {"spread_bound": 4.0},
        "small_p": {},
    }


def pilot(seed: int = DEFAULT_SEED) -> dict:
    """Run the pilot and return the complete payload (with ``id``)."""
    from .carleson import TubeGrid, carleson_constant
    from .checks import bracket_constant, carleson_ratios, corpus, transform_trace
    from .gap import GapSpec, dyadic_bracket, equivalence_report
    from .integrate import QuadSpec
    from .norms import boundary_trace, norm_np, sphere_kernel_constant

    cal = planned(seed)
    fine_dirs = 8 * RESOLUTION

    c = cal["np0"]
    worst = 0.0
    for _, f in corpus():
        nsq = norm_np(f, c["p"]).value ** 2
        trace = boundary_trace(f, c["p"], QuadSpec(), directions=fine_dirs)
        worst = max(worst, trace[-1][1] / nsq)
    c["pilot_max_decay_ratio"] = worst

    c = cal["carleson"]
    grid = TubeGrid(directions=16 * RESOLUTION)
    c["c_star"] = bracket_constant(carleson_ratios(c["p"], grid).values())
    c["pilot_verdicts"] = {
        name: carleson_constant(f, c["p"], grid, eps=c["eps_vanishing"]).verdict for name, f in corpus()
    }

    c = cal["transform"]
    tr = transform_trace(c["p"], c["s"], jmax=10)
    c["pilot_final"] = tr[-1]

    c = cal["gap"]
    spreads = {}
    for q in (0.5, 1.0):
        rep = equivalence_report(GapSpec(), 0.5, q, (6, 8, 10, 12))
        spreads[str(q)] = rep.aq_spread
    c["pilot_np_spread"] = rep.np_spread
    c["pilot_aq_spread"] = spreads
    c["dyadic_bracket"] = {str(cc): dyadic_bracket(cc, 1.0) for cc in (1.5, 2.0, 3.0)}

    c = cal["small_p"]
    a_radii = tuple(1 - np.geomspace(1.0, 1e-4, 10 * RESOLUTION))
    r_values = tuple(1 - np.geomspace(0.9, 1e-4, 5 * RESOLUTION))
    c["constants"] = {
        str(p): sphere_kernel_constant(1, p, a_radii, r_values) for p in (0.25, 0.5, 1.0)
    }
    c["n3_mc_np_integral"] = mc_entries(seed)
    return _with_id(cal)


def mc_entries(seed: int) -> dict:
    """Monte Carlo values in C^3: the only seed-dependent part of the payload."""
    from .functions import Polynomial
    from .integrate import QuadSpec, np_integral

    mc = QuadSpec(backend="montecarlo", seed=int(seed), mc_samples=20000)
    one = Polynomial.constant(1.0, 3)
    return {
        f"p={p},|a|={s}": np_integral(one, np.array([s, 0, 0], dtype=complex), p, mc)
        for p in (0.5, 1.0) for s in (0.0, 0.5)
    }


def load(path=None) -> dict:
    path = Path(path) if path is not None else default_path()
    try:
        cal = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise CalibrationError(f"calibration file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise CalibrationError(f"calibration file is not valid JSON: {path}: {exc}") from exc
    if not isinstance(cal, dict) or cal.get("schema") != SCHEMA:
        raise CalibrationError(f"calibration file {path} does not declare schema {SCHEMA}")
    if _with_id(cal).get("id") != cal.get("id"):
        raise CalibrationError(f"calibration file {path} fails its content hash")
    return cal


def write(payload: dict, path=None) -> Path:
    path = Path(path) if path is not None else default_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(payload))
    return path
