"""Command-line entry point: ``npball norm | verify | calibrate``.

Reports are JSON with schema ``npball-report/1``. Exit codes: 0 success,
1 bad configuration or failed checks, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import ast
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .calibration import DEFAULT_SEED, CalibrationError, dumps, load, pilot, planned, write
from .carleson import TubeGrid
from .functions import HoloFunction, Polynomial
from .gap import GapSpec, separation_witnesses
from .geometry import NumericError
from .integrate import QuadSpec
from .norms import SearchSpec, norm_a2p, norm_bergman_type, norm_np, norm_sup

SCHEMA = "npball-report/1"
SPACES = ("np", "a2p", "bergman", "sup")

log = logging.getLogger("npball")


class ConfigError(ValueError):
    """The run configuration or a function literal is invalid."""


# --- function literals -------------------------------------------------------------


_VARS = {1: ("z",), 2: ("z1", "z2")}


def _variables(tree: ast.AST) -> set[str]:
    return {node.id for node in ast.walk(tree) if isinstance(node, ast.Name)} - {"i", "j"}


def parse_function(text: str, n: int | None = None) -> HoloFunction:
    """Parse a polynomial in ``z`` (or ``z1, z2``) or a named gap series.

    Examples: ``"1 + 2*z + z**3"``, ``"(0.3+0.4i)*z1*z2**2"``,
    ``"gap(beta=0, K=8)"``, ``"f1(K=6)"``, ``"f2(p1=0.5, K=6)"``.
    ``i`` and ``j`` both denote the imaginary unit; ``1j`` also works.
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse function literal {text!r}: {exc.msg}") from None
    if isinstance(tree.body, ast.Call):
        return _gap_call(tree.body, n or 1)
    names = _variables(tree)
    if n is None:
        n = 2 if names & {"z1", "z2"} else 1
    allowed = set(_VARS.get(n, ()))
    if not names <= allowed:
        raise ConfigError(f"unknown variables {sorted(names - allowed)} for n={n}; use {sorted(allowed)}")
    return _to_poly(tree.body, n)


def _const(value, n: int) -> Polynomial:
    return Polynomial.constant(value, n)


def _to_poly(node: ast.AST, n: int) -> Polynomial:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
        return _const(node.value, n)
    if isinstance(node, ast.Name):
        if node.id in ("i", "j"):
            return _const(1j, n)
        k = _VARS[n].index(node.id)
        alpha = [0] * n
        alpha[k] = 1
        return Polynomial({tuple(alpha): 1.0}, n)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _to_poly(node.operand, n)
        return -1 * inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp):
        left = _to_poly(node.left, n)
        if isinstance(node.op, ast.Pow):
            k = node.right
            if not (isinstance(k, ast.Constant) and isinstance(k.value, int) and k.value >= 0):
                raise ConfigError("exponents must be nonnegative integer literals")
            out = _const(1.0, n)
            for _ in range(k.value):
                out = out * left
            return out
        right = _to_poly(node.right, n)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            if right.degree != 0 or right.is_zero():
                raise ConfigError("division is only allowed by nonzero constants")
            return left * (1 / right.terms[(0,) * n])
    # implicit "2i" is written "2*i"; anything else is outside the grammar
    raise ConfigError(f"unsupported expression: {ast.unparse(node)!r}")


def _literal_args(call: ast.Call) -> dict:
    if call.args:
        raise ConfigError(f"{ast.unparse(call.func)}() takes keyword arguments only")
    try:
        return {kw.arg: ast.literal_eval(kw.value) for kw in call.keywords}
    except ValueError:
        raise ConfigError(f"arguments of {ast.unparse(call)} must be literals") from None


def _gap_call(call: ast.Call, n: int) -> HoloFunction:
    if not isinstance(call.func, ast.Name):
        raise ConfigError(f"unsupported call {ast.unparse(call)!r}")
    name, args = call.func.id, _literal_args(call)
    K = args.pop("K", 8)
    try:
        if name == "gap":
            spec = GapSpec(b_beta=float(args.pop("beta", 0.0)), m_base=int(args.pop("m_base", 2)),
                           c=float(args.pop("c", 2.0)), n=n, truncations=(K,))
        elif name == "f1":
            spec = separation_witnesses(n, 0.5 * n, float(n))[0]
        elif name == "f2":
            p1 = float(args.pop("p1", 0.5))
            spec = separation_witnesses(n, p1, float(args.pop("p2", n)))[1]
        else:
            raise ConfigError(f"unknown series {name!r}; use gap, f1 or f2")
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args:
        raise ConfigError(f"unexpected arguments {sorted(args)} for {name}()")
    return spec.polynomial(int(K))


# --- configuration -----------------------------------------------------------------


@dataclass
class RunConfig:
    command: str
    n: int | None = None
    space: str = "np"
    p: list = field(default_factory=list)
    q: list = field(default_factory=list)
    fn: list = field(default_factory=list)
    quad: dict = field(default_factory=lambda: QuadSpec().to_dict())
    search: dict = field(default_factory=lambda: SearchSpec().to_dict())
    grid: dict = field(default_factory=lambda: asdict(TubeGrid()))
    out: str | None = None
    calibration: str | None = None
    seed: int | None = None
    only: list = field(default_factory=list)
    dry_run: bool = False

    def validate(self) -> None:
        if self.command not in ("norm", "verify", "calibrate"):
            raise ConfigError(f"unknown command {self.command!r}")
        if self.n is not None and self.n < 1:
            raise ConfigError("n must be positive")
        if self.space not in SPACES:
            raise ConfigError(f"unknown space {self.space!r}; choose from {SPACES}")
        try:
            quad = QuadSpec.from_dict(self.quad)
            SearchSpec.from_dict(self.search)
            TubeGrid(**self.grid)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid numerical settings: {exc}") from None
        if quad.backend == "montecarlo" or (self.n or 1) > 2:
            if self.seed is None and quad.seed is None:
                raise ConfigError("a root seed is required whenever Monte Carlo is used")

    def quad_spec(self) -> QuadSpec:
        spec = QuadSpec.from_dict(self.quad)
        if self.seed is not None and spec.seed is None:
            spec = QuadSpec.from_dict({**spec.to_dict(), "seed": self.seed})
        return spec

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            return cls(**json.loads(text))
        except (TypeError, json.JSONDecodeError) as exc:
            raise ConfigError(f"invalid configuration: {exc}") from None


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="npball", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="RunConfig JSON file; flags given on the command line override it")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    nm = sub.add_parser("norm", help="estimate a norm of one or more functions")
    nm.add_argument("--space", choices=SPACES, default=None)
    nm.add_argument("--p", type=float, action="append", help="exponent p (repeatable)")
    nm.add_argument("--q", type=float, action="append", help="exponent q for the bergman space")
    nm.add_argument("--fn", action="append", help="function literal (repeatable)")
    nm.add_argument("--n", type=int)
    nm.add_argument("--backend", choices=("auto", "spectral", "quadrature", "montecarlo"))
    nm.add_argument("--radial-nodes", type=int)
    nm.add_argument("--angular-nodes", type=int)
    nm.add_argument("--seed", type=int)
    nm.add_argument("--out")

    vf = sub.add_parser("verify", help="run the acceptance checks")
    vf.add_argument("--only", action="append", help="check key (repeatable)")
    vf.add_argument("--calibration", help="calibration file (default: the packaged one)")
    vf.add_argument("--out", help="directory for summary.json and CSV tables")

    cb = sub.add_parser("calibrate", help="run the calibration pilot")
    cb.add_argument("--seed", type=int)
    cb.add_argument("--out", help="output file (default: the packaged calibration)")
    cb.add_argument("--dry-run", action="store_true", help="print planned thresholds, write nothing")
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.config:
        try:
            cfg = RunConfig.from_json(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg.command = args.command
    else:
        cfg = RunConfig(args.command)
    g = vars(args)
    for key in ("space", "n", "out", "calibration", "seed"):
        if g.get(key) is not None:
            setattr(cfg, key, g[key])
    for key in ("p", "q", "fn", "only"):
        if g.get(key):
            setattr(cfg, key, list(g[key]))
    if g.get("dry_run"):
        cfg.dry_run = True
    quad = dict(cfg.quad)
    for flag, key in (("backend", "backend"), ("radial_nodes", "radial_nodes"), ("angular_nodes", "angular_nodes")):
        if g.get(flag) is not None:
            quad[key] = g[flag]
    cfg.quad = quad
    cfg.validate()
    return cfg


# --- commands ----------------------------------------------------------------------


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    sys.stdout.write(text)


def _threads() -> int:
    raw = os.environ.get("NPBALL_THREADS", "1")
    try:
        k = int(raw)
    except ValueError:
        raise ConfigError(f"NPBALL_THREADS must be a positive integer, got {raw!r}") from None
    if k < 1:
        raise ConfigError(f"NPBALL_THREADS must be a positive integer, got {raw!r}")
    return k


def cmd_norm(cfg: RunConfig) -> int:
    if not cfg.fn:
        raise ConfigError("norm needs at least one --fn")
    quad = cfg.quad_spec()
    search = SearchSpec.from_dict(cfg.search)
    exps = cfg.q if cfg.space == "bergman" else cfg.p
    if cfg.space in ("np", "a2p", "bergman") and not exps:
        raise ConfigError(f"space {cfg.space} needs --{'q' if cfg.space == 'bergman' else 'p'}")
    results = []
    for text in cfg.fn:
        f = parse_function(text, cfg.n)
        if cfg.n is not None and f.n != cfg.n:
            raise ConfigError(f"{text!r} has n={f.n}, expected {cfg.n}")
        for e in exps or [None]:
            if cfg.space == "np":
                est = norm_np(f, e, search, quad)
            elif cfg.space == "a2p":
                est = norm_a2p(f, e, quad)
            elif cfg.space == "bergman":
                est = norm_bergman_type(f, e)
            else:
                est = norm_sup(f)
            d = est.to_dict()
            d["evaluations"] = len(d.pop("trace"))
            results.append({"fn": text, "n": f.n, "space": cfg.space, "exponent": e, "estimate": d})
    payload = {"schema": SCHEMA, "command": "norm", "config": json.loads(cfg.to_json()),
               "quad": quad.to_dict(), "search": search.to_dict(), "results": results}
    _emit(payload, cfg.out)
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    from .checks import CHECKS, run_checks

    cal = load(cfg.calibration)
    only = cfg.only or list(CHECKS)
    unknown = [k for k in only if k not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown checks {unknown}; choose from {list(CHECKS)}")
    results = run_checks(only, cal, progress=lambda r: print(r.line(), file=sys.stderr, flush=True))
    checks = []
    for r in results:
        d = r.to_dict()
        d.pop("seconds")
        checks.append(d)
    payload = {
        "schema": SCHEMA,
        "command": "verify",
        "calibration_id": cal["id"],
        "quad": QuadSpec().to_dict(),
        "search": SearchSpec().to_dict(),
        "anchors": {r.key: r.anchor for r in results},
        "passed": all(r.passed for r in results),
        "checks": checks,
    }
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.json").write_text(json.dumps(payload, sort_keys=True, indent=2, default=_jsonable) + "\n")
        (out / "timing.json").write_text(json.dumps({r.key: r.seconds for r in results}, indent=2) + "\n")
        _write_tables(out, results)
    sys.stdout.write(json.dumps({k: payload[k] for k in ("schema", "calibration_id", "passed")}
                                | {"checks": {r.key: r.passed for r in results}}, sort_keys=True, indent=2) + "\n")
    return 0 if payload["passed"] else 1


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"not serializable: {type(x)}")


def _write_tables(out: Path, results) -> None:
    from .carleson import carleson_constant
    from .checks import corpus
    from .gap import equivalence_report

    keys = {r.key for r in results}
    if "carleson" in keys:
        for i, (_, f) in enumerate(corpus()):
            (out / f"carleson_{i:02d}.csv").write_text(carleson_constant(f, 1.0).to_csv())
    if "gap_np" in keys or "gap_aq" in keys:
        rep = equivalence_report(GapSpec(), 0.5, 0.5, (6, 8, 10, 12))
        (out / "gap_ratios.csv").write_text(rep.to_csv())


def cmd_calibrate(cfg: RunConfig) -> int:
    seed = DEFAULT_SEED if cfg.seed is None else cfg.seed
    if cfg.dry_run:
        sys.stdout.write(dumps(planned(seed)))
        return 0
    payload = pilot(seed)
    path = write(payload, cfg.out)
    print(f"wrote {path} (id {payload['id']})", file=sys.stderr)
    return 0


COMMANDS = {"norm": cmd_norm, "verify": cmd_verify, "calibrate": cmd_calibrate}


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _threads()
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except (ConfigError, CalibrationError) as exc:
        print(f"npball: error: {exc}", file=sys.stderr)
        return 1
    except (NumericError, ArithmeticError, FloatingPointError) as exc:
        print(f"npball: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
