"""Command-line front end.

    cmpiv classify --alpha 0 --kappa 1
    cmpiv solve --alpha 0 --kappa 1 --x-end -12
    cmpiv poles --alpha 0 --kappa 1 --n 5 12 --method all
    cmpiv validate --alpha 0.25 --kappa 1
    cmpiv pcf --nu -1 --z 1

Exit codes: 0 success, 2 invalid parameters or regime, 3 numerical failure,
4 validation failure.  Data goes to stdout (or --output), logs to stderr;
the level is read from CMPIV_LOG_LEVEL (error, warn, info, debug).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from .asymptotics import Branch, phase_from_params, pole_expansion, pole_implicit
from .connection import Params, connection_constants
from .errors import (
    CmpivError,
    DomainError,
    InvalidParameters,
    MatchFailure,
    NonConvergence,
    NotSingularRegime,
    NumericalFailure,
)
from .ode import OdeSettings, integrate, poles_to_tsv, trajectory_to_dict, trajectory_to_tsv
from .specfun import pcf_d_pair
from .validation import compare_poles, residual_scan

log = logging.getLogger("cmpiv")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3
EXIT_VALIDATION = 4

VALIDATE_BOUND = 2.0

_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
           "info": logging.INFO, "debug": logging.DEBUG}


@dataclass
class CliConfig:
    alpha: float = 0.0
    kappa: float = 1.0
    x_start: float = 6.0
    x_end: float = -12.0
    rtol: float = 1e-11
    atol: float = 1e-13
    output_format: str = "tsv"
    output_path: str | None = None

    def __post_init__(self):
        if self.output_format not in ("tsv", "json"):
            raise InvalidParameters(f"output format must be tsv or json, got {self.output_format!r}")

    def params(self) -> Params:
        return Params(self.alpha, self.kappa)

    def settings(self) -> OdeSettings:
        return OdeSettings(rtol=self.rtol, atol=self.atol, x_start=self.x_start)


def read_config_file(path: str) -> dict:
    """key = value lines; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidParameters(f"{path}:{lineno}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def build_config(args: argparse.Namespace) -> CliConfig:
    """Defaults, then the config file, then explicit flags."""
    types = {f.name: f.type for f in fields(CliConfig)}
    merged: dict = {}
    if getattr(args, "config", None):
        for k, v in read_config_file(args.config).items():
            if k not in types:
                raise InvalidParameters(f"unknown config key {k!r}")
            merged[k] = v if k in ("output_format", "output_path") else float(v)
    for k in types:
        v = getattr(args, k, None)
        if v is not None:
            merged[k] = v
    return CliConfig(**merged)


# --- output helpers -----------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _tsv(cols, rows) -> str:
    lines = ["#" + "\t".join(cols)]
    lines += ["\t".join(_fmt(r.get(c)) for c in cols) for r in rows]
    return "\n".join(lines) + "\n"


def _emit(cfg: CliConfig, text: str) -> None:
    if cfg.output_path:
        with open(cfg.output_path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- commands ---------------------------------------------------------------

_CONN_COLS = ("alpha", "kappa", "kappa_star", "rho_re", "rho_im", "abs_rho", "b", "psi", "regime")


def _classify_one(alpha: float, kappa: float) -> dict:
    d = connection_constants(Params(alpha, kappa), strict=False).to_dict()
    return {"alpha": alpha, "kappa": kappa, **d}


def cmd_classify(cfg: CliConfig, sweep: list[float] | None = None) -> int:
    kappas = sweep if sweep else [cfg.kappa]
    Params(cfg.alpha, kappas[0])  # validate before fanning out
    with ThreadPoolExecutor() as ex:
        rows = list(ex.map(lambda k: _classify_one(cfg.alpha, k), kappas))
    if cfg.output_format == "json":
        doc = rows[0] if not sweep else {"alpha": cfg.alpha, "rows": rows}
        _emit(cfg, json.dumps(doc) + "\n")
    else:
        _emit(cfg, _tsv(_CONN_COLS, rows))
    return EXIT_OK


def cmd_solve(cfg: CliConfig) -> int:
    traj = integrate(cfg.params(), cfg.settings(), x_end=cfg.x_end)
    log.info("%d samples, %d poles", len(traj.samples), len(traj.poles))
    if cfg.output_format == "json":
        _emit(cfg, json.dumps(trajectory_to_dict(traj)) + "\n")
    else:
        _emit(cfg, trajectory_to_tsv(traj, with_poles=True))
    return EXIT_OK


_POLE_COLS = {
    "ode": ("n", "branch", "x_ode"),
    "implicit": ("n", "branch", "x_implicit"),
    "expansion": ("n", "branch", "x_expansion"),
    "all": ("n", "branch", "x_ode", "x_implicit", "x_expansion", "d_oi", "d_ie", "zero_bound"),
}


def cmd_poles(cfg: CliConfig, n_min: int, n_max: int, method: str) -> int:
    params = cfg.params()
    if n_min < 1 or n_max < n_min:
        raise InvalidParameters("--n needs 1 <= N1 <= N2")
    if method in ("ode", "all"):
        table = compare_poles(params, n_min, n_max, settings=cfg.settings())
        rows = [r.to_dict() for r in table.rows]
    else:
        phase = phase_from_params(params)
        fn = pole_implicit if method == "implicit" else pole_expansion
        rows = [
            {"n": n, "branch": br.value, f"x_{method}": fn(n, br, phase)}
            for n in range(n_min, n_max + 1)
            for br in (Branch.MINUS, Branch.PLUS)
        ]
    cols = _POLE_COLS[method]
    rows = [{c: r.get(c) for c in cols} for r in rows]
    if cfg.output_format == "json":
        _emit(cfg, json.dumps({"method": method, "rows": rows}) + "\n")
    else:
        _emit(cfg, _tsv(cols, rows))
    return EXIT_OK


def cmd_validate(cfg: CliConfig, grid_hi: float = -6.0, grid_step: float = 0.01) -> int:
    params = cfg.params()
    phase_from_params(params)  # regime gate before integrating
    if not cfg.x_end < grid_hi < 0:
        raise InvalidParameters("validation grid needs x_end < grid-hi < 0")
    n = int(round((grid_hi - cfg.x_end) / grid_step))
    grid = np.linspace(cfg.x_end, grid_hi, n + 1)
    report = residual_scan(params, grid, settings=cfg.settings())
    worst = report.max_scaled
    log.info("max scaled residual %.6g over %d checkpoints", worst, len(report.included()))
    if cfg.output_format == "json":
        doc = report.to_dict()
        doc["bound"] = VALIDATE_BOUND
        doc["passed"] = worst <= VALIDATE_BOUND
        _emit(cfg, json.dumps(doc) + "\n")
    else:
        _emit(cfg, report.to_tsv())
    if not worst <= VALIDATE_BOUND:
        log.error("scaled residual %.6g exceeds %g", worst, VALIDATE_BOUND)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_pcf(cfg: CliConfig, nu: float, z: float) -> int:
    d, dp = pcf_d_pair(nu, z)
    row = {"nu": nu, "z": z, "D": d, "D_prime": dp}
    if cfg.output_format == "json":
        _emit(cfg, json.dumps(row) + "\n")
    else:
        _emit(cfg, _tsv(("nu", "z", "D", "D_prime"), [row]))
    return EXIT_OK


# --- argument parsing ---------------------------------------------------------


def _common(p: argparse.ArgumentParser, problem: bool = True) -> None:
    if problem:
        p.add_argument("--alpha", type=float)
        p.add_argument("--kappa", type=float)
        p.add_argument("--x-start", dest="x_start", type=float)
        p.add_argument("--x-end", dest="x_end", type=float)
        p.add_argument("--rtol", type=float)
        p.add_argument("--atol", type=float)
    p.add_argument("--output-format", dest="output_format", choices=("tsv", "json"))
    p.add_argument("--output", dest="output_path")
    p.add_argument("--config", help="key = value file; flags take precedence")


def _float_list(s: str) -> list[float]:
    try:
        return [float(t) for t in s.replace(",", " ").split()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cmpiv", description="Clarkson-McLeod solutions of PIV (beta = 0)")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="connection constants and regime")
    _common(p)
    p.add_argument("--sweep", type=_float_list, help="comma-separated kappa values")

    p = sub.add_parser("solve", help="integrate and list samples and poles")
    _common(p)

    p = sub.add_parser("poles", help="pole locations by method")
    _common(p)
    p.add_argument("--n", nargs=2, type=int, metavar=("N1", "N2"), required=True)
    p.add_argument("--method", choices=("ode", "implicit", "expansion", "all"), default="all")

    p = sub.add_parser("validate", help="scaled residual check against the asymptotics")
    _common(p)
    p.add_argument("--grid-hi", type=float, default=-6.0)
    p.add_argument("--grid-step", type=float, default=0.01)

    p = sub.add_parser("pcf", help="parabolic cylinder function D_nu(z) and its derivative")
    _common(p, problem=False)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--z", type=float, required=True)
    return ap


def _setup_logging() -> None:
    name = os.environ.get("CMPIV_LOG_LEVEL", "warn").strip().lower()
    level = _LEVELS.get(name, logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def run(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "classify":
            return cmd_classify(cfg, args.sweep)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "poles":
            return cmd_poles(cfg, args.n[0], args.n[1], args.method)
        if args.command == "validate":
            return cmd_validate(cfg, args.grid_hi, args.grid_step)
        return cmd_pcf(cfg, args.nu, args.z)
    except (InvalidParameters, NotSingularRegime, DomainError) as e:
        print(f"cmpiv: {e}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalFailure as e:
        where = f" at x = {e.x:.17g}" if e.x is not None else ""
        print(f"cmpiv: numerical failure{where}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (NonConvergence, MatchFailure) as e:
        print(f"cmpiv: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (CmpivError, ValueError, OSError) as e:
        print(f"cmpiv: {e}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
