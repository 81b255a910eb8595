"""Command-line front end.

    biharm solve       --config run.cfg [--out DIR] [--format csv,json,svg]
    biharm convergence --config run.cfg
    biharm compare-bc  --config run.cfg

Config files are flat ``key = value`` lines; ``#`` starts a comment.
Recognised keys and defaults::

    case = homogeneous     # homogeneous | nonhomogeneous | polynomial
    k = 1                  # 1 | 2
    n_min = 8              # >= 2; mesh size for `solve`
    n_levels = 4           # 1..8
    method = direct        # direct | cg
    tol = 1e-10
    diagonal = right       # right | left
    out = results
    format = csv,json,svg

Exit codes: 0 success, 1 numerical failure (rate or residual miss, solver
error), 2 usage or configuration error. BIHARM_THREADS caps how many mesh
levels are solved concurrently.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .fe_spaces import FeSpace
from .mesh import unit_square_mesh
from .report import run_comparison, run_study
from .solver import SolverError, solve_weak_bc
from .verification import CASES, field_errors, get_case

__all__ = ["RunConfig", "ConfigError", "parse_config", "load_config", "format_config", "main"]

log = logging.getLogger("biharm")

COMMANDS = ("solve", "convergence", "compare-bc")
FORMATS = ("csv", "json", "svg")
RESIDUAL_TOL = 1e-9
RATE_SLACK = 0.15


class ConfigError(ValueError):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f"config key {key!r}: {message}")


@dataclass(frozen=True)
class RunConfig:
    command: str = "convergence"
    case: str = "homogeneous"
    k: int = 1
    n_min: int = 8
    n_levels: int = 4
    method: str = "direct"
    tol: float = 1e-10
    diagonal: str = "right"
    out: str = "results"
    format: tuple = FORMATS

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError("command", f"expected one of {', '.join(COMMANDS)}, got {self.command!r}")
        if self.case not in CASES:
            raise ConfigError("case", f"unknown case {self.case!r}")
        if self.k not in (1, 2):
            raise ConfigError("k", f"must be 1 or 2, got {self.k}")
        if self.n_min < 2:
            raise ConfigError("n_min", f"must be >= 2, got {self.n_min}")
        if not 1 <= self.n_levels <= 8:
            raise ConfigError("n_levels", f"must be in 1..8, got {self.n_levels}")
        if self.method not in ("direct", "cg"):
            raise ConfigError("method", f"must be 'direct' or 'cg', got {self.method!r}")
        if not self.tol > 0:
            raise ConfigError("tol", f"must be positive, got {self.tol}")
        if self.diagonal not in ("left", "right"):
            raise ConfigError("diagonal", f"must be 'left' or 'right', got {self.diagonal!r}")
        bad = [f for f in self.format if f not in FORMATS]
        if bad or not self.format:
            raise ConfigError("format", f"expected a subset of {','.join(FORMATS)}, got {','.join(self.format)!r}")
        return self


_CONVERTERS = {
    "k": int,
    "n_min": int,
    "n_levels": int,
    "tol": float,
    "format": lambda s: tuple(p.strip() for p in s.split(",") if p.strip()),
}


def parse_config(text, **overrides):
    """Parse key=value text into a validated :class:`RunConfig`."""
    known = {f.name for f in fields(RunConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line.split()[0], f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(key, f"line {lineno}: unknown key")
        try:
            values[key] = _CONVERTERS.get(key, str)(value)
        except ValueError:
            raise ConfigError(key, f"line {lineno}: invalid value {value!r}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values).validate()


def format_config(cfg):
    """Serialize every effective value, defaults included."""
    lines = []
    for key, value in asdict(cfg).items():
        if key == "format":
            value = ",".join(value)
        elif key == "tol":
            value = repr(float(value))
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def load_config(path, **overrides):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror or exc}") from None
    return parse_config(text, **overrides)


def _threads():
    try:
        return max(1, int(os.environ.get("BIHARM_THREADS", "1")))
    except ValueError:
        return 1


def _write_field(path, coords, values):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "value"])
        for (x, y), v in zip(coords.tolist(), np.asarray(values).tolist()):
            writer.writerow([repr(x), repr(y), repr(v)])


def run_solve(cfg):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    data = get_case(cfg.case)
    space = FeSpace(unit_square_mesh(cfg.n_min, cfg.diagonal), cfg.k)
    sol = solve_weak_bc(space, data.f, data.g_D, data.g_N, method=cfg.method, tol=cfg.tol)
    coords = space.dof_coords
    for name in ("u", "phi", "p"):
        _write_field(out / f"{name}.csv", coords, getattr(sol, name))
    res = sol.info["residuals"]
    for i, r in enumerate(res, 1):
        print(f"residual row {i}: {r:.3e}")
    err = field_errors(space, data, sol)
    print(f"energy error: {err['energy']:.6e}  (h={space.mesh.h_max:.4g}, dofs={space.n_dofs})")
    return 0 if max(res) < RESIDUAL_TOL else 1


def run_convergence(cfg):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    report = run_study(
        cfg.case, cfg.k, cfg.n_min, cfg.n_levels, cfg.method, cfg.tol, _threads(), cfg.diagonal
    )
    _emit(report, out, "convergence", cfg.format)
    for row in report.rows:
        rate = "" if row["rate_energy"] is None else f"{row['rate_energy']:.3f}"
        print(f"level {row['level']}: h={row['h']:.4g} dofs={row['dofs']} energy={row['energy']:.4e} rate={rate}")
    if max(r["residual"] for r in report.rows) >= RESIDUAL_TOL:
        print("residual check failed", file=sys.stderr)
        return 1
    final = report.final_rate
    if final is not None and final < cfg.k - RATE_SLACK:
        print(f"final rate {final:.3f} below {cfg.k - RATE_SLACK:.2f}", file=sys.stderr)
        return 1
    return 0


def compare_bc(cfg):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    report = run_comparison(cfg.case, cfg.k, cfg.n_min, cfg.n_levels, _threads(), cfg.diagonal)
    _emit(report, out, "compare", cfg.format)
    for row in report.rows:
        print(
            f"level {row['level']}: h={row['h']:.4g} weak={row['energy_weak']:.4e} "
            f"strong={row['energy_strong']:.4e}"
        )
    weak, strong = report.final_rates
    if weak is not None:
        print(f"final rates: weak {weak:.3f}, strong {strong:.3f}")
        if weak - strong < 0.25:
            log.warning("no rate separation observed (weak %.3f, strong %.3f)", weak, strong)
    worst = max(max(r["residual_weak"], r["residual_strong"]) for r in report.rows)
    return 0 if worst < RESIDUAL_TOL else 1


def _emit(report, out, stem, formats):
    if "csv" in formats:
        (out / f"{stem}.csv").write_text(report.to_csv())
    if "json" in formats:
        (out / f"{stem}.json").write_text(report.to_json())
    if "svg" in formats:
        (out / f"{stem}.svg").write_text(report.to_svg())


def build_parser():
    parser = argparse.ArgumentParser(prog="biharm", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="key=value configuration file")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--format", help="comma-separated subset of csv,json,svg (overrides config)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


_RUNNERS = {"solve": run_solve, "convergence": run_convergence, "compare-bc": compare_bc}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s"
    )
    try:
        fmt = _CONVERTERS["format"](args.format) if args.format else None
        cfg = load_config(args.config, command=args.command, out=args.out, format=fmt)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return _RUNNERS[cfg.command](cfg)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
