"""Command-line front end.

    ijwkb wavefunction --potential '{"family": "eckart"}' --E 4 --range -10:10:2001
    ijwkb transmit --potential '{"family": "step", "u_right": 1.5}' --E-range 2:6:10
    ijwkb diagnose --config run.json --out results/
    ijwkb verify

A JSON config document may hold any of the keys ``potential``, ``hbar``,
``mass``, ``E``, ``x0``, ``range``, ``E_range``, ``method``, ``out``,
``tol_quad``, ``tol_ode`` and ``turning_point``; command-line flags
override it.  Ranges are ``{"min", "max", "count"}`` objects or
``"min:max:count"`` strings.

Exit codes: 0 success, 1 claim failure, 2 configuration error,
3 physics-domain error (turning point, sub-barrier energy).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import claims as claims_mod
from . import semiclassics
from .diagnostics import diagnose
from .errors import JwkbError, PhysicsDomainError, TurningPointError
from .oracle import numerov_cauchy
from .output import (NEGATIVE_CONTROL_TAG, write_comparison, write_csv,
                     write_diagnostics_bundle, write_json, write_svg)
from .potentials import Potential, from_dict, turning_points
from .scattering import compare_methods
from .semiclassics import PhysicalParams
from .wavefunctions import psi_improved, psi_jwkb

EXIT_OK, EXIT_CLAIM, EXIT_CONFIG, EXIT_PHYSICS = 0, 1, 2, 3
METHODS = ("exact", "jwkb", "improved")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ConfigError(f"count must be >= 2, got {self.count}")
        if not self.lo < self.hi:
            raise ConfigError(f"min must be < max, got {self.lo} >= {self.hi}")

    def points(self):
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class RunConfig:
    potential: Potential
    params: PhysicalParams
    grid: GridSpec | None
    energies: GridSpec | None
    method: str
    out: Path
    tol_quad: float | None
    tol_ode: float | None
    negative_control: bool
    turning_point: float | None
    workers: int = 1


def parse_range(value) -> GridSpec:
    try:
        if isinstance(value, dict):
            lo, hi, count = value["min"], value["max"], value["count"]
        else:
            lo, hi, count = str(value).split(":")
        count_f = float(count)
        if count_f != int(count_f):
            raise ConfigError(f"count must be an integer, got {count}")
        return GridSpec(float(lo), float(hi), int(count_f))
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad range {value!r}: expected min:max:count") from None


def _load_potential(value):
    if isinstance(value, dict):
        doc = value
    else:
        text = str(value)
        path = Path(text)
        try:
            doc = json.loads(path.read_text() if path.is_file() else text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"potential is neither a JSON file nor inline JSON: {exc}") from None
    try:
        return from_dict(doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def build_config(args) -> RunConfig:
    doc = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
    overrides = {"potential": args.potential, "E": args.E, "range": args.range,
                 "E_range": args.E_range, "method": args.method, "out": args.out,
                 "hbar": args.hbar, "mass": args.mass, "tol_quad": args.tol_quad,
                 "tol_ode": args.tol_ode, "x0": args.x0, "turning_point": args.turning_point}
    doc.update({k: v for k, v in overrides.items() if v is not None})

    potential = _load_potential(doc["potential"]) if "potential" in doc else None
    grid = parse_range(doc["range"]) if "range" in doc else None
    energies = parse_range(doc["E_range"]) if "E_range" in doc else None
    try:
        hbar = float(doc.get("hbar", 1.0))
        mass = float(doc.get("mass", 1.0))
        energy = float(doc.get("E", energies.lo if energies else 1.0))
        x0 = float(doc.get("x0", grid.lo if grid else 0.0))
        params = PhysicalParams(hbar, mass, energy, x0)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    tols = []
    for key in ("tol_quad", "tol_ode"):
        val = doc.get(key)
        if val is not None and not float(val) > 0:
            raise ConfigError(f"{key} must be positive")
        tols.append(None if val is None else float(val))
    method = str(doc.get("method", "all")).lower()
    if method not in METHODS + ("all",):
        raise ConfigError(f"unknown method {method!r}")
    tp = doc.get("turning_point")
    workers = int(getattr(args, "workers", 1))
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    return RunConfig(potential, params, grid, energies, method, Path(doc.get("out", ".")),
                     tols[0], tols[1], bool(getattr(args, "negative_control", False)),
                     None if tp is None else float(tp), workers)


def _require(cfg, *names):
    for name in names:
        if getattr(cfg, name) is None:
            flag = {"potential": "--potential", "grid": "--range",
                    "energies": "--E-range"}[name]
            raise ConfigError(f"missing {flag}")


def _tols(cfg):
    out = {}
    if cfg.tol_quad is not None:
        out["tol_quad"] = cfg.tol_quad
    if cfg.tol_ode is not None:
        out["tol_ode"] = cfg.tol_ode
    return out


def _methods(cfg):
    return METHODS if cfg.method == "all" else (cfg.method,)


# --------------------------------------------------------------------------

def cmd_wavefunction(cfg: RunConfig) -> int:
    _require(cfg, "potential", "grid")
    grid = cfg.grid.points()
    params = cfg.params
    if not grid[0] <= params.x0 <= grid[-1]:
        raise ConfigError("x0 must lie inside the grid range")
    waves = {}
    for method in _methods(cfg):
        if method == "jwkb":
            s = psi_jwkb(params, cfg.potential, grid, **_tols(cfg))
            waves[method] = s.psi.values / s.psi.values[0]
        elif method == "improved":
            s = psi_improved(params, cfg.potential, grid, **_tols(cfg))
            waves[method] = s.psi.values / s.psi.values[0]
        else:
            # exact evolution of the Cauchy data of the unit right mover
            p0 = complex(semiclassics.momentum(params.with_x0(grid[0]), cfg.potential, grid[0]))
            exact = numerov_cauchy(params, cfg.potential, grid, 1.0, 1j * p0 / params.hbar)
            waves[method] = exact.values
    for method, psi in waves.items():
        write_csv(cfg.out / f"psi_{method}.csv", ["x", "re", "im", "abs"],
                  zip(grid, psi.real, psi.imag, np.abs(psi)))
    write_svg(cfg.out / "psi_overlay.svg",
              [(f"Re psi {m}", grid, psi.real) for m, psi in waves.items()],
              title="wavefunctions", ylabel="Re psi")
    names = list(waves)
    dev = max((float(np.max(np.abs(waves[a] - waves[b])))
               for i, a in enumerate(names) for b in names[i + 1:]), default=0.0)
    print(f"wrote {len(waves)} wavefunction(s) to {cfg.out}; "
          f"max cross-method deviation {dev:.3e}")
    return EXIT_OK


def cmd_transmit(cfg: RunConfig) -> int:
    _require(cfg, "potential", "energies")
    energies = cfg.energies.points()
    domain = (cfg.grid.lo, cfg.grid.hi) if cfg.grid else None
    comp = compare_methods(cfg.params, cfg.potential, energies, domain, cfg.negative_control,
                           workers=cfg.workers, **_tols(cfg))
    tag = f"_{NEGATIVE_CONTROL_TAG}" if cfg.negative_control else ""
    write_comparison(cfg.out / f"transmission{tag}.csv", comp)
    table = comp.table()
    write_svg(cfg.out / f"transmission_error{tag}.svg",
              [("jwkb", table[:, 0], table[:, 4]), ("improved", table[:, 0], table[:, 5])],
              title="|T - T_exact|" + (f" {NEGATIVE_CONTROL_TAG}" if tag else ""),
              xlabel="E", ylabel="|dT|", logy=True)
    label = f" [{NEGATIVE_CONTROL_TAG}]" if tag else ""
    print(f"{len(energies)} energies{label}: max err jwkb {table[:, 4].max():.3e}, "
          f"improved {table[:, 5].max():.3e}; improved better on "
          f"{comp.fraction_improved_better():.0%} of rows")
    return EXIT_OK


def cmd_diagnose(cfg: RunConfig) -> int:
    _require(cfg, "potential", "grid")
    grid = cfg.grid.points()
    params = cfg.params
    x_t = cfg.turning_point
    spec = cfg.potential
    pts = turning_points(spec, params, (grid[0], grid[-1]))
    if x_t is None and pts:
        x_t = pts[0]
    if x_t is not None:
        # the field diagnostics run on the allowed part of the grid only
        allowed = np.asarray(spec.value(grid)) < params.energy
        side = grid < x_t if params.x0 < x_t else grid > x_t
        grid = grid[allowed & side]
        if grid.size < 9:
            raise PhysicsDomainError(
                f"fewer than 9 grid points before the turning point at x={x_t:.12g}")
        params = params.with_x0(grid[0] if params.x0 < x_t else grid[-1])
        pad = 0.5 * (grid[1] - grid[0])
        grid = grid[np.abs(grid - x_t) > pad]
    report = diagnose(params, spec, grid, x_t=x_t, **_tols(cfg))
    summary = report.summary()
    write_diagnostics_bundle(cfg.out, report, params, claims_mod.report_claims(summary))
    print(f"wrote diagnostics to {cfg.out}; eta bound margin min "
          f"{summary['eta_bound_margin_min']:.3e}")
    if summary["turning_point_fitted_exponent"] is not None:
        print(f"turning point x={x_t:.12g}: fitted exponent "
              f"{summary['turning_point_fitted_exponent']:.4f}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig | None, c2_override=None) -> int:
    negative = bool(cfg and cfg.negative_control)
    results = claims_mod.run_all(c2_override=c2_override, negative_control=negative,
                                 outdir=cfg.out if cfg and cfg.out != Path(".") else None)
    for claim in results:
        print(claim.line())
    failed = [c.name for c in results if not c.passed]
    if cfg is not None and cfg.out != Path("."):
        write_json(cfg.out / "verify_summary.json",
                   {"claims": [c.as_dict() for c in results],
                    "environment": {"hbar": 1.0, "mass": 1.0}})
    if failed:
        print("FAILED: " + ", ".join(failed))
        return EXIT_CLAIM
    print(f"all {len(results)} claims PASS")
    return EXIT_OK


# --------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--potential", help="potential JSON document, inline or a file path")
    common.add_argument("--E", type=float, help="energy")
    common.add_argument("--E-range", dest="E_range", help="energy sweep min:max:count")
    common.add_argument("--range", help="spatial grid (or scattering domain) min:max:count")
    common.add_argument("--method", choices=METHODS + ("all",))
    common.add_argument("--out", help="output directory")
    common.add_argument("--hbar", type=float)
    common.add_argument("--mass", type=float)
    common.add_argument("--x0", type=float, help="anchor of S and eta (default: grid start)")
    common.add_argument("--turning-point", dest="turning_point", type=float)
    common.add_argument("--negative-control", action="store_true",
                        help="flawed match without the reflected wave (labeled output)")
    common.add_argument("--tol-quad", dest="tol_quad", type=float)
    common.add_argument("--tol-ode", dest="tol_ode", type=float)
    common.add_argument("--workers", type=int, default=1,
                        help="processes for energy sweeps (output does not depend on it)")
    parser = argparse.ArgumentParser(prog="ijwkb", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("wavefunction", parents=[common], help="write psi.csv per method")
    sub.add_parser("transmit", parents=[common], help="T by all methods over an energy sweep")
    sub.add_parser("diagnose", parents=[common], help="diagnostics CSV/JSON bundle")
    verify = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    verify.add_argument("--c2-override", dest="c2_override", type=complex,
                        help=argparse.SUPPRESS)
    return parser


_COMMANDS = {"wavefunction": cmd_wavefunction, "transmit": cmd_transmit,
             "diagnose": cmd_diagnose}


_VALUE_FLAGS = ("--range", "--E-range", "--E", "--x0", "--turning-point")


def _glue_negative_values(argv):
    """Turn ``--range -10:10:5`` into ``--range=-10:10:5`` for argparse."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_glue_negative_values(argv))
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = build_config(args)
        if args.command == "verify":
            return cmd_verify(cfg, args.c2_override)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TurningPointError as exc:
        where = f" at x={exc.position:.12g}" if exc.position is not None else ""
        print(f"physics-domain error: turning point{where}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except PhysicsDomainError as exc:
        print(f"physics-domain error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except JwkbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
