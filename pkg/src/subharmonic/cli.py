"""Command-line front end.

Exit status: 0 on success, 2 for bad configuration or input parameters, 3 when
every requested computation failed numerically.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .approx import ApproximantKind, UndampedCoefficients, approx_observables
from .errors import (
    ConfigError,
    DegenerateElimination,
    NonPhysicalParameters,
    SteadyStateError,
    ZeroDrive,
    ZeroNonlinearity,
)
from .exact import DEFAULT_TOL, ExactMomentEngine
from .fock import MAX_CUTOFF, adaptive_cutoff
from .params import (
    DimensionlessParams,
    as_json,
    complex_to_json,
    params_from_mapping,
    parse_complex,
    to_dimensionless,
    to_effective,
)
from .sweep import (
    DIST_PRESETS,
    PRESETS,
    ROUTES,
    SweepSpec,
    all_failed,
    map_and_report,
    run_dist_grid,
    run_sweep,
    sweep_to_csv,
    sweep_to_json,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

# errors caused by the inputs rather than by a numerical method
INPUT_ERRORS = (ConfigError, ZeroDrive, ZeroNonlinearity, NonPhysicalParameters, DegenerateElimination)

_RUNTIME_KEYS = ("tol", "cutoff_limit", "threads", "fock_tol")


def _read_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _parse_set(items: Sequence[str]) -> dict:
    out = {}
    for item in items or ():
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def _merged(args) -> dict:
    cfg = _read_config(getattr(args, "config", None))
    cfg.update(_parse_set(getattr(args, "set", None)))
    for key in ("eps", "c_tilde", "n_c_tilde"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    return cfg


def _runtime(args, cfg: dict) -> dict:
    """Global flags win over config keys, which win over defaults."""
    rt = {"tol": DEFAULT_TOL, "cutoff_limit": MAX_CUTOFF, "threads": 1, "fock_tol": 1e-10}
    for key in _RUNTIME_KEYS:
        if key in cfg:
            rt[key] = cfg.pop(key)
        flag = getattr(args, key, None)
        if flag is not None:
            rt[key] = flag
    return rt


def _params(cfg: dict):
    if not cfg:
        raise ConfigError("no parameters given; pass a config file, --set, or --eps/--c-tilde")
    return params_from_mapping(cfg)


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _point_report(dp: DimensionlessParams, moments) -> dict:
    return {
        "tool": f"subharmonic {__version__}",
        "dimensionless": {**as_json(dp), "n_c_tilde": complex_to_json(dp.n_c_tilde)},
        "observables": moments.as_dict(),
    }


def cmd_map_circuit(args) -> int:
    cfg = _merged(args)
    _runtime(args, cfg)
    report = map_and_report(_params(cfg))
    _emit(json.dumps(report, indent=2), args.output)
    return EXIT_OK


def cmd_exact(args) -> int:
    cfg = _merged(args)
    rt = _runtime(args, cfg)
    dp = to_dimensionless(_params(cfg))
    eng = ExactMomentEngine(dp, rt["tol"])
    report = _point_report(dp, eng.observables())
    report["normalization"] = complex_to_json(eng.normalization())
    report["tol"] = rt["tol"]
    _emit(json.dumps(report, indent=2), args.output)
    return EXIT_OK


def cmd_fock(args) -> int:
    cfg = _merged(args)
    rt = _runtime(args, cfg)
    p = _params(cfg)
    dp = to_dimensionless(p)
    res = adaptive_cutoff(to_effective(p), tol=rt["fock_tol"], max_cutoff=rt["cutoff_limit"], sector=args.sector)
    report = _point_report(dp, res.observables)
    report["cutoff"] = res.rho.cutoff
    report["residual"] = res.rho.residual
    report["cutoff_history"] = [list(h) for h in res.history]
    _emit(json.dumps(report, indent=2), args.output)
    if args.rho_json:
        Path(args.rho_json).write_text(res.rho.to_json())
    if args.rho_csv:
        re_txt, im_txt = res.rho.to_csv()
        Path(f"{args.rho_csv}_re.csv").write_text(re_txt)
        Path(f"{args.rho_csv}_im.csv").write_text(im_txt)
    return EXIT_OK


def cmd_approx(args) -> int:
    cfg = _merged(args)
    _runtime(args, cfg)
    coeffs_raw = cfg.pop("coeffs", None)
    if args.coeffs is not None:
        coeffs_raw = json.loads(args.coeffs)
    dp = to_dimensionless(_params(cfg))
    coeffs = None
    if coeffs_raw is not None:
        try:
            coeffs = UndampedCoefficients(**{k: parse_complex(v) for k, v in coeffs_raw.items()})
        except TypeError as exc:
            raise ConfigError(f"bad coefficients: {exc}") from exc
    report = _point_report(dp, approx_observables(ApproximantKind(args.kind), dp, coeffs))
    _emit(json.dumps(report, indent=2), args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = dict(PRESETS[args.preset]) if args.preset else {}
    cfg.update(_read_config(args.config))
    cfg.update(_parse_set(args.set))
    rt = _runtime(args, cfg)
    if args.range is not None:
        cfg["range"] = [args.range[0], args.range[1], int(args.range[2])]
    if args.routes is not None:
        cfg["routes"] = args.routes
    if args.swept is not None:
        cfg["swept_parameter"] = args.swept
    for key in ("eps", "c_tilde", "n_c_tilde"):
        v = getattr(args, key)
        if v is not None:
            cfg[key] = v
    spec = SweepSpec.from_mapping(
        {**cfg, "tol": rt["tol"], "fock_tol": rt["fock_tol"], "cutoff_limit": rt["cutoff_limit"]}
    )
    rows = run_sweep(spec, workers=int(rt["threads"]))
    text = sweep_to_json(spec, rows) if args.format == "json" else sweep_to_csv(spec, rows)
    _emit(text, args.output)
    return EXIT_NUMERICAL if all_failed(rows) else EXIT_OK


def cmd_dist_grid(args) -> int:
    cfg = {}
    label = ""
    if args.preset:
        eps, ct = DIST_PRESETS[args.preset]
        cfg = {"eps": complex_to_json(eps), "c_tilde": complex_to_json(ct)}
        label = args.preset
    cfg.update(_merged(args))
    axis = cfg.pop("axis", None)
    if args.axis is not None:
        axis = args.axis
    axis = (-1.5, 1.5, 100) if axis is None else (float(axis[0]), float(axis[1]), int(axis[2]))
    _runtime(args, cfg)
    dp = to_dimensionless(_params(cfg))
    _emit(run_dist_grid(dp, axis, label), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    # accepted before or after the subcommand; SUPPRESS keeps a later
    # position from overwriting an earlier one with None
    def add_global(p):
        p.add_argument("--tol", type=float, default=argparse.SUPPRESS,
                       help=f"relative tolerance of the exact series (default {DEFAULT_TOL:g})")
        p.add_argument("--fock-tol", type=float, default=argparse.SUPPRESS,
                       help="convergence tolerance of the adaptive cutoff (default 1e-10)")
        p.add_argument("--cutoff-limit", type=int, default=argparse.SUPPRESS,
                       help=f"largest Fock cutoff N allowed (default {MAX_CUTOFF})")
        p.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker processes for sweeps (default 1)")

    common = argparse.ArgumentParser(add_help=False)
    add_global(common)
    common.add_argument("-o", "--output", help="write to this file instead of stdout")

    point = argparse.ArgumentParser(add_help=False)
    point.add_argument("config", nargs="?", help="JSON parameter file (any stage of the parameter chain)")
    point.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key (repeatable)")
    point.add_argument("--eps", help="scaled drive, e.g. '1+0.1j'")
    point.add_argument("--c-tilde", dest="c_tilde", help="effective loss parameter c~")
    point.add_argument("--n-c-tilde", dest="n_c_tilde", help="n * c~ instead of c~")

    parser = argparse.ArgumentParser(
        prog="subharmonic", description="Steady states of a driven Kerr-parametric oscillator."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    add_global(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("map-circuit", parents=[common, point], help="map parameters down to the scaled form")
    p.set_defaults(func=cmd_map_circuit)

    p = sub.add_parser("exact", parents=[common, point], help="closed-form moments")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("fock", parents=[common, point], help="number-basis steady state")
    p.add_argument("--sector", choices=("even", "odd"), help="solve in one parity sector (needs zero single-photon loss)")
    p.add_argument("--rho-json", help="also write the density matrix as JSON")
    p.add_argument("--rho-csv", metavar="PREFIX", help="also write PREFIX_re.csv and PREFIX_im.csv")
    p.set_defaults(func=cmd_fock)

    p = sub.add_parser("approx", parents=[common, point], help="coherent-state approximants")
    p.add_argument("--kind", choices=[k.value for k in ApproximantKind], default="delta_limit")
    p.add_argument("--coeffs", help='JSON object {"c_pp":..,"c_mm":..,"c_pm":..,"c_mp":..} for --kind undamped')
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("sweep", parents=[common], help="compare routes along a one-parameter sweep")
    p.add_argument("config", nargs="?", help="JSON sweep file")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--swept", choices=("c_tilde_real_axis", "c_tilde_real_part", "c_tilde_imag_part", "n"))
    p.add_argument("--range", nargs=3, type=float, metavar=("START", "STOP", "POINTS"))
    p.add_argument("--routes", nargs="+", choices=ROUTES)
    p.add_argument("--eps")
    p.add_argument("--c-tilde", dest="c_tilde")
    p.add_argument("--n-c-tilde", dest="n_c_tilde")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("dist-grid", parents=[common, point], help="real slice of the steady-state distribution")
    p.add_argument("--preset", choices=sorted(DIST_PRESETS))
    p.add_argument("--axis", nargs=3, type=float, metavar=("START", "STOP", "POINTS"))
    p.set_defaults(func=cmd_dist_grid)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SteadyStateError, ArithmeticError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
