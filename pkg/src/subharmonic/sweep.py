"""Parameter sweeps that evaluate several solution routes side by side, plus
the single-point reports behind the command line."""
from __future__ import annotations

import cmath
import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from . import __version__
from .approx import ApproximantKind, UndampedCoefficients, approx_observables
from .errors import ConfigError, SteadyStateError
from .exact import DEFAULT_TOL, ExactMomentEngine, distribution_grid
from .fock import MAX_CUTOFF, adaptive_cutoff
from .moments import MomentSet
from .params import (
    CircuitParams,
    DimensionlessParams,
    EffectiveParams,
    SystemParams,
    as_json,
    complex_to_json,
    effective_from_dimensionless,
    map_circuit,
    nondimensionalize,
    parse_complex,
    reduce_adiabatic,
    regime_label,
)

SWEPT = ("c_tilde_real_axis", "c_tilde_real_part", "c_tilde_imag_part", "n")
ROUTES = ("exact", "fock", "delta", "cat", "undamped_even")
FIELDS = ("n_photon_re", "n_photon_im", "g2_re", "g2_im", "parity", "purity", "status")


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter sweep.

    For the three c_tilde sweeps the swept value is c_tilde itself, or
    n * c_tilde when ``scale_by_n`` is set. For an ``n`` sweep, eps keeps the
    phase of ``eps`` and c_tilde = n_c_tilde / n when ``n_c_tilde`` is given.
    """

    swept_parameter: str
    start: float
    stop: float
    points: int
    eps: complex = 1 + 0.1j
    c_tilde: complex = -0.5 + 0j
    n_c_tilde: Optional[complex] = None
    scale_by_n: bool = False
    routes: Tuple[str, ...] = ROUTES
    tol: float = DEFAULT_TOL
    fock_tol: float = 1e-10
    cutoff_limit: int = MAX_CUTOFF

    def __post_init__(self):
        if self.swept_parameter not in SWEPT:
            raise ConfigError(f"swept_parameter must be one of {SWEPT}")
        if self.points < 2:
            raise ConfigError("a sweep needs at least 2 points")
        if not self.start < self.stop:
            raise ConfigError("sweep range needs start < stop")
        bad = set(self.routes) - set(ROUTES)
        if bad or not self.routes:
            raise ConfigError(f"unknown routes {sorted(bad)}; choose from {ROUTES}")
        if self.swept_parameter == "n" and self.start <= 0:
            raise ConfigError("an n sweep must stay positive")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)

    def params_at(self, x: float) -> DimensionlessParams:
        x = float(x)
        if self.swept_parameter == "n":
            eps = x * cmath.exp(1j * cmath.phase(self.eps))
            ct = self.n_c_tilde / x if self.n_c_tilde is not None else self.c_tilde
            return DimensionlessParams.from_eps_ctilde(eps, ct)
        n = abs(self.eps)
        v = x / n if self.scale_by_n else x
        if self.swept_parameter == "c_tilde_real_axis":
            ct = complex(v, 0.0)
        elif self.swept_parameter == "c_tilde_real_part":
            ct = complex(v, self.c_tilde.imag)
        else:
            ct = complex(self.c_tilde.real, v)
        return DimensionlessParams.from_eps_ctilde(self.eps, ct)

    def header(self) -> List[str]:
        lines = [f"tool=subharmonic {__version__}"]
        for k in ("swept_parameter", "start", "stop", "points", "eps", "c_tilde", "n_c_tilde",
                  "scale_by_n", "routes", "tol", "fock_tol", "cutoff_limit"):
            v = getattr(self, k)
            if isinstance(v, complex):
                v = f"{v.real!r},{v.imag!r}"
            elif isinstance(v, tuple):
                v = ",".join(v)
            lines.append(f"{k}={v}")
        return lines

    @classmethod
    def from_mapping(cls, cfg: Mapping) -> "SweepSpec":
        cfg = dict(cfg)
        try:
            start, stop, points = cfg.pop("range")
        except KeyError:
            raise ConfigError("sweep config needs range = [start, stop, points]") from None
        except (TypeError, ValueError):
            raise ConfigError("range must be [start, stop, points]") from None
        kwargs = dict(start=float(start), stop=float(stop), points=int(points))
        for k in ("eps", "c_tilde", "n_c_tilde"):
            if cfg.get(k) is not None:
                kwargs[k] = parse_complex(cfg.pop(k))
        if "routes" in cfg:
            kwargs["routes"] = tuple(cfg.pop("routes"))
        try:
            return cls(**kwargs, **cfg)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


PRESETS: Dict[str, dict] = {
    # c~ real, scaled by n so the delta limit sits at -1
    "ctilde-real": dict(swept_parameter="c_tilde_real_axis", range=[-0.99, -0.2, 25], eps=1 + 0.1j, scale_by_n=True),
    "ctilde-real-part": dict(swept_parameter="c_tilde_real_part", range=[-0.99, -0.2, 25], eps=1 + 0.1j,
                   c_tilde=-0.5 - 0.199j, scale_by_n=True),
    "ctilde-imag-part": dict(swept_parameter="c_tilde_imag_part", range=[-0.5, 0.5, 21], eps=1 + 0.1j,
                   c_tilde=-0.896 + 0j),
    "drive-scan": dict(swept_parameter="n", range=[0.1, 3.0, 30], eps=1 + 0j, n_c_tilde=-0.99 - 0.1j),
}

DIST_PRESETS = {
    "weak-drive": (-0.192 - 0.097j, -2.79 + 0.93j),
    "experiment": (-1.92 - 0.97j, -0.279 + 0.093j),
    "balanced": (-0.192 - 0.097j, -0.93 + 0.93j),
    "large-detuning": (-0.192 - 0.097j, -2.79 + 9.3j),
}


def evaluate_route(route: str, dp: DimensionlessParams, tol: float = DEFAULT_TOL,
                   fock_tol: float = 1e-10, cutoff_limit: int = MAX_CUTOFF) -> MomentSet:
    if route == "exact":
        return ExactMomentEngine(dp, tol).observables()
    if route == "fock":
        return adaptive_cutoff(effective_from_dimensionless(dp), tol=fock_tol, max_cutoff=cutoff_limit).observables
    if route == "delta":
        return approx_observables(ApproximantKind.DELTA_LIMIT, dp)
    if route == "cat":
        return approx_observables(ApproximantKind.PURE_CAT, dp)
    if route == "undamped_even":
        return approx_observables(ApproximantKind.UNDAMPED, dp, UndampedCoefficients.even_cat(dp.n))
    raise ConfigError(f"unknown route {route!r}")


@dataclass(frozen=True)
class ComparisonRow:
    swept_value: float
    results: Dict[str, Union[MomentSet, str]]
    differences: Dict[Tuple[str, str], Dict[str, float]] = field(default_factory=dict)

    def ok(self, route: str) -> bool:
        return isinstance(self.results.get(route), MomentSet)


def _reldiff(a, b) -> float:
    if a is None or b is None:
        return math.nan
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def evaluate_point(spec: SweepSpec, x: float) -> ComparisonRow:
    results: Dict[str, Union[MomentSet, str]] = {}
    try:
        dp = spec.params_at(x)
    except SteadyStateError as exc:
        reason = f"{type(exc).__name__}: {exc}"
        return ComparisonRow(float(x), {r: reason for r in spec.routes})
    for route in spec.routes:
        try:
            results[route] = evaluate_route(route, dp, spec.tol, spec.fock_tol, spec.cutoff_limit)
        except (SteadyStateError, ArithmeticError, ValueError) as exc:
            results[route] = f"{type(exc).__name__}: {exc}"
    diffs = {}
    done = [r for r in spec.routes if isinstance(results[r], MomentSet)]
    for i, r1 in enumerate(done):
        for r2 in done[i + 1:]:
            a, b = results[r1], results[r2]
            diffs[(r1, r2)] = {"n_photon": _reldiff(a.n_photon, b.n_photon), "g2": _reldiff(a.g2, b.g2)}
    return ComparisonRow(float(x), results, diffs)


def _point_task(args):
    return evaluate_point(*args)


def run_sweep(spec: SweepSpec, workers: int = 1) -> List[ComparisonRow]:
    """One row per sweep value, in sweep order whatever the completion order."""
    tasks = [(spec, x) for x in spec.values]
    if workers <= 1:
        return [evaluate_point(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_point_task, tasks))


def _fmt(v) -> str:
    if v is None:
        return "nan"
    return repr(float(v))


def sweep_columns(spec: SweepSpec) -> List[str]:
    cols = ["swept_value"] + [f"{r}_{f}" for r in spec.routes for f in FIELDS]
    pairs = [(a, b) for i, a in enumerate(spec.routes) for b in spec.routes[i + 1:]]
    cols += [f"reldiff_{a}_{b}_{q}" for a, b in pairs for q in ("n_photon", "g2")]
    return cols


def sweep_to_csv(spec: SweepSpec, rows: Sequence[ComparisonRow]) -> str:
    buf = io.StringIO()
    for line in spec.header():
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(sweep_columns(spec))
    pairs = [(a, b) for i, a in enumerate(spec.routes) for b in spec.routes[i + 1:]]
    for row in rows:
        out = [_fmt(row.swept_value)]
        for r in spec.routes:
            res = row.results[r]
            if isinstance(res, MomentSet):
                g2 = res.g2
                out += [_fmt(res.n_photon.real), _fmt(res.n_photon.imag),
                        _fmt(None if g2 is None else g2.real), _fmt(None if g2 is None else g2.imag),
                        _fmt(res.parity), _fmt(res.purity), "ok"]
            else:
                out += ["nan"] * 6 + [res]
        for a, b in pairs:
            d = row.differences.get((a, b))
            out += [_fmt(d["n_photon"]), _fmt(d["g2"])] if d else ["nan", "nan"]
        w.writerow(out)
    return buf.getvalue()


def sweep_to_json(spec: SweepSpec, rows: Sequence[ComparisonRow]) -> str:
    doc = {"header": spec.header(), "rows": []}
    for row in rows:
        doc["rows"].append({
            "swept_value": row.swept_value,
            "results": {r: (v.as_dict() if isinstance(v, MomentSet) else {"status": v})
                        for r, v in row.results.items()},
            "differences": {f"{a}/{b}": d for (a, b), d in row.differences.items()},
        })
    return json.dumps(doc, indent=2, sort_keys=True)


def all_failed(rows: Sequence[ComparisonRow]) -> bool:
    return all(not isinstance(v, MomentSet) for row in rows for v in row.results.values())


# --------------------------------------------------------------------------
# single-point reports


def map_and_report(p: Union[CircuitParams, SystemParams, EffectiveParams]) -> dict:
    """Every stage of the parameter chain from ``p`` down to the scaled form."""
    report = {"tool": f"subharmonic {__version__}"}
    if isinstance(p, CircuitParams):
        report["circuit"] = as_json(p)
        p = map_circuit(p)
    if isinstance(p, SystemParams):
        report["system"] = as_json(p)
        p = reduce_adiabatic(p)
    if isinstance(p, EffectiveParams):
        report["effective"] = as_json(p)
        ep = p
        p = nondimensionalize(p)
        report["sign_condition"] = ep.gamma_e2 * (ep.gamma1_1 - ep.gamma_e2) + ep.chi_e * (ep.Delta1 - ep.chi_e)
    report["dimensionless"] = as_json(p)
    report["dimensionless"]["n_c_tilde"] = complex_to_json(p.n_c_tilde)
    report["strong_coupling"] = p.strong_coupling()
    report["regime"] = regime_label(p)
    return report


def run_dist_grid(dp: DimensionlessParams, axis=(-1.5, 1.5, 100), label: str = "") -> str:
    grid = distribution_grid(dp, axis)
    comments = [f"tool=subharmonic {__version__}"]
    if label:
        comments.append(f"preset={label}")
    comments += [
        f"eps={dp.eps.real!r},{dp.eps.imag!r}",
        f"c_tilde={dp.c_tilde.real!r},{dp.c_tilde.imag!r}",
        f"n={dp.n!r}",
        "values=Re(P), unnormalised",
    ]
    return grid.to_csv(comments)
