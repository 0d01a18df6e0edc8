"""Parameter structures and the mapping chain

    circuit constants -> two-mode model -> adiabatic single mode -> scaled form.

All rates share one angular-frequency unit. Config files may declare
``"units": "ordinary"`` to give rates as f = omega / 2pi; they are converted on
ingestion. The scaled quantities are ratios, so either choice gives the same
steady state.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Union

from .errors import (
    ConfigError,
    DegenerateElimination,
    NonPhysicalParameters,
    ZeroDrive,
    ZeroNonlinearity,
)

ORDINARY = "ordinary"
ANGULAR = "angular"


@dataclass(frozen=True)
class CircuitParams:
    """Storage/readout constants of the Josephson two-cavity experiment."""

    kappa_r: float
    kappa_s: float
    g2: complex
    chi_ss: float
    eps_d: complex
    delta_d: float = 0.0
    delta_p: float = 0.0

    def __post_init__(self):
        if not self.kappa_r > 0:
            raise NonPhysicalParameters(f"kappa_r must be positive, got {self.kappa_r}")
        if self.kappa_s < 0:
            raise NonPhysicalParameters(f"kappa_s must be non-negative, got {self.kappa_s}")


@dataclass(frozen=True)
class SystemParams:
    """Two-mode model: Kerr ``chi`` on mode 1, parametric coupling ``kappa``,
    drive ``E2`` on mode 2, and j-photon loss rates ``gamma{k}_{j}`` of mode k."""

    chi: float
    kappa: complex
    E2: complex
    gamma1_1: float
    gamma2_1: float
    gamma1_2: float = 0.0
    Delta1: float = 0.0
    Delta2: float = 0.0

    def __post_init__(self):
        for name in ("gamma1_1", "gamma1_2", "gamma2_1"):
            if getattr(self, name) < 0:
                raise NonPhysicalParameters(f"{name} must be non-negative")


@dataclass(frozen=True)
class EffectiveParams:
    """Single-mode constants after eliminating the damped pump mode.

    ``gamma`` is the complex single-photon loss gamma1_1 + i*Delta1, and the
    complex nonlinearity is ``g = gamma_e2 + i*chi_e``.
    """

    E: complex
    chi_e: float
    gamma_e2: float
    gamma: complex

    def __post_init__(self):
        if self.gamma_e2 < 0:
            raise NonPhysicalParameters(f"effective two-photon loss is negative: {self.gamma_e2}")
        if complex(self.gamma).real < 0:
            raise NonPhysicalParameters(f"single-photon loss is negative: Re(gamma) = {complex(self.gamma).real}")

    @classmethod
    def from_rates(cls, E: complex, gamma: complex, g: complex) -> "EffectiveParams":
        g = complex(g)
        return cls(E=complex(E), chi_e=g.imag, gamma_e2=g.real, gamma=complex(gamma))

    @property
    def g(self) -> complex:
        return complex(self.gamma_e2, self.chi_e)

    @property
    def gamma1_1(self) -> float:
        return complex(self.gamma).real

    @property
    def Delta1(self) -> float:
        return complex(self.gamma).imag

    def strong_coupling(self) -> bool:
        """Sign test for Re(c_tilde) < 0 written in the physical rates."""
        ge, chi = self.gamma_e2, self.chi_e
        return ge * (self.gamma1_1 - ge) + chi * (self.Delta1 - chi) < 0


@dataclass(frozen=True)
class DimensionlessParams:
    eps: complex
    n: float
    c: complex
    c_tilde: complex
    theta: float = 0.0

    def __post_init__(self):
        if not self.n > 0:
            raise ZeroDrive("scaled drive n = |eps| must be positive")
        if not math.isclose(abs(self.eps), self.n, rel_tol=1e-12):
            raise ConfigError(f"n={self.n} does not equal |eps|={abs(self.eps)}")
        if abs(self.c_tilde - (self.c - 1.0 / self.n)) > 1e-12 * max(1.0, abs(self.c), 1.0 / self.n):
            raise ConfigError("c_tilde must equal c - 1/n")

    @classmethod
    def from_eps_ctilde(cls, eps: complex, c_tilde: complex, theta: float = 0.0) -> "DimensionlessParams":
        eps = complex(eps)
        n = abs(eps)
        if n == 0:
            raise ZeroDrive("eps = 0")
        c_tilde = complex(c_tilde)
        return cls(eps=eps, n=n, c=c_tilde + 1.0 / n, c_tilde=c_tilde, theta=float(theta))

    @property
    def n_c_tilde(self) -> complex:
        return self.n * self.c_tilde

    @property
    def sqrt_eps(self) -> complex:
        """Principal square root; its conjugate stands in for sqrt(eps*)."""
        return cmath.sqrt(self.eps)

    def strong_coupling(self) -> bool:
        return self.c_tilde.real < 0


def map_circuit(p: CircuitParams) -> SystemParams:
    """Identify the experiment's storage mode with mode 1 and readout with mode 2."""
    return SystemParams(
        chi=-p.chi_ss,
        kappa=2 * complex(p.g2),
        E2=-1j * complex(p.eps_d),
        gamma1_1=p.kappa_s / 2,
        gamma2_1=p.kappa_r / 2,
        gamma1_2=0.0,
        Delta1=(p.delta_p + p.delta_d) / 2,
        Delta2=p.delta_d,
    )


def reduce_adiabatic(p: SystemParams) -> EffectiveParams:
    if not p.gamma2_1 > 0:
        raise DegenerateElimination("mode 2 needs single-photon loss gamma2_1 > 0 to be eliminated")
    gamma2 = complex(p.gamma2_1, p.Delta2)
    ratio = complex(p.kappa) / gamma2
    r2 = abs(ratio) ** 2
    return EffectiveParams(
        E=ratio * complex(p.E2),
        chi_e=p.chi - p.Delta2 / 2 * r2,
        gamma_e2=p.gamma1_2 + p.gamma2_1 / 2 * r2,
        gamma=complex(p.gamma1_1, p.Delta1),
    )


def nondimensionalize(p: EffectiveParams) -> DimensionlessParams:
    g = p.g
    if g == 0:
        raise ZeroNonlinearity("g = gamma_e2 + i chi_e vanishes")
    if complex(p.E) == 0:
        raise ZeroDrive("effective drive E vanishes")
    eps = complex(p.E) / g
    n = abs(eps)
    c = complex(p.gamma) / (g * n)
    return DimensionlessParams(eps=eps, n=n, c=c, c_tilde=c - 1.0 / n, theta=cmath.phase(g))


def effective_from_dimensionless(dp: DimensionlessParams, g_abs: float = 1.0) -> EffectiveParams:
    """Pick physical rates realising ``dp``; the steady state depends only on
    (eps, c), so |g| only fixes the time unit."""
    g = g_abs * cmath.exp(1j * dp.theta)
    gamma = dp.c * g * dp.n
    if gamma.real < -1e-14 * abs(g) or g.real < -1e-14 * abs(g):
        raise NonPhysicalParameters(
            f"theta={dp.theta} with c={dp.c} needs negative loss; choose another phase of g"
        )
    gamma = complex(max(gamma.real, 0.0), gamma.imag)
    return EffectiveParams(E=dp.eps * g, chi_e=g.imag, gamma_e2=max(g.real, 0.0), gamma=gamma)


def regime_label(dp: DimensionlessParams) -> str:
    if dp.strong_coupling():
        return "strong coupling"
    return "weak coupling / tunneling regime (out of scope)"


# --------------------------------------------------------------------------
# config ingestion

_RATE_FIELDS = {
    CircuitParams: ("kappa_r", "kappa_s", "g2", "chi_ss", "eps_d", "delta_d", "delta_p"),
    SystemParams: ("chi", "kappa", "E2", "gamma1_1", "gamma2_1", "gamma1_2", "Delta1", "Delta2"),
    EffectiveParams: ("E", "chi_e", "gamma_e2", "gamma", "g"),
}
_COMPLEX_FIELDS = {"g2", "eps_d", "kappa", "E2", "E", "gamma", "g", "eps", "c_tilde", "c", "n_c_tilde"}

ParamSet = Union[CircuitParams, SystemParams, EffectiveParams, DimensionlessParams]


def parse_complex(value: Any) -> complex:
    """Accept ``[re, im]``, a bare number, or a Python complex literal string."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"complex values need [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError as exc:
            raise ConfigError(f"cannot parse complex value {value!r}") from exc
    if isinstance(value, (int, float, complex)):
        return complex(value)
    raise ConfigError(f"cannot parse complex value {value!r}")


def complex_to_json(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _detect_kind(keys) -> type:
    if "kappa_r" in keys:
        return CircuitParams
    if "gamma2_1" in keys:
        return SystemParams
    if "gamma_e2" in keys or ("g" in keys and "gamma" in keys):
        return EffectiveParams
    if "eps" in keys and ("c_tilde" in keys or "n_c_tilde" in keys):
        return DimensionlessParams
    raise ConfigError(f"cannot tell which parameter stage the keys {sorted(keys)} describe")


def params_from_mapping(cfg: Mapping[str, Any]) -> ParamSet:
    units = cfg.get("units", ANGULAR)
    if units not in (ANGULAR, ORDINARY):
        raise ConfigError(f"units must be {ANGULAR!r} or {ORDINARY!r}, got {units!r}")
    scale = 2 * math.pi if units == ORDINARY else 1.0
    kind = _detect_kind(cfg.keys())

    def value(name):
        raw = cfg[name]
        v = parse_complex(raw) if name in _COMPLEX_FIELDS else float(raw)
        if name in _RATE_FIELDS.get(kind, ()):
            v = v * scale
        return v

    try:
        if kind is DimensionlessParams:
            eps = value("eps")
            if "c_tilde" in cfg:
                c_tilde = value("c_tilde")
            else:
                c_tilde = value("n_c_tilde") / abs(eps)
            return DimensionlessParams.from_eps_ctilde(eps, c_tilde, float(cfg.get("theta", 0.0)))
        if kind is EffectiveParams and "g" in cfg:
            return EffectiveParams.from_rates(value("E"), value("gamma"), value("g"))
        names = [f.name for f in fields(kind)]
        kwargs = {k: value(k) for k in names if k in cfg}
        return kind(**kwargs)
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc.args[0]!r}") from exc
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_params(path: Union[str, Path]) -> ParamSet:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return params_from_mapping(cfg)


def to_dimensionless(p: ParamSet) -> DimensionlessParams:
    if isinstance(p, CircuitParams):
        p = map_circuit(p)
    if isinstance(p, SystemParams):
        p = reduce_adiabatic(p)
    if isinstance(p, EffectiveParams):
        p = nondimensionalize(p)
    return p


def to_effective(p: ParamSet) -> EffectiveParams:
    if isinstance(p, CircuitParams):
        p = map_circuit(p)
    if isinstance(p, SystemParams):
        p = reduce_adiabatic(p)
    if isinstance(p, DimensionlessParams):
        p = effective_from_dimensionless(p)
    return p


def as_json(p) -> dict:
    out = {}
    for f in fields(p):
        v = getattr(p, f.name)
        out[f.name] = complex_to_json(v) if isinstance(v, complex) else v
    if isinstance(p, EffectiveParams):
        out["g"] = complex_to_json(p.g)
    return out
