"""Closed-form approximants built from the two coherent states |+-sqrt(eps)>.

* delta limit: the c~ -> -1/n limit of the exact state, a mixture of an even
  cat and an incoherent pair of coherent states;
* pure even cat;
* the undamped (no single-photon loss) family with four free coefficients.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit, gammaln

from .errors import NonPhysicalCoefficients
from .moments import MomentSet
from .params import DimensionlessParams


class ApproximantKind(enum.Enum):
    DELTA_LIMIT = "delta_limit"
    PURE_CAT = "pure_cat"
    UNDAMPED = "undamped"


def _branch_sums(dp: DimensionlessParams, k: int, k2: int):
    s = dp.sqrt_eps
    sc = s.conjugate()
    same = s**k2 * sc**k + (-s) ** k2 * (-sc) ** k
    cross = (-s) ** k2 * sc**k + s**k2 * (-sc) ** k
    return same, cross


def moment_delta(dp: DimensionlessParams, k: int, k2: int) -> complex:
    same, cross = _branch_sums(dp, k, k2)
    # 1 / (2 (1 + e^{-4n})) and 1 / (2 (1 + e^{4n}))
    return 0.5 * expit(4 * dp.n) * same + 0.5 * expit(-4 * dp.n) * cross


def moment_cat(dp: DimensionlessParams, k: int, k2: int) -> complex:
    same, cross = _branch_sums(dp, k, k2)
    return 0.5 * expit(2 * dp.n) * same + 0.5 * expit(-2 * dp.n) * cross


def g2_delta(n: float) -> float:
    return 1.0 / math.tanh(2 * n) ** 2


def g2_cat(n: float) -> float:
    return 1.0 / math.tanh(n) ** 2


def purity_delta(n: float) -> float:
    """Tr rho_lim^2 = (e^{8n} + 6 e^{4n} + 1) / (2 (e^{4n} + 1)^2), written as
    1/2 + sech(2n)^2 / 2 so it stays finite for large n."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return 0.5 + 0.5 * parity_delta(n) ** 2


def purity_delta_slope(n: float) -> float:
    """d(purity)/dn = -8 e^{4n} (e^{4n} - 1) / (e^{4n} + 1)^3."""
    y = math.exp(-4 * n)
    return -8 * y * (1 - y) / (1 + y) ** 3


def cat_weight(n: float) -> float:
    """Weight p = (1 + e^{2n}) / (1 + e^{4n}) of the pure even cat inside rho_lim."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return (math.exp(-4 * n) + math.exp(-2 * n)) / (math.exp(-4 * n) + 1)


def parity_delta(n: float) -> float:
    """sech(2n)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    y = math.exp(-2 * n)
    return 2 * y / (1 + y * y)


@dataclass(frozen=True)
class UndampedCoefficients:
    """rho = c_pp |a><a| + c_mm |-a><-a| + c_pm |a><-a| + c_mp |-a><a|, a = sqrt(eps)."""

    c_pp: complex
    c_mm: complex
    c_pm: complex = 0j
    c_mp: complex = 0j

    @classmethod
    def coherent(cls) -> "UndampedCoefficients":
        return cls(1, 0)

    @classmethod
    def mixture(cls) -> "UndampedCoefficients":
        return cls(0.5, 0.5)

    @classmethod
    def even_cat(cls, n: float) -> "UndampedCoefficients":
        """Even cat, reached from the vacuum when parity is conserved."""
        c = 0.5 * expit(2 * n)
        return cls(c, c, c, c)

    @classmethod
    def odd_cat(cls, n: float) -> "UndampedCoefficients":
        c = 0.5 / (1 - math.exp(-2 * n))
        return cls(c, c, -c, -c)

    @classmethod
    def delta_limit(cls, n: float) -> "UndampedCoefficients":
        """p |cat><cat| + (1 - p) (|a><a| + |-a><-a|) / 2."""
        p = cat_weight(n)
        c = 0.5 * expit(2 * n) * p
        return cls(c + (1 - p) / 2, c + (1 - p) / 2, c, c)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.c_pp, self.c_pm], [self.c_mp, self.c_mm]], dtype=complex)

    @staticmethod
    def overlap(n: float) -> np.ndarray:
        o = math.exp(-2 * n)
        return np.array([[1.0, o], [o, 1.0]])

    def _rho_eigs(self, n: float) -> np.ndarray:
        w, v = np.linalg.eigh(self.overlap(n))
        root = (v * np.sqrt(np.clip(w, 0, None))) @ v.T
        m = root @ self.matrix @ root
        return np.linalg.eigvalsh((m + m.conj().T) / 2)

    def trace(self, n: float) -> complex:
        return complex(np.trace(self.matrix @ self.overlap(n)))

    def validate(self, n: float, tol: float = 1e-10) -> None:
        C = self.matrix
        if np.abs(C - C.conj().T).max() > tol:
            raise NonPhysicalCoefficients("coefficients do not give a Hermitian operator")
        if abs(self.trace(n) - 1) > tol:
            raise NonPhysicalCoefficients(f"trace is {self.trace(n)}, not 1")
        if self._rho_eigs(n).min() < -tol:
            raise NonPhysicalCoefficients("density matrix has a negative eigenvalue")

    def purity(self, n: float) -> float:
        m = self.matrix @ self.overlap(n)
        return float(np.real(np.trace(m @ m)))

    def parity(self, n: float) -> float:
        o = math.exp(-2 * n)
        return float(np.real((self.c_pp + self.c_mm) * o + self.c_pm + self.c_mp))


def moment_undamped(coeffs: UndampedCoefficients, dp: DimensionlessParams, k: int, k2: int) -> complex:
    coeffs.validate(dp.n)
    s = dp.sqrt_eps
    sc = s.conjugate()
    o = math.exp(-2 * dp.n)
    return (
        coeffs.c_pp * s**k2 * sc**k
        + coeffs.c_mm * (-s) ** k2 * (-sc) ** k
        + coeffs.c_pm * o * s**k2 * (-sc) ** k
        + coeffs.c_mp * o * (-s) ** k2 * sc**k
    )


def approx_observables(
    kind: ApproximantKind, dp: DimensionlessParams, coeffs: Optional[UndampedCoefficients] = None
) -> MomentSet:
    kind = ApproximantKind(kind)
    if kind is ApproximantKind.DELTA_LIMIT:
        return MomentSet.build(
            moment_delta(dp, 1, 1), moment_delta(dp, 2, 2), parity_delta(dp.n), purity_delta(dp.n), "delta"
        )
    if kind is ApproximantKind.PURE_CAT:
        cat = UndampedCoefficients.even_cat(dp.n)
        return MomentSet.build(
            moment_cat(dp, 1, 1), moment_cat(dp, 2, 2), cat.parity(dp.n), cat.purity(dp.n), "cat"
        )
    if coeffs is None:
        coeffs = UndampedCoefficients.even_cat(dp.n)
    return MomentSet.build(
        moment_undamped(coeffs, dp, 1, 1),
        moment_undamped(coeffs, dp, 2, 2),
        coeffs.parity(dp.n),
        coeffs.purity(dp.n),
        "undamped",
    )


# --------------------------------------------------------------------------
# explicit number-basis construction, used to cross-check the formulas above


def coherent_amplitudes(alpha: complex, N: int) -> np.ndarray:
    """<k|alpha> for k = 0..N, evaluated through logarithms so large |alpha| does not underflow."""
    k = np.arange(N + 1)
    if alpha == 0:
        out = np.zeros(N + 1, dtype=complex)
        out[0] = 1.0
        return out
    r = abs(alpha)
    logmag = -0.5 * r * r + k * math.log(r) - 0.5 * gammaln(k + 1)
    return np.exp(logmag) * np.exp(1j * k * np.angle(alpha))


def undamped_density_matrix(coeffs: UndampedCoefficients, dp: DimensionlessParams, N: int) -> np.ndarray:
    plus = coherent_amplitudes(dp.sqrt_eps, N)
    minus = coherent_amplitudes(-dp.sqrt_eps, N)
    kets = (plus, minus)
    C = coeffs.matrix
    rho = np.zeros((N + 1, N + 1), dtype=complex)
    for a in range(2):
        for b in range(2):
            rho += C[a, b] * np.outer(kets[a], kets[b].conj())
    return rho
