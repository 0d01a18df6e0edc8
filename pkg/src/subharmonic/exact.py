"""Exact steady-state moments from the complex-P distribution.

Expanding exp(2 n beta+ beta) and integrating each power over the closed
contour around beta = +-1 gives

    <a^dag^k a^k2> = N' sum_m (2n)^m / m! (-sqrt eps)^k2 (-sqrt eps*)^k
                       F(m + k2) conj(F(m + k)),
    1 / N'         = sum_m (2n)^m / m! |F(m)|^2,

with F(M) = 2F1(-M, n c~ + 1; 2 n c~ + 2; 2). Conjugating b and c conjugates
the terminating polynomial, so the second factor is taken as conj(F).
"""
from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import SeriesDivergence, SingularGridPoint
from .hyp2f1 import hyp2f1_terminating
from .moments import MomentSet
from .params import DimensionlessParams

DEFAULT_TOL = 1e-12
CONSECUTIVE_SMALL = 3
# relative floor for sums that vanish by symmetry (odd k + k2)
ZERO_FLOOR = 1e-16


@dataclass(frozen=True)
class ExactMomentEngine:
    dp: DimensionlessParams
    tol_rel: float = DEFAULT_TOL
    m_max: Optional[int] = None
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 < self.tol_rel < 1:
            raise ValueError("tol_rel must lie in (0, 1)")
        if self.m_max is None:
            object.__setattr__(self, "m_max", int(math.ceil(40 * max(1.0, self.dp.n))))
        if self.m_max < 1:
            raise ValueError("m_max must be at least 1")

    @property
    def b(self) -> complex:
        return self.dp.n * self.dp.c_tilde + 1

    @property
    def c(self) -> complex:
        return 2 * self.dp.n * self.dp.c_tilde + 2

    def hyp(self, M: int) -> complex:
        key = ("F", M)
        if key not in self._cache:
            self._cache[key] = hyp2f1_terminating(M, self.b, self.c).value
        return self._cache[key]

    def _log_weight(self, m: int) -> float:
        # (2n)^m / m! in log form; the two factors overflow separately long before their ratio does
        return m * math.log(2 * self.dp.n) - math.lgamma(m + 1)

    def _term(self, m: int, k: int, k2: int) -> complex:
        f1 = self.hyp(m + k2)
        f2 = self.hyp(m + k).conjugate()
        if f1 == 0 or f2 == 0:
            return 0j
        return cmath.exp(self._log_weight(m) + cmath.log(f1) + cmath.log(f2))

    def series(self, k: int, k2: int) -> Tuple[complex, int]:
        """Truncated m-sum for indices (k, k2), without N' or the sqrt(eps) prefactor.

        Returns (sum, number of terms used). Stops once three consecutive
        terms each fall below ``tol_rel`` times the running sum.
        """
        key = ("S", k, k2)
        if key in self._cache:
            return self._cache[key]
        floor = 0.0
        if (k, k2) != (0, 0):
            floor = ZERO_FLOOR * abs(self.series(0, 0)[0])
        total = 0j
        small = 0
        for m in range(self.m_max + 1):
            t = self._term(m, k, k2)
            total += t
            if abs(t) < self.tol_rel * max(abs(total), floor):
                small += 1
                if small >= CONSECUTIVE_SMALL:
                    self._cache[key] = (total, m + 1)
                    return self._cache[key]
            else:
                small = 0
        raise SeriesDivergence(
            f"moment series ({k},{k2}) not converged to {self.tol_rel:g} within m_max={self.m_max}"
        )

    def normalization(self) -> complex:
        """N', the inverse of the m-sum of |F(m)|^2 (2n)^m / m!."""
        return 1.0 / self.series(0, 0)[0]

    def moment(self, k: int, k2: int) -> complex:
        """<a^dag^k a^k2> of the exact steady state."""
        if k < 0 or k2 < 0:
            raise ValueError("moment orders must be non-negative")
        if k == 0 and k2 == 0:
            return 1.0 + 0.0j
        s = self.dp.sqrt_eps
        prefactor = (-s) ** k2 * (-s.conjugate()) ** k
        return self.normalization() * prefactor * self.series(k, k2)[0]

    def parity(self) -> float:
        # exp(-2n beta+ beta) cancels the exponential of the distribution, leaving only the m = 0 term
        return self.normalization().real

    def observables(self) -> MomentSet:
        return MomentSet.build(self.moment(1, 1), self.moment(2, 2), self.parity(), None, "exact")


def exact_observables(dp: DimensionlessParams, tol_rel: float = DEFAULT_TOL) -> MomentSet:
    return ExactMomentEngine(dp, tol_rel).observables()


# --------------------------------------------------------------------------
# planar-slice distribution

AxisSpec = Union[Sequence[float], Tuple[float, float, int]]
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class DistributionGrid:
    """Unnormalised P on real beta, beta+; ``values[i, j]`` sits at
    (beta+ = betap_re_axis[i], beta = beta_re_axis[j])."""

    beta_re_axis: np.ndarray
    betap_re_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (len(self.betap_re_axis), len(self.beta_re_axis)):
            raise ValueError("grid values do not match the axes")

    def to_csv(self, comments: Sequence[str] = ()) -> str:
        buf = io.StringIO()
        for line in comments:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["betap\\beta"] + [repr(float(x)) for x in self.beta_re_axis])
        for bp, row in zip(self.betap_re_axis, self.values.real):
            w.writerow([repr(float(bp))] + [repr(float(v)) for v in row])
        return buf.getvalue()


def _axis(spec: AxisSpec) -> np.ndarray:
    if isinstance(spec, tuple) and len(spec) == 3 and isinstance(spec[2], (int, np.integer)):
        return np.linspace(float(spec[0]), float(spec[1]), int(spec[2]))
    return np.asarray(spec, dtype=float)


def distribution_grid(
    dp: DimensionlessParams, beta_axis: AxisSpec, betap_axis: Optional[AxisSpec] = None
) -> DistributionGrid:
    """[(1 - beta^2)^c~ (1 - beta+^2)^c~* exp(2 beta+ beta)]^n on a real grid.

    Principal branches throughout. The planar slice is a picture of the
    distribution, not a normalisable measure, so no normalisation is applied.
    """
    beta = _axis(beta_axis)
    betap = beta if betap_axis is None else _axis(betap_axis)
    for name, axis in (("beta", beta), ("beta+", betap)):
        bad = np.abs(1.0 - axis**2) < SINGULAR_TOL
        if bad.any():
            raise SingularGridPoint(name, float(axis[bad][0]))
    ct = dp.c_tilde
    fb = np.power((1.0 - beta**2).astype(complex), ct)
    fbp = np.power((1.0 - betap**2).astype(complex), ct.conjugate())
    inner = fbp[:, None] * fb[None, :] * np.exp(2.0 * np.outer(betap, beta))
    return DistributionGrid(beta, betap, np.power(inner, dp.n))
