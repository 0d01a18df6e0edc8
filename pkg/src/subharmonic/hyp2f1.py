"""Terminating Gauss series 2F1(-M, b; c; 2).

At z = 2 the terms grow roughly like 3**M while the sum can stay O(1) (for
c = 2b it is exactly zero at odd M), so double precision loses about
log10(max_term / |value|) digits. The float pass records that ratio; when it
exceeds ``CANCELLATION_LIMIT`` the same recursion is rerun in mpmath with
enough guard digits to return a double-precision-accurate result.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from .errors import PoleProximity

TAU_POLE = 1e-9
CANCELLATION_LIMIT = 1e2
GUARD_DIGITS = 20
# extra digits spent trying to resolve a value that may be exactly zero
ZERO_SEARCH_DIGITS = 40


@dataclass(frozen=True)
class HypResult:
    value: complex
    terms_used: int
    max_term_magnitude: float
    working_digits: int = 15

    @property
    def cancellation_digits(self) -> float:
        """Decimal digits lost to cancellation in a plain double evaluation."""
        if self.value == 0:
            return math.inf
        return max(0.0, math.log10(self.max_term_magnitude / abs(self.value)))


def check_poles(M: int, c: complex, tau: float = TAU_POLE) -> None:
    scale = tau * (abs(c) + 1.0)
    for j in range(M):
        d = abs(c + j)
        if d < scale:
            raise PoleProximity(j, d)


def _series_float(M, b, c):
    t = 1.0 + 0.0j
    s = t
    big = 1.0
    for j in range(M):
        t = t * ((-M + j) * (b + j) * 2) / ((c + j) * (j + 1))
        s += t
        big = max(big, abs(t))
    return s, big


def _series_mp(M, b, c, dps):
    with mpmath.workdps(dps):
        b = mpmath.mpc(b)
        c = mpmath.mpc(c)
        t = mpmath.mpc(1)
        s = mpmath.mpc(1)
        big = mpmath.mpf(1)
        for j in range(M):
            t = t * ((-M + j) * (b + j) * 2) / ((c + j) * (j + 1))
            s += t
            big = max(big, abs(t))
        return complex(s), float(big), float(abs(s))


def hyp2f1_terminating(M: int, b: complex, c: complex, tau_pole: float = TAU_POLE) -> HypResult:
    """Sum of the M+1 nonzero terms of 2F1(-M, b; c; 2).

    The term ratio t_{j+1}/t_j = (j - M)(b + j) * 2 / ((c + j)(j + 1)) is
    applied iteratively. Raises PoleProximity when c sits within
    ``tau_pole * (|c| + 1)`` of 0, -1, ..., -(M - 1).
    """
    M = int(M)
    if M < 0:
        raise ValueError("M must be a non-negative integer")
    b = complex(b)
    c = complex(c)
    check_poles(M, c, tau_pole)
    if M == 0:
        return HypResult(1.0 + 0.0j, 1, 1.0)

    value, big = _series_float(M, b, c)
    if math.isfinite(big) and big <= CANCELLATION_LIMIT * abs(value):
        return HypResult(complex(value), M + 1, big)

    if math.isfinite(big) and big > 0:
        dps = GUARD_DIGITS + 15 + math.ceil(math.log10(big))
    else:
        dps = 60
    dps_cap = None
    while True:
        value, big, mag = _series_mp(M, b, c, dps)
        if dps_cap is None:
            dps_cap = GUARD_DIGITS + 15 + math.ceil(math.log10(big)) + ZERO_SEARCH_DIGITS
        lost = math.log10(big / mag) if mag > 0 else math.inf
        if lost + GUARD_DIGITS <= dps or dps >= dps_cap:
            return HypResult(value, M + 1, big, dps)
        dps = min(dps_cap, math.ceil(lost) + GUARD_DIGITS + 15) if math.isfinite(lost) else dps_cap
