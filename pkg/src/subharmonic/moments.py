from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import DivisionByZero

TAGS = ("exact", "fock", "delta", "cat", "undamped")

# below this <a^dag a> the coherence g2 is reported as not computable
G2_FLOOR = 1e-14


def second_order_coherence(n1: complex, n2: complex, floor: float = G2_FLOOR) -> complex:
    """g2(0) = <a^dag^2 a^2> / <a^dag a>^2."""
    if abs(n1) < floor:
        raise DivisionByZero(f"<a^dag a> = {n1!r} is too small to normalise g2")
    return complex(n2) / complex(n1) ** 2


@dataclass(frozen=True)
class MomentSet:
    """Low-order photon statistics of one steady state.

    ``None`` marks a quantity the producing route cannot supply (purity of the
    exact series, g2 of the vacuum).
    """

    n_photon: complex
    n2: complex
    g2: Optional[complex]
    parity: Optional[float]
    purity: Optional[float]
    tag: str

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown provenance tag {self.tag!r}")

    @classmethod
    def build(cls, n1, n2, parity, purity, tag) -> "MomentSet":
        try:
            g2 = second_order_coherence(n1, n2)
        except DivisionByZero:
            g2 = None
        return cls(complex(n1), complex(n2), g2, parity, purity, tag)

    def as_dict(self) -> dict:
        def cx(z):
            return None if z is None else [complex(z).real, complex(z).imag]

        return {
            "tag": self.tag,
            "n_photon": cx(self.n_photon),
            "n2": cx(self.n2),
            "g2": cx(self.g2),
            "parity": self.parity,
            "purity": self.purity,
        }
