"""Steady states of a driven, dissipative Kerr-parametric oscillator by three
independent routes: closed-form moments, a Fock-basis null-space solve, and
coherent-state approximants."""

__version__ = "0.1.0"
