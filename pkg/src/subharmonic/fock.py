"""Number-basis transition matrix of the single-mode master equation and its
stationary state.

The density matrix element rho_ij is stored at flat index (N + 1) i + j
(zero-based; add one for the 1-based label). Every term of the transition
matrix is a truncated creation/annihilation operator product, so the
truncated generator stays exactly trace preserving: transitions whose source
state lies outside [0, N] are simply omitted.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    CutoffExplosion,
    CutoffTooSmall,
    DegenerateNullSpace,
    NonConvergence,
)
from .moments import MomentSet
from .params import EffectiveParams

DENSE_LIMIT = 400
DEGENERACY_TOL = 1e-10
RESIDUAL_TOL = 1e-10
MAX_CUTOFF = 256


@dataclass(frozen=True)
class TransitionMatrix:
    cutoff: int
    entries: sp.csr_matrix
    single_photon_loss: float

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** 2

    def flat(self, i: int, j: int) -> int:
        return (self.cutoff + 1) * i + j

    def trace_functional(self) -> np.ndarray:
        t = np.zeros(self.dim)
        t[[self.flat(i, i) for i in range(self.cutoff + 1)]] = 1.0
        return t

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return (self.entries @ np.asarray(rho, dtype=complex).ravel()).reshape(rho.shape)

    def norm(self) -> float:
        return float(spla.norm(self.entries, 1))


def build_transition_matrix(ep: EffectiveParams, N: int) -> TransitionMatrix:
    """Assemble d rho_ij / dt = T_ij^kl rho_kl for photon numbers 0..N."""
    if N < 2:
        raise CutoffTooSmall(f"cutoff N={N} must be at least 2")
    E = complex(ep.E)
    Ec = E.conjugate()
    gam = complex(ep.gamma)
    g = ep.g
    g2 = ep.gamma_e2
    g1 = ep.gamma1_1
    size = N + 1
    i, j = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    i = i.ravel().astype(float)
    j = j.ravel().astype(float)
    row = np.arange(size * size)

    rows, cols, vals = [], [], []

    def add(di, dj, coef):
        # source state (k, l) = (i + di, j + dj)
        k = i + di
        l = j + dj
        ok = (k >= 0) & (k <= N) & (l >= 0) & (l <= N) & (coef != 0)
        rows.append(row[ok])
        cols.append((k[ok] * size + l[ok]).astype(int))
        vals.append(np.broadcast_to(coef, i.shape)[ok])

    add(-2, 0, E / 2 * np.sqrt(i * (i - 1)))
    add(0, 2, -E / 2 * np.sqrt((j + 1) * (j + 2)))
    add(0, -2, Ec / 2 * np.sqrt(j * (j - 1)))
    add(2, 0, -Ec / 2 * np.sqrt((i + 1) * (i + 2)))
    add(0, 0, -(gam * i + gam.conjugate() * j + g / 2 * i * (i - 1) + g.conjugate() / 2 * j * (j - 1)))
    add(2, 2, g2 * np.sqrt((i + 1) * (i + 2) * (j + 1) * (j + 2)) + 0j)
    add(1, 1, 2 * g1 * np.sqrt((i + 1) * (j + 1)) + 0j)

    m = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size * size, size * size),
        dtype=complex,
    )
    m.eliminate_zeros()
    return TransitionMatrix(N, m, g1)


def liouvillian_spectrum(T: TransitionMatrix) -> np.ndarray:
    """All eigenvalues, ordered by decreasing real part (dense; small N only)."""
    w = sla.eigvals(T.entries.toarray())
    return w[np.lexsort((-w.imag, -w.real))]


@dataclass(frozen=True)
class DensityMatrix:
    cutoff: int
    elements: np.ndarray
    residual: float = 0.0
    asymmetry: float = 0.0
    null_space_dim: int = 1

    def __post_init__(self):
        if self.elements.shape != (self.cutoff + 1, self.cutoff + 1):
            raise ValueError("density matrix shape does not match its cutoff")

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.elements))

    @property
    def tail(self) -> float:
        return float(self.populations[-1])

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.elements)[0])

    def purity(self) -> float:
        return float(np.real(np.vdot(self.elements.conj().T, self.elements)))

    def check(self, tail_tol: float = 1e-8) -> None:
        """Raise AssertionError if any density-matrix invariant fails."""
        rho = self.elements
        assert np.abs(rho - rho.conj().T).max() <= 1e-10, "not Hermitian"
        assert abs(np.trace(rho) - 1) <= 1e-12, "trace differs from 1"
        assert self.min_eigenvalue() >= -1e-8, "not positive semidefinite"
        assert self.tail < tail_tol, "cutoff tail population too large"

    def to_json(self) -> str:
        return json.dumps(
            {"cutoff": self.cutoff, "re": self.elements.real.tolist(), "im": self.elements.imag.tolist()}
        )

    @classmethod
    def from_json(cls, text: str) -> "DensityMatrix":
        d = json.loads(text)
        return cls(int(d["cutoff"]), np.asarray(d["re"]) + 1j * np.asarray(d["im"]))

    def to_csv(self) -> tuple:
        """(real part, imaginary part) as two CSV strings."""

        def dump(a):
            return "".join(",".join(repr(float(x)) for x in r) + "\n" for r in a)

        return dump(self.elements.real), dump(self.elements.imag)


def _null_vector(A: sp.csr_matrix, trace_row: np.ndarray, tol: float):
    """Null vector of A plus the count of eigenvalues within ``tol * ||A||_1`` of zero."""
    dim = A.shape[0]
    scale = float(spla.norm(A, 1)) or 1.0
    thresh = tol * scale
    if dim <= DENSE_LIMIT:
        w, v = sla.eig(A.toarray())
        order = np.argsort(np.abs(w))
        count = int(np.sum(np.abs(w) < thresh))
        return v[:, order[0]], count

    # bordered solve: the trace condition replaces the first balance equation
    B = A.tolil(copy=True)
    B[0, :] = trace_row
    rhs = np.zeros(dim, dtype=complex)
    rhs[0] = 1.0
    x = spla.splu(B.tocsc()).solve(rhs)
    # shift slightly into the right half plane, where a dissipative generator has no eigenvalues
    k = min(6, dim - 2)
    w = spla.eigs(A.tocsc(), k=k, sigma=1e-6 * scale, which="LM", return_eigenvectors=False)
    count = int(np.sum(np.abs(w) < thresh))
    return x, max(count, 1)


def _finish(T_entries, vec, size, count) -> DensityMatrix:
    rho = vec.reshape(size, size)
    tr = np.trace(rho)
    rho = rho / tr
    asym = float(np.abs(rho - rho.conj().T).max())
    rho = (rho + rho.conj().T) / 2
    rho = rho / np.trace(rho).real
    resid = float(np.linalg.norm(T_entries @ rho.ravel()) / np.linalg.norm(rho))
    return DensityMatrix(size - 1, rho, resid, asym, count)


def steady_state(T: TransitionMatrix, degeneracy_tol: float = DEGENERACY_TOL) -> DensityMatrix:
    """Zero-eigenvalue eigenvector of T, Hermitised and trace normalised."""
    vec, count = _null_vector(T.entries, T.trace_functional(), degeneracy_tol)
    if count > 1:
        raise DegenerateNullSpace(
            count,
            f"null space has dimension {count}; without single-photon loss use steady_state_in_parity_sector",
        )
    rho = _finish(T.entries, vec, T.cutoff + 1, count)
    if not rho.residual < RESIDUAL_TOL:
        raise NonConvergence(f"steady-state residual {rho.residual:.3e} exceeds {RESIDUAL_TOL:g}")
    return rho


def sector_indices(N: int, sector: str) -> np.ndarray:
    if sector not in ("even", "odd"):
        raise ValueError("sector must be 'even' or 'odd'")
    p = 0 if sector == "even" else 1
    levels = np.arange(p, N + 1, 2)
    return ((N + 1) * levels[:, None] + levels[None, :]).ravel()


def steady_state_in_parity_sector(
    T: TransitionMatrix, sector: str, degeneracy_tol: float = DEGENERACY_TOL
) -> DensityMatrix:
    """Stationary state supported on number states of one parity.

    Only meaningful without single-photon loss, when photon-number parity is
    conserved and the full null space is degenerate.
    """
    if T.single_photon_loss != 0:
        raise ValueError("parity sectors are invariant only when single-photon loss is zero")
    idx = sector_indices(T.cutoff, sector)
    sub = T.entries[idx][:, idx].tocsr()
    size = len(np.unique(idx // (T.cutoff + 1)))
    trace_row = np.zeros(len(idx))
    trace_row[[a * size + a for a in range(size)]] = 1.0
    vec, count = _null_vector(sub, trace_row, degeneracy_tol)
    if count > 1:
        raise DegenerateNullSpace(count)
    full = np.zeros(T.dim, dtype=complex)
    full[idx] = vec
    # normalise on the sector before embedding
    rho = _finish(T.entries, full, T.cutoff + 1, count)
    if not rho.residual < RESIDUAL_TOL:
        raise NonConvergence(f"sector steady-state residual {rho.residual:.3e} exceeds {RESIDUAL_TOL:g}")
    return rho


def observables_fock(rho: DensityMatrix) -> MomentSet:
    p = rho.populations
    i = np.arange(len(p))
    n1 = float(np.dot(i, p))
    n2 = float(np.dot(i * (i - 1), p))
    parity = float(np.dot((-1.0) ** i, p))
    return MomentSet.build(n1, n2, parity, rho.purity(), "fock")


@dataclass(frozen=True)
class CutoffResult:
    rho: DensityMatrix
    observables: MomentSet
    history: tuple


def _rel_change(new, old) -> float:
    if new == old:
        return 0.0
    return abs(new - old) / max(abs(new), 1e-300)


def adaptive_cutoff(
    ep: EffectiveParams,
    start_N: int = 8,
    tol: float = 1e-10,
    max_cutoff: int = MAX_CUTOFF,
    sector: Optional[str] = None,
) -> CutoffResult:
    """Grow N by factors of 1.5 until <a^dag a>, <a^dag^2 a^2> and g2 settle
    to ``tol`` (relative) between successive cutoffs and rho_NN < tol."""
    if start_N < 2:
        raise CutoffTooSmall("start_N must be at least 2")
    N = start_N
    prev = None
    history = []
    while True:
        if N > max_cutoff:
            raise CutoffExplosion(f"cutoff would exceed {max_cutoff} before converging to {tol:g}")
        T = build_transition_matrix(ep, N)
        rho = steady_state(T) if sector is None else steady_state_in_parity_sector(T, sector)
        obs = observables_fock(rho)
        history.append((N, obs.n_photon.real, rho.tail))
        if prev is not None:
            changes = [
                _rel_change(obs.n_photon, prev.n_photon),
                _rel_change(obs.n2, prev.n2),
            ]
            if obs.g2 is not None and prev.g2 is not None:
                changes.append(_rel_change(obs.g2, prev.g2))
            if max(changes) < tol and abs(rho.tail) < tol:
                return CutoffResult(rho, obs, tuple(history))
        prev = obs
        N = int(math.ceil(1.5 * N))
