"""Reduced relaxation channels on C-bar and their spectral/mixing analysis.

Superoperators act on column-stacked density matrices, so ``rho -> A rho B^H``
is ``kron(conj(B), A)``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .network import Bipartition
from .quantum import (DimensionMismatchError, StateVector, basis_state, trace_norm,
                      unvec, vec)

PERIPHERAL_TOL = 1e-7
UNIT_TOL = 1e-9
FIXED_POINT_SEARCH_TOL = 1e-6
FIT_FLOOR = 1e-13


class MalformedChannelError(ValueError):
    pass


class UnderflowError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Superoperator:
    matrix: np.ndarray
    d: int

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho), self.d)

    def power_apply(self, rho: np.ndarray, steps: int) -> np.ndarray:
        v = vec(rho)
        for _ in range(steps):
            v = self.matrix @ v
        return unvec(v, self.d)

    def choi(self) -> np.ndarray:
        """Choi matrix ``sum_ij |i><j| (x) S(|i><j|)``."""
        d = self.d
        # S[(a,b),(i,j)] with column-major pairs: row index = a + d*b, col = i + d*j
        t = self.matrix.reshape(d, d, d, d, order="F")  # t[a, b, i, j]
        return t.transpose(2, 0, 3, 1).reshape(d * d, d * d)

    def trace_defect(self) -> float:
        """Max deviation of ``vec(I)^H S`` from ``vec(I)^H``."""
        ident = vec(np.eye(self.d))
        return float(np.max(np.abs(ident.conj() @ self.matrix - ident.conj())))

    def is_trace_preserving(self, tol: float = 1e-10) -> bool:
        return self.trace_defect() <= tol

    def is_completely_positive(self, tol: float = 1e-9) -> bool:
        c = self.choi()
        return bool(np.linalg.eigvalsh(0.5 * (c + c.conj().T)).min() >= -tol)


def kraus_to_superoperator(kraus: Sequence[np.ndarray]) -> Superoperator:
    d = kraus[0].shape[0]
    return Superoperator(sum(np.kron(k.conj(), k) for k in kraus), d)


def _reduction_kraus(u: np.ndarray, bip: Bipartition, e_state: Optional[StateVector]) -> list:
    d_c, d_cbar = bip.d_C, bip.d_Cbar
    if u.shape != (d_c * d_cbar, d_c * d_cbar):
        raise DimensionMismatchError(
            f"unitary of shape {u.shape} does not act on C (x) C-bar = {d_c} x {d_cbar}")
    e = _e_vector(bip, e_state)
    t = u.reshape(d_c, d_cbar, d_c, d_cbar)
    # K_c = (<c| (x) I) U (|e> (x) I)
    feed = np.einsum("acbd,b->acd", t, e)
    return [feed[c] for c in range(d_c)]


def _e_vector(bip: Bipartition, e_state: Optional[StateVector]) -> np.ndarray:
    if e_state is None:
        return basis_state((bip.d_C,), (0,)).amplitudes
    if e_state.dim != bip.d_C:
        raise DimensionMismatchError(f"|e> has dimension {e_state.dim}, C has {bip.d_C}")
    return e_state.amplitudes


def build_tau(u: np.ndarray, bip: Bipartition, e_state: Optional[StateVector] = None) -> Superoperator:
    """Channel ``rho -> tr_C[U (|e><e| (x) rho) U^H]`` on C-bar.

    ``u`` must be written in split order (control factor first).
    """
    return kraus_to_superoperator(_reduction_kraus(np.asarray(u), bip, e_state))


def build_tau_prime(u: np.ndarray, bip: Bipartition, e_state: Optional[StateVector] = None) -> Superoperator:
    """Same reduction with ``U^H`` in place of ``U``."""
    return build_tau(np.asarray(u).conj().T, bip, e_state)


def reduce_directly(u: np.ndarray, bip: Bipartition, rho: np.ndarray,
                    e_state: Optional[StateVector] = None) -> np.ndarray:
    """``tr_C[U (|e><e| (x) rho) U^H]`` from the full joint operator."""
    from .quantum import partial_trace
    e = _e_vector(bip, e_state)
    joint = np.kron(np.outer(e, e.conj()), rho)
    out = u @ joint @ u.conj().T
    return partial_trace(out, (bip.d_C, bip.d_Cbar), [1])


@dataclass(frozen=True, eq=False)
class SpectralReport:
    eigenvalues: np.ndarray
    kappa: float
    fixed_points: list
    mixing: bool
    fixed_point_purity: Optional[float]

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.eigenvalues)

    @property
    def fixed_point(self) -> Optional[np.ndarray]:
        return self.fixed_points[0] if self.mixing else None

    def vacuum_overlap(self) -> Optional[float]:
        """``<E|rho*|E>`` with ``|E>`` the all-down state of C-bar."""
        if not self.mixing:
            return None
        return float(self.fixed_points[0][0, 0].real)


def _fixed_space(matrix: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis (columns) of the ``dim`` most-fixed directions of ``matrix``."""
    n = matrix.shape[0]
    _, _, vh = np.linalg.svd(matrix - np.eye(n))
    return vh[-dim:].conj().T


def _density_basis(space: np.ndarray, d: int) -> list:
    """Linearly independent density matrices spanning a Hermiticity-closed fixed space."""
    herm = []
    for k in range(space.shape[1]):
        x = unvec(space[:, k], d)
        herm.append(0.5 * (x + x.conj().T))
        herm.append(0.5j * (x - x.conj().T))
    candidates = []
    for h in herm:
        w, v = np.linalg.eigh(h)
        for part in (w.clip(min=0), (-w).clip(min=0)):
            if part.sum() > 1e-8:
                rho = (v * part) @ v.conj().T
                candidates.append(rho / np.trace(rho).real)
    chosen = []
    stack = np.zeros((d * d, 0), dtype=complex)
    for rho in candidates:
        trial = np.column_stack([stack, vec(rho)])
        if np.linalg.matrix_rank(trial, tol=1e-7) > stack.shape[1]:
            chosen.append(rho)
            stack = trial
        if len(chosen) == space.shape[1]:
            break
    return chosen


def spectral_report(s: Superoperator, peripheral_tol: float = PERIPHERAL_TOL) -> SpectralReport:
    """Spectrum, second-largest modulus and fixed points of a channel.

    The channel is declared mixing when exactly one eigenvalue has modulus
    within ``peripheral_tol`` of 1 and that eigenvalue is 1 itself.
    """
    evals, evecs = np.linalg.eig(s.matrix)
    order = np.lexsort((-evals.real, -np.abs(evals)))
    evals, evecs = evals[order], evecs[:, order]
    if np.min(np.abs(evals - 1.0)) > FIXED_POINT_SEARCH_TOL:
        raise MalformedChannelError("no eigenvalue near 1; the map is not trace preserving")
    moduli = np.abs(evals)
    peripheral = int(np.sum(moduli >= 1.0 - peripheral_tol))
    near_one = int(np.sum(np.abs(evals - 1.0) <= peripheral_tol))
    mixing = peripheral == 1 and abs(evals[0] - 1.0) <= UNIT_TOL
    kappa = float(moduli[1]) if moduli.size > 1 else 0.0
    if mixing:
        x = unvec(evecs[:, 0], s.d)
        x = x / np.trace(x)
        rho = 0.5 * (x + x.conj().T)
        fixed = [rho]
        purity = float(np.trace(rho @ rho).real)
    else:
        fixed = _density_basis(_fixed_space(s.matrix, max(near_one, 1)), s.d)
        purity = None
    return SpectralReport(evals, kappa, fixed, mixing, purity)


def distance_trajectory(s: Superoperator, rho0: np.ndarray, rho_star: np.ndarray, l_max: int) -> np.ndarray:
    """Trace-norm distances ``||tau^L(rho0) - rho*||_1`` for ``L = 0..l_max``."""
    out = np.empty(l_max + 1)
    v = vec(rho0)
    for step in range(l_max + 1):
        diff = unvec(v, s.d) - rho_star
        out[step] = trace_norm(0.5 * (diff + diff.conj().T))
        v = s.matrix @ v
    return out


def fit_decay_rate(distances: Sequence[float], window: tuple) -> float:
    """Geometric decay rate from a least-squares fit of ``log d_L`` against ``L``.

    ``window`` is an inclusive ``(first, last)`` range of ``L``.
    """
    lo, hi = window
    ls = np.arange(lo, hi + 1)
    ds = np.asarray(distances, dtype=float)[lo:hi + 1]
    if ds.size != ls.size or ls.size < 2:
        raise ValueError(f"window {window} does not fit {len(distances)} distances")
    if np.any(ds <= FIT_FLOOR):
        bad = int(ls[np.argmax(ds <= FIT_FLOOR)])
        raise UnderflowError(
            f"distance at L={bad} is below {FIT_FLOOR:g}; choose a window ending before it")
    slope, _ = np.polyfit(ls, np.log(ds), 1)
    return float(np.exp(slope))


def write_trajectory_csv(path_or_file, distances: Sequence[float], preamble: Optional[str] = None) -> None:
    """Write ``L,distance`` rows with round-trip float formatting."""
    def emit(fh):
        if preamble:
            fh.write(f"# {preamble}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["L", "distance"])
        for step, dist in enumerate(distances):
            writer.writerow([step, format_float(dist)])
    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)


def format_float(x: float) -> str:
    """Shortest round-trip representation (at most 17 significant digits)."""
    return repr(float(x))
