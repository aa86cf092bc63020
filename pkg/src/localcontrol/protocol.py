"""Download, reverse-download and upload protocols with their coding transformation.

The joint register is an array with axes ``(C, Cbar, M1, ..., Mk)``. Memory
sectors are appended lazily, each initialized to ``|e>``, just before the swap
that first touches them.
"""
from __future__ import annotations

import csv
import functools
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .channel import format_float
from .network import Bipartition, SpinNetwork, build_hamiltonian, ordered_bipartition
from .quantum import (EMPTY_WEIGHT, DegenerateCodingError, DimensionMismatchError, DomainError,
                      ResourceError, StateVector, polar_unitary, project_component, propagator)

AMPLITUDE_BUDGET = 2 ** 22


class Direction(str, Enum):
    DOWNLOAD = "download"
    REVERSE_DOWNLOAD = "reverse_download"
    UPLOAD = "upload"


@dataclass(frozen=True)
class ProtocolConfig:
    t: float
    L: int
    terminal_swap: bool = True
    direction: Direction = Direction.DOWNLOAD
    amplitude_budget: int = AMPLITUDE_BUDGET

    def __post_init__(self):
        if int(self.L) < 1:
            raise ValueError("L must be at least 1")
        if not np.isfinite(self.t):
            raise ValueError("t must be finite")
        object.__setattr__(self, "L", int(self.L))
        object.__setattr__(self, "t", float(self.t))

    @property
    def n_memory(self) -> int:
        return self.L + 1 if self.terminal_swap else self.L


@functools.lru_cache(maxsize=32)
def _system(net: SpinNetwork, t: float):
    bip = ordered_bipartition(net)
    u = propagator(bip.operator_to_split(build_hamiltonian(net)), t)
    u.setflags(write=False)
    return bip, u


def split_unitary(net: SpinNetwork, config: ProtocolConfig):
    """Bipartition and one-step propagator in split order for ``config``.

    Upload runs use the time-reversed network, i.e. ``U^H``.
    """
    if config.direction is Direction.UPLOAD:
        net = net.negated()
    return _system(net, config.t)


def max_feasible_steps(bip: Bipartition, terminal_swap: bool = True, budget: int = AMPLITUDE_BUDGET) -> int:
    base = bip.d_C * bip.d_Cbar
    k = 0
    while base * bip.d_C ** (k + 1) <= budget:
        k += 1
    return k - 1 if terminal_swap else k


def _check_budget(bip: Bipartition, config: ProtocolConfig) -> None:
    size = bip.d_C * bip.d_Cbar * bip.d_C ** config.n_memory
    if size > config.amplitude_budget:
        best = max_feasible_steps(bip, config.terminal_swap, config.amplitude_budget)
        raise ResourceError(
            f"L={config.L} needs {size} amplitudes (budget {config.amplitude_budget}); "
            f"largest feasible L is {best}")


def _labels(k: int) -> tuple:
    return ("C", "Cbar") + tuple(f"M{m}" for m in range(1, k + 1))


def _apply_cc(u: np.ndarray, t: np.ndarray) -> np.ndarray:
    shape = t.shape
    return (u @ t.reshape(shape[0] * shape[1], -1)).reshape(shape)


def _e(bip: Bipartition) -> np.ndarray:
    e = np.zeros(bip.d_C, dtype=complex)
    e[0] = 1.0
    return e


def _forward(u: np.ndarray, bip: Bipartition, psi: np.ndarray, config: ProtocolConfig) -> np.ndarray:
    e = _e(bip)
    t = np.asarray(psi, dtype=complex).reshape(bip.d_C, bip.d_Cbar)
    for _ in range(config.L):
        t = np.multiply.outer(t, e)
        t = np.swapaxes(t, 0, t.ndim - 1)
        t = _apply_cc(u, t)
    if config.terminal_swap:
        t = np.multiply.outer(t, e)
        t = np.swapaxes(t, 0, t.ndim - 1)
    return np.ascontiguousarray(t)


def _backward(u: np.ndarray, t: np.ndarray, config: ProtocolConfig) -> np.ndarray:
    """Exact adjoint of ``_forward`` on a register that already holds every memory sector."""
    if config.terminal_swap:
        t = np.swapaxes(t, 0, config.L + 2)
    uh = u.conj().T
    for sector in range(config.L, 0, -1):
        t = _apply_cc(uh, t)
        t = np.swapaxes(t, 0, sector + 1)
    return np.ascontiguousarray(t)


def _as_amplitudes(psi, d: int) -> np.ndarray:
    amps = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex).reshape(-1)
    if amps.size != d:
        raise DimensionMismatchError(f"input state has dimension {amps.size}, C (x) C-bar has {d}")
    return amps


@dataclass(frozen=True, eq=False)
class ProtocolRun:
    final_state: StateVector
    eta: float
    phi_M: Optional[StateVector]
    delta: Optional[StateVector]
    c_leakage: float

    @property
    def delta_norm_sq(self) -> float:
        return 1.0 - self.eta

    def memory_rho(self, max_dim: int = 4096) -> np.ndarray:
        """Memory density matrix; only for memories small enough to store densely."""
        t = self.final_state.amplitudes.reshape(
            self.final_state.factor_dims[0] * self.final_state.factor_dims[1], -1)
        if t.shape[1] > max_dim:
            raise ResourceError(f"memory dimension {t.shape[1]} exceeds {max_dim}")
        return t.T @ t.conj()


def apply_download(net: SpinNetwork, config: ProtocolConfig, psi) -> StateVector:
    """The protocol unitary on ``psi (x) |e>_M`` in split order."""
    bip, u = split_unitary(net, config)
    _check_budget(bip, config)
    t = _forward(u, bip, _as_amplitudes(psi, bip.d_C * bip.d_Cbar), config)
    return StateVector(t.reshape(-1), t.shape, _labels(config.n_memory))


def apply_download_adjoint(net: SpinNetwork, config: ProtocolConfig, state: StateVector) -> StateVector:
    bip, u = split_unitary(net, config)
    expected = (bip.d_C, bip.d_Cbar) + (bip.d_C,) * config.n_memory
    if state.factor_dims != expected:
        raise DimensionMismatchError(f"register dims {state.factor_dims}, expected {expected}")
    t = _backward(u, state.tensor(), config)
    return StateVector(t.reshape(-1), expected, state.labels)


def run_download(net: SpinNetwork, config: ProtocolConfig, psi) -> ProtocolRun:
    """Simulate the download protocol and split the output as
    ``|e>_C [sqrt(eta) |E>|phi>_M + sqrt(1 - eta) |Delta>]``."""
    bip, _ = split_unitary(net, config)
    final = apply_download(net, config, psi)
    t = final.tensor()
    c_leakage = float(np.sum(np.abs(t[1:]) ** 2))
    e = StateVector(_e(bip), (bip.d_C,))
    big_e = np.zeros(bip.d_Cbar, dtype=complex)
    big_e[0] = 1.0
    vacuum = StateVector(np.kron(e.amplitudes, big_e), (bip.d_C, bip.d_Cbar))
    proj = project_component(final, [0, 1], vacuum)
    eta = min(proj.weight, 1.0)
    # component with C in |e>, living on (Cbar, M)
    on_e = t[0].copy()
    if proj.residual is not None:
        on_e[0] -= np.sqrt(proj.weight) * proj.residual.tensor()
    rest = float(np.vdot(on_e, on_e).real)
    delta = None
    if rest > EMPTY_WEIGHT:
        delta = StateVector(on_e.reshape(-1) / np.sqrt(rest), on_e.shape, final.labels[1:])
    elif c_leakage <= EMPTY_WEIGHT:
        eta = 1.0
    return ProtocolRun(final, eta, proj.residual, delta, c_leakage)


@dataclass(frozen=True, eq=False)
class CodingMap:
    phi_matrix: np.ndarray
    basis: np.ndarray
    gram: np.ndarray
    eta_list: np.ndarray
    V: np.ndarray
    dv_norm_sq: float
    runs: tuple = field(default=(), repr=False)

    @property
    def d(self) -> int:
        return self.basis.shape[1]

    @property
    def eta0(self) -> float:
        return float(np.min(self.eta_list))

    @property
    def gram_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.gram)

    @property
    def dv_spectral(self) -> float:
        """``sum_j (sqrt(lambda_j) - 1)^2`` over the Gram eigenvalues."""
        lam = np.clip(self.gram_eigenvalues, 0.0, None)
        return float(np.sum((np.sqrt(lam) - 1.0) ** 2))

    @property
    def dv_bound(self) -> float:
        return self.d * (self.d - 1) * (1.0 - self.eta0) / self.eta0

    @property
    def dv_bound_holds(self) -> bool:
        return self.dv_norm_sq <= self.dv_bound + 1e-9

    def labels_of(self, psi) -> np.ndarray:
        """Coefficients of ``psi`` in the coding basis."""
        return self.basis.conj().T @ _as_amplitudes(psi, self.basis.shape[0])


def build_coding(net: SpinNetwork, config: ProtocolConfig, basis=None, keep_runs: bool = False) -> CodingMap:
    """Coding map from one download run per basis vector, and its isometric part.

    :param basis: orthonormal basis of C (x) C-bar as matrix columns or a list of
        states; defaults to the computational basis in split order.
    """
    bip, _ = split_unitary(net, config)
    d = bip.d_C * bip.d_Cbar
    if basis is None:
        basis = np.eye(d, dtype=complex)
    elif not isinstance(basis, np.ndarray):
        basis = np.column_stack([_as_amplitudes(b, d) for b in basis])
    if basis.shape != (d, d) or np.max(np.abs(basis.conj().T @ basis - np.eye(d))) > 1e-10:
        raise DimensionMismatchError(f"coding basis must be {d} orthonormal vectors")
    runs = [run_download(net, config, basis[:, k]) for k in range(d)]
    etas = np.array([r.eta for r in runs])
    if np.min(etas) <= EMPTY_WEIGHT:
        k = int(np.argmin(etas))
        raise DegenerateCodingError(
            f"basis vector {k} has eta={etas[k]:.3e}; the relaxation has not converged at L={config.L}")
    phi = np.column_stack([r.phi_M.amplitudes for r in runs])
    v = polar_unitary(phi)
    gram = phi.conj().T @ phi
    dv = float(np.linalg.norm(phi - v) ** 2)
    return CodingMap(phi, basis, gram, etas, v, dv, tuple(runs) if keep_runs else ())


def download_fidelity(net: SpinNetwork, config: ProtocolConfig, coding: CodingMap, psi) -> float:
    """``<psi|V^H rho_M V|psi>`` after the download unitary.

    Evaluated as the squared norm of the register contracted with ``V|psi>_M``,
    which equals the memory overlap without forming ``rho_M``.
    """
    final = apply_download(net, config, psi)
    t = final.amplitudes.reshape(final.factor_dims[0] * final.factor_dims[1], -1)
    target = coding.V @ coding.labels_of(psi)
    if target.size != t.shape[1]:
        raise DimensionMismatchError("coding was built for a different number of steps")
    amp = t @ target.conj()
    return float(np.vdot(amp, amp).real)


def reverse_download_fidelity(net: SpinNetwork, config: ProtocolConfig, coding: CodingMap, psi) -> float:
    """Overlap with ``psi`` after applying the adjoint protocol to ``|eE> (x) V|psi>_M``."""
    bip, u = split_unitary(net, config)
    _check_budget(bip, config)
    amps = _as_amplitudes(psi, bip.d_C * bip.d_Cbar)
    memory = coding.V @ coding.labels_of(amps)
    shape = (bip.d_C, bip.d_Cbar) + (bip.d_C,) * config.n_memory
    if memory.size != int(np.prod(shape[2:])):
        raise DimensionMismatchError("coding was built for a different number of steps")
    t = np.zeros((bip.d_C * bip.d_Cbar, memory.size), dtype=complex)
    t[0] = memory
    out = _backward(u, t.reshape(shape), config)
    amp = amps.conj() @ out.reshape(amps.size, -1)
    return float(np.vdot(amp, amp).real)


def upload_fidelity(net: SpinNetwork, config: ProtocolConfig, psi, coding_prime: Optional[CodingMap] = None) -> float:
    """Physical upload: reverse-download of the network with Hamiltonian ``-H``.

    ``coding_prime`` must come from ``build_coding(net.negated(), config)``.
    """
    primed = net.negated()
    config = replace(config, direction=Direction.DOWNLOAD)
    if coding_prime is None:
        coding_prime = build_coding(primed, config)
    return reverse_download_fidelity(primed, config, coding_prime, psi)


def fidelity_lower_bound(eta0: float, d: int) -> float:
    """``eta0 - 4 d sqrt((1 - eta0) / eta0)``; negative values are returned as-is."""
    if eta0 <= 0.0:
        raise DomainError("eta0 must be positive")
    return eta0 - 4.0 * d * np.sqrt(max(1.0 - eta0, 0.0) / eta0)


CONVERGENCE_HEADER = ["L", "eta", "one_minus_eta", "bound_eq11", "F_d", "F_up"]


@dataclass(frozen=True)
class ConvergenceRow:
    L: int
    eta: float
    eta0: float
    bound: float
    f_d: float
    f_up: float
    dv_norm_sq: float
    dv_bound: float

    def csv_fields(self) -> list:
        return [self.L, format_float(self.eta), format_float(1.0 - self.eta),
                format_float(self.bound), format_float(self.f_d), format_float(self.f_up)]


def convergence_row(net: SpinNetwork, t: float, L: int, psi, terminal_swap: bool = True) -> ConvergenceRow:
    """One sweep point; quantities needing a coding are NaN while it is degenerate."""
    config = ProtocolConfig(t, L, terminal_swap)
    run = run_download(net, config, psi)
    nan = float("nan")
    try:
        coding = build_coding(net, config)
    except DegenerateCodingError:
        eta0, bound, f_d, dv, dv_bound = nan, nan, nan, nan, nan
    else:
        eta0, dv, dv_bound = coding.eta0, coding.dv_norm_sq, coding.dv_bound
        bound = fidelity_lower_bound(eta0, coding.d)
        f_d = download_fidelity(net, config, coding, psi)
    try:
        f_up = upload_fidelity(net, config, psi)
    except DegenerateCodingError:
        f_up = nan
    return ConvergenceRow(L, run.eta, eta0, bound, f_d, f_up, dv, dv_bound)


def write_convergence_csv(fh, rows: Sequence[ConvergenceRow], preamble: Optional[str] = None) -> None:
    if preamble:
        fh.write(f"# {preamble}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CONVERGENCE_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
