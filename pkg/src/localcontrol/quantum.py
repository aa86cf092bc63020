"""Dense finite-dimensional quantum linear algebra.

States are stored big-endian: the first listed tensor factor varies slowest
in the flat amplitude index, so ``|1> (x) |0>`` is ``(0, 0, 1, 0)``.
Operators are plain complex ``numpy`` arrays.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

STRUCTURE_TOL = 1e-10
DEGENERACY_TOL = 1e-9
RANK_TOL = 1e-12
EMPTY_WEIGHT = 1e-14


class DimensionMismatchError(ValueError):
    pass


class DomainError(ValueError):
    pass


class ResourceError(RuntimeError):
    pass


class DegenerateCodingError(ValueError):
    """Raised when a coding matrix is (numerically) rank deficient."""


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state over labeled tensor factors."""

    amplitudes: np.ndarray
    factor_dims: tuple
    labels: tuple = ()

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        dims = tuple(int(d) for d in self.factor_dims)
        if any(d <= 0 for d in dims):
            raise DimensionMismatchError(f"factor dimensions must be positive: {dims}")
        if int(np.prod(dims, dtype=np.int64)) != amps.size:
            raise DimensionMismatchError(
                f"factor dims {dims} do not match {amps.size} amplitudes")
        labels = tuple(self.labels) if self.labels else tuple(range(len(dims)))
        if len(labels) != len(dims):
            raise DimensionMismatchError("one label per tensor factor required")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "factor_dims", dims)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = STRUCTURE_TOL) -> bool:
        return abs(self.norm() ** 2 - 1.0) <= tol

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per factor."""
        return self.amplitudes.reshape(self.factor_dims)

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def index(self, label) -> int:
        return self.labels.index(label)


def basis_state(dims: Sequence[int], digits: Sequence[int], labels=()) -> StateVector:
    """Computational basis product state ``|digits[0]> (x) |digits[1]> ...``."""
    dims = tuple(dims)
    amps = np.zeros(int(np.prod(dims)), dtype=complex)
    amps[np.ravel_multi_index(tuple(digits), dims)] = 1.0
    return StateVector(amps, dims, labels)


def random_state(dims: Sequence[int], rng: np.random.Generator, labels=()) -> StateVector:
    """Haar-random pure state: complex Gaussian amplitudes, normalized."""
    dims = tuple(dims)
    n = int(np.prod(dims))
    amps = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return StateVector(amps / np.linalg.norm(amps), dims, labels)


def random_density_matrix(d: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    """Random mixed state from a Ginibre matrix of the given rank."""
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def tensor_product(a: StateVector, b: StateVector) -> StateVector:
    if set(a.labels) & set(b.labels):
        labels = tuple(range(len(a.factor_dims) + len(b.factor_dims)))
    else:
        labels = a.labels + b.labels
    return StateVector(np.kron(a.amplitudes, b.amplitudes), a.factor_dims + b.factor_dims, labels)


def partial_trace(rho: np.ndarray, factor_dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix on the factors listed in ``keep``.

    The kept factors appear in the order given by ``keep``.

    :param rho: square matrix over the full tensor product.
    :param factor_dims: dimension of each tensor factor, big-endian.
    :param keep: indices of the factors to keep.
    :return: square matrix of size prod(factor_dims[keep]).
    """
    rho = np.asarray(rho)
    dims = tuple(int(d) for d in factor_dims)
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise DimensionMismatchError(
            f"operator of shape {rho.shape} does not match factor dims {dims}")
    keep = list(keep)
    if len(set(keep)) != len(keep) or any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionMismatchError(f"invalid factor subset {keep}")
    n = len(dims)
    traced = [i for i in range(n) if i not in keep]
    t = rho.reshape(dims + dims)
    # move kept ket axes, kept bra axes, then contract the rest pairwise
    perm = keep + traced + [n + k for k in keep] + [n + i for i in traced]
    t = t.transpose(perm)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    dt = int(np.prod([dims[i] for i in traced])) if traced else 1
    t = t.reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", t)


def reduced_state(state: StateVector, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of a pure state without forming the full projector."""
    n = len(state.factor_dims)
    keep = list(keep)
    traced = [i for i in range(n) if i not in keep]
    t = state.tensor().transpose(keep + traced)
    dk = int(np.prod([state.factor_dims[k] for k in keep])) if keep else 1
    m = t.reshape(dk, -1)
    return m @ m.conj().T


def is_hermitian(a: np.ndarray, tol: float = STRUCTURE_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.max(np.abs(a - a.conj().T), initial=0.0) <= tol


def is_unitary(u: np.ndarray, tol: float = STRUCTURE_TOL) -> bool:
    u = np.asarray(u)
    return np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1])), initial=0.0) <= tol


def is_density_matrix(rho: np.ndarray, tol: float = STRUCTURE_TOL) -> bool:
    rho = np.asarray(rho)
    if not is_hermitian(rho, tol):
        return False
    if abs(np.trace(rho) - 1.0) > tol:
        return False
    return bool(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() >= -tol)


def trace_norm(a: np.ndarray, tol: float = 1e-8) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    a = np.asarray(a)
    if not is_hermitian(a, tol):
        raise DomainError("trace_norm expects a Hermitian matrix")
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (a + a.conj().T)))))


def propagator(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i h t)`` for Hermitian ``h`` via its eigendecomposition."""
    h = np.asarray(h)
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def polar_unitary(d: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Isometric factor ``V`` of the polar decomposition ``D = P V``.

    With the thin SVD ``D = X S Y^H`` this is ``V = X Y^H``, the isometry
    closest to ``D`` in Frobenius norm.
    """
    d = np.asarray(d, dtype=complex)
    if d.ndim != 2 or d.shape[0] < d.shape[1]:
        raise DegenerateCodingError(f"coding matrix of shape {d.shape} cannot have full column rank")
    x, s, yh = np.linalg.svd(d, full_matrices=False)
    if s.size and s.min() <= rank_tol * max(1.0, s.max()):
        raise DegenerateCodingError(
            f"coding matrix is rank deficient (smallest singular value {s.min():.3e}); "
            "the relaxation has not converged enough for a coding to exist")
    return x @ yh


def swap_apply(state: StateVector, i: int, j: int) -> StateVector:
    """Exchange the contents of tensor factors ``i`` and ``j``."""
    dims = state.factor_dims
    if dims[i] != dims[j]:
        raise DimensionMismatchError(f"cannot swap factors of dimension {dims[i]} and {dims[j]}")
    if i == j:
        return state
    t = np.swapaxes(state.tensor(), i, j)
    return StateVector(t.reshape(-1), dims, state.labels)


class Projection(NamedTuple):
    residual: Optional[StateVector]
    weight: float

    @property
    def empty(self) -> bool:
        return self.residual is None


def project_component(state: StateVector, factors: Sequence[int], target: StateVector) -> Projection:
    """Contract ``<target|`` into the given factors of ``state``.

    Returns the normalized residual on the remaining factors together with
    its squared norm. A weight at or below 1e-14 gives ``residual=None``.
    """
    factors = list(factors)
    dims = state.factor_dims
    sub_dims = tuple(dims[f] for f in factors)
    if target.dim != int(np.prod(sub_dims)):
        raise DimensionMismatchError(f"target dims {target.factor_dims} vs factors {sub_dims}")
    rest = [k for k in range(len(dims)) if k not in factors]
    t = state.tensor().transpose(factors + rest).reshape(target.dim, -1)
    out = target.amplitudes.conj() @ t
    weight = float(np.vdot(out, out).real)
    if weight <= EMPTY_WEIGHT:
        return Projection(None, weight)
    rest_dims = tuple(dims[k] for k in rest)
    rest_labels = tuple(state.labels[k] for k in rest)
    return Projection(StateVector(out / np.sqrt(weight), rest_dims, rest_labels), weight)


def vec(matrix: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(matrix).reshape(-1, order="F")


def unvec(vector: np.ndarray, d: Optional[int] = None) -> np.ndarray:
    vector = np.asarray(vector)
    if d is None:
        d = int(round(np.sqrt(vector.size)))
    return vector.reshape((d, d), order="F")
