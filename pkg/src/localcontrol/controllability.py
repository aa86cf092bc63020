"""Graph-automaton controllability certificate and a spectral oracle for its premise.

Black vertices are spins known to be down. A black vertex with exactly one
white neighbour forces that neighbour black; starting from an all-black
control set, reaching an all-black graph certifies that the all-down state is
the only eigenstate with the control region down.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .network import SpinNetwork, build_hamiltonian, ordered_bipartition
from .quantum import ResourceError, StateVector

ORACLE_MAX_SITES = 12
INTERSECTION_SV = 1.0 - 1e-7


@dataclass(frozen=True, eq=False)
class ColoredGraph:
    adjacency: np.ndarray
    black: tuple

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be square")
        if np.any(np.diag(adj)):
            raise ValueError("self-loops are not allowed")
        if np.any(adj != adj.T):
            raise ValueError("adjacency must be symmetric")
        black = tuple(bool(b) for b in self.black)
        if len(black) != adj.shape[0]:
            raise ValueError("one color per vertex required")
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "black", black)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @classmethod
    def from_control(cls, adjacency, control: Sequence[int]) -> "ColoredGraph":
        adjacency = np.asarray(adjacency, dtype=bool)
        control = set(control)
        return cls(adjacency, tuple(v in control for v in range(adjacency.shape[0])))

    def colors(self) -> str:
        return "".join("B" if b else "W" for b in self.black)

    def all_black(self) -> bool:
        return all(self.black)


@dataclass(frozen=True)
class AutomatonTrace:
    steps: tuple
    fixed_point_reached: bool
    all_black: bool

    @property
    def n_steps(self) -> int:
        """Number of updates that changed the coloring."""
        return len(self.steps) - 1

    def lines(self) -> list:
        return ["".join("B" if b else "W" for b in step) for step in self.steps]


def automaton_step(g: ColoredGraph) -> ColoredGraph:
    """One synchronous update of the forcing rule."""
    black = np.array(g.black)
    white_nbrs = g.adjacency & ~black[None, :]
    counts = white_nbrs.sum(axis=1)
    new = black.copy()
    for v in np.flatnonzero(black & (counts == 1)):
        new[np.flatnonzero(white_nbrs[v])[0]] = True
    return ColoredGraph(g.adjacency, tuple(new))


def run_automaton(g: ColoredGraph) -> AutomatonTrace:
    steps = [g.black]
    for _ in range(g.n + 1):
        nxt = automaton_step(g)
        if nxt.black == g.black:
            return AutomatonTrace(tuple(steps), True, g.all_black())
        g = nxt
        steps.append(g.black)
    raise AssertionError("forcing rule failed to reach a fixed point")  # black set is monotone


def certify_graph(adjacency, control: Sequence[int]) -> tuple:
    trace = run_automaton(ColoredGraph.from_control(adjacency, control))
    return trace.all_black, trace


def certify_control(net: SpinNetwork) -> tuple:
    """``(certified, trace)`` for the network's coupling graph and control set.

    A positive answer is sufficient for controllability, not necessary.
    """
    return certify_graph(net.adjacency(), net.control_set)


@dataclass(frozen=True, eq=False)
class OracleResult:
    holds: bool
    witness: Optional[StateVector]
    energy: Optional[float]
    intersection_dim: int

    def __iter__(self):
        yield self.holds
        yield self.witness


def _eigenspaces(w: np.ndarray, tol: float) -> list:
    groups, start = [], 0
    for k in range(1, w.size + 1):
        if k == w.size or w[k] - w[k - 1] > tol:
            groups.append((start, k))
            start = k
    return groups


def oracle_condition_ii(net: SpinNetwork, tol: float = 1e-9) -> OracleResult:
    """Check by diagonalization that ``|e>_C |E>_Cbar`` is the only eigenvector of H
    whose control region is all down.

    Each eigenspace is intersected with ``|e>_C (x) H_Cbar`` through the
    singular values of its restriction to that subspace. The witness, when
    returned, is in network site order.
    """
    n = net.n_sites
    if n > ORACLE_MAX_SITES:
        raise ResourceError(f"{n} sites exceed the dense oracle limit of {ORACLE_MAX_SITES}")
    bip = ordered_bipartition(net)
    h = bip.operator_to_split(build_hamiltonian(net))
    w, q = np.linalg.eigh(h)
    d_cbar = bip.d_Cbar
    vectors, energies = [], []
    for lo, hi in _eigenspaces(w, tol):
        block = q[:, lo:hi]
        _, s, vh = np.linalg.svd(block[:d_cbar], full_matrices=False)
        for k in np.flatnonzero(s >= INTERSECTION_SV):
            vec = block @ vh[k].conj()
            vectors.append(vec / np.linalg.norm(vec))
            energies.append(float(np.mean(w[lo:hi])))
    vacuum = np.zeros(2 ** n, dtype=complex)
    vacuum[0] = 1.0
    if len(vectors) == 1 and abs(np.vdot(vacuum, vectors[0])) ** 2 >= 1.0 - 1e-9:
        return OracleResult(True, None, None, 1)
    # any intersection vector other than the vacuum, vacuum component removed
    best, best_energy, best_norm = None, None, 0.0
    for vec, energy in zip(vectors, energies):
        rest = vec - np.vdot(vacuum, vec) * vacuum
        norm = np.linalg.norm(rest)
        if norm > best_norm + 1e-12:
            best, best_energy, best_norm = rest / norm, energy, norm
    witness = None
    if best is not None and best_norm > 1e-6:
        # vacuum and witness share an eigenspace only at energy 0, so removing
        # the vacuum component keeps an eigenvector
        witness = StateVector(bip.state_from_split(best), (2,) * n)
    return OracleResult(False, witness, best_energy, len(vectors))


def minimal_control_search(adjacency, max_size: int) -> list:
    """All inclusion-minimal certified proper control sets of size at most ``max_size``."""
    adjacency = np.asarray(adjacency, dtype=bool)
    n = adjacency.shape[0]
    found = []
    for size in range(1, min(max_size, n - 1) + 1):
        for cand in combinations(range(n), size):
            if any(set(m) <= set(cand) for m in found):
                continue
            if certify_graph(adjacency, cand)[0]:
                found.append(cand)
    return sorted(found)


def to_dot(g: ColoredGraph, name: str = "G") -> str:
    lines = [f"graph {name} {{", "  node [style=filled, fontcolor=red];"]
    for v, b in enumerate(g.black):
        lines.append(f'  {v} [fillcolor={"black" if b else "white"}];')
    for i in range(g.n):
        for j in range(i + 1, g.n):
            if g.adjacency[i, j]:
                lines.append(f"  {i} -- {j};")
    lines.append("}")
    return "\n".join(lines) + "\n"
