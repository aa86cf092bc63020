"""Spin-1/2 networks, their excitation-preserving Hamiltonians and the C / C-bar split.

Site ``|0>`` is spin down (no excitation), ``|1>`` is spin up. Operators on the
network are written in site order, site 0 being the slowest tensor index.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

MAX_SITES = 12


class Coupling(str, Enum):
    XX = "XX"
    HEISENBERG = "HEISENBERG"


class NetworkError(ValueError):
    pass


class NetworkParseError(NetworkError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


@dataclass(frozen=True)
class SpinNetwork:
    n_sites: int
    edges: tuple
    control_set: tuple
    coupling_model: Coupling = Coupling.XX
    local_fields: tuple = ()

    def __post_init__(self):
        n = int(self.n_sites)
        if n < 2:
            raise NetworkError("a network needs at least two sites")
        edges = []
        seen = set()
        for edge in self.edges:
            i, j, coupling = int(edge[0]), int(edge[1]), float(edge[2])
            if not (0 <= i < n and 0 <= j < n):
                raise NetworkError(f"edge ({i}, {j}) references a site outside 0..{n - 1}")
            if i == j:
                raise NetworkError(f"self-loop on site {i}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise NetworkError(f"duplicate edge {key}")
            seen.add(key)
            edges.append((i, j, coupling))
        control = tuple(sorted(set(int(c) for c in self.control_set)))
        if not control:
            raise NetworkError("control set must be non-empty")
        if any(not 0 <= c < n for c in control):
            raise NetworkError(f"control set {control} references a site outside 0..{n - 1}")
        if len(control) == n:
            raise NetworkError("control set must be a proper subset of the sites")
        fields = tuple(float(h) for h in self.local_fields) or (0.0,) * n
        if len(fields) != n:
            raise NetworkError(f"expected {n} local fields, got {len(fields)}")
        object.__setattr__(self, "n_sites", n)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "control_set", control)
        object.__setattr__(self, "coupling_model", Coupling(self.coupling_model))
        object.__setattr__(self, "local_fields", fields)

    def adjacency(self) -> np.ndarray:
        """Boolean adjacency of the coupling graph; zero couplings are not edges."""
        adj = np.zeros((self.n_sites, self.n_sites), dtype=bool)
        for i, j, coupling in self.edges:
            if coupling != 0.0:
                adj[i, j] = adj[j, i] = True
        return adj

    def negated(self) -> "SpinNetwork":
        """Network with every coupling and field flipped, i.e. Hamiltonian ``-H``."""
        return replace(
            self,
            edges=tuple((i, j, -coupling) for i, j, coupling in self.edges),
            local_fields=tuple(-h for h in self.local_fields),
        )

    def with_control(self, control: Sequence[int]) -> "SpinNetwork":
        return replace(self, control_set=tuple(control))

    def max_coupling(self) -> float:
        return max((abs(c) for _, _, c in self.edges), default=0.0)


@dataclass(frozen=True)
class Bipartition:
    """Site ordering that realizes ``H = H_C (x) H_Cbar``: control sites first."""

    c_sites: tuple
    cbar_sites: tuple
    d_C: int = field(init=False)
    d_Cbar: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "d_C", 2 ** len(self.c_sites))
        object.__setattr__(self, "d_Cbar", 2 ** len(self.cbar_sites))

    @property
    def n_sites(self) -> int:
        return len(self.c_sites) + len(self.cbar_sites)

    @property
    def order(self) -> tuple:
        """``order[k]`` is the network site placed at split position ``k``."""
        return self.c_sites + self.cbar_sites

    def state_to_split(self, amplitudes: np.ndarray) -> np.ndarray:
        n = self.n_sites
        t = np.asarray(amplitudes).reshape((2,) * n)
        return t.transpose(self.order).reshape(-1)

    def state_from_split(self, amplitudes: np.ndarray) -> np.ndarray:
        n = self.n_sites
        t = np.asarray(amplitudes).reshape((2,) * n)
        return t.transpose(np.argsort(self.order)).reshape(-1)

    def operator_to_split(self, op: np.ndarray) -> np.ndarray:
        n = self.n_sites
        order = list(self.order)
        t = np.asarray(op).reshape((2,) * (2 * n))
        t = t.transpose(order + [n + k for k in order])
        return t.reshape(2 ** n, 2 ** n)


def ordered_bipartition(net: SpinNetwork) -> Bipartition:
    control = tuple(sorted(net.control_set))
    rest = tuple(k for k in range(net.n_sites) if k not in control)
    return Bipartition(control, rest)


def _site_operator(op: np.ndarray, site: int, n: int) -> np.ndarray:
    out = np.array([[1.0]], dtype=complex)
    for k in range(n):
        out = np.kron(out, op if k == site else np.eye(2))
    return out


def number_operator(n: int) -> np.ndarray:
    """Diagonal of the total excitation number ``N = sum_i n_i``."""
    idx = np.arange(2 ** n)
    return np.array([bin(k).count("1") for k in idx], dtype=float)


def build_hamiltonian(net: SpinNetwork, max_sites: int = MAX_SITES) -> np.ndarray:
    """Dense Hamiltonian in network site order.

    XX edges contribute ``J (|01><10| + |10><01|)``; Heisenberg edges
    ``(J/4)(XX + YY + ZZ - I)``; fields ``h_i n_i`` with ``n_i = (I - Z_i)/2``.
    The all-down state has energy zero when fields vanish.
    """
    n = net.n_sites
    if n > max_sites:
        raise NetworkError(f"{n} sites exceed the dense limit of {max_sites}")
    dim = 2 ** n
    h = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    for i, j, coupling in net.edges:
        if coupling == 0.0:
            continue
        differ = bits[:, i] != bits[:, j]
        flipped = idx ^ (1 << (n - 1 - i)) ^ (1 << (n - 1 - j))
        if net.coupling_model is Coupling.XX:
            amp = coupling
        else:
            amp = coupling / 2.0
            # (J/4)(ZZ - I) is -J/2 on anti-aligned pairs, 0 on aligned ones
            h[idx[differ], idx[differ]] += -coupling / 2.0
        h[flipped[differ], idx[differ]] += amp
    for i, hi in enumerate(net.local_fields):
        if hi != 0.0:
            h[idx, idx] += hi * bits[:, i]
    return h


def excitation_conserving(h: np.ndarray, n_sites: int, tol: float = 1e-10) -> bool:
    """Whether ``[H, N]`` vanishes in max-norm."""
    num = number_operator(n_sites)
    h = np.asarray(h)
    if h.shape != (2 ** n_sites, 2 ** n_sites):
        raise NetworkError(f"operator shape {h.shape} does not fit {n_sites} sites")
    comm = h * (num[None, :] - num[:, None])
    return bool(np.max(np.abs(comm)) <= tol)


def with_disorder(net: SpinNetwork, seed: int, scale: float = 1e-3) -> SpinNetwork:
    """Couplings multiplied by ``1 + scale * u`` with seeded uniform ``u`` in [-1, 1]."""
    rng = np.random.Generator(np.random.Philox(seed))
    edges = tuple((i, j, c * (1.0 + scale * rng.uniform(-1.0, 1.0))) for i, j, c in net.edges)
    return replace(net, edges=edges)


# --- network files -----------------------------------------------------------

_KEYS = {"n", "model", "control", "edges", "fields"}


def _key_lines(text: str) -> dict:
    lines = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_-]*)\s*=", line)
        if m and m.group(1) not in lines:
            lines[m.group(1)] = lineno
    return lines


def parse_network(text: str, path: str | None = None) -> SpinNetwork:
    """Parse a network document.

    The format is TOML with exactly the keys ``n``, ``model``, ``control``,
    ``edges`` and optionally ``fields``::

        n = 3
        model = "XX"
        control = [0]
        edges = [[0, 1, 1.0], [1, 2, 1.0]]
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise NetworkParseError(str(exc), int(m.group(1)) if m else None, path) from None
    lines = _key_lines(text)

    def fail(msg, key=None):
        raise NetworkParseError(msg, lines.get(key), path)

    for key in doc:
        if key not in _KEYS:
            fail(f"unknown key {key!r}", key)
    for key in ("n", "model", "control", "edges"):
        if key not in doc:
            fail(f"missing key {key!r}")
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        fail("'n' must be an integer >= 2", "n")
    model = doc["model"]
    if model not in (c.value for c in Coupling):
        fail(f"unknown model {model!r}; expected XX or HEISENBERG", "model")
    control = doc["control"]
    if not isinstance(control, list) or not all(isinstance(c, int) and not isinstance(c, bool) for c in control):
        fail("'control' must be a list of site indices", "control")
    if any(not 0 <= c < n for c in control):
        fail(f"control site out of range 0..{n - 1}", "control")
    edges = doc["edges"]
    if not isinstance(edges, list):
        fail("'edges' must be a list of [i, j, J] triples", "edges")
    for e in edges:
        if (not isinstance(e, list) or len(e) != 3
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in e[:2])
                or not isinstance(e[2], (int, float)) or isinstance(e[2], bool)):
            fail(f"malformed edge {e!r}; expected [i, j, J]", "edges")
        if not (0 <= e[0] < n and 0 <= e[1] < n):
            fail(f"edge {e!r} references a site out of range 0..{n - 1}", "edges")
        if e[0] == e[1]:
            fail(f"self-loop {e!r}", "edges")
    fields = doc.get("fields", [0.0] * n)
    if (not isinstance(fields, list) or len(fields) != n
            or not all(isinstance(h, (int, float)) and not isinstance(h, bool) for h in fields)):
        fail(f"'fields' must be a list of {n} numbers", "fields")
    try:
        return SpinNetwork(n, tuple(tuple(e) for e in edges), tuple(control), Coupling(model), tuple(fields))
    except NetworkError as exc:
        raise NetworkParseError(str(exc), None, path) from None


def load_network(path) -> SpinNetwork:
    path = Path(path)
    return parse_network(path.read_text(), str(path))


def format_network(net: SpinNetwork) -> str:
    edges = ", ".join(f"[{i}, {j}, {c!r}]" for i, j, c in net.edges)
    fields = ", ".join(repr(h) for h in net.local_fields)
    return (
        f"n = {net.n_sites}\n"
        f'model = "{net.coupling_model.value}"\n'
        f"control = [{', '.join(str(c) for c in net.control_set)}]\n"
        f"edges = [{edges}]\n"
        f"fields = [{fields}]\n"
    )


# --- standard topologies -----------------------------------------------------

def path_network(n: int, control: Sequence[int] = (0,), coupling: float = 1.0,
                 model: Coupling = Coupling.XX) -> SpinNetwork:
    edges = tuple((k, k + 1, coupling) for k in range(n - 1))
    return SpinNetwork(n, edges, tuple(control), model)


def star_network(leaves: int, control: Sequence[int], coupling: float = 1.0,
                 model: Coupling = Coupling.XX) -> SpinNetwork:
    """Star with center 0 and leaves ``1..leaves``."""
    edges = tuple((0, k, coupling) for k in range(1, leaves + 1))
    return SpinNetwork(leaves + 1, edges, tuple(control), model)


def graph_network(adjacency: np.ndarray, control: Sequence[int], coupling: float = 1.0,
                  model: Coupling = Coupling.XX) -> SpinNetwork:
    adjacency = np.asarray(adjacency, dtype=bool)
    n = adjacency.shape[0]
    edges = tuple((i, j, coupling) for i in range(n) for j in range(i + 1, n) if adjacency[i, j])
    return SpinNetwork(n, edges, tuple(control), model)
