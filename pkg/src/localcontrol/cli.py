"""Command-line front end: ``localcontrol {check,channel,download,upload,converge}``.

Exit codes: 0 success or positive verdict, 2 negative verdict, 1 error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import channel as ch
from .controllability import (ColoredGraph, certify_control, minimal_control_search,
                              oracle_condition_ii, to_dot)
from .network import (NetworkError, SpinNetwork, build_hamiltonian, load_network,
                      ordered_bipartition, with_disorder)
from .protocol import (ProtocolConfig, ResourceError, build_coding, convergence_row,
                       download_fidelity, fidelity_lower_bound, max_feasible_steps,
                       run_download, upload_fidelity, write_convergence_csv)
from .quantum import (DegenerateCodingError, DimensionMismatchError, StateVector, propagator,
                      random_state)

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2


@dataclass
class RunManifest:
    command: str
    network_file: str
    config: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    def header(self) -> str:
        items = [f"command={self.command}", f"network={self.network_file}"]
        items += [f"{k}={_fmt_value(v)}" for k, v in self.config.items()]
        items += [f"{k}={v}" for k, v in self.outputs.items() if v is not None]
        return "manifest: " + " ".join(items)


def _fmt_value(v) -> str:
    if isinstance(v, float):
        return ch.format_float(v)
    return str(v)


def _f7(x: float) -> str:
    s = f"{x:.7f}"
    return s.lstrip("-") if float(s) == 0.0 else s


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _default_time(net: SpinNetwork, t: Optional[float]) -> float:
    if t is not None:
        return float(t)
    jmax = net.max_coupling()
    return 1.0 / jmax if jmax > 0 else 1.0


def _parse_state(choice: str, net: SpinNetwork):
    """``random:<seed>`` or ``basis:<k>`` (k indexes network site order)."""
    bip = ordered_bipartition(net)
    d = 2 ** net.n_sites
    kind, _, arg = choice.partition(":")
    try:
        value = int(arg)
    except ValueError:
        raise ValueError(f"bad --state {choice!r}; expected random:<seed> or basis:<k>") from None
    if kind == "random":
        psi = random_state((d,), make_rng(value)).amplitudes
        seed = value
    elif kind == "basis":
        if not 0 <= value < d:
            raise ValueError(f"basis index {value} out of range 0..{d - 1}")
        psi = np.zeros(d, dtype=complex)
        psi[value] = 1.0
        seed = None
    else:
        raise ValueError(f"bad --state {choice!r}; expected random:<seed> or basis:<k>")
    return StateVector(bip.state_to_split(psi), (bip.d_C, bip.d_Cbar), ("C", "Cbar")), seed


def cmd_check(args, out) -> int:
    net = load_network(args.network)
    manifest = RunManifest("check", args.network, {"oracle": args.oracle, "minimal": args.minimal,
                                                     "disorder": args.disorder})
    out.write(f"# {manifest.header()}\n")
    if args.disorder is not None:
        net = with_disorder(net, args.disorder)
    certified, trace = certify_control(net)
    for line in trace.lines():
        out.write(line + "\n")
    out.write("CERTIFIED\n" if certified else "NOT CERTIFIED\n")
    if args.oracle:
        res = oracle_condition_ii(net)
        if res.holds:
            out.write("condition ii: HOLDS\n")
        else:
            out.write("condition ii: FAILS\n")
            if res.witness is not None:
                amps = res.witness.amplitudes
                support = [f"{k:0{net.n_sites}b}" for k in np.flatnonzero(np.abs(amps) > 1e-8)]
                out.write(f"witness eigenvalue: {_f7(res.energy)}\n")
                out.write(f"witness support: {' '.join(support)}\n")
    if args.minimal is not None:
        sets = minimal_control_search(net.adjacency(), args.minimal)
        out.write(f"minimal certified control sets (size <= {args.minimal}):\n")
        for s in sets:
            out.write("  {" + ", ".join(str(v) for v in s) + "}\n")
    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(to_dot(ColoredGraph(net.adjacency(), trace.steps[-1])))
    return EXIT_OK if certified else EXIT_NEGATIVE


def _channel_for(net: SpinNetwork, t: float, prime: bool):
    bip = ordered_bipartition(net)
    u = propagator(bip.operator_to_split(build_hamiltonian(net)), t)
    return bip, (ch.build_tau_prime if prime else ch.build_tau)(u, bip)


def _write_spectrum(out, report) -> None:
    out.write("eigenvalue moduli: " + " ".join(_f7(m) for m in report.moduli) + "\n")


def cmd_channel(args, out) -> int:
    net = load_network(args.network)
    t = _default_time(net, args.time)
    manifest = RunManifest("channel", args.network, {"t": t, "prime": args.prime})
    out.write(f"# {manifest.header()}\n")
    _, s = _channel_for(net, t, args.prime)
    report = ch.spectral_report(s)
    _write_spectrum(out, report)
    out.write(f"kappa: {_f7(report.kappa)}\n")
    out.write(f"mixing: {'yes' if report.mixing else 'no'}\n")
    if report.mixing:
        out.write(f"purity: {_f7(report.fixed_point_purity)}\n")
        out.write(f"overlap <E|rho*|E>: {_f7(report.vacuum_overlap())}\n")
    else:
        out.write(f"fixed points: {len(report.fixed_points)}\n")
    return EXIT_OK if report.mixing else EXIT_NEGATIVE


def _transfer(args, out, upload: bool) -> int:
    net = load_network(args.network)
    t = _default_time(net, args.time)
    psi, seed = _parse_state(args.state, net)
    terminal = not args.no_terminal_swap
    manifest = RunManifest("upload" if upload else "download", args.network,
                           {"t": t, "L": args.steps, "terminal_swap": terminal, "state": args.state,
                            "seed": seed}, {"csv": args.csv})
    out.write(f"# {manifest.header()}\n")
    config = ProtocolConfig(t, args.steps, terminal)
    try:
        if upload:
            primed = net.negated()
            coding = build_coding(primed, config)
            fid = upload_fidelity(net, config, psi, coding)
            eta = run_download(primed, config, psi).eta
        else:
            coding = build_coding(net, config)
            fid = download_fidelity(net, config, coding, psi)
            eta = run_download(net, config, psi).eta
    except ResourceError as exc:
        bip = ordered_bipartition(net)
        raise ResourceError(f"{exc}; try --steps {max_feasible_steps(bip, terminal)}") from None
    bound = fidelity_lower_bound(coding.eta0, coding.d)
    tag = "F_up" if upload else "F_d"
    out.write(f"eta: {_f7(eta)}\n")
    out.write(f"eta0: {_f7(coding.eta0)}\n")
    out.write(f"{tag} = {_f7(fid)}\n")
    out.write(f"bound = {_f7(bound)}\n")
    out.write(f"||D-V||^2 = {coding.dv_norm_sq:.7e}\n")
    out.write(f"||D-V||^2 bound = {coding.dv_bound:.7e}\n")
    if args.csv:
        rows = [convergence_row(net, t, step, psi, terminal) for step in range(1, args.steps + 1)]
        with open(args.csv, "w", newline="") as fh:
            write_convergence_csv(fh, rows, manifest.header())
    return EXIT_OK


def cmd_download(args, out) -> int:
    return _transfer(args, out, upload=False)


def cmd_upload(args, out) -> int:
    return _transfer(args, out, upload=True)


def uniform_superposition(d: int) -> np.ndarray:
    plus = np.full(d, 1.0 / np.sqrt(d), dtype=complex)
    return np.outer(plus, plus.conj())


def cmd_converge(args, out) -> int:
    net = load_network(args.network)
    t = _default_time(net, args.time)
    manifest = RunManifest("converge", args.network, {"t": t, "max_steps": args.max_steps},
                           {"csv": args.csv})
    out.write(f"# {manifest.header()}\n")
    bip, s = _channel_for(net, t, False)
    report = ch.spectral_report(s)
    if not report.mixing:
        _write_spectrum(out, report)
        out.write("not mixing\n")
        return EXIT_NEGATIVE
    dist = ch.distance_trajectory(s, uniform_superposition(bip.d_Cbar), report.fixed_point, args.max_steps)
    if args.csv:
        ch.write_trajectory_csv(args.csv, dist, manifest.header())
    out.write(f"kappa: {_f7(report.kappa)}\n")
    window = (args.max_steps // 3, args.max_steps)
    try:
        fit = ch.fit_decay_rate(dist, window)
    except (ch.UnderflowError, ValueError) as exc:
        out.write(f"fit skipped: {exc}\n")
        return EXIT_OK
    out.write(f"kappa_fit[{window[0]}..{window[1]}]: {_f7(fit)}\n")
    if report.kappa > 0:
        out.write(f"relative difference: {_f7(abs(fit - report.kappa) / report.kappa)}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="localcontrol",
                                     description="Control of spin networks through locally induced relaxation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="graph-automaton controllability certificate")
    p.add_argument("network")
    p.add_argument("--oracle", action="store_true", help="also diagonalize H to test condition ii")
    p.add_argument("--minimal", type=int, metavar="K", help="list minimal certified control sets up to size K")
    p.add_argument("--disorder", type=int, metavar="SEED", help="perturb couplings by 1e-3 relative noise")
    p.add_argument("--dot", metavar="PATH", help="write the final coloring as a DOT graph")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("channel", help="spectrum and mixing of the reduced channel")
    p.add_argument("network")
    p.add_argument("--time", type=float)
    p.add_argument("--prime", action="store_true", help="analyze the time-reversed channel")
    p.set_defaults(func=cmd_channel)

    for name, func in (("download", cmd_download), ("upload", cmd_upload)):
        p = sub.add_parser(name, help=f"{name} fidelity and coding quality")
        p.add_argument("network")
        p.add_argument("--time", type=float)
        p.add_argument("--steps", type=int, default=10)
        p.add_argument("--state", default="random:0", help="random:<seed> or basis:<k>")
        p.add_argument("--csv", metavar="PATH")
        p.add_argument("--no-terminal-swap", action="store_true")
        p.set_defaults(func=func)

    p = sub.add_parser("converge", help="trace-distance trajectory and decay-rate fit")
    p.add_argument("network")
    p.add_argument("--time", type=float)
    p.add_argument("--max-steps", type=int, default=30)
    p.add_argument("--csv", metavar="PATH")
    p.set_defaults(func=cmd_converge)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except (NetworkError, ResourceError, DegenerateCodingError, DimensionMismatchError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
