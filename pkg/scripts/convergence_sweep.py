"""Sweep the step count L and tabulate eta, the fidelity bound and measured fidelities.

Also prints 1 - eta next to kappa^L, which it should stay below up to a constant.

    python scripts/convergence_sweep.py networks/path3_end.toml --max-steps 16 --seed 7
"""
import argparse
import sys

from localcontrol.channel import build_tau, spectral_report
from localcontrol.cli import make_rng
from localcontrol.network import build_hamiltonian, load_network, ordered_bipartition
from localcontrol.protocol import CONVERGENCE_HEADER, convergence_row, max_feasible_steps
from localcontrol.quantum import StateVector, propagator, random_state


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("network")
    parser.add_argument("--time", type=float, default=1.0)
    parser.add_argument("--max-steps", type=int, default=12)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    net = load_network(args.network)
    bip = ordered_bipartition(net)
    u = propagator(bip.operator_to_split(build_hamiltonian(net)), args.time)
    kappa = spectral_report(build_tau(u, bip)).kappa
    top = min(args.max_steps, max_feasible_steps(bip))
    if top < args.max_steps:
        print(f"# capping L at {top} (amplitude budget)", file=sys.stderr)

    d = bip.d_C * bip.d_Cbar
    psi = StateVector(random_state((d,), make_rng(args.seed)).amplitudes, (bip.d_C, bip.d_Cbar))
    print(",".join(CONVERGENCE_HEADER + ["kappa_pow_L"]))
    for steps in range(1, top + 1):
        row = convergence_row(net, args.time, steps, psi)
        print(",".join(map(str, row.csv_fields() + [repr(float(kappa ** steps))])))
    return 0


if __name__ == "__main__":
    sys.exit(main())
