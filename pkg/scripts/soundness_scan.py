"""Compare the automaton certificate with the spectral oracle on all small graphs.

Counts the four (certified, oracle) outcomes per graph size. Certified-but-failing
cases would falsify the certificate; not-certified-but-holding ones show how
conservative it is.

    python scripts/soundness_scan.py --max-n 5 --model HEISENBERG
"""
import argparse
import itertools
import time
from collections import Counter

import networkx as nx

from localcontrol.controllability import certify_graph, oracle_condition_ii
from localcontrol.network import Coupling, graph_network


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--max-n", type=int, default=5)
    parser.add_argument("--model", choices=[c.value for c in Coupling], default="XX")
    args = parser.parse_args(argv)

    start = time.perf_counter()
    print("n,certified_holds,certified_fails,stuck_holds,stuck_fails")
    for n in range(2, args.max_n + 1):
        tally = Counter()
        for g in nx.graph_atlas_g():
            if g.number_of_nodes() != n or not nx.is_connected(g):
                continue
            adj = nx.to_numpy_array(g, nodelist=range(n), dtype=bool)
            for k in range(1, n):
                for control in itertools.combinations(range(n), k):
                    certified = certify_graph(adj, control)[0]
                    holds = oracle_condition_ii(graph_network(adj, control, model=Coupling(args.model))).holds
                    tally[certified, holds] += 1
        print(f"{n},{tally[True, True]},{tally[True, False]},{tally[False, True]},{tally[False, False]}")
    print(f"# {time.perf_counter() - start:.1f}s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
