"""Minimal certified control sets for small paths, stars, cycles and trees.

For each graph the smallest sets the automaton certifies are listed, together with
whether the spectral oracle agrees that the smallest stuck singleton really fails.

    python scripts/control_gallery.py --max-size 3
"""
import argparse

import networkx as nx

from localcontrol.controllability import certify_graph, minimal_control_search, oracle_condition_ii
from localcontrol.network import graph_network

GALLERY = {
    "path5": nx.path_graph(5),
    "star K1,3": nx.star_graph(3),
    "star K1,4": nx.star_graph(4),
    "cycle4": nx.cycle_graph(4),
    "cycle5": nx.cycle_graph(5),
    "binary tree 7": nx.balanced_tree(2, 2),
    "spider 2-2-2": nx.Graph([(0, 1), (1, 2), (0, 3), (3, 4), (0, 5), (5, 6)]),
}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--max-size", type=int, default=3)
    args = parser.parse_args(argv)

    for name, g in GALLERY.items():
        adj = nx.to_numpy_array(g, nodelist=sorted(g.nodes), dtype=bool)
        sets = minimal_control_search(adj, args.max_size)
        shown = " ".join("{" + ",".join(map(str, s)) + "}" for s in sets) or "none"
        print(f"{name:>14}: {shown}")
        stuck = [v for v in range(adj.shape[0]) if not certify_graph(adj, (v,))[0]]
        if stuck:
            res = oracle_condition_ii(graph_network(adj, (stuck[0],)))
            verdict = "holds" if res.holds else f"fails (E={round(res.energy, 4) + 0.0:+.4f})"
            print(f"{'':>14}  site {stuck[0]} alone: not certified, condition ii {verdict}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
