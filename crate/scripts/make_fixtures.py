#!/usr/bin/env python3
"""Write the edge lists used by the tests.

Karate club and Les Miserables come from the copies bundled with networkx,
with 1-based vertex ids in networkx node order. The ladder graphs and the
disjoint-block planted partition are generated. Run from the repository root.
"""
import hashlib
import pathlib

import networkx as nx

OUT = pathlib.Path("fixtures")


def write(name, g, comment):
    nodes = list(g.nodes())
    idx = {v: i + 1 for i, v in enumerate(nodes)}
    lines = [f"# {comment}", f"n {len(nodes)}"]
    if nodes != list(range(len(nodes))):
        lines += [f"# {idx[v]} {v}" for v in nodes]
    for u, v, d in g.edges(data=True):
        i, j = sorted((idx[u], idx[v]))
        w = d.get("weight", 1.0)
        lines.append(f"{i} {j} {float(w)!r}")
    path = OUT / f"{name}.txt"
    path.write_text("\n".join(lines) + "\n")
    return path


def ladder(n):
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edge(0, 1)
    for i in range(1, n - 1):
        g.add_edge(i, i + 1)
        if i + 2 < n:
            g.add_edge(i, i + 2)
    return g


def disjoint_blocks(blocks, size):
    g = nx.Graph()
    g.add_nodes_from(range(blocks * size))
    for b in range(blocks):
        for i in range(size):
            for j in range(i + 1, size):
                g.add_edge(b * size + i, b * size + j)
    return g


def main():
    OUT.mkdir(exist_ok=True)
    paths = [
        write("karate", nx.karate_club_graph(), "Zachary karate club, weighted (networkx)"),
        write("lesmis", nx.les_miserables_graph(), "Les Miserables co-occurrence, weighted (networkx)"),
        write("ladder8", ladder(8), "ladder graph, N = 8"),
        write("ladder20", ladder(20), "ladder graph, N = 20"),
        write("planted_disjoint", disjoint_blocks(4, 10), "planted partition, 4 blocks of 10, p_in = 1, p_out = 0"),
    ]
    sums = [f"{hashlib.sha256(p.read_bytes()).hexdigest()}  {p.name}" for p in paths]
    (OUT / "SHA256SUMS").write_text("\n".join(sums) + "\n")


if __name__ == "__main__":
    main()
