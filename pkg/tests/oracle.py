"""Brute-force reference implementations over plain sets.

Nothing here imports the package's relation or graph algorithms; a graph is
(vertices, edges) with edges a set of 2-element frozensets, and a relation
from G to H is a set of (h, g) pairs.
"""
from __future__ import annotations

import itertools
import random
from typing import Iterable

import networkx as nx


class G:
    def __init__(self, vertices: Iterable[str], edges: Iterable = ()):
        self.V = list(vertices)
        self.E = {frozenset(e) for e in edges if len(set(e)) == 2}

    def meets(self, a, b) -> bool:
        """Reflexive edge relation."""
        return a == b or frozenset((a, b)) in self.E

    def adjacent(self, a, b) -> bool:
        return a != b and frozenset((a, b)) in self.E

    def closed_nbhd(self, a) -> set:
        return {b for b in self.V if self.meets(a, b)}

    def nx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.V)
        g.add_edges_from(tuple(e) for e in self.E)
        return g

    def connected(self, subset) -> bool:
        subset = set(subset)
        if not subset:
            return True
        return nx.is_connected(self.nx().subgraph(subset))

    def connected_subsets(self):
        for k in range(1, len(self.V) + 1):
            for c in itertools.combinations(self.V, k):
                if self.connected(c):
                    yield set(c)

    def cliques(self) -> list[frozenset]:
        out = []
        for k in range(1, len(self.V) + 1):
            for c in itertools.combinations(self.V, k):
                if all(self.meets(a, b) for a, b in itertools.combinations(c, 2)):
                    out.append(frozenset(c))
        return out


def from_graph(g) -> G:
    """Convert a package Graph by reading labels and its edge list only."""
    lab = g.labels
    return G(lab, [(lab[i], lab[j]) for i, j in g.edges()])


def pairs_of(m) -> set:
    return {(h, g) for h, g in m.pairs()}


# ---------------------------------------------------------------- relation calculus

def image(R, g) -> set:
    return {h for h, x in R if x == g}


def preimage(R, h) -> set:
    return {g for y, g in R if y == h}


def strict(R, dom: G, C) -> set:
    C = set(C)
    return {g for g in dom.V if image(R, g) == C}


def compose(outer, inner) -> set:
    return {(h, f) for h, g in outer for g2, f in inner if g == g2}


def edge_preserving(R, dom: G, cod: G) -> bool:
    return all(
        cod.meets(h, h2)
        for h, g in R for h2, g2 in R
        if dom.meets(g, g2)
    )


def function(R, dom, cod):
    return all(len(image(R, g)) == 1 for g in dom.V)


def surjective(R, dom, cod):
    return all(preimage(R, h) for h in cod.V)


def cosurjective(R, dom, cod):
    return all(image(R, g) for g in dom.V)


def coinjective(R, dom, cod):
    return all(strict(R, dom, {h}) for h in cod.V)


def cobijective(R, dom, cod):
    return cosurjective(R, dom, cod) and coinjective(R, dom, cod)


def edge_surjective(R, dom, cod):
    return all(
        any(h in image(R, g) and h2 in image(R, g2) for g in dom.V for g2 in dom.V if dom.meets(g, g2))
        for h in cod.V for h2 in cod.V if cod.meets(h, h2)
    )


def edge_witnessing(R, dom, cod):
    return all(
        any({h, h2} <= image(R, g) for g in dom.V)
        for h in cod.V for h2 in cod.V if cod.meets(h, h2)
    )


def anti_injective(R, dom, cod):
    return all(len(preimage(R, h)) >= 2 for h in cod.V)


def strictly_anti_injective(R, dom, cod):
    return all(len(strict(R, dom, {h})) >= 2 for h in cod.V)


def star_refining(R, dom, cod):
    return all(any(dom.closed_nbhd(g) <= preimage(R, h) for h in cod.V) for g in dom.V)


def monotone(R, dom, cod):
    for C in cod.connected_subsets():
        pre = set().union(*(preimage(R, h) for h in C))
        if not dom.connected(pre):
            return False
    return True


def edge_reflective(R, dom, cod):
    for h in cod.V:
        for h2 in cod.V:
            if not cod.adjacent(h, h2):
                continue
            found = [
                (g, g2)
                for g in strict(R, dom, {h})
                for g2 in dom.V
                if dom.adjacent(g, g2) and h2 in image(R, g2)
            ]
            if len(found) != 1:
                return False
    return True


PROPS = {
    "function": function,
    "surjective": surjective,
    "co-surjective": cosurjective,
    "co-injective": coinjective,
    "co-bijective": cobijective,
    "edge-surjective": edge_surjective,
    "edge-witnessing": edge_witnessing,
    "anti-injective": anti_injective,
    "strictly-anti-injective": strictly_anti_injective,
    "star-refining": star_refining,
    "monotone": monotone,
    "edge-reflective": edge_reflective,
}


def all_relations(dom: G, cod: G):
    """Every edge-preserving relation between two small graphs."""
    cells = [(h, g) for h in cod.V for g in dom.V]
    for bitsel in itertools.product((0, 1), repeat=len(cells)):
        R = {c for c, b in zip(cells, bitsel) if b}
        if edge_preserving(R, dom, cod):
            yield R


def cobijective_relations(dom: G, cod: G):
    """Co-bijective edge-preserving relations, column by column over cliques."""
    cl = cod.cliques()
    for cols in itertools.product(cl, repeat=len(dom.V)):
        R = {(h, g) for g, c in zip(dom.V, cols) for h in c}
        if edge_preserving(R, dom, cod) and coinjective(R, dom, cod):
            yield R


# ---------------------------------------------------------------- small graphs

def path(n: int, prefix: str = "p") -> G:
    vs = [f"{prefix}{i}" for i in range(n)]
    return G(vs, zip(vs, vs[1:]))


def random_graph(rng: random.Random, n: int, p: float = 0.4, prefix: str = "v") -> G:
    vs = [f"{prefix}{i}" for i in range(n)]
    return G(vs, [e for e in itertools.combinations(vs, 2) if rng.random() < p])


# ---------------------------------------------------------------- fans

def fan_spokes(g: G, root: str) -> list[list[str]]:
    """Root-first vertex lists of the spokes of a fan."""
    out = []
    for first in sorted(v for v in g.V if g.adjacent(root, v)):
        walk = [root, first]
        while True:
            nxt = [v for v in g.V if g.adjacent(walk[-1], v) and v != walk[-2]]
            if not nxt:
                break
            walk.append(nxt[0])
        out.append(walk)
    return out


def fan_ends(g: G, root: str) -> set:
    return {v for v in g.V if v != root and sum(g.adjacent(v, w) for w in g.V) == 1}


def spoke_monotone(R, dom: G, cod: G, droot: str, croot: str) -> bool:
    if image(R, droot) != {croot}:
        return False
    tspokes = fan_spokes(cod, croot)
    for S in fan_spokes(dom, droot):
        img = set().union(*(image(R, g) for g in S))
        ok = False
        for T in tspokes:
            if img <= set(T):
                sub = {(h, g) for h, g in R if h in T and g in S}
                if monotone(sub, G(S, [e for e in dom.E if e <= set(S)]), G(T, [e for e in cod.E if e <= set(T)])):
                    ok = True
                    break
        if not ok:
            return False
    return True


def end_preserving(R, dom: G, cod: G, droot: str, croot: str) -> bool:
    ce = fan_ends(cod, croot)
    return all(image(R, e) <= ce for e in fan_ends(dom, droot))
