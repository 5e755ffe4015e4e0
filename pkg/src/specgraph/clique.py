"""Clique graphs, the induced maps between them, and the membership morphism."""
from __future__ import annotations

import numpy as np

from .graph_core import Graph, GraphError, bits
from .relations import Morphism, MorphProperty, check, clique_masks

DEFAULT_CEILING = 4096


class TooLarge(GraphError):
    pass


def clique_label(g: Graph, mask: int) -> str:
    return "{" + ",".join(sorted(g.labels[i] for i in bits(mask))) + "}"


def _sorted_cliques(g: Graph, ceiling: int) -> list[int]:
    try:
        cl = clique_masks(g, ceiling=ceiling)
    except GraphError:
        raise TooLarge(f"more than {ceiling} cliques") from None
    return sorted(cl, key=lambda c: sorted(g.labels[i] for i in bits(c)))


def cliques(g: Graph, ceiling: int = DEFAULT_CEILING) -> list[int]:
    """Non-empty cliques of ``g`` as bitmasks in the vertex order of the clique graph."""
    return _sorted_cliques(g, ceiling)


def clique_graph(g: Graph, ceiling: int = DEFAULT_CEILING) -> Graph:
    """Cliques of ``g``, adjacent when one contains the other."""
    cl = _sorted_cliques(g, ceiling)
    k = len(cl)
    adj = np.zeros((k, k), dtype=bool)
    for i, a in enumerate(cl):
        for j in range(i + 1, k):
            b = cl[j]
            if a & b == a or a & b == b:
                adj[i, j] = adj[j, i] = True
    return Graph([clique_label(g, c) for c in cl], adj)


def membership(g: Graph, ceiling: int = DEFAULT_CEILING) -> Morphism:
    """The relation from the clique graph to ``g``: v is related to every clique containing it."""
    cl = _sorted_cliques(g, ceiling)
    xg = clique_graph(g, ceiling)
    rel = np.zeros((len(g), len(cl)), dtype=bool)
    for j, c in enumerate(cl):
        rel[bits(c), j] = True
    return Morphism(xg, g, rel, verify=False)


def clique_map(m: Morphism, ceiling: int = DEFAULT_CEILING) -> Morphism:
    """The function sending a clique of the domain to its image clique."""
    if not check(m, MorphProperty.CoSurjective):
        raise GraphError("clique map needs a co-surjective morphism")
    dom_cl = _sorted_cliques(m.dom, ceiling)
    cod_cl = _sorted_cliques(m.cod, ceiling)
    pos = {c: i for i, c in enumerate(cod_cl)}
    cols = m.col_masks()
    rel = np.zeros((len(cod_cl), len(dom_cl)), dtype=bool)
    for j, c in enumerate(dom_cl):
        img = 0
        for g in bits(c):
            img |= cols[g]
        rel[pos[img], j] = True
    return Morphism(clique_graph(m.dom, ceiling), clique_graph(m.cod, ceiling), rel, verify=False)
