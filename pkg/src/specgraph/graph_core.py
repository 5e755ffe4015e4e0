"""Finite graphs with a reflexive symmetric edge relation.

Vertices carry string labels; every algorithm runs on integer indices and
the label <-> index map travels with the graph.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence as Seq

import numpy as np


class GraphError(ValueError):
    pass


class Graph:
    """Immutable finite graph. ``adj`` is a read-only bool matrix with a true diagonal."""

    __slots__ = ("labels", "adj", "index", "masks")

    def __init__(self, labels: Seq[str], adj: np.ndarray):
        labels = tuple(str(x) for x in labels)
        if not labels:
            raise GraphError("empty vertex set")
        if len(set(labels)) != len(labels):
            raise GraphError("duplicate vertex label")
        adj = np.array(adj, dtype=bool)
        n = len(labels)
        if adj.shape != (n, n):
            raise GraphError("adjacency shape does not match vertex count")
        adj = adj | adj.T
        np.fill_diagonal(adj, True)
        adj.setflags(write=False)
        self.labels = labels
        self.adj = adj
        self.index = {lab: i for i, lab in enumerate(labels)}
        # closed neighbourhoods as bitmasks
        self.masks = tuple(mask_of(np.flatnonzero(adj[i])) for i in range(n))

    def __len__(self) -> int:
        return len(self.labels)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Graph)
            and self.labels == other.labels
            and np.array_equal(self.adj, other.adj)
        )

    def __hash__(self) -> int:
        return hash((self.labels, self.adj.tobytes()))

    def __repr__(self) -> str:
        return f"Graph({len(self)} vertices, {len(self.edges())} edges)"

    def idx(self, v) -> int:
        try:
            return self.index[str(v)]
        except KeyError:
            raise GraphError(f"unknown vertex {v!r}") from None

    def neighbors(self, i: int) -> list[int]:
        """Open neighbourhood of index ``i``."""
        return [j for j in np.flatnonzero(self.adj[i]) if j != i]

    def degree(self, i: int) -> int:
        return int(self.adj[i].sum()) - 1

    def edges(self) -> list[tuple[int, int]]:
        """Non-loop edges as index pairs (i < j)."""
        iu, ju = np.nonzero(np.triu(self.adj, 1))
        return list(zip(iu.tolist(), ju.tolist()))

    def induced(self, idxs: Iterable[int]) -> "Graph":
        idxs = sorted(set(idxs))
        return Graph([self.labels[i] for i in idxs], self.adj[np.ix_(idxs, idxs)])

    def to_json(self) -> dict:
        return {
            "vertices": list(self.labels),
            "edges": [[self.labels[i], self.labels[j]] for i, j in self.edges()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Graph":
        return make_graph(data["vertices"], data.get("edges", []))

    def to_dot(self, name: str = "G") -> str:
        lines = [f"graph {name} {{"]
        for lab in self.labels:
            lines.append(f'  "{lab}";')
        for i, j in self.edges():
            lines.append(f'  "{self.labels[i]}" -- "{self.labels[j]}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def make_graph(labels: Seq, adjacent_pairs: Iterable = ()) -> Graph:
    labels = [str(x) for x in labels]
    if not labels:
        raise GraphError("empty vertex set")
    if len(set(labels)) != len(labels):
        raise GraphError("duplicate vertex label")
    index = {lab: i for i, lab in enumerate(labels)}
    adj = np.zeros((len(labels), len(labels)), dtype=bool)
    for u, v in adjacent_pairs:
        u, v = str(u), str(v)
        if u not in index or v not in index:
            raise GraphError(f"edge ({u}, {v}) references an unknown vertex")
        adj[index[u], index[v]] = adj[index[v], index[u]] = True
    return Graph(labels, adj)


def path_graph(labels: Seq) -> Graph:
    labels = list(labels)
    return make_graph(labels, zip(labels, labels[1:]))


def cycle_graph(labels: Seq) -> Graph:
    labels = list(labels)
    if len(labels) < 3:
        raise GraphError("a cycle needs at least 3 vertices")
    return make_graph(labels, zip(labels, labels[1:] + labels[:1]))


def discrete_graph(labels: Seq) -> Graph:
    return make_graph(labels, [])


def fan_graph(spoke_lengths: Seq[int], root: str = "0") -> Graph:
    """Fan with one spoke per entry; a spoke of length k has k non-root vertices."""
    labels = [root]
    pairs = []
    for s, k in enumerate(spoke_lengths):
        prev = root
        for j in range(1, k + 1):
            lab = f"s{s}_{j}"
            labels.append(lab)
            pairs.append((prev, lab))
            prev = lab
    return make_graph(labels, pairs)


# ---------------------------------------------------------------- bitmasks

def mask_of(idxs: Iterable[int]) -> int:
    m = 0
    for i in idxs:
        m |= 1 << int(i)
    return m


def bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def closure_in(g: Graph, start: int, within: int) -> int:
    """Vertices of ``within`` reachable from ``start`` inside ``within``."""
    seen = start
    frontier = start
    masks = g.masks
    while frontier:
        nxt = 0
        for i in bits(frontier):
            nxt |= masks[i]
        nxt &= within & ~seen
        seen |= nxt
        frontier = nxt
    return seen


def is_connected_mask(g: Graph, mask: int) -> bool:
    # the empty set counts as connected
    if mask == 0:
        return True
    low = mask & -mask
    return closure_in(g, low, mask) == mask


def is_connected_set(g: Graph, idxs: Iterable[int]) -> bool:
    return is_connected_mask(g, mask_of(idxs))


def connected_subsets(g: Graph, limit: int | None = None) -> list[int]:
    """All non-empty connected vertex sets, as bitmasks, each produced once.

    Sets are grown from their least vertex; a candidate skipped at one
    branch is excluded from its later siblings.
    """
    out: list[int] = []
    masks = g.masks

    def extend(sub: int, cand: int, excl: int):
        out.append(sub)
        if limit is not None and len(out) > limit:
            raise GraphError("too many connected subsets")
        for v in bits(cand):
            excl |= 1 << v
            grown = sub | (1 << v)
            extend(grown, (cand | masks[v]) & ~grown & ~excl & allowed, excl)

    for r in range(len(g)):
        allowed = ~((1 << (r + 1)) - 1)
        extend(1 << r, masks[r] & allowed, 0)
    return out


# ---------------------------------------------------------------- structure

def components(g: Graph) -> list[list[str]]:
    left = (1 << len(g)) - 1
    blocks = []
    while left:
        low = left & -left
        comp = closure_in(g, low, left)
        blocks.append([g.labels[i] for i in bits(comp)])
        left &= ~comp
    return blocks


def component_masks(g: Graph, within: int | None = None) -> list[int]:
    left = (1 << len(g)) - 1 if within is None else within
    out = []
    while left:
        comp = closure_in(g, left & -left, left)
        out.append(comp)
        left &= ~comp
    return out


def ends(g: Graph) -> set[str]:
    return {g.labels[i] for i in range(len(g)) if g.degree(i) <= 1}


def end_indices(g: Graph) -> list[int]:
    return [i for i in range(len(g)) if g.degree(i) <= 1]


@dataclass(frozen=True)
class GraphClass:
    discrete: bool
    connected: bool
    triangle_free: bool
    acyclic: bool
    path: bool
    tree: bool
    fan: bool
    cycle: bool
    root: str | None = None

    def flags(self) -> set[str]:
        names = ("discrete", "connected", "triangle_free", "acyclic", "path", "tree", "fan", "cycle")
        return {n for n in names if getattr(self, n)}


def classify(g: Graph) -> GraphClass:
    n = len(g)
    m = len(g.edges())
    ncomp = len(component_masks(g))
    degs = [g.degree(i) for i in range(n)]
    # a forest has exactly n - (#components) edges
    acyclic = m == n - ncomp
    connected = ncomp == 1
    tree = acyclic and connected
    triangle_free = True
    for i, j in g.edges():
        if g.masks[i] & g.masks[j] & ~((1 << i) | (1 << j)):
            triangle_free = False
            break
    path = tree and max(degs) <= 2
    branching = [i for i in range(n) if degs[i] >= 3]
    fan = tree and len(branching) == 1
    cycle = connected and n >= 3 and all(d == 2 for d in degs)
    return GraphClass(
        discrete=m == 0,
        connected=connected,
        triangle_free=triangle_free,
        acyclic=acyclic,
        path=path,
        tree=tree,
        fan=fan,
        cycle=cycle,
        root=g.labels[branching[0]] if fan else None,
    )


def path_order(g: Graph) -> list[int]:
    """Indices of a path graph in order, starting from the end with the least label."""
    n = len(g)
    if n == 1:
        return [0]
    if not classify(g).path:
        raise GraphError("graph is not a path")
    start = int(min(end_indices(g), key=lambda i: g.labels[i]))
    order = [start]
    prev = -1
    while len(order) < n:
        cur = order[-1]
        nxt = [j for j in g.neighbors(cur) if j != prev]
        prev = cur
        order.append(int(nxt[0]))
    return order


def subpath(g: Graph, q, r, open_: bool = False) -> set[str]:
    """The smallest connected set containing q and r; ``open_`` drops q and r."""
    order = path_order(g)
    pos = {v: k for k, v in enumerate(order)}
    a, b = sorted((pos[g.idx(q)], pos[g.idx(r)]))
    if open_:
        seg = order[a + 1:b]
    else:
        seg = order[a:b + 1]
    return {g.labels[i] for i in seg}


# ---------------------------------------------------------------- realisations

def overlap_realisation(g: Graph) -> dict[str, frozenset]:
    """s_v = {{v, w} : v adjacent-or-equal w}; {v} is the private element of s_v."""
    out = {}
    for i, lab in enumerate(g.labels):
        out[lab] = frozenset(frozenset((lab, g.labels[j])) for j in np.flatnonzero(g.adj[i]))
    return out


def is_overlap_realisation(g: Graph, real: dict) -> bool:
    labs = g.labels
    for i, j in combinations(range(len(g)), 2):
        if bool(real[labs[i]] & real[labs[j]]) != bool(g.adj[i, j]):
            return False
    return all(real[lab] for lab in labs)


def is_non_degenerate(real: dict) -> bool:
    """Every set has an element no other set contains."""
    for k, s in real.items():
        others = set().union(*(t for k2, t in real.items() if k2 != k))
        if not (s - others):
            return False
    return True


def consolidation_realisation(m) -> tuple[dict, dict]:
    """Overlap realisation of the domain and its consolidation t_h = union of s_g over g below h."""
    from .relations import MorphProperty, check

    for p in (MorphProperty.CoSurjective, MorphProperty.EdgeSurjective):
        if not check(m, p):
            raise GraphError(f"consolidation needs a {p.value} morphism")
    s = overlap_realisation(m.dom)
    t = {}
    for h, hlab in enumerate(m.cod.labels):
        below = np.flatnonzero(m.rel[h])
        t[hlab] = frozenset().union(*(s[m.dom.labels[g]] for g in below))
    return s, t


def is_consolidation(m, s: dict, t: dict) -> bool:
    """Each t_h is the union of the s_g it contains, and each s_g lies in some t_h."""
    for hlab, th in t.items():
        inside = [sg for sg in s.values() if sg <= th]
        if frozenset().union(*inside) != th:
            return False
    return all(any(sg <= th for th in t.values()) for sg in s.values())
