"""Relational morphisms between graphs.

A morphism from G to H is a relation R ⊆ H × G stored as a bool matrix with
rows indexed by the codomain and columns by the domain: ``rel[h, g]`` is true
when h is related to g.  Only edge-preserving relations are admitted.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .graph_core import (
    Graph,
    GraphError,
    bits,
    connected_subsets,
    is_connected_mask,
    make_graph,
    mask_of,
)


class MorphProperty(str, enum.Enum):
    Function = "function"
    Surjective = "surjective"
    Injective = "injective"
    CoSurjective = "co-surjective"
    CoInjective = "co-injective"
    CoBijective = "co-bijective"
    EdgeSurjective = "edge-surjective"
    EdgeWitnessing = "edge-witnessing"
    AntiInjective = "anti-injective"
    StrictlyAntiInjective = "strictly-anti-injective"
    StarRefining = "star-refining"
    CoEdgeWitnessing = "co-edge-witnessing"
    Monotone = "monotone"
    EdgeReflective = "edge-reflective"

    @classmethod
    def parse(cls, name: str) -> "MorphProperty":
        key = name.strip().lower().replace("_", "-")
        for p in cls:
            if p.value == key or p.name.lower() == key.replace("-", ""):
                return p
        raise ValueError(f"unknown morphism property {name!r}")


class EdgePreservationViolation(GraphError):
    def __init__(self, witness: tuple[str, str, str, str]):
        h, g, g2, h2 = witness
        super().__init__(f"{h} ⊐ {g} ⊓ {g2} ⊏ {h2} but {h} and {h2} are not adjacent")
        self.witness = witness


def _prod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Boolean matrix product (float32 BLAS; exact for any size used here)."""
    return (a.astype(np.float32) @ b.astype(np.float32)) > 0


class Morphism:
    __slots__ = ("dom", "cod", "rel", "_cache")

    def __init__(self, dom: Graph, cod: Graph, rel: np.ndarray, verify: bool = True):
        rel = np.array(rel, dtype=bool)
        if rel.shape != (len(cod), len(dom)):
            raise GraphError("relation shape must be |cod| x |dom|")
        rel.setflags(write=False)
        self.dom = dom
        self.cod = cod
        self.rel = rel
        # write-once cache: values are deterministic, so a racing duplicate write is harmless
        self._cache: dict = {}
        if verify:
            w = self.violation()
            if w is not None:
                raise EdgePreservationViolation(w)

    def violation(self) -> tuple[str, str, str, str] | None:
        spread = _prod(_prod(self.rel, self.dom.adj), self.rel.T)
        bad = spread & ~self.cod.adj
        if not bad.any():
            return None
        h, h2 = (int(x) for x in np.argwhere(bad)[0])
        for g in np.flatnonzero(self.rel[h]):
            for g2 in np.flatnonzero(self.dom.adj[g] & self.rel[h2]):
                lab = self.dom.labels
                return (self.cod.labels[h], lab[g], lab[g2], self.cod.labels[h2])
        raise AssertionError("unreachable")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Morphism)
            and self.dom == other.dom
            and self.cod == other.cod
            and np.array_equal(self.rel, other.rel)
        )

    def __hash__(self) -> int:
        return hash((self.dom, self.cod, self.rel.tobytes()))

    def __repr__(self) -> str:
        return f"Morphism({len(self.dom)} -> {len(self.cod)}, {int(self.rel.sum())} pairs)"

    # images and preimages on index sets
    def image_idx(self, g: int) -> list[int]:
        return np.flatnonzero(self.rel[:, g]).tolist()

    def preimage_idx(self, h: int) -> list[int]:
        return np.flatnonzero(self.rel[h]).tolist()

    def col_masks(self) -> list[int]:
        if "col_masks" not in self._cache:
            self._cache["col_masks"] = [mask_of(np.flatnonzero(self.rel[:, g])) for g in range(len(self.dom))]
        return self._cache["col_masks"]

    def row_masks(self) -> list[int]:
        if "row_masks" not in self._cache:
            self._cache["row_masks"] = [mask_of(np.flatnonzero(self.rel[h])) for h in range(len(self.cod))]
        return self._cache["row_masks"]

    def pairs(self) -> list[tuple[str, str]]:
        return [(self.cod.labels[h], self.dom.labels[g]) for h, g in np.argwhere(self.rel)]

    def is_function(self) -> bool:
        return check(self, MorphProperty.Function)

    def as_function(self) -> dict[str, str]:
        if not self.is_function():
            raise GraphError("relation is not a function")
        return {
            self.dom.labels[g]: self.cod.labels[int(np.argmax(self.rel[:, g]))]
            for g in range(len(self.dom))
        }

    def to_json(self) -> dict:
        return {"dom": self.dom.to_json(), "cod": self.cod.to_json(), "pairs": [list(p) for p in self.pairs()]}

    @classmethod
    def from_json(cls, data: dict) -> "Morphism":
        return make_morphism(Graph.from_json(data["dom"]), Graph.from_json(data["cod"]), data["pairs"])


def make_morphism(dom: Graph, cod: Graph, pairs: Iterable) -> Morphism:
    rel = np.zeros((len(cod), len(dom)), dtype=bool)
    for h, g in pairs:
        rel[cod.idx(h), dom.idx(g)] = True
    return Morphism(dom, cod, rel)


def from_mapping(dom: Graph, cod: Graph, mapping: dict) -> Morphism:
    """Build from g -> h or g -> iterable of h."""
    pairs = []
    for g, hs in mapping.items():
        if isinstance(hs, (str, int)):
            hs = [hs]
        pairs.extend((h, g) for h in hs)
    return make_morphism(dom, cod, pairs)


def identity(g: Graph) -> Morphism:
    return Morphism(g, g, np.eye(len(g), dtype=bool), verify=False)


def compose(outer: Morphism, inner: Morphism) -> Morphism:
    """outer ∘ inner: inner goes F -> G, outer goes G -> H."""
    if outer.dom != inner.cod:
        raise GraphError("cannot compose: outer domain differs from inner codomain")
    return Morphism(inner.dom, outer.cod, _prod(outer.rel, inner.rel), verify=False)


def restrict(m: Morphism, dom_sub: Iterable, cod_sub: Iterable) -> Morphism:
    di = sorted({m.dom.idx(v) for v in dom_sub})
    ci = sorted({m.cod.idx(v) for v in cod_sub})
    if not di or not ci:
        raise GraphError("restriction needs non-empty subsets")
    out = Morphism(m.dom.induced(di), m.cod.induced(ci), m.rel[np.ix_(ci, di)], verify=False)
    assert out.violation() is None, "restriction to induced subgraphs lost edge-preservation"
    return out


def restrict_idx(m: Morphism, di: list[int], ci: list[int]) -> Morphism:
    return restrict(m, [m.dom.labels[i] for i in di], [m.cod.labels[i] for i in ci])


# ---------------------------------------------------------------- preimages

FIBER_KINDS = ("preimage", "image", "strict", "sub", "edge")


def fibers_idx(m: Morphism, c: Iterable[int], kind: str) -> set[int]:
    c = set(c)
    if kind == "image":
        return set(np.flatnonzero(m.rel[:, sorted(c)].any(axis=1)).tolist()) if c else set()
    cm = mask_of(c)
    cols = m.col_masks()
    if kind == "preimage":
        return {g for g, im in enumerate(cols) if im & cm}
    if kind == "strict":
        return {g for g, im in enumerate(cols) if im == cm}
    if kind == "sub":
        return {g for g, im in enumerate(cols) if im & ~cm == 0}
    if kind == "edge":
        out = set()
        adj = m.dom.adj
        for f in range(len(m.dom)):
            for g in np.flatnonzero(adj[f]):
                if cols[f] | cols[g] == cm:
                    out.update((f, int(g)))
        return out
    raise ValueError(f"unknown fiber kind {kind!r}")


def fibers(m: Morphism, c: Iterable, kind: str) -> set[str]:
    """Preimage-type sets of a codomain set ``c`` (or the image of a domain set)."""
    src, dst = (m.dom, m.cod) if kind == "image" else (m.cod, m.dom)
    idx = fibers_idx(m, [src.idx(v) for v in c], kind)
    return {dst.labels[i] for i in idx}


# ---------------------------------------------------------------- properties

def _count(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.rint(a.astype(np.float32) @ b.astype(np.float32)).astype(np.int64)


def _function(m):
    return bool((m.rel.sum(axis=0) == 1).all())


def _surjective(m):
    return bool(m.rel.any(axis=1).all())


def _cosurjective(m):
    return bool(m.rel.any(axis=0).all())


def _injective(m):
    rows = m.rel.sum(axis=1)
    hit = m.rel[rows == 1].any(axis=0)
    return bool(hit.all())


def _singleton_columns(m) -> np.ndarray:
    """Per cod vertex h, the number of g whose image is exactly {h}."""
    single = m.rel.sum(axis=0) == 1
    return m.rel[:, single].sum(axis=1)


def _coinjective(m):
    return bool((_singleton_columns(m) >= 1).all())


def _cobijective(m):
    return _cosurjective(m) and _coinjective(m)


def _edge_surjective(m):
    return bool((~m.cod.adj | _prod(_prod(m.rel, m.dom.adj), m.rel.T)).all())


def _edge_witnessing(m):
    return bool((~m.cod.adj | _prod(m.rel, m.rel.T)).all())


def _co_edge_witnessing(m):
    return bool((~m.dom.adj | _prod(m.rel.T, m.rel)).all())


def _anti_injective(m):
    return bool((m.rel.sum(axis=1) >= 2).all())


def _strictly_anti_injective(m):
    return bool((_singleton_columns(m) >= 2).all())


def _star_refining(m):
    # count[h, g] = |closed nbhd(g) ∩ preimage(h)|
    count = _count(m.rel, m.dom.adj)
    need = m.dom.adj.sum(axis=0)
    return bool((count == need[None, :]).any(axis=0).all())


def _monotone(m):
    rows = m.row_masks()
    g = m.dom
    if _edge_surjective(m):
        # connected row preimages suffice once edges are covered
        return all(is_connected_mask(g, r) for r in rows)
    for c in connected_subsets(m.cod):
        pre = 0
        for h in bits(c):
            pre |= rows[h]
        if not is_connected_mask(g, pre):
            return False
    return True


def _edge_reflective(m):
    # for each ordered adjacent pair (h, k): exactly one adjacent pair (g, g')
    # with image(g) = {h} and g' below k
    cols = m.col_masks()
    adj = m.dom.adj
    for i, j in m.cod.edges():
        for h, k in ((i, j), (j, i)):
            strict = [g for g, im in enumerate(cols) if im == 1 << h]
            found = sum(int((adj[g] & m.rel[k]).sum()) for g in strict)
            if found != 1:
                return False
    return True


_CHECKS = {
    MorphProperty.Function: _function,
    MorphProperty.Surjective: _surjective,
    MorphProperty.Injective: _injective,
    MorphProperty.CoSurjective: _cosurjective,
    MorphProperty.CoInjective: _coinjective,
    MorphProperty.CoBijective: _cobijective,
    MorphProperty.EdgeSurjective: _edge_surjective,
    MorphProperty.EdgeWitnessing: _edge_witnessing,
    MorphProperty.AntiInjective: _anti_injective,
    MorphProperty.StrictlyAntiInjective: _strictly_anti_injective,
    MorphProperty.StarRefining: _star_refining,
    MorphProperty.CoEdgeWitnessing: _co_edge_witnessing,
    MorphProperty.Monotone: _monotone,
    MorphProperty.EdgeReflective: _edge_reflective,
}


def check(m: Morphism, p: MorphProperty | str) -> bool:
    if isinstance(p, str) and not isinstance(p, MorphProperty):
        p = MorphProperty.parse(p)
    if p not in m._cache:
        m._cache[p] = _CHECKS[p](m)
    return m._cache[p]


def properties(m: Morphism) -> dict[str, bool]:
    return {p.value: check(m, p) for p in MorphProperty}


# ---------------------------------------------------------------- edge splitting

def split_label(u: str, v: str) -> str:
    return f"{u}>{v}"


def edge_split(g: Graph) -> tuple[Graph, Morphism]:
    """Replace each edge u~v by the path u, u>v, v>u, v."""
    labels = list(g.labels)
    pairs = []
    mapping: dict[str, list[str]] = {lab: [lab] for lab in g.labels}
    for i, j in g.edges():
        u, v = g.labels[i], g.labels[j]
        a, b = split_label(u, v), split_label(v, u)
        labels += [a, b]
        pairs += [(u, a), (a, b), (b, v)]
        mapping[a] = mapping[b] = [u, v]
    h = make_graph(labels, pairs)
    return h, from_mapping(h, g, mapping)


# ---------------------------------------------------------------- enumeration

@dataclass(frozen=True)
class Exhausted:
    nodes: int
    found: int

    def __bool__(self) -> bool:
        return False


def clique_masks(g: Graph, include_empty: bool = False, ceiling: int | None = None) -> list[int]:
    """All complete subgraphs as bitmasks, ordered by size then index."""
    out: list[int] = []
    masks = g.masks

    def grow(cur: int, cand: int):
        out.append(cur)
        if ceiling is not None and len(out) > ceiling:
            raise GraphError("too many cliques")
        for v in bits(cand):
            grow(cur | (1 << v), cand & masks[v] & ~((1 << (v + 1)) - 1))

    grow(0, (1 << len(g)) - 1)
    if not include_empty:
        out = out[1:]
    out.sort(key=lambda c: (bin(c).count("1"), bits(c)))
    return out


def enumerate_morphisms(
    dom: Graph,
    cod: Graph,
    required: Iterable = (),
    budget: int = 1_000_000,
    limit: int | None = None,
    column_filter=None,
    final_filter=None,
) -> list[Morphism] | Exhausted:
    """Backtracking search over the columns of the relation matrix.

    Each column is a clique of ``cod`` (forced by edge-preservation on loops).
    Assigning a column shrinks the admissible images of its neighbours to
    cliques inside the common closed neighbourhood.  ``column_filter(g, mask)``
    prunes individual column choices; ``final_filter(m)`` adds checks beyond
    the named properties.  Returns every solution in deterministic order, or
    the first ``limit`` of them.
    """
    req = {MorphProperty.parse(p) if isinstance(p, str) else p for p in required}
    if budget <= 0:
        raise ValueError("budget must be positive")
    nonempty = bool(req & {MorphProperty.CoSurjective, MorphProperty.CoBijective, MorphProperty.Function})
    cands = clique_masks(cod, include_empty=not nonempty)
    if MorphProperty.Function in req:
        cands = [c for c in cands if c & (c - 1) == 0 and c]
    n = len(dom)
    full = (1 << len(cod)) - 1
    per_col = []
    for gi in range(n):
        opts = cands if column_filter is None else [c for c in cands if column_filter(gi, c)]
        per_col.append(opts)
    nbrs = [dom.neighbors(i) for i in range(n)]
    cmasks = cod.masks

    def common(c: int) -> int:
        acc = full
        for h in bits(c):
            acc &= cmasks[h]
        return acc

    commons = {c: common(c) for c in cands}
    bound = [full] * n
    assign: list[int | None] = [None] * n
    results: list[Morphism] = []
    nodes = 0

    class _Stop(Exception):
        pass

    def finish():
        rel = np.zeros((len(cod), n), dtype=bool)
        for gi, c in enumerate(assign):
            for h in bits(c):
                rel[h, gi] = True
        m = Morphism(dom, cod, rel, verify=False)
        if all(check(m, p) for p in req) and (final_filter is None or final_filter(m)):
            results.append(m)
            if limit is not None and len(results) >= limit:
                raise _Stop

    def search(left: int):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise _Stop
        if left == 0:
            finish()
            return
        best, best_opts = -1, None
        for gi in range(n):
            if assign[gi] is None:
                b = bound[gi]
                opts = [c for c in per_col[gi] if c & ~b == 0]
                if best_opts is None or len(opts) < len(best_opts):
                    best, best_opts = gi, opts
                    if not opts:
                        return
        for c in best_opts:
            assign[best] = c
            saved = [(j, bound[j]) for j in nbrs[best] if assign[j] is None]
            cm = commons[c]
            for j, _ in saved:
                bound[j] &= cm
            search(left - 1)
            for j, b in saved:
                bound[j] = b
            assign[best] = None

    try:
        search(n)
    except _Stop:
        if nodes > budget:
            return Exhausted(nodes=nodes, found=len(results))
    return results
