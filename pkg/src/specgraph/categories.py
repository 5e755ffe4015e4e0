"""Concrete categories of finite graphs, their amalgamation, and Fraïssé prefixes.

Six categories are described by a CategorySpec:

    D  discrete graphs, surjective functions
    A  paths, co-bijective monotone relations
    P  paths, co-bijective relations (checks only, no amalgamator)
    X  fans, co-bijective spoke-monotone end-preserving relations
    L  fans, co-bijective spoke-monotone relations
    C  cycles, co-bijective monotone relations (checks only)

Every amalgamation result is verified by comparing relation matrices; a
mismatch raises AmalgamationError rather than returning a wrong square.
"""
from __future__ import annotations

import random
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator

import numpy as np

from .clique import clique_map, membership
from .graph_core import (
    Graph,
    GraphError,
    bits,
    classify,
    cycle_graph,
    discrete_graph,
    fan_graph,
    make_graph,
    path_graph,
    path_order,
)
from .relations import (
    Exhausted,
    Morphism,
    MorphProperty,
    check,
    compose,
    enumerate_morphisms,
    identity,
)
from .sequences import (
    FailsOnPrefix,
    Holds,
    Sequence,
    Unknown,
    Verdict,
    combine,
    has_subsequence_in,
    make_sequence,
    surjective_core,
    upper_restriction,
)
from . import fans as _fans


class CategoryError(GraphError):
    pass


class AmalgamationError(CategoryError):
    """An amalgamator produced a square that does not commute or leaves the category."""


# ---------------------------------------------------------------- descriptors

def _is_fan(g: Graph, root: str | None = None) -> bool:
    if root is None:
        return classify(g).fan
    try:
        _fans.fan_structure(g, root)
    except GraphError:
        return False
    return True


@dataclass(frozen=True)
class CategorySpec:
    name: str
    objects: str
    required: tuple[MorphProperty, ...]
    fan_props: tuple[str, ...] = ()
    amalgamator: Callable | None = None
    terminal: Graph | None = None
    size_bound: int = 6
    # the full ideal is applied every ``ideal_period`` steps counted back from
    # the last step; 0 means only on the last step
    ideal_period: int = 1

    def __repr__(self) -> str:
        return f"CategorySpec({self.name})"

    @property
    def fan(self) -> bool:
        return self.objects == "fan"

    def is_object(self, g: Graph, root: str | None = None) -> bool:
        cls = classify(g)
        if self.objects == "discrete":
            return cls.discrete
        if self.objects == "path":
            return cls.path
        if self.objects == "cycle":
            return cls.cycle
        return _is_fan(g, root)

    def is_morphism(self, m: Morphism, dom_root: str | None = None, cod_root: str | None = None) -> bool:
        if not (self.is_object(m.dom, dom_root) and self.is_object(m.cod, cod_root)):
            return False
        if m.violation() is not None:
            return False
        if not all(check(m, p) for p in self.required):
            return False
        return all(_fans.fan_check(m, p, dom_root, cod_root) for p in self.fan_props)

    def column_filter(self, dom: Graph, cod: Graph, dom_root: str | None = None, cod_root: str | None = None):
        """Cheap per-column pruning for enumerate_morphisms; None when nothing applies."""
        if not self.fan:
            return None
        dr, _ = _fans._structure(dom, dom_root)
        cr, _ = _fans._structure(cod, cod_root)
        dends = _fans._ends_mask(dom, dom_root)
        cends = _fans._ends_mask(cod, cod_root)
        end_preserving = "end-preserving" in self.fan_props

        def keep(gi: int, mask: int) -> bool:
            if gi == dr:
                return mask == 1 << cr
            if end_preserving and dends >> gi & 1:
                return mask & ~cends == 0
            return True

        return keep

    def small_objects(self, bound: int | None = None) -> Iterator[Graph]:
        """Canonical representatives with at most ``bound`` vertices."""
        bound = self.size_bound if bound is None else bound
        if self.objects == "discrete":
            for k in range(1, bound + 1):
                yield discrete_graph([f"v{i}" for i in range(k)])
        elif self.objects == "path":
            for k in range(1, bound + 1):
                yield path_graph([f"v{i}" for i in range(k)])
        elif self.objects == "cycle":
            for k in range(3, bound + 1):
                yield cycle_graph([f"v{i}" for i in range(k)])
        else:
            for lengths in _spoke_multisets(bound - 1):
                yield fan_graph(lengths)


def _spoke_multisets(total: int) -> Iterator[tuple[int, ...]]:
    """Non-increasing tuples of at least three positive parts with sum <= total."""

    def parts(left: int, cap: int) -> Iterator[tuple[int, ...]]:
        yield ()
        for k in range(min(left, cap), 0, -1):
            for rest in parts(left - k, k):
                yield (k,) + rest

    found = sorted((p for p in parts(total, total) if len(p) >= 3), key=lambda p: (sum(p), len(p), p))
    yield from found


# ---------------------------------------------------------------- types on paths

@dataclass
class TypeFunction:
    """Sizes of strict preimages of the cliques (vertices and edges) of a path."""

    path: Graph
    values: dict[frozenset, int]

    def __call__(self, *labels: str) -> int:
        return self.values[frozenset(labels)]

    def is_type(self) -> bool:
        return all(self.values[frozenset([q])] >= 1 for q in self.path.labels)

    def __le__(self, other: "TypeFunction") -> bool:
        if self.path != other.path:
            raise CategoryError("types over different paths are not comparable")
        return all(v <= other.values[k] for k, v in self.values.items())

    def __eq__(self, other) -> bool:
        return isinstance(other, TypeFunction) and self.path == other.path and self.values == other.values

    def pointwise_max(self, other: "TypeFunction") -> "TypeFunction":
        if self.path != other.path:
            raise CategoryError("types over different paths cannot be combined")
        return TypeFunction(self.path, {k: max(v, other.values[k]) for k, v in self.values.items()})

    def to_json(self) -> list:
        return [[sorted(k), v] for k, v in sorted(self.values.items(), key=lambda kv: sorted(kv[0]))]


def _clique_sequence(q: Graph) -> list[int]:
    """Vertex and edge cliques of a path as bitmasks, from one end to the other."""
    order = path_order(q)
    seq = [1 << order[0]]
    for a, b in zip(order, order[1:]):
        seq += [(1 << a) | (1 << b), 1 << b]
    return seq


def _require_paths(m: Morphism) -> None:
    if not (classify(m.dom).path and classify(m.cod).path):
        raise CategoryError("types are defined for morphisms between paths")


def type_of(m: Morphism) -> TypeFunction:
    _require_paths(m)
    counts = Counter(m.col_masks())
    lab = m.cod.labels
    return TypeFunction(m.cod, {frozenset(lab[i] for i in bits(c)): counts.get(c, 0) for c in _clique_sequence(m.cod)})


def make_type(q: Graph, vertex: int | Callable = 1, edge: int | Callable = 0) -> TypeFunction:
    """Type with constant (or computed) values on vertices and on edges."""
    vals = {}
    for c in _clique_sequence(q):
        labels = frozenset(q.labels[i] for i in bits(c))
        f = vertex if len(labels) == 1 else edge
        vals[labels] = f(labels) if callable(f) else int(f)
    return TypeFunction(q, vals)


def realize_type(q: Graph, t: TypeFunction) -> tuple[Graph, Morphism]:
    """A path P and a morphism P -> q in A whose type is ``t``.

    Blocks of t({v}) vertices for each vertex v are joined by blocks of
    t({v, w}) vertices related to both v and w, laid out from the end of q
    with the least label.
    """
    if t.path != q:
        raise CategoryError("type belongs to a different path")
    if not t.is_type():
        raise CategoryError("every vertex needs a strict preimage of size >= 1")
    cols: list[int] = []
    for c in _clique_sequence(q):
        cols += [c] * t.values[frozenset(q.labels[i] for i in bits(c))]
    p = path_graph([f"p{i}" for i in range(len(cols))])
    rel = np.zeros((len(q), len(p)), dtype=bool)
    for j, c in enumerate(cols):
        rel[bits(c), j] = True
    return p, Morphism(p, q, rel)


def _in_A(m: Morphism) -> bool:
    return CATEGORIES["A"].is_morphism(m)


def _blocks(m: Morphism) -> tuple[list[int], dict[int, list[int]]]:
    """Strict-preimage blocks of an A-morphism, in the order of the codomain path."""
    seq = _clique_sequence(m.cod)
    order = path_order(m.dom)
    cols = m.col_masks()
    if len(m.cod) > 1 and cols[order[0]] != seq[0]:
        order.reverse()
    blocks: dict[int, list[int]] = {c: [] for c in seq}
    for p in order:
        if cols[p] not in blocks:
            raise CategoryError("morphism is not in A: a vertex is related to a non-clique")
        blocks[cols[p]].append(p)
    if [p for c in seq for p in blocks[c]] != order:
        raise CategoryError("morphism is not in A: strict preimages are out of order")
    return seq, blocks


def factor_by_type(big: Morphism, small: Morphism) -> Morphism | None:
    """A morphism d with big ∘ d = small, or None when the type of ``big`` is
    not below the type of ``small``.  The factor is a function whenever every
    edge with empty strict preimage under ``big`` also has one under ``small``."""
    if big.cod != small.cod:
        raise CategoryError("factorisation needs a common codomain")
    if not (_in_A(big) and _in_A(small)):
        raise CategoryError("both morphisms must lie in A")
    if not type_of(big) <= type_of(small):
        return None
    seq, bb = _blocks(big)
    _, sb = _blocks(small)
    rel = np.zeros((len(big.dom), len(small.dom)), dtype=bool)
    for k, c in enumerate(seq):
        src, tgt = sb[c], bb[c]
        if not src:
            continue
        if tgt:
            for i, q in enumerate(src):
                rel[tgt[min(i, len(tgt) - 1)], q] = True
        else:
            # an edge with no strict preimage in big: relate to the two vertices meeting there
            left, right = bb[seq[k - 1]][-1], bb[seq[k + 1]][0]
            rel[[left, right], np.array(src)[:, None]] = True
    d = Morphism(small.dom, big.dom, rel)
    if compose(big, d) != small or not _in_A(d):
        raise AmalgamationError("type factorisation did not verify")
    return d


def subfactor(big: Morphism, small: Morphism) -> Morphism:
    """A monotone surjective function f with big ∘ f ⊆ small.

    Needs |dom big| <= |dom small| and, for every edge of the common
    codomain, at least |dom big| vertices of dom small related to exactly
    that edge.
    """
    if big.cod != small.cod:
        raise CategoryError("sub-factorisation needs a common codomain")
    if not (_in_A(big) and _in_A(small)):
        raise CategoryError("both morphisms must lie in A")
    P, Q, R = big.dom, small.dom, big.cod
    ts = type_of(small)
    if len(P) > len(Q):
        raise CategoryError(f"|P| = {len(P)} exceeds |Q| = {len(Q)}")
    short = [sorted(k) for k, v in ts.values.items() if len(k) == 2 and v < len(P)]
    if short:
        raise CategoryError(f"edge strict preimages smaller than |P| at {short}")
    rel = np.zeros((len(P), len(Q)), dtype=bool)
    if len(R) == 1:
        po, qo = path_order(P), path_order(Q)
        for i, q in enumerate(qo):
            rel[po[min(i, len(po) - 1)], q] = True
    else:
        seq, bb = _blocks(big)
        _, sb = _blocks(small)
        porder = [p for c in seq for p in bb[c]]
        pos = {p: i for i, p in enumerate(porder)}
        verts = seq[0::2]
        rep = {c: bb[c][0] for c in verts}
        rep[verts[-1]] = bb[verts[-1]][-1]
        for k, c in enumerate(seq):
            if k % 2 == 0:
                rel[rep[c], sb[c]] = True
                continue
            a, b = pos[rep[seq[k - 1]]], pos[rep[seq[k + 1]]]
            span = b - a + 1
            for i, q in enumerate(sb[c]):
                rel[porder[a + min(i + 1, span - 1)], q] = True
    phi = Morphism(Q, P, rel)
    if (compose(big, phi).rel & ~small.rel).any() or not (_in_A(phi) and check(phi, MorphProperty.Function)):
        raise AmalgamationError("sub-factorisation did not verify")
    return phi


# ---------------------------------------------------------------- amalgamators

def _is_identity(m: Morphism) -> bool:
    return m.dom == m.cod and bool(np.array_equal(m.rel, np.eye(len(m.dom), dtype=bool)))


def _amalgamate_D(f: Morphism, g: Morphism):
    ff, gf = f.as_function(), g.as_function()
    pairs = [(h, i) for h in f.dom.labels for i in g.dom.labels if ff[h] == gf[i]]
    J = discrete_graph([f"({h},{i})" for h, i in pairs])
    fj = np.zeros((len(f.dom), len(J)), dtype=bool)
    gj = np.zeros((len(g.dom), len(J)), dtype=bool)
    for j, (h, i) in enumerate(pairs):
        fj[f.dom.idx(h), j] = True
        gj[g.dom.idx(i), j] = True
    return J, Morphism(J, f.dom, fj), Morphism(J, g.dom, gj)


def _amalgamate_A(f: Morphism, g: Morphism):
    t = type_of(f).pointwise_max(type_of(g))
    J, k = realize_type(f.cod, t)
    return J, factor_by_type(f, k), factor_by_type(g, k)


def _spoke_images(m: Morphism) -> list[tuple[list[int], list[int], int | None]]:
    """For each dom spoke: its vertices, their positions along the cod spoke, and that spoke."""
    dr, dspokes = _fans._structure(m.dom, None)
    cr, cspokes = _fans._structure(m.cod, None)
    where = {cr: (None, 0)}
    for t, sp in enumerate(cspokes):
        for p, v in enumerate(sp[1:], 1):
            where[v] = (t, p)
    fn = [bits(c)[0] for c in m.col_masks()]
    out = []
    for sp in dspokes:
        spots = [where[fn[v]] for v in sp]
        ts = {t for t, _ in spots if t is not None}
        if len(ts) > 1:
            raise CategoryError("a spoke is spread over two spokes")
        out.append((list(sp), [p for _, p in spots], ts.pop() if ts else None))
    return out


def _amalgamate_fan_functions(f: Morphism, g: Morphism):
    """Glue per-spoke path amalgamations along a covering set of spoke pairs."""
    cr, cspokes = _fans._structure(f.cod, None)
    fs, gs = _spoke_images(f), _spoke_images(g)

    def key(img):
        _, pos, t = img
        return (t, max(pos))

    def inside(a, b) -> bool:
        (ta, pa), (tb, pb) = a, b
        return ta is None or (ta == tb and pa <= pb)

    fk, gk = [key(x) for x in fs], [key(x) for x in gs]
    pairs = []
    for i, a in enumerate(fk):
        j = next(j for j, b in enumerate(gk) if inside(a, b))
        pairs.append((i, j))
    for j, b in enumerate(gk):
        i = next(i for i, a in enumerate(fk) if inside(b, a))
        pairs.append((i, j))
    pairs = sorted(set(pairs))

    labels = ["0"]
    fa: list[int] = [_fans._structure(f.dom, None)[0]]
    gb: list[int] = [_fans._structure(g.dom, None)[0]]
    edges = []
    for c, (i, j) in enumerate(pairs):
        (sv, sp, _), (tv, tp, _) = fs[i], gs[j]
        top = min(max(sp), max(tp))
        sv = [v for v, p in zip(sv, sp) if p <= top]
        sp = sp[: len(sv)]
        tv = [v for v, p in zip(tv, tp) if p <= top]
        tp = tp[: len(tv)]
        chain_a, chain_b = [], []
        for pos in range(top + 1):
            ua = [v for v, p in zip(sv, sp) if p == pos]
            ub = [v for v, p in zip(tv, tp) if p == pos]
            for r in range(max(len(ua), len(ub))):
                chain_a.append(ua[min(r, len(ua) - 1)])
                chain_b.append(ub[min(r, len(ub) - 1)])
        # the first entry is the shared root
        prev = "0"
        for r, (x, y) in enumerate(zip(chain_a[1:], chain_b[1:]), 1):
            lab = f"k{c}_{r}"
            labels.append(lab)
            fa.append(x)
            gb.append(y)
            edges.append((prev, lab))
            prev = lab
    K = make_graph(labels, edges)
    fj = np.zeros((len(f.dom), len(K)), dtype=bool)
    gj = np.zeros((len(g.dom), len(K)), dtype=bool)
    fj[fa, np.arange(len(K))] = True
    gj[gb, np.arange(len(K))] = True
    return K, Morphism(K, f.dom, fj), Morphism(K, g.dom, gj)


def _amalgamate_fans(f: Morphism, g: Morphism):
    if check(f, MorphProperty.Function) and check(g, MorphProperty.Function):
        return _amalgamate_fan_functions(f, g)
    # relations: amalgamate the induced functions between clique graphs, then
    # come back down along the membership morphisms
    xf, xg = clique_map(f), clique_map(g)
    K, a, b = _amalgamate_fan_functions(xf, xg)
    return K, compose(membership(f.dom), a), compose(membership(g.dom), b)


def amalgamate(cat: CategorySpec | str, f: Morphism, g: Morphism) -> tuple[Graph, Morphism, Morphism]:
    """J with fj: J -> dom f and gj: J -> dom g such that f ∘ fj = g ∘ gj."""
    cat = get_category(cat)
    if f.cod != g.cod:
        raise CategoryError("amalgamation needs a common codomain")
    for name, m in (("first", f), ("second", g)):
        if not cat.is_morphism(m):
            raise CategoryError(f"{name} morphism is not in {cat.name}")
    if cat.amalgamator is None:
        raise CategoryError(f"no amalgamator for {cat.name}")
    if _is_identity(g):
        J, fj, gj = f.dom, identity(f.dom), f
    elif _is_identity(f):
        J, fj, gj = g.dom, g, identity(g.dom)
    else:
        J, fj, gj = cat.amalgamator(f, g)
    if compose(f, fj) != compose(g, gj):
        raise AmalgamationError(f"{cat.name} amalgamation square does not commute")
    if not (cat.is_morphism(fj) and cat.is_morphism(gj)):
        raise AmalgamationError(f"{cat.name} amalgamation leg left the category")
    return J, fj, gj


# ---------------------------------------------------------------- ideal morphisms

def _doubling(g: Graph) -> Morphism:
    dom = discrete_graph([f"{x}.{k}" for x in g.labels for k in (0, 1)])
    rel = np.repeat(np.eye(len(g), dtype=bool), 2, axis=1)
    return Morphism(dom, g, rel)


def _path_ideal(g: Graph, full: bool) -> Morphism:
    if len(g) == 1 or full:
        # strict preimages of size 2 on vertices and edges: strictly
        # anti-injective, edge-witnessing and star-refining at once
        return realize_type(g, make_type(g, 2, 2))[1]
    return realize_type(g, make_type(g, 1, 1))[1]


def _fan_from_chains(cod: Graph, root: int, chains: list[list[int]]) -> Morphism:
    """Fan whose spokes are given by the cod cliques (bitmasks) of their vertices."""
    labels = ["0"]
    cols = [1 << root]
    edges = []
    for c, chain in enumerate(chains):
        prev = "0"
        for r, mask in enumerate(chain, 1):
            lab = f"k{c}_{r}"
            labels.append(lab)
            cols.append(mask)
            edges.append((prev, lab))
            prev = lab
    dom = make_graph(labels, edges)
    rel = np.zeros((len(cod), len(dom)), dtype=bool)
    for j, mask in enumerate(cols):
        rel[bits(mask), j] = True
    return Morphism(dom, cod, rel)


def _fan_split(g: Graph) -> Morphism:
    r, spokes = _fans._structure(g, None)
    chains = [[1 << v for v in sp[1:]] for sp in spokes for _ in (0, 1)]
    return _fan_from_chains(g, r, chains)


def _fan_refine(g: Graph) -> Morphism:
    r, spokes = _fans._structure(g, None)
    chains = []
    for sp in spokes:
        # every vertex of the spoke, root included, gets two strict preimages
        chain = [1 << r]
        for a, b in zip(sp, sp[1:]):
            e = (1 << a) | (1 << b)
            chain += [e, e, 1 << b, 1 << b]
        chains.append(chain)
    return _fan_from_chains(g, r, chains)


def _fan_dense(g: Graph) -> Morphism:
    r, spokes = _fans._structure(g, None)
    chains = [[1 << r]]
    for sp in spokes:
        for p in range(1, len(sp)):
            chains.append([1 << v for v in sp[1 : p + 1]])
    return _fan_from_chains(g, r, chains)


def _ideal(cat: CategorySpec, g: Graph, full: bool) -> Morphism:
    if cat.name == "D":
        return _doubling(g)
    if cat.name == "A":
        return _path_ideal(g, full)
    if cat.fan:
        if not full:
            return _fan_split(g)
        out = identity(g)
        stages = ([_fan_dense] if cat.name == "L" else []) + [_fan_split, _fan_refine]
        for stage in stages:
            out = compose(out, stage(out.dom))
        return out
    raise CategoryError(f"no ideal morphisms registered for {cat.name}")


def _relabelled(m: Morphism, prefix: str = "v") -> Morphism:
    g = m.dom
    return Morphism(Graph([f"{prefix}{i}" for i in range(len(g))], g.adj), m.cod, m.rel, verify=False)


# ---------------------------------------------------------------- registry

CATEGORIES: dict[str, CategorySpec] = {}


def _register(spec: CategorySpec) -> None:
    CATEGORIES[spec.name] = spec


_CLAW = make_graph(["0", "a", "b", "c"], [("0", "a"), ("0", "b"), ("0", "c")])
_POINT = make_graph(["v0"])

_register(CategorySpec("D", "discrete", (MorphProperty.Function, MorphProperty.Surjective),
                       amalgamator=_amalgamate_D, terminal=_POINT, size_bound=6, ideal_period=1))
_register(CategorySpec("A", "path", (MorphProperty.CoBijective, MorphProperty.Monotone),
                       amalgamator=_amalgamate_A, terminal=_POINT, size_bound=6, ideal_period=0))
_register(CategorySpec("P", "path", (MorphProperty.CoBijective,), terminal=_POINT))
_register(CategorySpec("C", "cycle", (MorphProperty.CoBijective, MorphProperty.Monotone)))
_register(CategorySpec("L", "fan", (MorphProperty.CoBijective,), ("spoke-monotone",),
                       amalgamator=_amalgamate_fans, terminal=_CLAW, size_bound=7, ideal_period=0))
_register(CategorySpec("X", "fan", (MorphProperty.CoBijective,), ("spoke-monotone", "end-preserving"),
                       amalgamator=_amalgamate_fans, terminal=_CLAW, size_bound=7, ideal_period=0))


def get_category(cat: CategorySpec | str) -> CategorySpec:
    if isinstance(cat, CategorySpec):
        return cat
    key = str(cat).strip().upper()
    if key not in CATEGORIES:
        raise CategoryError(f"unknown category {cat!r}; choose from {', '.join(CATEGORIES)}")
    return CATEGORIES[key]


def _roots(s: Sequence, n: int) -> str | None:
    roots = s.flags.get("roots")
    return roots[n] if roots else None


def require_in_category(cat: CategorySpec, s: Sequence, horizon: int | None = None) -> None:
    """Raise CategoryError unless every step up to the horizon is a morphism of ``cat``."""
    H = s.N if horizon is None else min(horizon, s.N)
    first = s.flags.get("fan_from", 0) if cat.fan else 0
    for n in range(first, H):
        if not cat.is_morphism(s.steps[n], _roots(s, n + 1), _roots(s, n)):
            raise CategoryError(f"step {n} is not a morphism of {cat.name}")


# ---------------------------------------------------------------- Fraïssé prefixes

@dataclass
class AbsorptionRecord:
    """Request ``morphism`` (into level ``level``) absorbed by ``factor`` out of level ``resolved_at``."""

    level: int
    resolved_at: int
    morphism: Morphism
    factor: Morphism

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "resolvedAt": self.resolved_at,
            "object": self.morphism.dom.to_json(),
            "morphism": [list(p) for p in self.morphism.pairs()],
            "factor": [list(p) for p in self.factor.pairs()],
        }


def _requests(cat: CategorySpec, g: Graph, bound: int, rng: random.Random, k: int) -> list[Morphism]:
    if k <= 0 or len(g) > bound:
        return []
    found: list[Morphism] = []
    for p in cat.small_objects(bound):
        if len(p) < len(g):
            continue
        res = enumerate_morphisms(
            p, g, cat.required, budget=20_000, limit=8,
            column_filter=cat.column_filter(p, g), final_filter=cat.is_morphism,
        )
        if not isinstance(res, Exhausted):
            found.extend(res)
    return rng.sample(found, min(k, len(found)))


def fraisse_prefix(
    cat: CategorySpec | str,
    steps: int,
    seed: int = 0,
    size_bound: int | None = None,
    requests_per_level: int = 1,
) -> Sequence:
    """Build G_0..G_steps by dovetailing absorption requests.

    Each new level is offered morphisms onto it from small objects (at most
    ``size_bound`` vertices), ``requests_per_level`` of them chosen with the
    seeded RNG.  Every step resolves the oldest open request by amalgamating
    it with the composite down to its level, then precomposes an ideal
    morphism of the category so that witnesses for the characterisation
    appear.  The log of resolved requests is attached as ``witness_log`` and
    checked exactly before returning.
    """
    cat = get_category(cat)
    if cat.amalgamator is None or cat.terminal is None:
        raise CategoryError(f"{cat.name} has no Fraïssé builder")
    if steps < 0:
        raise CategoryError("steps must be non-negative")
    bound = cat.size_bound if size_bound is None else size_bound
    rng = random.Random(seed)
    graphs = [cat.terminal]
    step_list: list[Morphism] = []
    comps: dict[tuple[int, int], Morphism] = {}

    def composite(m: int, n: int) -> Morphism:
        if m == n:
            return identity(graphs[m])
        if (m, n) not in comps:
            comps[(m, n)] = compose(composite(m, n - 1), step_list[n - 1])
        return comps[(m, n)]

    queue: deque[tuple[int, Morphism]] = deque((0, r) for r in _requests(cat, graphs[0], bound, rng, requests_per_level))
    pending: list[tuple[int, int, Morphism, Morphism]] = []
    for n in range(steps):
        if queue:
            m, phi = queue.popleft()
            J, a, b = amalgamate(cat, phi, composite(m, n))
        else:
            m, phi, a = None, None, None
            J, b = graphs[n], identity(graphs[n])
        back = steps - 1 - n
        full = back == 0 or (cat.ideal_period > 0 and back % cat.ideal_period == 0)
        iota = _relabelled(_ideal(cat, J, full))
        step = compose(b, iota)
        graphs.append(iota.dom)
        step_list.append(step)
        if phi is not None:
            pending.append((m, n + 1, phi, compose(a, iota)))
        queue.extend((n + 1, r) for r in _requests(cat, iota.dom, bound, rng, requests_per_level))

    seq = make_sequence(
        graphs, step_list,
        {"builder": "fraisse", "category": cat.name, "steps": steps, "seed": seed,
         "size_bound": bound, "requests_per_level": requests_per_level},
    )
    log = []
    for m, n, phi, factor in pending:
        if compose(phi, factor) != seq.composite(m, n) or not cat.is_morphism(factor):
            raise AmalgamationError(f"absorption of a request at level {m} failed at level {n}")
        log.append(AbsorptionRecord(m, n, phi, factor))
    seq.witness_log = log
    seq.open_requests = [(m, phi) for m, phi in queue]
    return seq


# ---------------------------------------------------------------- certification

def _nontrivial(s: Sequence, H: int) -> Verdict:
    for n in range(H + 1):
        if len(s.graphs[n]) != 1:
            return Holds({"level": n, "size": len(s.graphs[n])}, H)
    return Unknown(H, note="every stored level is a single vertex")


def _branch_cores(s: Sequence, H: int) -> list[tuple[Any, Sequence]]:
    out = []
    trimmed = s if H == s.N else _fans._prefix(s, H)
    for b in _fans.branches(trimmed, H):
        restricted = upper_restriction(trimmed, _fans._branch_sets(trimmed, b, H))
        if not isinstance(restricted, Sequence):
            raise CategoryError(f"branch restriction is not coherent: {restricted.witness}")
        out.append((b, surjective_core(restricted)))
    return out


def _branch_condition(s: Sequence, H: int) -> Verdict:
    parts = {}
    for b, core in _branch_cores(s, H):
        label = f"branch {b.start}:{','.join(map(str, b.spokes))}"
        parts[label] = has_subsequence_in(core, "strictly-anti-injective", core.N)
    return combine(parts, H)


def _conditions(cat: CategorySpec, s: Sequence, H: int, exact: bool) -> dict[str, Verdict]:
    name = cat.name
    if name == "D":
        return {"anti-injective subsequence": has_subsequence_in(s, "anti-injective", H)}
    if name == "A":
        out = {"nontrivial": _nontrivial(s, H), "edge-witnessing subsequence": has_subsequence_in(s, "edge-witnessing", H)}
        if exact:
            out["strictly-anti-injective subsequence"] = has_subsequence_in(s, "strictly-anti-injective", H)
        return out
    if name == "C":
        if exact:
            raise CategoryError("only the lax check is available for C")
        return {"edge-witnessing subsequence": has_subsequence_in(s, "edge-witnessing", H)}
    if name in ("X", "L"):
        out = {
            "star-refining subsequence": has_subsequence_in(s, "star-refining", H),
            "end-splitting subsequence": has_subsequence_in(s, "end-splitting", H),
        }
        if name == "L":
            out["end-dense subsequence"] = has_subsequence_in(s, "end-dense", H)
        if exact:
            out["branch cores strictly anti-injective"] = _branch_condition(s, H)
        return out
    raise CategoryError(f"no characterisation registered for {name}")


def _certify(cat, s: Sequence, horizon: int | None, exact: bool) -> Verdict:
    cat = get_category(cat)
    H = s.N if horizon is None else min(horizon, s.N)
    require_in_category(cat, s, H)
    conds = _conditions(cat, s, H, exact)
    v = combine(conds, H)
    what = "Fraïssé" if exact else "lax-Fraïssé"
    note = f"{what} at horizon {H}: {v.status}"
    witness = {"conditions": {k: c.to_json() for k, c in conds.items()}}
    if cat.name == "X" and v.fails:
        target = _uncovered_small_fan(cat, s, H)
        if target is not None:
            witness["target"] = target
    return Verdict(v.status, witness, H, note)


def lax_fraisse_check(cat: CategorySpec | str, s: Sequence, horizon: int | None = None) -> Verdict:
    return _certify(cat, s, horizon, exact=False)


def fraisse_check(cat: CategorySpec | str, s: Sequence, horizon: int | None = None) -> Verdict:
    return _certify(cat, s, horizon, exact=True)


# ---------------------------------------------------------------- cofinality

def _x_onto(g: Graph, target: Graph, root: str | None) -> tuple[Morphism | None, dict]:
    """Decide whether some X-morphism maps g onto target.

    Each dom spoke must go onto one whole target spoke, root to root and end
    to end, which is possible exactly when it is at least as long; so a
    morphism exists iff the spokes can be assigned to cover every target spoke.
    """
    _, dspokes = _fans._structure(g, root)
    tr, tspokes = _fans._structure(target, None)
    dorder = sorted(range(len(dspokes)), key=lambda i: -len(dspokes[i]))
    torder = sorted(range(len(tspokes)), key=lambda i: -len(tspokes[i]))
    shortest = torder[-1]
    too_short = [i for i in dorder if len(dspokes[i]) < len(tspokes[shortest])]
    if too_short:
        return None, {"spoke": [g.labels[v] for v in dspokes[too_short[0]]],
                      "reason": "shorter than every target spoke"}
    if len(dspokes) < len(tspokes) or any(
        len(dspokes[dorder[k]]) < len(tspokes[torder[k]]) for k in range(len(tspokes))
    ):
        return None, {"reason": "not enough long spokes to cover the target"}
    assign = {dorder[k]: torder[k] for k in range(len(tspokes))}
    rel = np.zeros((len(target), len(g)), dtype=bool)
    rel[tr, dspokes[0][0]] = True
    for i, sp in enumerate(dspokes):
        t = tspokes[assign.get(i, shortest)]
        for pos, v in enumerate(sp):
            rel[t[min(pos, len(t) - 1)], v] = True
    return Morphism(g, target, rel), {}


def _find_onto(cat: CategorySpec, g: Graph, target: Graph, root: str | None, budget: int):
    """A morphism of cat from g onto target, None, or Exhausted."""
    if cat.name == "X":
        m, why = _x_onto(g, target, root)
        if m is not None and not cat.is_morphism(m, root, None):
            raise CategoryError("spoke assignment did not give an X-morphism")
        return m, why
    res = enumerate_morphisms(
        g, target, cat.required, budget=budget, limit=1,
        column_filter=cat.column_filter(g, target, root) if cat.fan else None,
        final_filter=lambda m: cat.is_morphism(m, root, None),
    )
    if isinstance(res, Exhausted):
        return res, {}
    return (res[0] if res else None), {}


def cofinality_probe(
    cat: CategorySpec | str,
    s: Sequence,
    target: Graph,
    horizon: int | None = None,
    budget: int = 200_000,
) -> Verdict:
    """Is there a level n <= horizon with a morphism of cat from G_n onto target?"""
    cat = get_category(cat)
    if not cat.is_object(target):
        raise CategoryError(f"target is not an object of {cat.name}")
    H = s.N if horizon is None else min(horizon, s.N)
    exhausted, reasons = [], {}
    for n in range(H + 1):
        root = _roots(s, n) if cat.fan else None
        if not cat.is_object(s.graphs[n], root):
            reasons[n] = {"reason": f"level is not an object of {cat.name}"}
            continue
        m, why = _find_onto(cat, s.graphs[n], target, root, budget)
        if isinstance(m, Exhausted):
            exhausted.append(n)
        elif m is not None:
            return Holds({"level": n, "morphism": [list(p) for p in m.pairs()]}, H, f"level {n} maps onto the target")
        else:
            reasons[n] = why
    if exhausted:
        return Unknown(H, {"exhausted_levels": exhausted}, "search budget ran out")
    return FailsOnPrefix(
        {"target": target.to_json(), "levels": reasons},
        H,
        "no level up to the horizon admits a morphism onto the target",
    )


def _uncovered_small_fan(cat: CategorySpec, s: Sequence, H: int, bound: int = 7) -> dict | None:
    for f in cat.small_objects(bound):
        v = cofinality_probe(cat, s, f, H)
        if v.fails:
            return {"fan": f.to_json(), "spokes": _fans.fan_structure(f).lengths(), "probe": v.to_json()}
    return None


# ---------------------------------------------------------------- intertwining

@dataclass
class Rung:
    source: int  # which sequence (1 or 2) the morphism leaves
    dom_level: int
    cod_level: int
    morphism: Morphism

    def to_json(self) -> dict:
        return {
            "from": [self.source, self.dom_level],
            "to": [3 - self.source, self.cod_level],
            "pairs": [list(p) for p in self.morphism.pairs()],
        }


@dataclass
class Ladder:
    rungs: list[Rung]
    lax: bool
    complete: bool
    stuck: dict | None = None

    @property
    def depth(self) -> int:
        return len(self.rungs) - 1

    def to_json(self) -> dict:
        return {
            "lax": self.lax,
            "complete": self.complete,
            "depth": self.depth,
            "rungs": [r.to_json() for r in self.rungs],
            "stuck": self.stuck,
        }


def _absorb_D(cur: Morphism, comp: Morphism) -> Morphism | None:
    cf, mf = cur.as_function(), comp.as_function()
    need = {z: sorted(x for x, y in cf.items() if y == z) for z in comp.cod.labels}
    have = {z: sorted(x for x, y in mf.items() if y == z) for z in comp.cod.labels}
    if any(len(have[z]) < len(need[z]) for z in need):
        return None
    rel = np.zeros((len(cur.dom), len(comp.dom)), dtype=bool)
    for z, xs in have.items():
        for i, x in enumerate(xs):
            rel[cur.dom.idx(need[z][min(i, len(need[z]) - 1)]), comp.dom.idx(x)] = True
    return Morphism(comp.dom, cur.dom, rel)


def _absorb_search(cat: CategorySpec, cur: Morphism, comp: Morphism, lax: bool, budget: int):
    cols = cur.col_masks()
    target = comp.col_masks()

    def keep(gi: int, mask: int) -> bool:
        img = 0
        for x in bits(mask):
            img |= cols[x]
        return img & ~target[gi] == 0 if lax else img == target[gi]

    res = enumerate_morphisms(
        comp.dom, cur.dom, cat.required, budget=budget, limit=1,
        column_filter=keep, final_filter=cat.is_morphism,
    )
    if isinstance(res, Exhausted) or not res:
        return None
    return res[0]


def _absorb(cat: CategorySpec, cur: Morphism, comp: Morphism, lax: bool, budget: int) -> Morphism | None:
    if cat.name == "D":
        return _absorb_D(cur, comp)
    if cat.name == "A":
        exact = factor_by_type(cur, comp)
        if exact is not None or not lax:
            return exact
        try:
            return subfactor(cur, comp)
        except CategoryError:
            return None
    return _absorb_search(cat, cur, comp, lax, budget)


def intertwine(
    cat: CategorySpec | str,
    s1: Sequence,
    s2: Sequence,
    depth: int = 3,
    lax: bool = False,
    budget: int = 200_000,
) -> Ladder:
    """Back-and-forth morphisms between two sequences of the same category.

    Rung 0 maps some level of ``s2`` onto level 0 of ``s1``.  Each later rung
    absorbs the previous one into the sequence it lands in: for cur: Y_q <- X_p
    it finds q' and psi: Y_q' -> X_p with cur ∘ psi equal to (or, when lax,
    contained in) the composite of that sequence from q' to q.
    """
    cat = get_category(cat)
    require_in_category(cat, s1)
    require_in_category(cat, s2)
    seqs = {1: s1, 2: s2}
    first = None
    for n in range(s2.N + 1):
        m, _ = _find_onto(cat, s2.graphs[n], s1.graphs[0], None, budget)
        if isinstance(m, Morphism):
            first = Rung(2, n, 0, m)
            break
    if first is None:
        return Ladder([], lax, False, {"rung": 0, "reason": "no level of the second sequence maps onto G_0"})
    rungs = [first]
    cur = first
    while len(rungs) <= depth:
        home = seqs[3 - cur.source]  # the sequence cur lands in
        q, p = cur.cod_level, cur.dom_level
        psi = None
        for q2 in range(q + 1, home.N + 1):
            comp = home.composite(q, q2)
            psi = _absorb(cat, cur.morphism, comp, lax, budget)
            if psi is not None:
                break
        if psi is None:
            return Ladder(rungs, lax, False, {"rung": len(rungs), "from_level": q, "reason": "prefix too short to absorb"})
        got = compose(cur.morphism, psi)
        ok = not (got.rel & ~comp.rel).any() if lax else got == comp
        if not ok or not cat.is_morphism(psi):
            raise AmalgamationError(f"rung {len(rungs)} did not verify")
        cur = Rung(3 - cur.source, q2, p, psi)
        rungs.append(cur)
    return Ladder(rungs, lax, True)
