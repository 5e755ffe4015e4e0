"""Fans: trees with a single branching vertex, their spokes, and fan-specific
morphism predicates.

Spokes include the root and are listed in order of their end labels.  The
length of a spoke counts its vertices, root included.  Paths and single
vertices are accepted as degenerate fans when a root is named explicitly;
sequences that start with such levels record their roots in
``flags["roots"]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np

from .graph_core import Graph, GraphError, bits, classify, end_indices, mask_of
from .relations import Morphism, MorphProperty, check, restrict_idx
from .sequences import (
    FailsOnPrefix,
    Holds,
    Sequence,
    Thread,
    Unknown,
    Verdict,
    cobijective_modification,
    has_subsequence_in,
    surjective_core,
    upper_restriction,
    NoModification,
)

FAN_PROPERTIES = ("spoke-monotone", "end-preserving", "end-dense", "end-splitting")


class NotAFan(GraphError):
    pass


@dataclass(frozen=True)
class FanStructure:
    root: str
    spokes: tuple[tuple[str, ...], ...]

    @property
    def ends(self) -> list[str]:
        return [sp[-1] for sp in self.spokes]

    def lengths(self) -> list[int]:
        return [len(sp) for sp in self.spokes]

    def spoke_of(self, v: str) -> int | None:
        """Index of the spoke through ``v``; None for the root."""
        if v == self.root:
            return None
        for i, sp in enumerate(self.spokes):
            if v in sp:
                return i
        raise GraphError(f"{v!r} is not a vertex of this fan")

    def to_json(self) -> dict:
        return {"root": self.root, "spokes": [list(sp) for sp in self.spokes]}


@lru_cache(maxsize=512)
def _structure(g: Graph, root: str | None) -> tuple[int, tuple[tuple[int, ...], ...]]:
    cls = classify(g)
    if root is None:
        if not cls.fan:
            raise NotAFan("graph is not a fan")
        r = g.idx(cls.root)
    else:
        r = g.idx(root)
        if not cls.tree or any(g.degree(i) > 2 for i in range(len(g)) if i != r):
            raise NotAFan(f"graph is not a fan rooted at {root!r}")
    spokes = []
    for first in g.neighbors(r):
        walk = [r, int(first)]
        while True:
            nxt = [j for j in g.neighbors(walk[-1]) if j != walk[-2]]
            if not nxt:
                break
            walk.append(int(nxt[0]))
        spokes.append(tuple(walk))
    spokes.sort(key=lambda sp: g.labels[sp[-1]])
    return r, tuple(spokes)


def fan_structure(g: Graph, root: str | None = None) -> FanStructure:
    r, spokes = _structure(g, root)
    lab = g.labels
    return FanStructure(lab[r], tuple(tuple(lab[i] for i in sp) for sp in spokes))


def _spoke_masks(g: Graph, root: str | None) -> tuple[int, list[int]]:
    r, spokes = _structure(g, root)
    return r, [mask_of(sp) for sp in spokes]


def _ends_mask(g: Graph, root: str | None) -> int:
    ends = mask_of(end_indices(g))
    if root is not None:
        # a named root is never an end, even on a degenerate fan
        ends &= ~(1 << g.idx(root))
    return ends


def fan_check(m: Morphism, prop: str, dom_root: str | None = None, cod_root: str | None = None) -> bool:
    """Fan predicates; ``dom_root``/``cod_root`` name roots of degenerate fans."""
    key = prop.strip().lower().replace("_", "-")
    if key not in FAN_PROPERTIES:
        raise ValueError(f"unknown fan property {prop!r}")
    cols = m.col_masks()
    if key == "end-preserving":
        cod_ends = _ends_mask(m.cod, cod_root)
        return all(cols[e] & ~cod_ends == 0 for e in bits(_ends_mask(m.dom, dom_root)))
    if key == "end-dense":
        dom_ends = end_indices(m.dom) if dom_root is None else bits(_ends_mask(m.dom, dom_root))
        return bool(m.rel[:, dom_ends].any(axis=1).all()) if dom_ends else False
    if key == "end-splitting":
        dom_ends = bits(_ends_mask(m.dom, dom_root))
        for h in bits(_ends_mask(m.cod, cod_root)):
            if int(m.rel[h, dom_ends].sum()) < 2:
                return False
        return True
    # spoke-monotone needs genuine (or explicitly rooted) fans on both sides
    dr, dspokes = _spoke_masks(m.dom, dom_root)
    cr, cspokes = _spoke_masks(m.cod, cod_root)
    if cols[dr] != 1 << cr:
        return False
    if not dspokes:
        return True
    for sm in dspokes:
        img = 0
        for g in bits(sm):
            img |= cols[g]
        target = next((t for t in cspokes if img & ~t == 0), None)
        if target is None:
            if img == 1 << cr:
                continue
            return False
        if not check(restrict_idx(m, bits(sm), bits(target)), MorphProperty.Monotone):
            return False
    return True


def _level_root(s: Sequence, n: int) -> str | None:
    roots = s.flags.get("roots")
    return roots[n] if roots else None


def level_structure(s: Sequence, n: int) -> FanStructure:
    return fan_structure(s.graphs[n], _level_root(s, n))


def step_fan_check(s: Sequence, m: int, n: int, prop: str) -> bool:
    return fan_check(s.composite(m, n), prop, _level_root(s, n), _level_root(s, m))


# ---------------------------------------------------------------- tree of spokes

@dataclass
class TreeOfSpokes:
    """Level n lists the spoke ends of G_n; ``parent[(n, j)]`` is the spoke of
    level n-1 that spoke j refines, or None when it collapses to the root."""

    levels: list[list[str]]
    parent: dict[tuple[int, int], int | None]

    def children(self, n: int, i: int) -> list[int]:
        return [j for (k, j), p in self.parent.items() if k == n + 1 and p == i]

    def orphans(self) -> list[tuple[int, int]]:
        return sorted(k for k, p in self.parent.items() if p is None)

    def to_json(self) -> dict:
        return {
            "levels": self.levels,
            "edges": [[n, p, j] for (n, j), p in sorted(self.parent.items()) if p is not None],
            "orphans": [list(k) for k in self.orphans()],
        }

    def to_dot(self, name: str = "spokes") -> str:
        lines = [f"digraph {name} {{", "  rankdir=TB;"]
        for n, ends in enumerate(self.levels):
            for i, e in enumerate(ends):
                style = ', style="dashed"' if self.parent.get((n, i), 0) is None else ""
                lines.append(f'  "L{n}_S{i}" [label="{n}:{e}"{style}];')
        for (n, j), p in sorted(self.parent.items()):
            if p is not None:
                lines.append(f'  "L{n - 1}_S{p}" -> "L{n}_S{j}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def tree_of_spokes(s: Sequence, depth: int | None = None) -> TreeOfSpokes:
    depth = s.N if depth is None else min(depth, s.N)
    levels = []
    parent: dict[tuple[int, int], int | None] = {}
    for n in range(depth + 1):
        st = level_structure(s, n)
        levels.append(st.ends)
        if n == 0:
            continue
        g = s.graphs[n]
        cols = s.steps[n - 1].col_masks()
        cr, cspokes = _spoke_masks(s.graphs[n - 1], _level_root(s, n - 1))
        _, dspokes = _spoke_masks(g, _level_root(s, n))
        for j, sm in enumerate(dspokes):
            img = 0
            for v in bits(sm):
                img |= cols[v]
            if img == 1 << cr:
                parent[(n, j)] = None
                continue
            hits = [i for i, t in enumerate(cspokes) if img & ~t == 0]
            if not hits:
                raise GraphError(f"spoke {j} of level {n} is not mapped into a single spoke")
            parent[(n, j)] = hits[0]
    return TreeOfSpokes(levels, parent)


@dataclass(frozen=True)
class BranchOfSpokes:
    """Spoke indices for levels ``start``..; earlier levels are the bare root."""

    start: int
    spokes: tuple[int, ...]

    @property
    def depth(self) -> int:
        return self.start + len(self.spokes) - 1

    def spoke_at(self, n: int) -> int | None:
        return None if n < self.start else self.spokes[n - self.start]

    def to_json(self) -> dict:
        return {"start": self.start, "spokes": list(self.spokes)}


def branches(s: Sequence, depth: int | None = None) -> list[BranchOfSpokes]:
    """All branch prefixes reaching level ``depth``."""
    tree = tree_of_spokes(s, depth)
    depth = len(tree.levels) - 1
    starts = [(0, i) for i in range(len(tree.levels[0]))] + tree.orphans()
    out = []

    def grow(n0: int, chain: list[int]):
        n = n0 + len(chain) - 1
        if n == depth:
            out.append(BranchOfSpokes(n0, tuple(chain)))
            return
        for j in tree.children(n, chain[-1]):
            grow(n0, chain + [j])

    for n0, i in starts:
        grow(n0, [i])
    return out


def _branch_sets(s: Sequence, b: BranchOfSpokes, horizon: int) -> list[list[str]]:
    sets = []
    for n in range(horizon + 1):
        st = level_structure(s, n)
        i = b.spoke_at(n)
        sets.append([st.root] if i is None else list(st.spokes[i]))
    return sets


@dataclass
class BranchReport:
    branch: BranchOfSpokes
    core: Sequence
    modification: Sequence | NoModification
    endpoint_thread: Thread | None
    nondegenerate: bool

    def to_json(self) -> dict:
        mod = self.modification
        return {
            "branch": self.branch.to_json(),
            "core_sizes": [len(g) for g in self.core.graphs],
            "modification": (
                [list(g.labels) for g in mod.graphs] if isinstance(mod, Sequence) else {"none": mod.witness}
            ),
            "endpoint_thread": list(self.endpoint_thread.vertices) if self.endpoint_thread else None,
            "nondegenerate": self.nondegenerate,
        }


def branch_analysis(s: Sequence, b: BranchOfSpokes, horizon: int | None = None) -> BranchReport:
    horizon = b.depth if horizon is None else min(horizon, b.depth, s.N)
    trimmed = s if horizon == s.N else _prefix(s, horizon)
    restricted = upper_restriction(trimmed, _branch_sets(s, b, horizon))
    if not isinstance(restricted, Sequence):
        raise GraphError(f"branch restriction is not coherent: {restricted.witness}")
    core = surjective_core(restricted)
    mod = cobijective_modification(core)
    thread = None
    grows = any(g.get("property") == "branch-growth" for g in s.guarantees)
    nondeg = False
    if isinstance(mod, Sequence):
        nondeg = len(mod.graphs[-1]) >= 2 or grows
        if len(mod.graphs[-1]) >= 2:
            thread = _endpoint_thread(s, mod)
    return BranchReport(b, core, mod, thread, nondeg)


def _prefix(s: Sequence, n: int) -> Sequence:
    out = Sequence(s.graphs[: n + 1], s.steps[:n], s.provenance, s.guarantees, s.flags)
    out._comp = {k: v for k, v in s._comp.items() if k[1] <= n}
    return out


def _endpoint_thread(s: Sequence, mod: Sequence) -> Thread | None:
    """Ends of the modification paths away from the root, when they form a thread."""
    verts = []
    for n, g in enumerate(mod.graphs):
        root = level_structure(s, n).root
        far = [g.labels[i] for i in end_indices(g) if g.labels[i] != root]
        if len(g) == 1:
            far = [g.labels[0]] if g.labels[0] != root else []
        if not far:
            return None
        verts.append(far[0])
    for n in range(len(verts) - 1):
        st = mod.steps[n]
        if not st.rel[st.cod.idx(verts[n]), st.dom.idx(verts[n + 1])]:
            return None
    return Thread(tuple(verts))


# ---------------------------------------------------------------- limits

@dataclass
class FanLimitVerdict:
    kind: str  # CantorFanEvidence, LelekEvidence, Negative or Unknown
    conditions: dict[str, Verdict]
    witness: Any = None
    horizon: int | None = None
    note: str = ""

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "conditions": {k: v.to_json() for k, v in self.conditions.items()},
            "witness": self.witness,
            "horizon": self.horizon,
            "note": self.note,
        }


_GAP = "conditions over the infinite tree of spokes are checked on branch prefixes only"


def _never_edge_witnessing_branch(s: Sequence, horizon: int) -> dict | None:
    for b in branches(s, horizon):
        sets = _branch_sets(s, b, horizon)
        idx = [[s.graphs[n].idx(v) for v in sets[n]] for n in range(horizon + 1)]
        first = b.start
        if all(
            not check(restrict_idx(s.composite(first, n), idx[n], idx[first]), MorphProperty.EdgeWitnessing)
            for n in range(first + 1, horizon + 1)
        ):
            return {"branch": b.to_json(), "spokes": [sets[n] for n in range(horizon + 1)]}
    return None


def classify_fan_limit(s: Sequence, horizon: int | None = None, category: str = "X") -> FanLimitVerdict:
    cat = category.upper()
    if cat not in ("X", "L"):
        raise ValueError("fan limits are classified in X or L")
    H = s.N if horizon is None else min(horizon, s.N)
    first = s.flags.get("fan_from", 0)
    for n in range(first, H):
        checks = ["spoke-monotone"] + (["end-preserving"] if cat == "X" else [])
        for p in checks:
            if not step_fan_check(s, n, n + 1, p):
                raise GraphError(f"step {n} is not {p}; the sequence is not in {cat}")
    conds = {
        "star-refining": has_subsequence_in(s, "star-refining", H),
        "end-splitting": has_subsequence_in(s, "end-splitting", H),
    }
    if cat == "L":
        conds["end-dense"] = has_subsequence_in(s, "end-dense", H)
    statuses = {v.status for v in conds.values()}
    if statuses == {"Holds"}:
        # end-preserving steps never make the root lie above an end, so X limits are Cantor fans
        kind = "LelekEvidence" if cat == "L" else "CantorFanEvidence"
        return FanLimitVerdict(kind, conds, None, H, _GAP)
    if "FailsOnPrefix" in statuses:
        wit = _never_edge_witnessing_branch(s, H) if cat == "X" else None
        bad = [k for k, v in conds.items() if v.fails]
        return FanLimitVerdict("Negative", conds, {"failed": bad, "branch": wit}, H, _GAP)
    return FanLimitVerdict("Unknown", conds, None, H, _GAP)
