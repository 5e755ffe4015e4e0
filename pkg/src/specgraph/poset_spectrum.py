"""The induced poset of a sequence prefix and what its levels say about the spectrum.

An element is a pair (level, vertex).  (n, g) lies below (m, h) when m <= n
and h is related to g by the composite from level n to level m.  The
spectrum itself is never built; points are represented by threads and
compared through their upsets.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .graph_core import GraphError, classify, components
from .relations import MorphProperty, check
from .sequences import (
    FailsOnPrefix,
    Holds,
    Sequence,
    Thread,
    Unknown,
    Verdict,
    combine,
    has_subsequence_in,
    is_edge_faithful,
)


@dataclass(frozen=True, order=True)
class PosetElement:
    level: int
    vertex: str

    def __str__(self) -> str:
        return f"{self.vertex}@{self.level}"


def _el(p) -> PosetElement:
    return p if isinstance(p, PosetElement) else PosetElement(int(p[0]), str(p[1]))


def leq(s: Sequence, p, q) -> bool:
    """p <= q in the induced poset."""
    p, q = _el(p), _el(q)
    if p == q:
        return True
    if q.level >= p.level:
        return False
    c = s.composite(q.level, p.level)
    return bool(c.rel[c.cod.idx(q.vertex), c.dom.idx(p.vertex)])


def _below_rows(s: Sequence, p: PosetElement, k: int) -> np.ndarray:
    """Level-k vertices below p, as a bool vector."""
    c = s.composite(p.level, k)
    return c.rel[c.cod.idx(p.vertex)]


def _is_cobijective(s: Sequence, H: int) -> bool:
    return all(check(s.steps[n], MorphProperty.CoBijective) for n in range(H))


def wedge(s: Sequence, p, q, horizon: int | None = None) -> Verdict:
    """Do p and q have a common lower bound?"""
    p, q = _el(p), _el(q)
    H = s.N if horizon is None else min(horizon, s.N)
    for k in range(max(p.level, q.level), H + 1):
        both = _below_rows(s, p, k) & _below_rows(s, q, k)
        if both.any():
            x = s.graphs[k].labels[int(np.flatnonzero(both)[0])]
            return Holds({"lower_bound": [k, x]}, H)
    if p.level == q.level and _is_cobijective(s, H):
        g = s.graphs[p.level]
        if not g.adj[g.idx(p.vertex), g.idx(q.vertex)] and is_edge_faithful(s, H).holds:
            return FailsOnPrefix(
                {"non_adjacent": [p.vertex, q.vertex], "level": p.level},
                H,
                "co-bijective edge-faithful prefix: meeting below means adjacent",
            )
    return Unknown(H, note="no common lower bound inside the prefix")


def enumerate_threads(s: Sequence, depth: int | None = None, limit: int | None = None) -> list[Thread]:
    """All descending chains from level 0 to ``depth`` in label order."""
    depth = s.N if depth is None else depth
    if depth > s.N:
        raise GraphError("depth exceeds the stored prefix")
    out: list[Thread] = []
    order0 = sorted(range(len(s.graphs[0])), key=lambda i: s.graphs[0].labels[i])

    def walk(chain: list[int]):
        n = len(chain) - 1
        if n == depth:
            out.append(Thread(tuple(s.graphs[k].labels[v] for k, v in enumerate(chain))))
            if limit is not None and len(out) > limit:
                raise GraphError(f"more than {limit} threads")
            return
        nxt = s.graphs[n + 1]
        row = s.steps[n].rel[chain[-1]]
        for g in sorted(np.flatnonzero(row).tolist(), key=lambda i: nxt.labels[i]):
            walk(chain + [g])

    for v in order0:
        walk([v])
    return out


def thread_upset(s: Sequence, t: Thread, upto: int | None = None) -> frozenset[PosetElement]:
    """Elements above the thread's deepest vertex, optionally cut at level ``upto``."""
    d = t.depth
    top = d if upto is None else min(upto, d)
    out = set()
    for n in range(top + 1):
        c = s.composite(n, d)
        col = c.rel[:, c.dom.idx(t.at(d))]
        out.update(PosetElement(n, s.graphs[n].labels[h]) for h in np.flatnonzero(col))
    return frozenset(out)


def minimal_selectors(s: Sequence, depth: int | None = None, limit: int | None = 100_000) -> list[Thread]:
    """Threads to ``depth`` whose upsets are minimal, one per distinct upset.

    Upsets are read one level deeper when the prefix allows it, so that a
    thread which later merges into another's upset is not counted twice.
    """
    depth = s.N if depth is None else depth
    look = min(depth + 1, s.N)
    threads = enumerate_threads(s, look, limit)
    by_upset: dict[frozenset, Thread] = {}
    for t in threads:
        up = thread_upset(s, t, depth)
        short = Thread(t.vertices[: depth + 1])
        by_upset.setdefault(up, short)
    ups = list(by_upset)
    minimal = [u for u in ups if not any(v < u for v in ups)]
    return sorted((by_upset[u] for u in minimal), key=lambda t: t.vertices)


def _refines(s: Sequence, k: int, C: set[PosetElement]) -> bool:
    g = s.graphs[k]
    for v in range(len(g)):
        x = PosetElement(k, g.labels[v])
        if not any(leq(s, x, c) for c in C if c.level <= k):
            return False
    return True


def is_cap(s: Sequence, C: Iterable, horizon: int | None = None) -> Verdict:
    """Is C refined by some level?  A negative answer needs an avoiding thread."""
    C = {_el(c) for c in C}
    if not C:
        return FailsOnPrefix({"empty": True}, horizon, "the empty set is no cap")
    H = s.N if horizon is None else min(horizon, s.N)
    for k in range(H + 1):
        if _refines(s, k, C):
            return Holds({"level": k}, H, f"level {k} refines the set")
    L = max(H, max(c.level for c in C))
    L = min(L, s.N)
    g = s.graphs[L]
    for v in range(len(g)):
        x = PosetElement(L, g.labels[v])
        up = {PosetElement(n, s.graphs[n].labels[h]) for n in range(L + 1)
              for h in np.flatnonzero(s.composite(n, L).rel[:, v])}
        if not (up & C):
            avoid = next(t for t in enumerate_threads(s, L) if t.at(L) == x.vertex)
            if all(check(s.steps[n], MorphProperty.CoInjective) for n in range(s.N)):
                return FailsOnPrefix(
                    {"avoiding_thread": list(avoid.vertices)},
                    H,
                    "the thread continues through singleton strict preimages and never meets the set",
                )
            return Unknown(H, {"avoiding_thread": list(avoid.vertices)}, "avoiding thread found, continuation not certified")
    return Unknown(H, note="no level up to the horizon refines the set")


def star_below(s: Sequence, p, q, via_level: int, horizon: int | None = None) -> bool:
    """p lies star-below q with respect to level ``via_level``."""
    p, q = _el(p), _el(q)
    k = via_level
    if k < p.level:
        raise GraphError("the star is taken in a level at or below p")
    g = s.graphs[k]
    for v in range(len(g)):
        x = PosetElement(k, g.labels[v])
        if wedge(s, x, p, horizon).holds and not leq(s, x, q):
            return False
    return True


# ---------------------------------------------------------------- reports

@dataclass
class SpectrumReport:
    connected: Verdict
    hausdorff: Verdict
    perfect: Verdict
    tree_like: Verdict
    hereditarily_unicoherent: Verdict
    horizon: int

    def to_json(self) -> dict:
        return {
            "horizon": self.horizon,
            "connected": self.connected.to_json(),
            "hausdorff": self.hausdorff.to_json(),
            "perfect": self.perfect.to_json(),
            "treeLike": self.tree_like.to_json(),
            "hereditarilyUnicoherent": self.hereditarily_unicoherent.to_json(),
        }


def _connected(s: Sequence, H: int, trees: bool) -> Verdict:
    cobij = _is_cobijective(s, H)
    for n in range(H + 1):
        blocks = components(s.graphs[n])
        if len(blocks) > 1:
            w = {"level": n, "components": blocks}
            if cobij:
                return FailsOnPrefix(w, H, f"level {n} is disconnected")
            return Unknown(H, w, f"level {n} is disconnected but the steps are not co-bijective")
    levels = Holds({"levels": H + 1}, H, "every stored level is connected")
    if trees:
        return combine({"levels connected": levels, "edge-witnessing subsequence": has_subsequence_in(s, "edge-witnessing", H)}, H)
    return combine({"levels connected": levels, "edge-faithful": is_edge_faithful(s, H)}, H)


def spectrum_report(s: Sequence, horizon: int | None = None) -> SpectrumReport:
    H = s.N if horizon is None else min(horizon, s.N)
    trees = all(classify(g).tree for g in s.graphs[: H + 1])
    connected = _connected(s, H, trees)
    hausdorff = has_subsequence_in(s, "star-refining", H)
    perfect = has_subsequence_in(s, "anti-injective", H)
    if trees:
        ew = has_subsequence_in(s, "edge-witnessing", H)
        parts = {"edge-witnessing subsequence": ew, "star-refining subsequence": hausdorff}
        tl = combine(parts, H)
        if not tl.holds and not tl.fails:
            tl = Unknown(H, tl.witness, tl.note)
        hu = Verdict(tl.status, tl.witness, H, tl.note)
    else:
        tl = Unknown(H, note="some level is not a tree")
        hu = Unknown(H, note="some level is not a tree")
    return SpectrumReport(connected, hausdorff, perfect, tl, hu, H)


def poset_dot(s: Sequence, depth: int | None = None, name: str = "poset") -> str:
    """Hasse diagram of the prefix, one rank per level, edges from the one-step relations."""
    depth = s.N if depth is None else min(depth, s.N)
    lines = [f"digraph {name} {{", "  rankdir=TB;"]
    for n in range(depth + 1):
        ids = " ".join(f'"{n}:{lab}";' for lab in s.graphs[n].labels)
        lines.append(f"  {{ rank=same; {ids} }}")
    for n in range(depth):
        st = s.steps[n]
        for h, g in np.argwhere(st.rel):
            lines.append(f'  "{n}:{st.cod.labels[h]}" -> "{n + 1}:{st.dom.labels[g]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
