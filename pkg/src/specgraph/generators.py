"""Named sequence constructors.

Every generator returns a prefix G_0..G_N (``levels`` is N) and declares the
guarantees it certifies for all later levels.  A guarantee is a dict
``{"kind": "holds" | "never", "property", "stride", "from_level", "reason"}``:
"holds" means composite(m, m + stride) has the property for every m >=
from_level; "never" means no composite out of a level m >= from_level has it.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Callable

import numpy as np

from .clique import clique_graph, membership
from .graph_core import Graph, GraphError, cycle_graph, discrete_graph, make_graph, path_graph
from .relations import Morphism, edge_split, make_morphism
from .sequences import Sequence, make_sequence


class GeneratorError(GraphError):
    pass


def _g(kind: str, prop: str, reason: str, stride: int = 1, start: int = 0) -> dict:
    return {"kind": kind, "property": prop, "stride": stride, "from_level": start, "reason": reason}


def _relabel(g: Graph, prefix: str = "v") -> tuple[Graph, dict[str, str]]:
    names = {lab: f"{prefix}{i}" for i, lab in enumerate(g.labels)}
    return Graph([names[x] for x in g.labels], g.adj), names


def _rename(m: Morphism, dom: Graph, cod: Graph) -> Morphism:
    return Morphism(dom, cod, m.rel, verify=False)


def seed_graph(spec: str) -> Graph:
    """``path:k``, ``cycle:k``, ``complete:k``, ``discrete:k`` or ``claw``."""
    spec = spec.strip().lower()
    if spec == "claw":
        return make_graph(["0", "a", "b", "c"], [("0", "a"), ("0", "b"), ("0", "c")])
    kind, _, k = spec.partition(":")
    try:
        k = int(k)
    except ValueError:
        raise GeneratorError(f"bad seed {spec!r}") from None
    labels = [f"v{i}" for i in range(k)]
    if k < 1:
        raise GeneratorError("seed needs at least one vertex")
    if kind == "path":
        return path_graph(labels)
    if kind == "cycle":
        return cycle_graph(labels)
    if kind == "discrete":
        return discrete_graph(labels)
    if kind == "complete":
        return make_graph(labels, [(a, b) for i, a in enumerate(labels) for b in labels[i + 1:]])
    raise GeneratorError(f"bad seed {spec!r}")


def _seq(graphs, steps, name, params, guarantees, flags=None) -> Sequence:
    return make_sequence(graphs, steps, {"generator": name, "params": params}, guarantees, flags)


# ---------------------------------------------------------------- D and A

def cantor_doubling(levels: int) -> Sequence:
    """Discrete graphs on binary words of length n, each word sent to its parent."""
    def words(n):
        return ["e"] if n == 0 else [format(i, f"0{n}b") for i in range(2 ** n)]

    graphs = [discrete_graph(words(n)) for n in range(levels + 1)]
    steps = []
    for n in range(levels):
        up = "e" if n == 0 else None
        pairs = [(up or w[:-1], w) for w in words(n + 1)]
        steps.append(make_morphism(graphs[n + 1], graphs[n], pairs))
    guar = [
        _g("holds", p, "surjective functions between discrete graphs")
        for p in ("star-refining", "edge-witnessing", "anti-injective", "co-bijective", "surjective")
    ]
    return _seq(graphs, steps, "cantor_doubling", {"levels": levels}, guar)


def arc_dyadic(levels: int) -> Sequence:
    """Interval k of level n is (k/2^n, (k+2)/2^n); level 0 is the whole interval."""
    def size(n):
        return max(1, 2 ** n - 1)

    graphs = [path_graph([f"e{k}" for k in range(size(n))]) for n in range(levels + 1)]
    steps = []
    for n in range(levels):
        pairs = []
        top = size(n) - 1
        for j in range(size(n + 1)):
            k = j // 2
            targets = [k - 1, k] if j % 2 == 0 else [k]
            targets = [t for t in targets if 0 <= t <= top] or [min(k, top)]
            pairs += [(f"e{t}", f"e{j}") for t in targets]
        steps.append(make_morphism(graphs[n + 1], graphs[n], pairs))
    guar = [
        _g("holds", "edge-witnessing", "every interval pair meeting at level n shares a half-width interval"),
        _g("holds", "co-bijective", "the interval around each dyadic centre refines only its parent"),
        _g("holds", "surjective", "every interval contains finer ones"),
        _g("holds", "anti-injective", "each interval contains at least two finer ones", start=1),
        _g("holds", "star-refining", "two halvings shrink a star below one interval", stride=2, start=1),
    ]
    return _seq(graphs, steps, "arc_dyadic", {"levels": levels}, guar)


def clique_iteration(levels: int, seed: str = "path:2") -> Sequence:
    g0, _ = _relabel(seed_graph(seed))
    graphs = [g0]
    steps = []
    for _ in range(levels):
        mem = membership(graphs[-1])
        nxt, _ = _relabel(mem.dom)
        steps.append(_rename(mem, nxt, graphs[-1]))
        graphs.append(nxt)
    guar = [
        _g("holds", "edge-witnessing", "the edge {g, h} is a clique lying over both"),
        _g("holds", "co-bijective", "the singleton clique {g} lies only over g"),
        _g("holds", "surjective", "every vertex is a clique"),
        _g("never", "strictly-anti-injective",
           "the only clique set lying exactly over a vertex g is the chain of singletons {g}, {{g}}, ..."),
    ]
    return _seq(graphs, steps, "clique_iteration", {"levels": levels, "seed": seed}, guar)


def edge_splitting_seq(levels: int, seed: str = "path:2") -> Sequence:
    g0, _ = _relabel(seed_graph(seed))
    graphs = [g0]
    steps = []
    for _ in range(levels):
        h, m = edge_split(graphs[-1])
        h2, _ = _relabel(h)
        steps.append(_rename(m, h2, graphs[-1]))
        graphs.append(h2)
    guar = [
        _g("holds", p, "edge splitting")
        for p in ("co-bijective", "monotone", "edge-witnessing", "star-refining", "surjective")
    ]
    if min(g0.degree(i) for i in range(len(g0))) >= 1:
        guar.append(_g("holds", "anti-injective", "no isolated vertices, so every vertex gains a split copy"))
    return _seq(graphs, steps, "edge_splitting_seq", {"levels": levels, "seed": seed}, guar)


def cycle_roots(levels: int) -> Sequence:
    """Cycle of 2^(n+2) vertices; 2k goes to k and 2k+1 to {k, k+1}."""
    def labels(n):
        return [f"z{k}" for k in range(2 ** (n + 2))]

    graphs = [cycle_graph(labels(n)) for n in range(levels + 1)]
    steps = []
    for n in range(levels):
        size = 2 ** (n + 2)
        pairs = []
        for j in range(2 * size):
            k = j // 2
            targets = [k] if j % 2 == 0 else [k, (k + 1) % size]
            pairs += [(f"z{t}", f"z{j}") for t in targets]
        steps.append(make_morphism(graphs[n + 1], graphs[n], pairs))
    guar = [
        _g("holds", p, "arc-like doubling around the circle")
        for p in ("monotone", "edge-witnessing", "co-bijective", "anti-injective", "surjective")
    ]
    guar.append(_g("holds", "star-refining", "two doublings shrink a star below one arc", stride=2))
    return _seq(graphs, steps, "cycle_roots", {"levels": levels}, guar)


# ---------------------------------------------------------------- fans

def _interval(a: int, k: int):
    """A_{a,k} intersected with [0, 1] as (lo, lo_closed, hi, hi_closed)."""
    w = Fraction(1, 2 ** a)
    lo, hi = (k - 1) * w, (k + 1) * w
    lo_c = lo < 0
    hi_c = hi > 1
    return (max(lo, Fraction(0)), lo_c, min(hi, Fraction(1)), hi_c)


def _contains(big, small) -> bool:
    blo, blc, bhi, bhc = big
    slo, slc, shi, shc = small
    left = blo < slo or (blo == slo and (blc or not slc))
    right = shi < bhi or (shi == bhi and (bhc or not shc))
    return left and right


def _meets(x, y) -> bool:
    lo = max((x[0], not x[1]), (y[0], not y[1]))
    hi = min((x[2], x[3]), (y[2], y[3]))
    if lo[0] < hi[0]:
        return True
    return lo[0] == hi[0] and not lo[1] and hi[1]


def _word(s: str) -> str:
    return s or "e"


def cantor_fan(levels: int, alpha: list[int] | None = None, beta: list[int] | None = None) -> Sequence:
    """Products of dyadic interval covers with Cantor cylinders, the zero end glued to a root."""
    alpha = list(range(levels + 1)) if alpha is None else list(alpha)
    beta = list(range(levels + 1)) if beta is None else list(beta)
    for name, f in (("alpha", alpha), ("beta", beta)):
        if len(f) < levels + 1:
            raise GeneratorError(f"{name} needs {levels + 1} values")
        if any(b <= a for a, b in zip(f, f[1:])) or f[0] < 0:
            raise GeneratorError(f"{name} must be strictly increasing and non-negative")
    cells = []  # per level: list of (label, interval, word)
    graphs = []
    for n in range(levels + 1):
        a, b = alpha[n], beta[n]
        words = [""] if b == 0 else [format(i, f"0{b}b") for i in range(2 ** b)]
        lv = [("r", _interval(a, 0), None)]
        for s in words:
            for k in range(1, 2 ** a + 1):
                lv.append((f"{k}:{_word(s)}", _interval(a, k), s))
        pairs = []
        for i, (l1, i1, s1) in enumerate(lv):
            for l2, i2, s2 in lv[i + 1:]:
                same = s1 is None or s2 is None or s1 == s2
                if same and _meets(i1, i2):
                    pairs.append((l1, l2))
        graphs.append(make_graph([c[0] for c in lv], pairs))
        cells.append(lv)
    steps = []
    for n in range(levels):
        pairs = []
        for l2, i2, s2 in cells[n + 1]:
            for l1, i1, s1 in cells[n]:
                word_ok = s1 is None or (s2 is not None and s2.startswith(s1))
                if word_ok and _contains(i1, i2):
                    pairs.append((l1, l2))
        steps.append(make_morphism(graphs[n + 1], graphs[n], pairs))
    guar = [
        _g("holds", p, "refinement of products of interval and cylinder covers")
        for p in ("co-bijective", "surjective", "edge-witnessing", "spoke-monotone", "end-preserving",
                  "end-splitting", "anti-injective")
    ]
    guar.append(_g("holds", "star-refining", "two refinements shrink every star inside one cell", stride=2))
    guar.append(_g("holds", "branch-growth", "every spoke keeps its full length"))
    flags = {"roots": ["r"] * (levels + 1)}
    return _seq(graphs, steps, "cantor_fan", {"levels": levels, "alpha": alpha, "beta": beta}, guar, flags)


def nasty_fan(levels: int) -> Sequence:
    """Fans with 2^n - 1 long spokes of 2^n vertices and one short spoke {0, x}.

    Each long spoke is covered by two long spokes one level down; the last
    long spoke of the next level covers the short spoke, which itself is
    carried along by the identity.  Levels 0 and 1 repeat level 2.
    """
    def fan_at(n):
        n = max(n, 2)
        L = 2 ** n
        labels, pairs = ["0", "x"], [("0", "x")]
        for i in range(L - 1):
            prev = "0"
            for p in range(1, L):
                lab = f"s{i}.{p}"
                labels.append(lab)
                pairs.append((prev, lab))
                prev = lab
        return make_graph(labels, pairs)

    graphs = [fan_at(n) for n in range(levels + 1)]
    steps = []
    for n in range(levels):
        if n < 2:
            steps.append(make_morphism(graphs[n + 1], graphs[n], [(v, v) for v in graphs[n].labels]))
            continue
        L, L2 = 2 ** n, 2 ** (n + 1)
        pairs = [("0", "0"), ("x", "x")]

        def name(i, p):
            return "0" if p == 0 else f"s{i}.{p}"

        for c in range(L2 - 1):
            for j in range(1, L2):
                if c < 2 * (L - 1):
                    i = c // 2
                    t = j // 2
                    targets = [t] if j % 2 == 0 else [t, min(t + 1, L - 1)]
                    pairs += [(name(i, q), f"s{c}.{j}") for q in set(targets)]
                else:
                    targets = ["0", "x"] if j == 1 else ["x"]
                    pairs += [(q, f"s{c}.{j}") for q in targets]
        steps.append(make_morphism(graphs[n + 1], graphs[n], pairs))
    guar = [
        _g("never", "star-refining",
           "x and the root stay adjacent at every level, x lies over x alone and the root over the root alone"),
        _g("holds", "edge-witnessing", "each spoke map is edge-witnessing", start=2),
        _g("holds", "co-bijective", "each spoke map is co-bijective"),
        _g("holds", "surjective", "each spoke map is surjective"),
        _g("holds", "spoke-monotone", "spoke maps are monotone"),
        _g("holds", "end-preserving", "spoke maps send ends to ends"),
    ]
    return _seq(graphs, steps, "nasty_fan", {"levels": levels}, guar)


def lelek(levels: int) -> Sequence:
    """Claw-seeded fans whose spokes are truncated clique subdivisions.

    A spoke carries its vertices x_1 (the root) .. x_t and the length s of
    the full spoke it sits in.  It has s children; child j is the clique
    subdivision of x_1 .. x_u with u = min(j + 1, t), mapped by membership.
    Truncating one step later than u = j keeps at least two child ends over
    every end.
    """
    spokes = [("a", 2, 2), ("b", 2, 2), ("c", 2, 2)]  # (id, t, host length)

    def build(sp):
        labels, pairs = ["r"], []
        for sid, t, _ in sp:
            prev = "r"
            for p in range(2, t + 1):
                lab = f"{sid}.{p}"
                labels.append(lab)
                pairs.append((prev, lab))
                prev = lab
        return make_graph(labels, pairs)

    def pos(sid, p):
        return "r" if p == 1 else f"{sid}.{p}"

    graphs = [build(spokes)]
    steps = []
    for _ in range(levels):
        children = []
        pairs = [("r", "r")]
        for sid, t, s in spokes:
            for j in range(1, s + 1):
                u = min(j + 1, t)
                cid = f"{sid}{j}"
                children.append((cid, 2 * u - 1, 2 * s - 1))
                for p in range(2, 2 * u):
                    i = (p + 1) // 2
                    targets = [i] if p % 2 == 1 else [i, i + 1]
                    pairs += [(pos(sid, q), f"{cid}.{p}") for q in targets]
        spokes = children
        graphs.append(build(spokes))
        steps.append(make_morphism(graphs[-1], graphs[-2], pairs))
    guar = [
        _g("holds", "co-bijective", "membership restricted to subpaths through the root"),
        _g("holds", "surjective", "every kept vertex is a singleton clique of a child"),
        _g("holds", "spoke-monotone", "membership maps of paths are monotone"),
        _g("holds", "edge-witnessing", "every kept edge is a clique of the longest child"),
        _g("holds", "end-splitting", "children j = t - 1 .. s all end over x_t"),
        _g("holds", "end-dense", "x_i is over the end of child i - 1; the root needs one more level", stride=2),
        _g("holds", "star-refining", "two clique subdivisions shrink stars", stride=2),
        _g("holds", "branch-growth", "the longest child doubles the spoke"),
    ]
    return _seq(graphs, steps, "lelek", {"levels": levels}, guar)


# ---------------------------------------------------------------- modification examples

def modification_patterns(levels: int, variant: str = "sq") -> Sequence:
    """Two-vertex paths a_n - b_n with a over both children and b over one."""
    if variant not in ("sq", "dash"):
        raise GeneratorError("variant must be 'sq' or 'dash'")
    graphs = [path_graph([f"a{n}", f"b{n}"]) for n in range(levels + 1)]
    steps = []
    for n in range(levels):
        a, b, a1, b1 = f"a{n}", f"b{n}", f"a{n + 1}", f"b{n + 1}"
        pairs = [(a, a1), (a, b1), (b, b1)] if variant == "sq" else [(a, a1), (a, b1), (b, a1)]
        steps.append(make_morphism(graphs[n + 1], graphs[n], pairs))
    guar = [_g("holds", "surjective", "both vertices have preimages")]
    return _seq(graphs, steps, "modification_patterns", {"levels": levels, "variant": variant}, guar)


def modification_fail(levels: int) -> Sequence:
    """Two limit threads a, b, isolated c-threads branching off a at even
    levels, and connectors b_2n > d_2n+1 > a_2n+2."""
    def labels(n):
        out = [f"a{n}"] + ([f"d{n}"] if n % 2 else []) + [f"b{n}"]
        out += [f"c{2 * m}_{n}" for m in range((n + 1) // 2)]
        return out

    graphs = []
    for n in range(levels + 1):
        pairs = [(f"a{n}", f"b{n}")]
        if n % 2:
            pairs += [(f"a{n}", f"d{n}"), (f"d{n}", f"b{n}")]
        graphs.append(make_graph(labels(n), pairs))
    steps = []
    for n in range(levels):
        k = n + 1
        pairs = [(f"b{n}", f"b{k}")]
        for lab in labels(k):
            if lab.startswith("c"):
                start = int(lab[1:].split("_")[0])
                pairs.append((f"a{n}" if start == n else f"c{start}_{n}", lab))
        if n % 2 == 0:
            pairs += [(f"a{n}", f"a{k}"), (f"b{n}", f"d{k}")]
        else:
            pairs += [(f"a{n}", f"a{k}"), (f"d{n}", f"a{k}")]
        steps.append(make_morphism(graphs[k], graphs[n], pairs))
    guar = [_g("holds", "surjective", "every vertex continues a thread")]
    return _seq(graphs, steps, "modification_fail", {"levels": levels}, guar)


# ---------------------------------------------------------------- registry

GENERATORS: dict[str, Callable[..., Sequence]] = {
    "cantor_doubling": cantor_doubling,
    "arc_dyadic": arc_dyadic,
    "clique_iteration": clique_iteration,
    "edge_splitting_seq": edge_splitting_seq,
    "cycle_roots": cycle_roots,
    "cantor_fan": cantor_fan,
    "lelek": lelek,
    "nasty_fan": nasty_fan,
    "modification_patterns": modification_patterns,
    "modification_fail": modification_fail,
}

_INT_LISTS = {"alpha", "beta"}


def _coerce(name: str, value):
    if not isinstance(value, str):
        return value
    if name in _INT_LISTS:
        return [int(x) for x in value.split(",") if x.strip()]
    if name == "levels":
        return int(value)
    return value


def generate(name: str, params: dict | None = None) -> Sequence:
    params = dict(params or {})
    if name not in GENERATORS:
        raise GeneratorError(f"unknown generator {name!r}; choose from {', '.join(sorted(GENERATORS))}")
    params.setdefault("levels", 4)
    kwargs = {k: _coerce(k, v) for k, v in params.items()}
    if kwargs["levels"] < 0:
        raise GeneratorError("levels must be non-negative")
    try:
        return GENERATORS[name](**kwargs)
    except TypeError as exc:
        raise GeneratorError(f"bad parameters for {name}: {exc}") from None
