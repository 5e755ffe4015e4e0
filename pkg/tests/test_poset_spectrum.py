import itertools

import pytest

from specgraph.generators import generate
from specgraph.graph_core import GraphError
from specgraph.poset_spectrum import (
    PosetElement,
    enumerate_threads,
    is_cap,
    leq,
    minimal_selectors,
    poset_dot,
    spectrum_report,
    star_below,
    thread_upset,
    wedge,
)
from specgraph.relations import check


@pytest.fixture(scope="module")
def arc():
    return generate("arc_dyadic", {"levels": 4})


@pytest.fixture(scope="module")
def cantor():
    return generate("cantor_doubling", {"levels": 4})


@pytest.fixture(scope="module")
def sq():
    return generate("modification_patterns", {"levels": 5, "variant": "sq"})


def test_leq(arc):
    p = PosetElement(2, "e1")
    assert leq(arc, p, p)
    parent = [h for h, g in arc.steps[1].pairs() if g == "e1"]
    assert parent and all(leq(arc, p, (1, h)) for h in parent)
    assert not leq(arc, (2, "e0"), (2, "e2"))
    assert not leq(arc, (1, "e0"), (2, "e0"))


def test_wedge(arc):
    assert wedge(arc, (3, "e0"), (3, "e1")).holds
    v = wedge(arc, (3, "e0"), (3, "e3"))
    assert v.fails and v.witness["non_adjacent"] == ["e0", "e3"]
    s = generate("modification_patterns", {"levels": 3, "variant": "dash"})
    assert wedge(s, (3, "a3"), (3, "b3")).unknown or wedge(s, (3, "a3"), (3, "b3")).holds


def _brute_threads(s, depth):
    out = []
    for chain in itertools.product(*(s.graphs[n].labels for n in range(depth + 1))):
        if all(leq(s, (n + 1, chain[n + 1]), (n, chain[n])) for n in range(depth)):
            out.append(chain)
    return sorted(out)


def test_thread_counts(arc, cantor, sq):
    assert len(enumerate_threads(cantor, 3)) == 8
    for n in range(1, 6):
        assert len(enumerate_threads(sq, n)) == n + 2
    got = sorted(t.vertices for t in enumerate_threads(arc, 2))
    assert got == _brute_threads(arc, 2)
    with pytest.raises(GraphError):
        enumerate_threads(arc, 9)


def test_thread_upsets(cantor, sq):
    t = enumerate_threads(cantor, 3)[5]
    assert thread_upset(cantor, t) == {PosetElement(n, v) for n, v in enumerate(t.vertices)}
    b = next(t for t in enumerate_threads(sq, 5) if t.at(5) == "b5")
    a = next(t for t in enumerate_threads(sq, 5) if t.at(5) == "a5")
    up_b, up_a = thread_upset(sq, b), thread_upset(sq, a)
    assert {PosetElement(n, f"a{n}") for n in range(5)} <= up_b
    assert up_a == {PosetElement(n, f"a{n}") for n in range(6)}


def test_minimal_selectors(cantor, sq):
    sel = minimal_selectors(sq, 4)
    assert len(sel) == 1 and sel[0].vertices == tuple(f"a{n}" for n in range(5))
    for d in range(4):
        assert len(minimal_selectors(cantor, d)) == 2 ** d


def test_arc_selectors_are_pairwise_incomparable(arc):
    sel = minimal_selectors(arc, 3)
    ups = [thread_upset(arc, t, 3) for t in sel]
    assert len(sel) > 1
    for u, v in itertools.combinations(ups, 2):
        assert not (u <= v or v <= u)


def test_is_cap(arc):
    level = {(2, v) for v in arc.graphs[2].labels}
    assert is_cap(arc, level).holds
    two = level | {(3, v) for v in arc.graphs[3].labels}
    assert is_cap(arc, two).holds
    minus = level - {(2, "e0")}
    v = is_cap(arc, minus)
    assert not v.holds and v.witness["avoiding_thread"]


def test_star_below(arc):
    # level 2 star-refines level 0 through the two-step composite
    assert check(arc.composite(0, 2), "star-refining")
    for v in arc.graphs[2].labels:
        assert star_below(arc, (2, v), (0, "e0"), 2)
    assert not star_below(arc, (3, "e3"), (3, "e3"), 3)
    # a finer level for the star only makes star-below easier
    for v in arc.graphs[2].labels:
        for q in arc.graphs[1].labels:
            if star_below(arc, (2, v), (1, q), 2):
                assert star_below(arc, (2, v), (1, q), 3)
    with pytest.raises(GraphError):
        star_below(arc, (3, "e0"), (0, "e0"), 2)


def test_spectrum_reports():
    r = spectrum_report(generate("arc_dyadic", {}))
    assert r.connected.holds and r.hausdorff.holds and r.perfect.holds
    r = spectrum_report(generate("cantor_doubling", {}))
    assert r.connected.fails and r.connected.witness["level"] == 1
    assert r.hausdorff.holds and r.perfect.holds
    r = spectrum_report(generate("cycle_roots", {}))
    assert r.connected.holds and r.hausdorff.holds
    assert r.tree_like.unknown


def test_level_consolidation(arc):
    # every element has a successor, and whatever lies deep below it lies below a successor
    N = arc.N
    for n in range(N):
        for v in arc.graphs[n].labels:
            below = [g for h, g in arc.steps[n].pairs() if h == v]
            assert below
            deep = [x for x in arc.graphs[N].labels if leq(arc, (N, x), (n, v))]
            assert deep and all(any(leq(arc, (N, x), (n + 1, b)) for b in below) for x in deep)


def test_poset_dot(arc):
    dot = poset_dot(arc, 2)
    assert dot.startswith("digraph") and dot.count("rank=same") == 3
    assert dot.count("->") == int(arc.steps[0].rel.sum() + arc.steps[1].rel.sum())
