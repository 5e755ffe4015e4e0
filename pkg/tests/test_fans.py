import pytest

import oracle
from specgraph.categories import CATEGORIES
from specgraph.clique import membership
from specgraph.fans import (
    NotAFan,
    branch_analysis,
    branches,
    classify_fan_limit,
    fan_check,
    fan_structure,
    tree_of_spokes,
)
from specgraph.generators import generate
from specgraph.graph_core import fan_graph, make_graph, path_graph
from specgraph.relations import check, enumerate_morphisms, identity, make_morphism
from specgraph.sequences import Sequence, make_sequence

CLAW = make_graph(["0", "a", "b", "c"], [("0", "a"), ("0", "b"), ("0", "c")])


def claw_identities(levels=3):
    return make_sequence([CLAW] * (levels + 1), [identity(CLAW)] * levels)


def doubling(fan):
    """Every spoke of ``fan`` duplicated; the copies map back identically."""
    st = fan_structure(fan)
    labels, edges, pairs = [st.root], [], [(st.root, st.root)]
    for i, sp in enumerate(st.spokes):
        for copy in (0, 1):
            prev = st.root
            for v in sp[1:]:
                lab = f"{v}.{copy}"
                labels.append(lab)
                edges.append((prev, lab))
                pairs.append((v, lab))
                prev = lab
    dom = make_graph(labels, edges)
    return make_morphism(dom, fan, pairs)


def test_fan_structure():
    st = fan_structure(CLAW)
    assert st.root == "0" and st.lengths() == [2, 2, 2]
    nasty = generate("nasty_fan", {"levels": 3})
    assert sorted(fan_structure(nasty.graphs[2]).lengths()) == [2, 4, 4, 4]
    with pytest.raises(NotAFan):
        fan_structure(path_graph("abc"))


def test_spokes_partition_the_fan():
    for g in (CLAW, fan_graph([3, 1, 2, 2]), generate("cantor_fan", {"levels": 3}).graphs[3]):
        st = fan_structure(g)
        rest = [v for sp in st.spokes for v in sp[1:]]
        assert sorted(rest + [st.root]) == sorted(g.labels)
        assert all(sp[0] == st.root for sp in st.spokes)


def test_fan_check_examples():
    m = membership(CLAW)
    assert fan_check(m, "spoke-monotone") and fan_check(m, "end-preserving")
    assert fan_check(doubling(CLAW), "end-splitting")
    assert not fan_check(identity(CLAW), "end-dense")
    with pytest.raises(ValueError):
        fan_check(m, "wobbly")


def test_fan_predicates_agree_with_oracle():
    doms = [fan_graph([2, 1, 1]), fan_graph([1, 1, 1, 1]), fan_graph([3, 1, 1])]
    seen = 0
    for dom in doms:
        for m in enumerate_morphisms(dom, CLAW, ["co-bijective"]):
            R = oracle.pairs_of(m)
            d, c = oracle.from_graph(dom), oracle.from_graph(CLAW)
            assert fan_check(m, "spoke-monotone") == oracle.spoke_monotone(R, d, c, "0", "0")
            assert fan_check(m, "end-preserving") == oracle.end_preserving(R, d, c, "0", "0")
            ends_d, ends_c = oracle.fan_ends(d, "0"), oracle.fan_ends(c, "0")
            dense = all(any(h in oracle.image(R, e) for e in ends_d) for h in c.V)
            split = all(len({e for e in ends_d if h in oracle.image(R, e)}) >= 2 for h in ends_c)
            assert fan_check(m, "end-dense") == dense
            assert fan_check(m, "end-splitting") == split
            seen += 1
    assert seen > 100


def test_every_cod_spoke_has_a_locally_cobijective_end():
    L = CATEGORIES["L"]
    dom = fan_graph([2, 2, 1])
    for m in enumerate_morphisms(dom, CLAW, L.required, column_filter=L.column_filter(dom, CLAW),
                                 final_filter=L.is_morphism):
        cst = fan_structure(CLAW)
        for T in cst.spokes:
            end_t = T[-1]
            images = [{h for h, g in m.pairs() if g == e} for e in fan_structure(dom).ends]
            assert any(img == {end_t} for img in images)


def test_tree_of_spokes():
    cf = generate("cantor_fan", {"levels": 4})
    tree = tree_of_spokes(cf)
    for n in range(2, 5):
        assert len(tree.levels[n]) == 2 ** n
    for n in range(1, 4):
        for i in range(len(tree.levels[n])):
            assert len(tree.children(n, i)) == 2
    nasty = generate("nasty_fan", {"levels": 4})
    nt = tree_of_spokes(nasty)
    short = [i for i, e in enumerate(nt.levels[2]) if e == "x"][0]
    chain = [short]
    for n in range(2, 4):
        kids = [j for j in nt.children(n, chain[-1]) if nt.levels[n + 1][j] == "x"]
        assert len(kids) == 1
        chain.append(kids[0])
    t = tree_of_spokes(claw_identities())
    assert all(len(t.children(n, i)) == 1 for n in range(3) for i in range(3))
    assert "digraph" in t.to_dot()


def test_branches():
    cf = generate("cantor_fan", {"levels": 3})
    bs = branches(cf, 3)
    assert len(bs) == 8
    assert all(branch_analysis(cf, b).nondegenerate for b in bs)
    assert len(branches(claw_identities(), 3)) == 3


def test_branch_starting_late():
    # a two-spoke fan whose second spoke is collapsed to the root at the first step
    g0 = make_graph(["r", "a", "b"], [("r", "a"), ("r", "b")])
    g1 = make_graph(["r", "a", "b", "c"], [("r", "a"), ("r", "b"), ("r", "c")])
    st = make_morphism(g1, g0, [("r", "r"), ("a", "a"), ("b", "b"), ("r", "c")])
    s = make_sequence([g0, g1], [st], flags={"roots": ["r", "r"]})
    starts = sorted(b.start for b in branches(s, 1))
    assert starts == [0, 0, 1]


def test_branch_analysis_cantor_fan():
    cf = generate("cantor_fan", {"levels": 3})
    rep = branch_analysis(cf, branches(cf, 3)[0])
    mod = rep.modification
    assert isinstance(mod, Sequence)
    for st in mod.steps[:-1]:
        assert check(st, "monotone") and check(st, "co-bijective")
    assert rep.endpoint_thread is not None
    assert rep.to_json()["nondegenerate"]


def test_degenerate_branch_has_no_endpoint():
    g0 = make_graph(["r", "a", "b"], [("r", "a"), ("r", "b")])
    g1 = make_graph(["r", "a", "b", "c"], [("r", "a"), ("r", "b"), ("r", "c")])
    st = make_morphism(g1, g0, [("r", "r"), ("a", "a"), ("b", "b"), ("r", "c")])
    s = make_sequence([g0, g1], [st], flags={"roots": ["r", "r"]})
    late = next(b for b in branches(s, 1) if b.start == 1)
    rep = branch_analysis(s, late)
    assert rep.endpoint_thread is None


def test_end_thread_pattern_inside_a_fan():
    # the a/b two-track pattern on one spoke of a claw; its modification keeps the a-track
    levels = 4
    gs, steps = [], []
    for n in range(levels + 1):
        gs.append(make_graph(["0", f"a{n}", f"b{n}", "p", "q"],
                             [("0", f"a{n}"), (f"a{n}", f"b{n}"), ("0", "p"), ("0", "q")]))
    for n in range(levels):
        pairs = [("0", "0"), ("p", "p"), ("q", "q"), (f"a{n}", f"a{n + 1}"), (f"a{n}", f"b{n + 1}"), (f"b{n}", f"b{n + 1}")]
        steps.append(make_morphism(gs[n + 1], gs[n], pairs))
    s = make_sequence(gs, steps)
    b = next(b for b in branches(s, levels) if fan_structure(s.graphs[0]).spokes[b.spokes[0]][-1] == "b0")
    mod = branch_analysis(s, b).modification
    assert isinstance(mod, Sequence)
    assert [set(g.labels) - {"0"} for g in mod.graphs[:-1]] == [{f"a{n}"} for n in range(levels)]


def test_classify_fan_limits():
    assert classify_fan_limit(generate("cantor_fan", {}), category="X").kind == "CantorFanEvidence"
    assert classify_fan_limit(generate("lelek", {"levels": 3}), category="L").kind == "LelekEvidence"
    assert classify_fan_limit(generate("nasty_fan", {"levels": 4}), category="X").kind == "Negative"
    with pytest.raises(ValueError):
        classify_fan_limit(generate("cantor_fan", {}), category="A")
