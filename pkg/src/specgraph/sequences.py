"""Finite prefixes of graph sequences and what can be decided about them.

A prefix stores graphs G_0..G_N and one-step morphisms ``steps[n]`` from
G_{n+1} to G_n.  Claims quantified over all levels come back as a Verdict;
generators may attach guarantees that speak for the levels beyond the prefix.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Callable, Iterable

import numpy as np

from .graph_core import Graph, GraphError, bits, mask_of
from .relations import (
    Morphism,
    MorphProperty,
    check,
    compose,
    identity,
    restrict_idx,
)

HOLDS, FAILS, UNKNOWN = "Holds", "FailsOnPrefix", "Unknown"


class SequenceError(GraphError):
    pass


@dataclass
class Verdict:
    status: str
    witness: Any = None
    horizon: int | None = None
    note: str = ""

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    @property
    def fails(self) -> bool:
        return self.status == FAILS

    @property
    def unknown(self) -> bool:
        return self.status == UNKNOWN

    def to_json(self) -> dict:
        return {"status": self.status, "witness": _jsonable(self.witness), "horizon": self.horizon, "note": self.note}

    def __str__(self) -> str:
        tail = f" ({self.note})" if self.note else ""
        return f"{self.status} at horizon {self.horizon}{tail}"


def Holds(witness=None, horizon=None, note="") -> Verdict:
    return Verdict(HOLDS, witness, horizon, note)


def FailsOnPrefix(witness=None, horizon=None, note="") -> Verdict:
    return Verdict(FAILS, witness, horizon, note)


def Unknown(horizon=None, witness=None, note="") -> Verdict:
    return Verdict(UNKNOWN, witness, horizon, note)


def combine(parts: dict[str, Verdict], horizon=None) -> Verdict:
    """Pessimistic conjunction: any failure fails, else any unknown is unknown."""
    wit = {k: v.to_json() for k, v in parts.items()}
    for status in (FAILS, UNKNOWN):
        bad = [k for k, v in parts.items() if v.status == status]
        if bad:
            return Verdict(status, wit, horizon, "; ".join(f"{k}: {status}" for k in bad))
    return Holds(wit, horizon)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = [_jsonable(v) for v in x]
        return sorted(items, key=repr) if isinstance(x, (set, frozenset)) else items
    if isinstance(x, Verdict):
        return x.to_json()
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if hasattr(x, "to_json"):
        return x.to_json()
    return x


@dataclass(frozen=True)
class Thread:
    """One vertex label per level 0..depth, each related to the next."""

    vertices: tuple[str, ...]

    @property
    def depth(self) -> int:
        return len(self.vertices) - 1

    def at(self, n: int) -> str:
        return self.vertices[n]


class Sequence:
    def __init__(self, graphs: list[Graph], steps: list[Morphism], provenance=None, guarantees=None, flags=None):
        self.graphs = list(graphs)
        self.steps = list(steps)
        self.provenance = dict(provenance or {})
        self.guarantees = list(guarantees or [])
        self.flags = dict(flags or {})
        self._comp: dict[tuple[int, int], Morphism] = {}

    @property
    def N(self) -> int:
        return len(self.graphs) - 1

    def __len__(self) -> int:
        return len(self.graphs)

    def __repr__(self) -> str:
        sizes = ",".join(str(len(g)) for g in self.graphs)
        return f"Sequence(levels={len(self)}, sizes=[{sizes}])"

    def composite(self, m: int, n: int) -> Morphism:
        if not 0 <= m <= n <= self.N:
            raise SequenceError(f"composite({m}, {n}) outside prefix 0..{self.N}")
        key = (m, n)
        if key not in self._comp:
            if m == n:
                self._comp[key] = identity(self.graphs[m])
            elif n == m + 1:
                self._comp[key] = self.steps[m]
            else:
                self._comp[key] = compose(self.composite(m, n - 1), self.steps[n - 1])
        return self._comp[key]

    def guarantee(self, prop: str, kind: str) -> list[dict]:
        return [g for g in self.guarantees if g.get("property") == prop and g.get("kind") == kind]

    def to_json(self) -> dict:
        return {
            "graphs": [g.to_json() for g in self.graphs],
            "steps": [m.to_json() for m in self.steps],
            "provenance": self.provenance,
            "guarantees": self.guarantees,
            "flags": self.flags,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, ensure_ascii=False)

    @classmethod
    def from_json(cls, data: dict) -> "Sequence":
        graphs = [Graph.from_json(g) for g in data["graphs"]]
        steps = []
        for n, st in enumerate(data["steps"]):
            rel = np.zeros((len(graphs[n]), len(graphs[n + 1])), dtype=bool)
            for h, g in st["pairs"]:
                rel[graphs[n].idx(h), graphs[n + 1].idx(g)] = True
            steps.append(Morphism(graphs[n + 1], graphs[n], rel))
        return make_sequence(graphs, steps, data.get("provenance"), data.get("guarantees"), data.get("flags"))


@dataclass
class LaxSequence:
    graphs: list[Graph]
    rels: dict[tuple[int, int], Morphism]
    witness: Any = None

    def to_json(self) -> dict:
        return {"graphs": [g.to_json() for g in self.graphs], "witness": _jsonable(self.witness)}


@dataclass
class NoModification:
    witness: dict
    note: str = ""

    def __bool__(self) -> bool:
        return False


def make_sequence(graphs, steps, provenance=None, guarantees=None, flags=None) -> Sequence:
    graphs = list(graphs)
    steps = list(steps)
    if not graphs:
        raise SequenceError("a sequence needs at least one graph")
    if len(steps) != len(graphs) - 1:
        raise SequenceError("need exactly one step per consecutive pair of levels")
    for n, st in enumerate(steps):
        if st.cod != graphs[n] or st.dom != graphs[n + 1]:
            raise SequenceError(f"step {n} does not go from level {n + 1} to level {n}")
        if st.violation() is not None:
            raise SequenceError(f"step {n} is not edge-preserving")
        if not check(st, MorphProperty.CoSurjective):
            raise SequenceError(f"step {n} is not co-surjective")
    return Sequence(graphs, steps, provenance, guarantees, flags)


def subsequence(s: Sequence, phi: list[int]) -> Sequence:
    phi = list(phi)
    if not phi or any(b <= a for a, b in zip(phi, phi[1:])) or phi[0] < 0 or phi[-1] > s.N:
        raise SequenceError("phi must be strictly increasing inside the prefix")
    graphs = [s.graphs[k] for k in phi]
    steps = [s.composite(a, b) for a, b in zip(phi, phi[1:])]
    prov = dict(s.provenance, subsequence=phi)
    flags = dict(s.flags)
    if "roots" in flags:
        flags["roots"] = [flags["roots"][k] for k in phi]
    return Sequence(graphs, steps, prov, [], flags)


# ---------------------------------------------------------------- ideals

IDEAL_PROPERTIES = (
    "anti-injective",
    "strictly-anti-injective",
    "star-refining",
    "edge-witnessing",
    "end-dense",
    "end-splitting",
)


def property_checker(prop: str) -> Callable[[Morphism], bool]:
    key = str(getattr(prop, "value", prop)).lower().replace("_", "-")
    if key in ("end-dense", "end-splitting", "spoke-monotone", "end-preserving"):
        from .fans import fan_check

        return lambda m: fan_check(m, key)
    p = MorphProperty.parse(key)
    return lambda m: check(m, p)


def _key(prop) -> str:
    return str(getattr(prop, "value", prop)).lower().replace("_", "-")


def _horizon(s: Sequence, horizon: int | None) -> int:
    return s.N if horizon is None else min(horizon, s.N)


def has_subsequence_in(s: Sequence, ideal, horizon: int | None = None) -> Verdict:
    """For every m below the horizon look for n <= horizon with composite(m, n) in the ideal."""
    key = _key(ideal)
    if key not in IDEAL_PROPERTIES:
        raise ValueError(f"{key} is not a registered ideal")
    if key.startswith("end-"):
        from .fans import step_fan_check

        def ok_at(a, b):
            return step_fan_check(s, a, b, key)
    else:
        ok = property_checker(key)

        def ok_at(a, b):
            return ok(s.composite(a, b))
    H = _horizon(s, horizon)
    witness: dict[int, Any] = {}
    missing = []
    for m in range(H):
        found = None
        for n in range(m + 1, H + 1):
            if ok_at(m, n):
                found = n
                break
        if found is None:
            missing.append(m)
        else:
            witness[m] = found
    if not missing:
        return Holds(witness, H, f"{key} subsequence witnesses m -> n")
    never = [g for g in s.guarantee(key, "never") if g.get("from_level", 0) <= missing[0]]
    if never:
        return FailsOnPrefix(
            {"level": missing[0], "guarantee": never[0], "certificate": _certificate(s, key, missing[0], H)},
            H,
            f"no composite out of level {missing[0]} is {key}, and the generator excludes later ones",
        )
    backed = s.guarantee(key, "holds")
    if backed and all(any(g.get("from_level", 0) <= m for g in backed) for m in missing):
        for m in missing:
            g = min(backed, key=lambda g: g.get("stride", 1))
            witness[m] = {"guaranteed": m + g.get("stride", 1)}
        return Holds(witness, H, "some witnesses lie past the prefix and rest on generator guarantees")
    return Unknown(H, {"levels_without_witness": missing, "found": witness})


def _certificate(s: Sequence, key: str, m: int, H: int) -> dict:
    """Per-level evidence that composites out of level m miss the property."""
    cert: dict[str, Any] = {}
    if key == "strictly-anti-injective":
        for n in range(m + 1, H + 1):
            c = s.composite(m, n)
            single = c.rel.sum(axis=0) == 1
            sizes = c.rel[:, single].sum(axis=1)
            h = int(np.argmin(sizes))
            cert[str(n)] = {"vertex": c.cod.labels[h], "singleton_strict_preimage_size": int(sizes[h])}
    else:
        for n in range(m + 1, H + 1):
            cert[str(n)] = False
    return cert


def is_edge_faithful(s: Sequence, horizon: int | None = None) -> Verdict:
    H = _horizon(s, horizon)
    ep = Holds(None, H, "every stored step is edge-preserving")
    bad = [n for n in range(H) if not check(s.steps[n], MorphProperty.EdgeSurjective)]
    if bad:
        es = FailsOnPrefix({"step": bad[0]}, H, f"step {bad[0]} is not edge-surjective")
    else:
        es = Holds(None, H)
    ew = has_subsequence_in(s, "edge-witnessing", H)
    return combine({"edge-preserving": ep, "edge-surjective": es, "edge-witnessing subsequence": ew}, H)


# ---------------------------------------------------------------- restrictions

def _restricted(s: Sequence, sets: list[list[int]], m: int, n: int) -> Morphism:
    return restrict_idx(s.composite(m, n), sets[n], sets[m])


def upper_restriction(s: Sequence, subsets) -> Sequence | LaxSequence:
    """Restrict every level to the given vertices; a Sequence if coherent, else a LaxSequence."""
    sets = [sorted(s.graphs[n].idx(v) for v in sub) for n, sub in enumerate(subsets)]
    if len(sets) != len(s):
        raise SequenceError("one subset per level is required")
    if any(not x for x in sets):
        raise SequenceError("restriction subsets must be non-empty")
    steps = [_restricted(s, sets, n, n + 1) for n in range(s.N)]
    graphs = [s.graphs[n].induced(sets[n]) for n in range(len(s))]
    rels = {}
    witness = None
    for m in range(len(s)):
        chain = identity(graphs[m])
        for n in range(m + 1, len(s)):
            chain = compose(chain, steps[n - 1])
            direct = _restricted(s, sets, m, n)
            rels[(m, n)] = direct
            if witness is None and not np.array_equal(chain.rel, direct.rel):
                h, g = (int(x) for x in np.argwhere(direct.rel & ~chain.rel)[0])
                witness = {"from": m, "to": n, "pair": [graphs[m].labels[h], graphs[n].labels[g]]}
    if witness is None:
        for n, st in enumerate(steps):
            if not check(st, MorphProperty.CoSurjective):
                g = int(np.flatnonzero(~st.rel.any(axis=0))[0])
                witness = {"step": n, "unrelated": graphs[n + 1].labels[g]}
                break
    if witness is not None:
        return LaxSequence(graphs, rels, witness)
    return Sequence(graphs, steps, dict(s.provenance, restriction=True), [], dict(s.flags))


def surjective_core(s: Sequence) -> Sequence:
    """Keep at level n only the image of the last stored level."""
    sets = []
    for n in range(len(s)):
        c = s.composite(n, s.N)
        sets.append(np.flatnonzero(c.rel.any(axis=1)).tolist())
    removed = sum(len(s.graphs[n]) - len(sets[n]) for n in range(len(s)))
    if removed == 0:
        return s
    out = upper_restriction(s, [[s.graphs[n].labels[i] for i in sets[n]] for n in range(len(s))])
    assert isinstance(out, Sequence), "the image restriction is always coherent"
    stable = bool(s.guarantee("surjective", "holds"))
    out.flags["horizon_approximate"] = not stable
    out.flags["removed"] = removed
    return out


def trace(s: Sequence, threads: Iterable, n: int) -> set[str]:
    """Level-n vertices lying above some thread, read off its deepest stored vertex."""
    out: set[str] = set()
    for t in threads:
        verts = t.vertices if isinstance(t, Thread) else tuple(t)
        d = len(verts) - 1
        if d < n:
            raise SequenceError("thread is shorter than the requested level")
        c = s.composite(n, d)
        g = s.graphs[d].idx(verts[d])
        out.update(c.cod.labels[h] for h in np.flatnonzero(c.rel[:, g]))
    return out


# ---------------------------------------------------------------- dense subsets

def _dense(s: Sequence, m: int, hmask: int, cache: dict) -> int | None:
    """Least k >= m with the preimage of H under composite(m, k) equal to G_k."""
    key = (m, hmask)
    if key in cache:
        return cache[key]
    idx = bits(hmask)
    ans = None
    for k in range(m, s.N + 1):
        c = s.composite(m, k)
        if c.rel[idx].any(axis=0).all():
            ans = k
            break
    cache[key] = ans
    return ans


def minimal_dense(s: Sequence, m: int, allowed: list[int], cache: dict, max_combos: int = 200_000):
    """Minimum-size dense subset of ``allowed`` at level m, least index tuple first.

    Returns (indices, exact) or None when nothing inside ``allowed`` is dense
    at the horizon.
    """
    full = mask_of(allowed)
    if _dense(s, m, full, cache) is None:
        return None
    forced = [v for v in allowed if _dense(s, m, full & ~(1 << v), cache) is None]
    optional = [v for v in allowed if v not in forced]
    fmask = mask_of(forced)
    tried = 0
    for r in range(len(optional) + 1):
        for combo in combinations(optional, r):
            tried += 1
            if tried > max_combos:
                return _greedy_dense(s, m, allowed, cache), False
            cm = fmask | mask_of(combo)
            if _dense(s, m, cm, cache) is not None:
                return sorted(forced + list(combo)), True
    raise AssertionError("the full allowed set is dense")


def _greedy_dense(s, m, allowed, cache):
    cur = mask_of(allowed)
    for v in sorted(allowed, reverse=True):
        if _dense(s, m, cur & ~(1 << v), cache) is not None:
            cur &= ~(1 << v)
    return bits(cur)


def cobijective_modification(s: Sequence) -> Sequence | NoModification:
    """Minimal dense co-surjective restriction, kept only if it is a genuine sequence."""
    for n, st in enumerate(s.steps):
        if not check(st, MorphProperty.Surjective):
            raise SequenceError(f"step {n} is not surjective")
    cache: dict = {}
    sets: list[list[int]] = []
    approx_levels = []
    for m in range(len(s)):
        if m == 0:
            allowed = list(range(len(s.graphs[0])))
        else:
            prev = sets[-1]
            allowed = np.flatnonzero(s.steps[m - 1].rel[prev].any(axis=0)).tolist()
        picked = minimal_dense(s, m, allowed, cache)
        if picked is None:
            # nothing inside the allowed set is dense at the horizon; keep it whole
            picked = (allowed, False)
        if not picked[1]:
            approx_levels.append(m)
        sets.append(picked[0])
    if s.N > 0 and s.N not in approx_levels:
        # density at the last stored level can only be judged against itself
        approx_levels.append(s.N)
    graphs = [s.graphs[n].induced(sets[n]) for n in range(len(s))]
    steps = [_restricted(s, sets, n, n + 1) for n in range(s.N)]
    for m in range(len(s)):
        chain = identity(graphs[m])
        for k in range(m + 1, len(s)):
            chain = compose(chain, steps[k - 1])
            direct = _restricted(s, sets, m, k)
            if not np.array_equal(chain.rel, direct.rel):
                h, g = (int(x) for x in np.argwhere(direct.rel ^ chain.rel)[0])
                return NoModification(
                    {
                        "from": m,
                        "to": k,
                        "pair": [graphs[m].labels[h], graphs[k].labels[g]],
                        "kept": [[g_.labels[i] for i in range(len(g_))] for g_ in graphs],
                    },
                    "the minimal dense restriction is only a lax-sequence",
                )
    flags = dict(s.flags, modification=True)
    if approx_levels:
        flags["horizon_approximate"] = approx_levels
    return Sequence(graphs, steps, dict(s.provenance, modification=True), [], flags)
