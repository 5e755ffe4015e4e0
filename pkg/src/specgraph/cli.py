"""Command line front door.

Exit codes: 0 success or Holds, 1 invalid input, 2 a verification failed or a
verdict is FailsOnPrefix, 3 a search budget or the horizon ran out (Unknown).
Results go to stdout as JSON; one-line summaries go to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

log = logging.getLogger("specgraph")

EXIT_OK, EXIT_INPUT, EXIT_VERIFY, EXIT_UNKNOWN = 0, 1, 2, 3


def _cap_threads() -> None:
    # must run before numpy is imported
    n = os.environ.get("SPECGRAPH_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)


def _params(items: list[str]) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ValueError(f"--param expects k=v, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _emit(data, out: str | None) -> None:
    text = json.dumps(data, indent=1, ensure_ascii=False, default=str) + "\n"
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_seq(path: str):
    from .sequences import Sequence

    return Sequence.from_json(_read_json(path))


def _code(status: str) -> int:
    return {"Holds": EXIT_OK, "FailsOnPrefix": EXIT_VERIFY}.get(status, EXIT_UNKNOWN)


# ---------------------------------------------------------------- subcommands

def cmd_generate(a) -> int:
    from .generators import generate

    params = _params(a.param)
    if a.levels is not None:
        params["levels"] = a.levels
    s = generate(a.name, params)
    _emit(s.to_json(), a.out)
    print(f"{a.name}: sizes {[len(g) for g in s.graphs]}", file=sys.stderr)
    return EXIT_OK


def cmd_check(a) -> int:
    from .sequences import has_subsequence_in, is_edge_faithful

    s = _load_seq(a.seq)
    if a.property.replace("_", "-").lower() == "edge-faithful":
        v = is_edge_faithful(s, a.horizon)
    else:
        v = has_subsequence_in(s, a.property, a.horizon)
    _emit(v.to_json(), a.out)
    print(f"{a.property} subsequence at horizon {v.horizon}: {v.status}", file=sys.stderr)
    return _code(v.status)


def cmd_classify(a) -> int:
    from .categories import fraisse_check, lax_fraisse_check

    s = _load_seq(a.seq)
    lax = lax_fraisse_check(a.category, s, a.horizon)
    out = {"category": a.category.upper(), "lax": lax.to_json()}
    lines = [lax.note]
    if a.category.upper() != "C":
        exact = fraisse_check(a.category, s, a.horizon)
        out["fraisse"] = exact.to_json()
        lines.append(exact.note)
    _emit(out, a.out)
    for line in lines:
        print(line, file=sys.stderr)
    return _code(lax.status)


def cmd_amalgamate(a) -> int:
    from .categories import amalgamate
    from .relations import Morphism

    f = Morphism.from_json(_read_json(a.f))
    g = Morphism.from_json(_read_json(a.g))
    J, fj, gj = amalgamate(a.category, f, g)
    _emit({"category": a.category.upper(), "object": J.to_json(), "fj": fj.to_json(), "gj": gj.to_json()}, a.out)
    print(f"amalgamated in {a.category.upper()}: |J| = {len(J)}", file=sys.stderr)
    return EXIT_OK


def cmd_fraisse(a) -> int:
    from .categories import fraisse_prefix

    s = fraisse_prefix(a.category, a.steps, seed=a.seed, size_bound=a.size_bound,
                       requests_per_level=a.requests)
    _emit(s.to_json(), a.out)
    if a.log:
        _emit([r.to_json() for r in s.witness_log], a.log)
    print(f"Fraïssé prefix in {a.category.upper()} (seed {a.seed}): sizes {[len(g) for g in s.graphs]}, "
          f"{len(s.witness_log)} absorbed requests", file=sys.stderr)
    return EXIT_OK


def _fan_limit(s, horizon):
    from .fans import classify_fan_limit
    from .graph_core import GraphError, classify

    first = s.flags.get("fan_from", 0)
    roots = s.flags.get("roots")
    if not all(roots or classify(g).fan for g in s.graphs[first:]):
        return None
    for cat in ("X", "L"):
        try:
            return classify_fan_limit(s, horizon, cat)
        except GraphError:
            continue
    return None


def cmd_spectrum(a) -> int:
    from .poset_spectrum import spectrum_report

    s = _load_seq(a.seq)
    rep = spectrum_report(s, a.horizon)
    data = rep.to_json()
    fan = _fan_limit(s, a.horizon)
    if fan is not None:
        data["fanLimit"] = fan.to_json()
    _emit(data, a.report)
    summary = ", ".join(f"{k}={v['status']}" for k, v in data.items() if isinstance(v, dict) and "status" in v)
    if fan is not None:
        summary += f", fan={fan.kind}"
    print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_export(a) -> int:
    from .poset_spectrum import poset_dot

    s = _load_seq(a.seq)
    if not (a.dot or a.json):
        raise ValueError("export needs --dot DIR and/or --json FILE")
    if a.json:
        Path(a.json).write_text(s.dumps() + "\n", encoding="utf-8")
    if a.dot:
        d = Path(a.dot)
        d.mkdir(parents=True, exist_ok=True)
        width = len(str(s.N))
        for n, g in enumerate(s.graphs):
            (d / f"level_{n:0{width}d}.dot").write_text(g.to_dot(f"G{n}"), encoding="utf-8")
        if a.poset:
            (d / "poset.dot").write_text(poset_dot(s), encoding="utf-8")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specgraph", description="Inverse sequences of finite graphs.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    cats = ["D", "A", "P", "X", "L", "C"]

    g = sub.add_parser("generate", help="build a named sequence prefix")
    g.add_argument("name")
    g.add_argument("--levels", type=int)
    g.add_argument("--param", action="append", default=[], metavar="K=V")
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("check", help="look for a subsequence in a property ideal")
    c.add_argument("seq")
    c.add_argument("--property", required=True)
    c.add_argument("--horizon", type=int)
    c.add_argument("--out")
    c.set_defaults(func=cmd_check)

    k = sub.add_parser("classify", help="(lax-)Fraïssé verdicts in a category")
    k.add_argument("seq")
    k.add_argument("--category", required=True, type=str.upper, choices=cats)
    k.add_argument("--horizon", type=int)
    k.add_argument("--out")
    k.set_defaults(func=cmd_classify)

    m = sub.add_parser("amalgamate", help="amalgamate two morphisms with a common codomain")
    m.add_argument("--category", required=True, type=str.upper, choices=cats)
    m.add_argument("f")
    m.add_argument("g")
    m.add_argument("--out")
    m.set_defaults(func=cmd_amalgamate)

    f = sub.add_parser("fraisse", help="build a Fraïssé prefix by dovetailing")
    f.add_argument("--category", required=True, type=str.upper, choices=cats)
    f.add_argument("--steps", type=int, required=True)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--size-bound", type=int)
    f.add_argument("--requests", type=int, default=1, help="absorption requests drawn per level")
    f.add_argument("--out")
    f.add_argument("--log", help="write the absorption log here")
    f.set_defaults(func=cmd_fraisse)

    s = sub.add_parser("spectrum", help="topological evidence about the limit")
    s.add_argument("seq")
    s.add_argument("--horizon", type=int)
    s.add_argument("--report")
    s.set_defaults(func=cmd_spectrum)

    e = sub.add_parser("export", help="DOT per level, optional poset diagram, or canonical JSON")
    e.add_argument("seq")
    e.add_argument("--dot", metavar="DIR")
    e.add_argument("--poset", action="store_true")
    e.add_argument("--json", metavar="FILE")
    e.set_defaults(func=cmd_export)
    return p


def main(argv: list[str] | None = None) -> int:
    _cap_threads()
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    from .categories import AmalgamationError
    from .graph_core import GraphError

    try:
        return a.func(a)
    except AmalgamationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (GraphError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
