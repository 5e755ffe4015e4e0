"""Inverse sequences of finite graphs: relations, limits and Fraïssé theory at finite depth."""
from .graph_core import Graph, GraphError, classify, cycle_graph, discrete_graph, fan_graph, make_graph, path_graph
from .relations import Morphism, MorphProperty, check, compose, enumerate_morphisms, identity, make_morphism
from .sequences import Sequence, Verdict, has_subsequence_in, make_sequence
from .categories import (
    CATEGORIES,
    amalgamate,
    cofinality_probe,
    fraisse_check,
    fraisse_prefix,
    get_category,
    intertwine,
    lax_fraisse_check,
)
from .generators import generate

__version__ = "0.1.0"
