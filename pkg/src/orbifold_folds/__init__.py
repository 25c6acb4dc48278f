"""Folding calculus for morphisms of graphs of groups and decorated morphisms over small 2-orbifolds."""

from .fpc_words import FpcGroup, FpcHom, IDENTITY
from .graph_core import Graph
from .graph_of_groups import APath, GraphOfGroups, TreeSplitting
from .gg_morphism import GGMorphism, is_folded, make_morphism
from .orbifolds import OrbifoldSpec, presentation

__all__ = ["APath", "FpcGroup", "FpcHom", "GGMorphism", "Graph", "GraphOfGroups", "IDENTITY",
           "OrbifoldSpec", "TreeSplitting", "is_folded", "make_morphism", "presentation"]
__version__ = "0.1.0"
