"""Simulation, exact computation and statistical checks for Hoppe trees."""

from .core import STATISTICS, HoppeTree, TreeParams, TreeStats, grow_tree, is_ancestor, make_stream, tree_stats

__version__ = "0.1.0"

__all__ = [
    "STATISTICS",
    "HoppeTree",
    "TreeParams",
    "TreeStats",
    "grow_tree",
    "is_ancestor",
    "make_stream",
    "tree_stats",
]
