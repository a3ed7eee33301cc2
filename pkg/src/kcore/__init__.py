"""Shared-memory k-core decomposition by iterative estimate refinement."""

from .graph import EdgeListError, Graph, load_edge_list
from .kernel import compute_index, sequentialk_run
from .oracle import CorenessResult, peel_coreness, verify
from .report import RunReport

__all__ = [
    "CorenessResult",
    "EdgeListError",
    "Graph",
    "RunReport",
    "compute_index",
    "load_edge_list",
    "peel_coreness",
    "sequentialk_run",
    "verify",
]
