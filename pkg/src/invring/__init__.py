"""Exact computations in the ring of subgraph-counting graph invariants."""

from .graph_core import (
    CanonicalForm,
    Graph,
    canonical_form,
    complement_expand,
    enumerate_graphs,
    subgraph_count,
)

__version__ = "0.1.0"
