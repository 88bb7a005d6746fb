"""Perfect proportional and rank-based allocations on bipartite instances."""

__version__ = "0.1.0"
