"""Planar and hyperbolic lattices as combinatorial maps, matching
graphs, site/bond percolation duality, and Monte Carlo threshold
estimation."""

__version__ = "0.1.0"
