"""Exact combinatorics of cross-intersecting families of uniform set partitions."""

__version__ = "0.1.0"
