"""Copula-based concentration measures for directed ownership networks."""

__version__ = "0.1.0"
