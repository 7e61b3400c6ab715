"""Deciding beta-eta equivalence of simply-typed lambda terms with sums and the empty type."""

__version__ = "0.1.0"
