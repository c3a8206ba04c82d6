"""Exact correlation-matrix semantics and erase propagation for masked
Boolean gadgets."""

__version__ = "0.1.0"
