"""Numerics for elliptic hypergeometric series and the elliptic beta integral."""

__version__ = "0.1.0"
