"""Equilibrium constructions, certification and price-of-anarchy analysis for simultaneous item auctions."""

__version__ = "0.1.0"
