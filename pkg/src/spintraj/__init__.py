"""Stochastic spin-wave trajectory simulator for monitored long-range spin lattices."""

__version__ = "0.1.0"
