"""Spin-system simulation, pulse optimisation and dynamical decoupling toolkit."""

__version__ = "0.1.0"
