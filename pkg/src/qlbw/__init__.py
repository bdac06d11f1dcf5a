"""Quantum lattice Boltzmann workbench: collisionless transport circuits on a statevector backend."""

__version__ = "0.1.0"
