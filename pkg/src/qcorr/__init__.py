"""Quantum-correlation measures, frontier tracing and tomography for two-qubit states."""
__version__ = "0.1.0"
