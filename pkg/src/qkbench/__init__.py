"""Quantum-kernel SVM benchmarking on tabular data, simulated on statevectors."""

__version__ = "0.1.0"
