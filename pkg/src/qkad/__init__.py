"""Quantum-kernel one-class SVM anomaly detection for acoustic time series."""

__version__ = "0.1.0"
