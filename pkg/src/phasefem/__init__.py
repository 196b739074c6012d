"""Coupled phase-field multiphysics finite elements."""

__version__ = "0.1.0"
