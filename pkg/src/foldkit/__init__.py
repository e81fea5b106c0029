"""Executable toric folded-symplectic geometry."""

__version__ = "0.1.0"
