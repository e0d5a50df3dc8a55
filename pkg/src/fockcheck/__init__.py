"""Truncated two-mode Fock-space numerics for checking closure and uncertainty identities."""

__version__ = "0.1.0"
