"""Pseudodifferential calculus on noncommutative tori, computed at desk scale."""

__version__ = "0.1.0"
