"""Majorization constraints on mixing and measurement of quantum states."""

__version__ = "0.1.0"
