"""Operator knowledge navigator and training-effectiveness analytics."""

__version__ = "0.1.0"
