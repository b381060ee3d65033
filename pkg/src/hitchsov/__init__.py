"""Numerical Hitchin systems on hyperelliptic curves via separation of variables."""

__version__ = "0.1.0"
