"""Numerical composition of privacy curves through privacy loss random variables."""

__version__ = "0.1.0"
