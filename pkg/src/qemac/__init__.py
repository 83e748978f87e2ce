"""Erasure-tolerant sum computation over quantum multiple-access channels."""

__version__ = "0.1.0"
