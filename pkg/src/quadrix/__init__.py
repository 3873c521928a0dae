"""Counting rational points on quadrics inside shrinking adelic
neighbourhoods: exact enumeration, twisted exponential sums, local
densities, and circle-method main terms."""

__version__ = "0.1.0"
