"""Noncommutative Lp spaces, finite quantum groups and quantum channel entropies."""
__version__ = "0.1.0"
